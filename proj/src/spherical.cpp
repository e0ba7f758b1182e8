#include "bldg/spherical.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "bldg/common.hpp"

namespace bldg::sph {

namespace {

constexpr std::uint64_t kBuildCap = 20'000'000;

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  // both sorted
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Chambers of a graded poset given by levels of subspaces (level g holds the
// grade-g vertices, dimension g+1) with cover relations computed by lifting
// abstract hyperplanes through each member's basis.
Complex from_levels(const std::vector<std::vector<gfq::Subspace>>& levels,
                    unsigned q) {
  Complex C;
  std::map<std::string, int> index;
  std::vector<int> level_start;
  for (const auto& lvl : levels) {
    level_start.push_back(static_cast<int>(C.labels.size()));
    for (const auto& U : lvl) {
      std::string key = U.encode();
      if (!index.emplace(key, static_cast<int>(C.labels.size())).second)
        throw DomainError("duplicate vertex in building construction");
      C.labels.push_back(std::move(key));
      if (C.labels.size() > kBuildCap)
        throw EnumerationTooLarge("building has too many vertices");
    }
  }
  int m = static_cast<int>(levels.size());
  if (m == 0) return C;

  // children[v] = indices of grade g-1 vertices covered by v (grade g >= 1)
  std::vector<std::vector<int>> children(C.labels.size());
  for (int g = 1; g < m; ++g) {
    auto hyper = gfq::enumerate_subspaces(g + 1, g, q);
    for (size_t wi = 0; wi < levels[static_cast<size_t>(g)].size(); ++wi) {
      const gfq::Subspace& W = levels[static_cast<size_t>(g)][wi];
      int v = level_start[static_cast<size_t>(g)] + static_cast<int>(wi);
      for (const auto& H : hyper) {
        gfq::Subspace sub = gfq::Subspace::from_vectors(
            gfq::mat_mul(H.basis, W.basis));
        auto it = index.find(sub.encode());
        if (it == index.end())
          throw DomainError("level set is not closed under subspaces");
        children[static_cast<size_t>(v)].push_back(it->second);
      }
      std::sort(children[static_cast<size_t>(v)].begin(),
                children[static_cast<size_t>(v)].end());
    }
  }

  // every root-to-bottom path through the cover relation is a chamber
  std::vector<int> path;
  std::vector<std::vector<int>> facets;
  auto walk = [&](auto&& self, int v, int g) -> void {
    path.push_back(v);
    if (g == 0) {
      std::vector<int> f(path.rbegin(), path.rend());
      facets.push_back(std::move(f));
      if (facets.size() > kBuildCap)
        throw EnumerationTooLarge("building has too many chambers");
    } else {
      for (int c : children[static_cast<size_t>(v)]) self(self, c, g - 1);
    }
    path.pop_back();
  };
  for (size_t wi = 0; wi < levels[static_cast<size_t>(m - 1)].size(); ++wi)
    walk(walk, level_start[static_cast<size_t>(m - 1)] + static_cast<int>(wi),
         m - 1);

  std::sort(facets.begin(), facets.end());
  C.facets = std::move(facets);
  return C;
}

}  // namespace

Complex make_complex(std::vector<std::string> labels,
                     std::vector<std::vector<int>> facets) {
  Complex C;
  C.labels = std::move(labels);
  C.facets = std::move(facets);
  {
    auto sorted = C.labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DomainError("vertex labels must be distinct");
  }
  std::vector<char> seen(C.labels.size(), 0);
  for (auto& f : C.facets) {
    std::sort(f.begin(), f.end());
    if (f.empty()) throw DomainError("empty facet");
    if (std::adjacent_find(f.begin(), f.end()) != f.end())
      throw DomainError("facet repeats a vertex");
    for (int v : f) {
      if (v < 0 || v >= C.vertex_count())
        throw DomainError("facet references a missing vertex");
      seen[static_cast<size_t>(v)] = 1;
    }
  }
  for (size_t v = 0; v < seen.size(); ++v)
    if (!seen[v]) throw DomainError("vertex lies on no facet");
  std::sort(C.facets.begin(), C.facets.end());
  if (std::adjacent_find(C.facets.begin(), C.facets.end()) != C.facets.end())
    throw DomainError("duplicate facet");
  // maximality; sizes collapse most of the quadratic work
  for (const auto& a : C.facets)
    for (const auto& b : C.facets)
      if (a.size() < b.size() && is_subset(a, b))
        throw DomainError("facet contained in another facet");
  return C;
}

Complex build_A_building(int m, unsigned q) {
  if (m < 0) throw DomainError("building rank must be nonnegative");
  gfq::FieldTable::get(q);
  if (m == 0) return Complex{};
  if (gfq::complete_flag_count(m + 1, q) > kBuildCap)
    throw EnumerationTooLarge("flag count exceeds the construction cap");
  std::vector<std::vector<gfq::Subspace>> levels;
  for (int d = 1; d <= m; ++d)
    levels.push_back(gfq::enumerate_subspaces(m + 1, d, q));
  return from_levels(levels, q);
}

Complex build_C_building(int m, unsigned q) {
  if (m < 1) throw DomainError("symplectic building rank must be positive");
  gfq::GramForm J = gfq::GramForm::standard_symplectic(m, q);
  std::uint64_t count = 1;
  for (int j = 1; j <= m; ++j)
    count = checked_mul(count, (upow(q, 2 * static_cast<unsigned>(j)) - 1) /
                                   (q - 1));
  if (count > kBuildCap)
    throw EnumerationTooLarge("flag count exceeds the construction cap");
  std::vector<std::vector<gfq::Subspace>> levels;
  for (int d = 1; d <= m; ++d) {
    std::vector<gfq::Subspace> lvl;
    for (auto& U : gfq::enumerate_subspaces(2 * m, d, q))
      if (gfq::is_totally_isotropic(U, J)) lvl.push_back(std::move(U));
    levels.push_back(std::move(lvl));
  }
  return from_levels(levels, q);
}

std::uint64_t chambers_containing(const std::vector<int>& face,
                                  const Complex& C) {
  std::vector<int> f = face;
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  for (int v : f)
    if (v < 0 || v >= C.vertex_count())
      throw FaceNotInComplex("face references a missing vertex");
  std::uint64_t n = 0;
  for (const auto& facet : C.facets)
    if (is_subset(f, facet)) ++n;
  if (n == 0 && !f.empty())
    throw FaceNotInComplex("face is not a simplex of the complex");
  return n;
}

bool verify_simplicial_iso(const VertexMap& f, std::vector<int>* witness) {
  if (witness) witness->clear();
  int dn = f.domain.vertex_count();
  if (static_cast<int>(f.map.size()) != dn)
    throw DomainError("vertex map is not total on the domain");
  for (int v : f.map)
    if (v < 0 || v >= f.codomain.vertex_count())
      throw DomainError("vertex map leaves the codomain");

  if (dn != f.codomain.vertex_count()) return false;
  std::vector<int> back(static_cast<size_t>(dn), -1);
  for (int i = 0; i < dn; ++i) {
    int& slot = back[static_cast<size_t>(f.map[static_cast<size_t>(i)])];
    if (slot >= 0) {
      if (witness) *witness = {slot, i};
      return false;
    }
    slot = i;
  }

  std::set<std::vector<int>> cod(f.codomain.facets.begin(),
                                 f.codomain.facets.end());
  for (const auto& facet : f.domain.facets) {
    std::vector<int> img;
    img.reserve(facet.size());
    for (int v : facet) img.push_back(f.map[static_cast<size_t>(v)]);
    std::sort(img.begin(), img.end());
    if (!cod.count(img)) {
      if (witness) *witness = facet;
      return false;
    }
  }
  return f.domain.facets.size() == f.codomain.facets.size();
}

}  // namespace bldg::sph
