#include "bldg/sl_local.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>
#include <utility>

#include "bldg/common.hpp"

namespace bldg::sl {

namespace {

constexpr std::uint64_t kEnumCap = 20'000'000;

void check_vertex(const lat::HomothetyClass& t, int n, unsigned q,
                  int min_n) {
  if (n < min_n) throw DomainError("rank below the minimum for this operation");
  if (t.rep.n != n || t.rep.q != q)
    throw DomainError("vertex does not belong to the requested building");
}

// L / pi L presented as a digit space; depths are all 1, so the digit space
// is k^n with the trivial t-action and every subspace lifts to a lattice.
lat::Window mod_pi_window(const lat::Lattice& L) {
  lat::Window W = lat::make_window(L, lat::scale(L, 1));
  assert(W.digit_dim == L.n);
  return W;
}

// Shared validation for operations consuming a ClosePair that may have been
// assembled by hand rather than through make_close_pair.
void check_pair(const ClosePair& p) {
  const lat::Lattice& L = p.L;
  const lat::Lattice& M = p.M;
  if (L.q != M.q || L.n != M.n || L.n < 3)
    throw NotClose("malformed close pair");
  if (!(lat::HomothetyClass::of(L) == p.t) ||
      !(lat::HomothetyClass::of(M) == p.tp))
    throw NotClose("representatives do not match the stated classes");
  if (p.t == p.tp) throw NotClose("a vertex is not close to itself");
  lat::Lattice cap = lat::lattice_intersect(L, M);
  lat::Lattice cup = lat::lattice_sum(L, M);
  if (lat::index_exp(L, cap) != 1 || lat::index_exp(cup, L) != 1)
    throw NotClose("index criterion fails");
}

// (L cap M) / pi(L + M): an (n-2)-dimensional k-space whose subspaces are
// the lattices strictly between the two ends.
lat::Window between_window(const ClosePair& p) {
  lat::Lattice top = lat::lattice_intersect(p.L, p.M);
  lat::Lattice bottom = lat::scale(lat::lattice_sum(p.L, p.M), 1);
  lat::Window W = lat::make_window(top, bottom);
  assert(W.digit_dim == p.L.n - 2);
  for ([[maybe_unused]] int d : W.depths) assert(d <= 1);
  return W;
}

}  // namespace

std::string SLChamber::encode() const {
  std::string s = base.encode();
  for (const auto& S : flag.chain) {
    s += '|';
    s += S.encode();
  }
  return s;
}

bool SLChamber::operator<(const SLChamber& o) const {
  if (!(base == o.base)) return base < o.base;
  return std::lexicographical_compare(flag.chain.begin(), flag.chain.end(),
                                      o.flag.chain.begin(),
                                      o.flag.chain.end());
}

std::vector<lat::Lattice> chamber_chain(const SLChamber& c) {
  lat::Window W = mod_pi_window(c.base.rep);
  std::vector<lat::Lattice> chain;
  chain.reserve(c.flag.chain.size());
  for (const auto& S : c.flag.chain) chain.push_back(lat::window_lift(W, S));
  return chain;
}

lat::HomothetyClass standard_vertex(unsigned q, int n) {
  return lat::HomothetyClass::of(lat::standard_lattice(q, n));
}

std::vector<SLChamber> chambers_containing_vertex(const lat::HomothetyClass& t,
                                                  int n, unsigned q) {
  check_vertex(t, n, q, 2);
  if (gfq::complete_flag_count(n, q) > kEnumCap)
    throw EnumerationTooLarge("too many chambers through the vertex");
  std::vector<SLChamber> out;
  for (auto& f : gfq::enumerate_complete_flags(n, q))
    out.push_back(SLChamber{t, std::move(f)});
  return out;
}

std::vector<lat::HomothetyClass> close_vertices(const lat::HomothetyClass& t,
                                                int n, unsigned q,
                                                const lat::EnumOptions& opt) {
  check_vertex(t, n, q, 3);
  const lat::Lattice& L = t.rep;
  lat::Window W =
      lat::make_window(lat::scale(L, -1), lat::scale(L, 1));
  assert(W.digit_dim == 2 * n);

  // A candidate M with tL <= M <= t^{-1}L is close to [L] exactly when its
  // digit image S has dim n and meets the image of L (the span of the
  // second digit layer, i.e. S cap tQ) in dim n-1; no candidate is wasted.
  lat::EnumOptions o = opt;
  o.dim = n;
  o.bottom_dim = n - 1;
  std::vector<lat::HomothetyClass> out;
  for (const auto& S : lat::enumerate_submodules(W.depths, q, o))
    out.push_back(lat::HomothetyClass::of(lat::window_lift(W, S)));
  std::sort(out.begin(), out.end());
  assert(std::adjacent_find(out.begin(), out.end()) == out.end());
  return out;
}

std::uint64_t omega_formula(int n, unsigned q) {
  if (n < 3) throw DomainError("omega needs n >= 3");
  if (q < 2) throw DomainError("q must be at least 2");
  std::uint64_t a = gfq::gaussian_binomial(n, 1, q);
  std::uint64_t b = gfq::gaussian_binomial(n - 1, 1, q);
  return checked_mul(checked_mul(a, b), q);
}

RelationReport verify_sl_relation(int n, unsigned q) {
  if (n < 3) throw DomainError("relation needs n >= 3");
  RelationReport r;
  r.n = n;
  r.q = q;
  r.r_n = gfq::complete_flag_count(n, q);
  r.r_nm2 = gfq::complete_flag_count(n - 2, q);
  r.omega = omega_formula(n, q);
  r.lhs = checked_mul(q, r.r_n);
  r.rhs = checked_mul(r.r_nm2, r.omega);
  r.ok = r.lhs == r.rhs;
  return r;
}

ClosePair make_close_pair(const lat::HomothetyClass& t,
                          const lat::HomothetyClass& tp) {
  int n = t.rep.n;
  check_vertex(tp, n, t.rep.q, 3);
  if (t == tp) throw NotClose("a vertex is not close to itself");

  // Both index conditions force det M = det L, so only one scaling of the
  // representative can work.
  const lat::Lattice& L = t.rep;
  int diff = L.det_exp() - tp.rep.det_exp();
  if (diff % n != 0)
    throw NotClose("determinant classes rule out the index criterion");
  lat::Lattice M = lat::scale(tp.rep, diff / n);

  lat::Lattice cap = lat::lattice_intersect(L, M);
  lat::Lattice cup = lat::lattice_sum(L, M);
  if (lat::index_exp(L, cap) != 1 || lat::index_exp(cup, L) != 1)
    throw NotClose("index criterion fails");

  std::vector<int> rp = lat::relative_position(L, M);
  assert(rp.front() == -1 && rp.back() == 1);
  for (size_t i = 1; i + 1 < rp.size(); ++i) assert(rp[i] == 0);
  return ClosePair{t, tp, L, M};
}

ClosePair standard_close_pair(int n, unsigned q) {
  if (n < 3) throw DomainError("close pairs need n >= 3");
  lat::Lattice L = lat::standard_lattice(q, n);
  std::vector<int> exps(n, 1);
  exps.front() = 0;
  exps.back() = 2;
  lat::Lattice M =
      lat::lattice_from_generators(lat::PolyMat::diag_powers(q, exps), -1);
  return make_close_pair(lat::HomothetyClass::of(L),
                         lat::HomothetyClass::of(M));
}

std::uint64_t gallery_multiplicity(const ClosePair& p) {
  check_pair(p);
  lat::Window W = between_window(p);
  // Chains L_2 < ... < L_{n-2} between the ends are complete flags of the
  // digit space, counted by enumeration.
  return gfq::enumerate_complete_flags(W.digit_dim, p.L.q).size();
}

CloseComplex close_complex(const ClosePair& p) {
  check_pair(p);
  unsigned q = p.L.q;
  lat::Window W = between_window(p);
  int d = W.digit_dim;
  sph::Complex building = sph::build_A_building(d - 1, q);

  if (d == 1) {
    // n = 3: nothing lies strictly between the ends.
    sph::Complex empty = sph::make_complex({}, {});
    return CloseComplex{empty, sph::VertexMap{empty, building, {}}};
  }

  std::unordered_map<std::string, int> codomain_index;
  for (int i = 0; i < building.vertex_count(); ++i)
    codomain_index.emplace(building.labels[i], i);

  std::vector<std::string> labels;
  std::vector<int> to_flags;
  std::unordered_map<std::string, int> vertex_index;
  for (int g = 1; g < d; ++g) {
    for (const auto& S : gfq::enumerate_subspaces(d, g, q)) {
      lat::Lattice N = lat::window_lift(W, S);
      labels.push_back(lat::HomothetyClass::of(N).encode());
      vertex_index.emplace(S.encode(), static_cast<int>(labels.size()) - 1);
      auto it = codomain_index.find(S.encode());
      assert(it != codomain_index.end());
      to_flags.push_back(it->second);
    }
  }

  std::vector<std::vector<int>> facets;
  for (const auto& f : gfq::enumerate_complete_flags(d, q)) {
    std::vector<int> facet;
    facet.reserve(f.chain.size());
    for (const auto& S : f.chain) facet.push_back(vertex_index.at(S.encode()));
    facets.push_back(std::move(facet));
  }

  sph::Complex cx = sph::make_complex(std::move(labels), std::move(facets));
  return CloseComplex{cx, sph::VertexMap{cx, building, to_flags}};
}

std::vector<SLChamber> chambers_across(const SLChamber& c, int slot) {
  const lat::Lattice& L = c.base.rep;
  int n = L.n;
  unsigned q = L.q;
  if (slot < 0 || slot >= n) throw DomainError("vertex slot out of range");
  if (static_cast<int>(c.flag.chain.size()) != n - 1)
    throw DomainError("chamber flag is not complete");

  std::vector<lat::Lattice> chain = chamber_chain(c);
  lat::Lattice above, below;
  if (slot == 0) {
    below = chain[n - 2];
    above = lat::scale(chain[0], -1);
  } else {
    below = (slot == 1) ? lat::scale(L, 1) : chain[slot - 2];
    above = (slot == n - 1) ? L : chain[slot];
  }
  lat::Window W = lat::make_window(above, below);
  assert(W.digit_dim == 2);

  lat::EnumOptions o;
  o.dim = 1;
  std::vector<gfq::Subspace> lines = lat::enumerate_submodules(W.depths, q, o);
  assert(lines.size() == q + 1);

  std::vector<SLChamber> out;
  [[maybe_unused]] bool saw_self = false;
  for (const auto& S : lines) {
    lat::Lattice N = lat::window_lift(W, S);
    SLChamber ch;
    if (slot == 0) {
      // The base moves; the chain members complete the new chamber as is
      // since det N = det L keeps them strictly between pi N and N.
      ch.base = lat::HomothetyClass::of(N);
      int j = -N.shift;
      lat::Window Wn = mod_pi_window(ch.base.rep);
      std::vector<gfq::Subspace> coords;
      coords.reserve(chain.size());
      for (const auto& Li : chain)
        coords.push_back(lat::window_coords(Wn, lat::scale(Li, j)));
      ch.flag = gfq::Flag::make(n, std::move(coords));
    } else {
      ch.base = c.base;
      std::vector<gfq::Subspace> coords = c.flag.chain;
      coords[slot - 1] = lat::window_coords(mod_pi_window(L), N);
      ch.flag = gfq::Flag::make(n, std::move(coords));
    }
    if (ch == c) saw_self = true;
    out.push_back(std::move(ch));
  }
  assert(saw_self);
  return out;
}

std::uint64_t count_galleries_from(const lat::HomothetyClass& t, int n,
                                   unsigned q) {
  check_vertex(t, n, q, 3);
  std::uint64_t total = 0;
  for (const auto& c : chambers_containing_vertex(t, n, q)) {
    std::uint64_t ways = 0;
    for (const auto& nb : chambers_across(c, 0)) {
      if (nb == c) continue;
      // A chamber across the face omitting [L] never contains [L]: its
      // other vertices have determinant classes distinct from [L]'s.
      assert(!(nb.base == t));
      ++ways;
    }
    assert(ways == q);
    total += ways;
  }
  return total;
}

bool vertices_adjacent(const lat::HomothetyClass& a,
                       const lat::HomothetyClass& b) {
  if (a.rep.q != b.rep.q || a.rep.n != b.rep.n)
    throw DomainError("classes from different buildings");
  if (a == b) return false;
  std::vector<int> rp = lat::relative_position(a.rep, b.rep);
  return rp.back() - rp.front() == 1;
}

}  // namespace bldg::sl
