// Acceptance gate for the whole artifact.  Each numbered criterion prints
// exactly one line, "[criterion N] PASS - detail" or "[criterion N] FAIL -
// detail", and the process exits nonzero if any criterion fails.  All
// comparisons are exact integer equality; nothing here is tolerance-based.

#include <sys/wait.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bldg/common.hpp"
#include "bldg/gfq.hpp"
#include "bldg/lattice.hpp"
#include "bldg/sl_local.hpp"
#include "bldg/sp_local.hpp"
#include "bldg/spherical.hpp"
#include "lattice_oracles.hpp"

namespace lat = bldg::lat;
namespace gfq = bldg::gfq;
namespace sph = bldg::sph;
namespace sl = bldg::sl;
namespace sp = bldg::sp;
using oracles::random_poly;
using lat::HomothetyClass;
using lat::Lattice;
using sp::ApartmentVertex;
using sp::GspElement;
using sp::SpChamber;

namespace {

struct Fail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void need(bool cond, const std::string& what) {
  if (!cond) throw Fail(what);
}

int failures = 0;

void run_criterion(int id, const std::function<std::string()>& body) {
  try {
    std::string detail = body();
    std::printf("[criterion %d] PASS - %s\n", id, detail.c_str());
  } catch (const std::exception& e) {
    ++failures;
    std::printf("[criterion %d] FAIL - %s\n", id, e.what());
  }
  std::fflush(stdout);
}

std::string at(int n, unsigned q) {
  return "(" + std::to_string(n) + "," + std::to_string(q) + ")";
}

int mod(int x, int m) { return ((x % m) + m) % m; }

// ------------------------------------------------------------ sl shorthand

std::uint64_t sl_chamber_count(int n, unsigned q) {
  auto t = sl::standard_vertex(q, n);
  return sl::chambers_containing_vertex(t, n, q).size();
}

std::vector<HomothetyClass> sl_close(int n, unsigned q) {
  return sl::close_vertices(sl::standard_vertex(q, n), n, q);
}

std::uint64_t sp_chamber_count(int n, unsigned q) {
  auto t = sl::standard_vertex(q, 2 * n);
  return sp::sp_chambers_containing(t, n, q).size();
}

std::vector<HomothetyClass> sp_close(int n, unsigned q) {
  return sp::sp_close_vertices(sl::standard_vertex(q, 2 * n), n, q);
}

// -------------------------------------------------- apartment helpers (sp)

ApartmentVertex av(std::vector<int> a, std::vector<int> b) {
  ApartmentVertex v;
  v.a = std::move(a);
  v.b = std::move(b);
  return v;
}

bool is_diagonal(const Lattice& L) {
  for (int i = 0; i < L.n; ++i)
    for (int j = 0; j < L.n; ++j)
      if (i != j && !lat::poly_is_zero(L.G.at(i, j))) return false;
  return true;
}

bool chamber_in_apartment(const SpChamber& c) {
  if (!is_diagonal(c.base.rep)) return false;
  for (const auto& Li : sp::sp_chamber_chain(c))
    if (!is_diagonal(Li)) return false;
  return true;
}

std::set<std::string> sp_class_set(const SpChamber& c) {
  std::set<std::string> out;
  for (const auto& v : sp::sp_chamber_vertices(c)) out.insert(v.encode());
  return out;
}

std::set<std::string> sl_class_set(const sl::SLChamber& c) {
  std::set<std::string> out{c.base.encode()};
  for (const auto& Li : sl::chamber_chain(c))
    out.insert(HomothetyClass::of(Li).encode());
  return out;
}

// Chain of an ambient chamber from pi L up to L; every step must have
// index exactly q.
void need_unit_steps(const sl::SLChamber& c, const std::string& where) {
  std::vector<Lattice> steps{lat::scale(c.base.rep, 1)};
  for (auto& Li : sl::chamber_chain(c)) steps.push_back(std::move(Li));
  steps.push_back(c.base.rep);
  for (size_t i = 0; i + 1 < steps.size(); ++i) {
    need(lat::contains(steps[i + 1], steps[i]), where + ": chain not nested");
    need(lat::index_exp(steps[i + 1], steps[i]) == 1,
         where + ": chain step index is not q");
  }
}

// ------------------------------------------------------- random sp samples

ApartmentVertex random_vertex(int n, std::mt19937& rng, int width) {
  std::uniform_int_distribution<int> d(-width, width);
  ApartmentVertex v;
  v.a.resize(static_cast<size_t>(n));
  v.b.resize(static_cast<size_t>(n));
  for (auto& e : v.a) e = d(rng);
  for (auto& e : v.b) e = d(rng);
  return v;
}

GspElement random_similitude(unsigned q, int n, std::mt19937& rng) {
  std::uniform_int_distribution<int> du(-1, 1);
  std::uniform_int_distribution<int> de(0, 1);
  std::vector<int> s(static_cast<size_t>(n));
  for (auto& e : s) e = du(rng);
  GspElement g = sp::gsp_scalar(q, n, du(rng));
  g = sp::gsp_mul(g, sp::gsp_diag(q, s));
  for (int r = 0; r < 3; ++r) {
    std::vector<lat::Poly> v(static_cast<size_t>(2 * n));
    for (auto& p : v) p = random_poly(q, 1, rng);
    g = sp::gsp_mul(g, sp::gsp_transvection(q, n, v, random_poly(q, 1, rng)));
  }
  if (de(rng)) g = sp::gsp_mul(sp::gsp_eta(q, n), g);
  return g;
}

// ------------------------------------------------------------- CLI driving

std::pair<int, std::string> run_tool(const std::string& args) {
  std::string cmd = std::string(BLDGTOOL_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  need(pipe != nullptr, "popen failed");
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// ---------------------------------------------------------------- criteria

std::string criterion1() {
  const std::tuple<int, unsigned, std::uint64_t> rows[] = {
      {3, 2, 42}, {3, 3, 156}, {4, 2, 210}, {4, 3, 1560}, {5, 2, 930}};
  for (const auto& [n, q, expect] : rows) {
    std::uint64_t got = sl_close(n, q).size();
    need(got == expect, "close count at " + at(n, q) + " is " +
                            std::to_string(got) + ", expected " +
                            std::to_string(expect));
    need(sl::omega_formula(n, q) == expect,
         "omega formula disagrees at " + at(n, q));
  }
  return "close-vertex enumeration matches the omega formula: 42 156 210 "
         "1560 930 at (3,2) (3,3) (4,2) (4,3) (5,2)";
}

std::string criterion2() {
  for (int n : {3, 4})
    for (unsigned q : {2u, 3u}) {
      std::uint64_t r = sl_chamber_count(n, q);
      std::uint64_t omega = sl_close(n, q).size();
      std::uint64_t rp = n - 2 >= 2 ? sl_chamber_count(n - 2, q) : 1;
      need(bldg::checked_mul(q, r) == bldg::checked_mul(rp, omega),
           "enumerated relation fails at " + at(n, q));
    }
  for (int n = 3; n <= 8; ++n)
    for (unsigned q : {2u, 3u})
      need(sl::verify_sl_relation(n, q).ok,
           "formula relation fails at " + at(n, q));
  return "q*r_n = r_{n-2}*omega_n holds enumerated at n=3,4 for q=2,3 and "
         "formula-level up to n=8";
}

std::string criterion3() {
  const std::tuple<int, unsigned, std::uint64_t> rows[] = {
      {4, 2, 3}, {5, 2, 21}, {4, 3, 4}};
  for (const auto& [n, q, expect] : rows) {
    need(gfq::complete_flag_count(n - 2, q) == expect,
         "flag-count formula disagrees at " + at(n, q));
    auto t = sl::standard_vertex(q, n);
    auto close = sl_close(n, q);

    std::vector<size_t> idx(close.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::mt19937 rng(static_cast<unsigned>(100 + 10 * n + q));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t i = 0; i < 20 && i < idx.size(); ++i) {
      auto p = sl::make_close_pair(t, close[idx[i]]);
      std::uint64_t m = sl::gallery_multiplicity(p);
      need(m == expect, "sampled multiplicity at " + at(n, q) + " is " +
                            std::to_string(m) + ", expected " +
                            std::to_string(expect));
    }

    std::uint64_t sum = 0;
    for (const auto& tp : close)
      sum = bldg::checked_add(
          sum, sl::gallery_multiplicity(sl::make_close_pair(t, tp)));
    std::uint64_t want = bldg::checked_mul(gfq::complete_flag_count(n, q), q);
    need(sum == want, "multiplicity total at " + at(n, q) + " is " +
                          std::to_string(sum) + ", expected " +
                          std::to_string(want));
  }
  return "20 sampled multiplicities per size equal 3 21 4 at (4,2) (5,2) "
         "(4,3) and the totals equal r_n*q";
}

std::string criterion4() {
  for (const auto& [n, q] :
       std::vector<std::pair<int, unsigned>>{{4, 2}, {5, 2}, {4, 3}}) {
    auto cc = sl::close_complex(sl::standard_close_pair(n, q));
    need(sph::verify_simplicial_iso(cc.to_flags),
         "linear close complex at " + at(n, q) + " is not isomorphic");
  }
  for (const auto& [n, q] :
       std::vector<std::pair<int, unsigned>>{{2, 2}, {2, 3}, {3, 2}}) {
    auto cc = sp::sp_close_complex(sp::standard_sp_close_pair(n, q));
    need(sph::verify_simplicial_iso(cc.to_flags),
         "symplectic close complex at " + at(n, q) + " is not isomorphic");
  }
  return "all six close complexes are isomorphic to their spherical flag "
         "complexes";
}

std::string criterion5() {
  const std::tuple<int, unsigned, std::uint64_t> rows[] = {
      {2, 2, 45}, {2, 3, 160}, {3, 2, 2835}};
  for (const auto& [n, q, expect] : rows) {
    std::uint64_t got = sp_chamber_count(n, q);
    need(got == expect, "chamber count at " + at(n, q) + " is " +
                            std::to_string(got) + ", expected " +
                            std::to_string(expect));
  }
  return "maximal isotropic flag enumeration gives 45, 160, 2835 chambers "
         "at (2,2) (2,3) (3,2)";
}

std::string criterion6() {
  const std::tuple<int, unsigned, std::uint64_t> rows[] = {
      {2, 2, 30}, {2, 3, 120}, {3, 2, 126}};
  for (const auto& [n, q, expect] : rows) {
    std::uint64_t got = sp_close(n, q).size();
    need(got == expect, "close count at " + at(n, q) + " is " +
                            std::to_string(got) + ", expected " +
                            std::to_string(expect));
    need(sp::omega_delta_formula(n, q) == expect &&
             sp::coset_count_sp(n, q) == expect,
         "coset formula disagrees at " + at(n, q));
  }
  return "close special vertices number 30, 120, 126 at (2,2) (2,3) (3,2), "
         "equal to the coset formula";
}

std::string criterion7() {
  for (const auto& [n, q] :
       std::vector<std::pair<int, unsigned>>{{2, 2}, {3, 2}, {2, 3}}) {
    std::uint64_t r = sp_chamber_count(n, q);
    std::uint64_t omega = sp_close(n, q).size();
    std::uint64_t rp = sp_chamber_count(n - 1, q);
    if (n == 2)
      need(rp == q + 1, "rank-one chamber count is not q+1 at q=" +
                            std::to_string(q));
    need(bldg::checked_mul(q, r) == bldg::checked_mul(rp, omega),
         "enumerated relation fails at " + at(n, q));
    need(sp::verify_sp_relation(n, q).ok,
         "formula relation fails at " + at(n, q));
  }
  return "q*r = r_prev*omega holds enumerated at (2,2) (3,2) (2,3) with "
         "r_prev(1) = q+1";
}

std::string criterion8() {
  std::uint64_t faces = 0;
  for (const auto& [n, q] : std::vector<std::pair<int, unsigned>>{
           {3, 2}, {3, 3}, {4, 2}, {4, 3}, {5, 2}}) {
    auto t = sl::standard_vertex(q, n);
    for (const auto& c : sl::chambers_containing_vertex(t, n, q))
      for (int slot = 0; slot < n; ++slot) {
        auto across = sl::chambers_across(c, slot);
        need(across.size() == q + 1,
             "linear panel at " + at(n, q) + " lies in " +
                 std::to_string(across.size()) + " chambers");
        need(std::count(across.begin(), across.end(), c) == 1,
             "panel star at " + at(n, q) + " misses its own chamber");
        ++faces;
      }
  }
  for (const auto& [n, q] :
       std::vector<std::pair<int, unsigned>>{{2, 2}, {2, 3}, {3, 2}}) {
    auto t = sl::standard_vertex(q, 2 * n);
    for (const auto& c : sp::sp_chambers_containing(t, n, q))
      for (int slot = 0; slot <= n; ++slot) {
        auto across = sp::sp_chambers_across(c, slot);
        need(across.size() == q + 1,
             "symplectic panel at " + at(n, q) + " lies in " +
                 std::to_string(across.size()) + " chambers");
        need(std::count(across.begin(), across.end(), c) == 1,
             "panel star at " + at(n, q) + " misses its own chamber");
        ++faces;
      }
  }
  return "every one of the " + std::to_string(faces) +
         " codimension-one faces lies in exactly q+1 chambers";
}

std::string criterion9() {
  // fundamental chamber vertices: base type 0, chain vertex j type 2n-j,
  // special exactly at j = 0 and j = n
  for (const auto& [n, q] :
       std::vector<std::pair<int, unsigned>>{{2, 2}, {3, 2}, {2, 3}}) {
    auto c = sp::fundamental_chamber(n, q);
    auto verts = sp::sp_chamber_vertices(c);
    need(verts.size() == static_cast<size_t>(n) + 1, "chamber vertex count");
    for (int jj = 0; jj <= n; ++jj) {
      const auto& vc = verts[static_cast<size_t>(jj)];
      int want_type = jj == 0 ? 0 : 2 * n - jj;
      need(lat::vertex_type(vc.rep, 2 * n) == want_type,
           "fundamental vertex type at " + at(n, q));
      need(sp::is_special_lattice(vc.rep) == (jj == 0 || jj == n),
           "fundamental vertex specialness at " + at(n, q));

      // coordinates: the base as (0^n; 0^n), the chain as (0^j, 1^{n-j}; 1^n)
      ApartmentVertex v;
      if (jj == 0) {
        v = av(std::vector<int>(static_cast<size_t>(n), 0),
               std::vector<int>(static_cast<size_t>(n), 0));
      } else {
        std::vector<int> a(static_cast<size_t>(n), 1);
        for (int i = 0; i < jj; ++i) a[static_cast<size_t>(i)] = 0;
        v = av(std::move(a), std::vector<int>(static_cast<size_t>(n), 1));
      }
      need(sp::coords_type(v) == want_type &&
               sp::coords_is_special(v) == (jj == 0 || jj == n) &&
               sp::coords_is_primitive(v) == (jj == 0),
           "fundamental coordinate classification at " + at(n, q));
      need(HomothetyClass::of(sp::realize_vertex(v, q)) == vc,
           "fundamental coordinates realize the wrong class at " + at(n, q));
    }
  }

  // 100 random coordinate vertices against the lattice-level predicates
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + trial % 3;
    unsigned q = (trial % 2) ? 3u : 2u;
    auto v = random_vertex(n, rng, 2);
    Lattice L = sp::realize_vertex(v, q);
    need(sp::coords_type(v) == lat::vertex_type(L, 2 * n),
         "coordinate type disagrees at trial " + std::to_string(trial));
    need(sp::coords_is_primitive(v) == sp::is_primitive_lattice(L),
         "primitivity disagrees at trial " + std::to_string(trial));
    need(sp::coords_is_special(v) == sp::is_special_lattice(L),
         "specialness disagrees at trial " + std::to_string(trial));
  }

  // type shift i -> i + ord(det g) mod 2n on 100 sampled elements
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + trial % 3;
    unsigned q = (trial % 2) ? 3u : 2u;
    GspElement g = random_similitude(q, n, rng);
    auto v = random_vertex(n, rng, 1);
    int expect = mod(sp::coords_type(v) + sp::gsp_det_ord(g), 2 * n);
    need(sp::coords_type(sp::gsp_act(g, v)) == expect,
         "coordinate type shift fails at trial " + std::to_string(trial));
    need(lat::vertex_type(sp::gsp_apply(g, sp::realize_vertex(v, q)), 2 * n) ==
             expect,
         "lattice type shift fails at trial " + std::to_string(trial));
  }
  return "fundamental and 100 random vertices classify identically in "
         "coordinates and lattices; 100 sampled elements shift types by "
         "ord(det g)";
}

std::string criterion10() {
  bool saw_base = false, saw_middle = false, saw_top = false;
  std::uint64_t panels = 0;
  for (int n : {2, 3}) {
    unsigned q = 2;
    auto t = sl::standard_vertex(q, 2 * n);
    std::vector<SpChamber> apartment;
    for (const auto& c : sp::sp_chambers_containing(t, n, q))
      if (chamber_in_apartment(c)) apartment.push_back(c);
    need(apartment.size() == (n == 2 ? 8u : 48u),
         "apartment chamber count through the origin at n=" +
             std::to_string(n));

    for (const auto& c : apartment)
      for (int slot = 0; slot <= n; ++slot) {
        std::vector<SpChamber> nbs;
        for (const auto& nb : sp::sp_chambers_across(c, slot))
          if (!(nb == c) && chamber_in_apartment(nb)) nbs.push_back(nb);
        need(nbs.size() == 1, "apartment is not thin at a panel");
        const SpChamber& cp = nbs.front();

        auto [D, Dp] = sp::lift_gallery(c, cp);
        need(!(D.encode() == Dp.encode()), "lifted chambers coincide");
        need(D.base == c.base && Dp.base == cp.base,
             "lifted chambers have the wrong bases");

        auto dv = sl_class_set(D);
        auto dvp = sl_class_set(Dp);
        need(dv.size() == 2 * static_cast<size_t>(n) && dv.size() == dvp.size(),
             "lifted chamber has repeated vertex classes");
        for (const auto& s : sp_class_set(c))
          need(dv.count(s) == 1, "lift drops a vertex of its chamber");
        for (const auto& s : sp_class_set(cp))
          need(dvp.count(s) == 1, "lift drops a vertex of its chamber");

        std::set<std::string> shared;
        std::set_intersection(dv.begin(), dv.end(), dvp.begin(), dvp.end(),
                              std::inserter(shared, shared.begin()));
        need(shared.size() == dv.size() - 1,
             "lifted chambers are not adjacent");

        need_unit_steps(D, "first lift");
        need_unit_steps(Dp, "second lift");

        if (slot == 0) saw_base = true;
        else if (slot == n) saw_top = true;
        else saw_middle = true;
        ++panels;
      }
  }
  need(saw_base && saw_middle && saw_top, "a panel position went unexercised");
  return "all " + std::to_string(panels) +
         " apartment panels lift to verified adjacent ambient pairs; base, "
         "middle and top positions all occur";
}

std::string criterion11() {
  const std::string battery[] = {
      "count-close --family sl --n 3 --q 2",
      "count-close --family sl --n 4 --q 2",
      "count-close --family sp --n 2 --q 2",
      "count-close --family sp --n 2 --q 3",
      "count-chambers --family sl --n 4 --q 2",
      "count-chambers --family sp --n 2 --q 2",
      "count-chambers --family sp --n 2 --q 3",
      "multiplicity --family sl --n 4 --q 2",
      "multiplicity --family sp --n 2 --q 2 --all",
      "verify-relation --family sl --n 3 --q 2",
      "verify-relation --family sl --n 4 --q 2",
      "verify-relation --family sp --n 2 --q 2",
      "verify-relation --family sp --n 2 --q 3",
      "verify-iso --family sl --n 4 --q 2",
      "verify-iso --family sp --n 2 --q 2",
      "verify-iso --family sp --n 2 --q 3",
      "export-complex --family sl --n 4 --q 2",
      "export-complex --family sp --n 2 --q 2 --format dot",
      "table --q 2 --format csv",
      "table --q 3 --format csv",
  };
  for (const auto& args : battery) {
    auto [code1, out1] = run_tool(args + " --threads 1");
    auto [code8, out8] = run_tool(args + " --threads 8");
    need(code1 == 0 && code8 == 0, "nonzero exit for: " + args);
    need(out1 == out8, "reports differ between 1 and 8 threads for: " + args);
    need(!out1.empty(), "empty report for: " + args);
  }
  return "20 reports covering every command are byte-identical at "
         "parallelism 1 and 8";
}

}  // namespace

int main() {
  run_criterion(1, criterion1);
  run_criterion(2, criterion2);
  run_criterion(3, criterion3);
  run_criterion(4, criterion4);
  run_criterion(5, criterion5);
  run_criterion(6, criterion6);
  run_criterion(7, criterion7);
  run_criterion(8, criterion8);
  run_criterion(9, criterion9);
  run_criterion(10, criterion10);
  run_criterion(11, criterion11);
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
