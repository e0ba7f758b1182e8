#include "bldg/sp_local.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>
#include <utility>

#include "bldg/common.hpp"

namespace bldg::sp {

namespace {

constexpr std::uint64_t kEnumCap = 20'000'000;

using lat::FieldTable;
using lat::felt;
using lat::Poly;

felt poly_coeff(const Poly& p, int i) {
  if (i < 0 || i >= static_cast<int>(p.size())) return 0;
  return p[static_cast<size_t>(i)];
}

void check_even_rank(const lat::Lattice& L) {
  if (L.n < 2 || L.n % 2 != 0)
    throw DomainError("the symplectic form needs even rank");
}

// Gram matrix G^T J G of the Hermite basis columns; the pairing of lattice
// vectors carries an extra t^{2 shift}.
lat::PolyMat gram_polymat(const lat::Lattice& L) {
  lat::PolyMat J = standard_j_mat(L.q, L.n / 2);
  return lat::pm_mul(lat::pm_transpose(L.G), lat::pm_mul(J, L.G));
}

int min_entry_val(const lat::PolyMat& A) {
  int v = lat::kWorkPrec;
  for (const auto& p : A.a) v = std::min(v, lat::poly_val(p));
  return v;
}

void check_vertex(const lat::HomothetyClass& t, int n, unsigned q,
                  int min_n) {
  if (n < min_n) throw DomainError("rank below the minimum for this operation");
  if (t.rep.n != 2 * n || t.rep.q != q)
    throw DomainError("vertex does not belong to the requested building");
}

void check_coords(const ApartmentVertex& v) {
  if (v.a.empty() || v.a.size() != v.b.size())
    throw DomainError("malformed apartment coordinates");
}

lat::Lattice realize_exps(unsigned q, const std::vector<int>& exps) {
  int m0 = *std::min_element(exps.begin(), exps.end());
  std::vector<int> rel(exps);
  for (int& e : rel) e -= m0;
  return lat::lattice_from_generators(lat::PolyMat::diag_powers(q, rel), m0);
}

// Shared validation for pairs assembled by hand.
void check_sp_pair(const SpClosePair& p) {
  const lat::Lattice& L = p.L;
  const lat::Lattice& M = p.M;
  if (L.q != M.q || L.n != M.n || L.n < 4 || L.n % 2 != 0)
    throw NotClose("malformed close pair");
  if (!(lat::HomothetyClass::of(L) == p.t) ||
      !(lat::HomothetyClass::of(M) == p.tp))
    throw NotClose("representatives do not match the stated classes");
  if (p.t == p.tp) throw NotClose("a vertex is not close to itself");
  if (!is_primitive_lattice(L) || !is_primitive_lattice(M))
    throw NotClose("representatives are not primitive");
  lat::Lattice cup = lat::lattice_sum(L, M);
  if (lat::index_exp(cup, L) != 1 || lat::index_exp(cup, M) != 1)
    throw NotClose("index criterion fails");
}

// (L cap M) / pi(L + M), a 2(n-1)-dimensional residue space carrying the
// reduction of the pairing.
lat::Window between_window(const SpClosePair& p) {
  lat::Lattice top = lat::lattice_intersect(p.L, p.M);
  lat::Lattice bottom = lat::scale(lat::lattice_sum(p.L, p.M), 1);
  lat::Window W = lat::make_window(top, bottom);
  assert(W.digit_dim == p.L.n - 2);
  for ([[maybe_unused]] int d : W.depths) assert(d <= 1);
  return W;
}

gfq::MatrixK rows_matrix(unsigned q, int ambient,
                         const std::vector<std::vector<felt>>& rows) {
  gfq::MatrixK m(q, static_cast<int>(rows.size()), ambient);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < ambient; ++c) m.at(r, c) = rows[r][c];
  return m;
}

gfq::MatrixK mat_inverse(const gfq::MatrixK& A) {
  const FieldTable& F = FieldTable::get(A.q);
  int n = A.rows;
  gfq::MatrixK aug(A.q, n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, n + i) = 1;
  }
  gfq::RrefResult r = gfq::rref(aug);
  if (r.rank != n) throw SingularMatrix("matrix is not invertible");
  (void)F;
  gfq::MatrixK inv(A.q, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv.at(i, j) = r.m.at(i, n + j);
  return inv;
}

// Intermediate coordinate vectors between two diagonal lattices whose
// exponents differ by one on some index set: step r lowers the first r
// indices (ascending), giving a chain of single-q steps from lo to hi.
std::vector<std::vector<int>> interpolate_coords(const std::vector<int>& lo,
                                                 const std::vector<int>& hi) {
  std::vector<int> idxs;
  for (size_t i = 0; i < lo.size(); ++i) {
    int d = lo[i] - hi[i];
    if (d == 1)
      idxs.push_back(static_cast<int>(i));
    else if (d != 0)
      throw DomainError("lattices are not within one step per coordinate");
  }
  std::vector<std::vector<int>> out;
  if (idxs.empty()) return out;
  std::vector<int> cur(lo);
  for (size_t r = 0; r + 1 < idxs.size(); ++r) {
    cur[static_cast<size_t>(idxs[r])] -= 1;
    out.push_back(cur);
  }
  return out;
}

// Absolute diagonal exponents of a lattice whose Hermite form is diagonal;
// NotInCommonApartment otherwise.
std::vector<int> diag_coords(const lat::Lattice& L) {
  for (int i = 0; i < L.n; ++i)
    for (int j = 0; j < L.n; ++j)
      if (i != j && !lat::poly_is_zero(L.G.at(i, j)))
        throw NotInCommonApartment(
            "lattice is not diagonal in the standard basis");
  std::vector<int> c(L.diag);
  for (int& e : c) e += L.shift;
  return c;
}

// Xi_{2n} chamber with base [L0] and the given full chain, the chain given
// at L0's scaling.
sl::SLChamber build_sl_chamber(const lat::Lattice& L0,
                               const std::vector<lat::Lattice>& chain) {
  lat::HomothetyClass base = lat::HomothetyClass::of(L0);
  lat::Window W = lat::make_window(base.rep, lat::scale(base.rep, 1));
  std::vector<gfq::Subspace> coords;
  coords.reserve(chain.size());
  for (const auto& Li : chain)
    coords.push_back(lat::window_coords(W, lat::scale(Li, -L0.shift)));
  return sl::SLChamber{base, gfq::Flag::make(L0.n, std::move(coords))};
}

}  // namespace

lat::PolyMat standard_j_mat(unsigned q, int n) {
  const FieldTable& F = FieldTable::get(q);
  lat::PolyMat J(q, 2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    J.at(i, n + i) = Poly{1};
    J.at(n + i, i) = Poly{F.neg(1)};
  }
  return J;
}

int pairing_ord(const lat::Lattice& L) {
  check_even_rank(L);
  int v = min_entry_val(gram_polymat(L));
  assert(v < lat::kWorkPrec);
  return 2 * L.shift + v;
}

bool is_primitive_lattice(const lat::Lattice& L) {
  check_even_rank(L);
  return L.det_exp() == 0 && pairing_ord(L) == 0;
}

bool pairing_in_pi(const lat::Lattice& L) { return pairing_ord(L) >= 1; }

bool is_special_lattice(const lat::Lattice& L) {
  check_even_rank(L);
  int mu = pairing_ord(L);
  // {x : <x, L> in O} = J dual(L); equality with pi^{-mu} L pins the
  // symplectic divisors to a single value.
  lat::Lattice Ldual = lat::apply_matrix(standard_j_mat(L.q, L.n / 2), 0,
                                         lat::dual_lattice(L));
  return Ldual == lat::scale(L, -mu);
}

lat::Lattice sp_primitive_rep(const lat::HomothetyClass& t, int n,
                              unsigned q) {
  check_vertex(t, n, q, 1);
  int det = t.rep.det_exp();
  if (det % (2 * n) != 0)
    throw NotSpecial("class type is not zero");
  lat::Lattice L0 = lat::scale(t.rep, -det / (2 * n));
  if (!is_primitive_lattice(L0))
    throw NotSpecial("class has no primitive representative");
  return L0;
}

bool class_in_delta(const lat::HomothetyClass& c, int n, unsigned q) {
  check_vertex(c, n, q, 1);
  int N = 2 * n;
  int det = c.rep.det_exp();
  // A representative sandwiched as pi L0 <= L <= L0 with L0 primitive has
  // det exponent in [0, 2n]; at most two scalings qualify.
  for (int k = -(det / N) - 1; k <= -(det / N) + 1; ++k) {
    int dk = det + N * k;
    if (dk < 0 || dk > N) continue;
    lat::Lattice Lk = lat::scale(c.rep, k);
    if (dk == 0) {
      if (is_primitive_lattice(Lk)) return true;
      continue;
    }
    if (!pairing_in_pi(Lk)) continue;
    lat::Window W = lat::make_window(lat::scale(Lk, -1), Lk);
    for (const auto& S : gfq::enumerate_subspaces(N, dk, q)) {
      lat::Lattice L0 = lat::window_lift(W, S);
      if (is_primitive_lattice(L0)) return true;
    }
  }
  return false;
}

gfq::GramForm residue_gram(const lat::Window& W) {
  const lat::Lattice& top = W.top;
  std::vector<int> cols;
  for (size_t i = 0; i < W.depths.size(); ++i) {
    if (W.depths[i] > 1)
      throw DomainError("residue form needs a depth-one window");
    if (W.depths[i] == 1) cols.push_back(static_cast<int>(i));
  }
  assert(static_cast<int>(cols.size()) == W.digit_dim);
  lat::PolyMat J = standard_j_mat(top.q, top.n / 2);
  lat::PolyMat A =
      lat::pm_mul(lat::pm_transpose(W.basis), lat::pm_mul(J, W.basis));
  // reduce at the pairing order of the top lattice, 2 shift + min val(A)
  int cidx = min_entry_val(A);
  gfq::MatrixK Gk(top.q, W.digit_dim, W.digit_dim);
  for (int r = 0; r < W.digit_dim; ++r)
    for (int c = 0; c < W.digit_dim; ++c)
      Gk.at(r, c) = poly_coeff(A.at(cols[r], cols[c]), cidx);
  return gfq::GramForm::make(Gk);
}

bool coords_is_primitive(const ApartmentVertex& v) {
  check_coords(v);
  for (size_t i = 0; i < v.a.size(); ++i)
    if (v.a[i] + v.b[i] != 0) return false;
  return true;
}

bool coords_is_special(const ApartmentVertex& v) {
  check_coords(v);
  int mu = v.a[0] + v.b[0];
  for (size_t i = 1; i < v.a.size(); ++i)
    if (v.a[i] + v.b[i] != mu) return false;
  return true;
}

int coords_type(const ApartmentVertex& v) {
  check_coords(v);
  int mod = 2 * static_cast<int>(v.a.size());
  int s = 0;
  for (size_t i = 0; i < v.a.size(); ++i) s += v.a[i] + v.b[i];
  return ((s % mod) + mod) % mod;
}

bool coords_same_class(const ApartmentVertex& u, const ApartmentVertex& v) {
  check_coords(u);
  check_coords(v);
  if (u.a.size() != v.a.size()) return false;
  int d = u.a[0] - v.a[0];
  for (size_t i = 0; i < u.a.size(); ++i)
    if (u.a[i] - v.a[i] != d || u.b[i] - v.b[i] != d) return false;
  return true;
}

bool coords_in_delta(const ApartmentVertex& v) {
  check_coords(v);
  int mn = v.a[0] + v.b[0], mx = mn;
  for (size_t i = 1; i < v.a.size(); ++i) {
    int s = v.a[i] + v.b[i];
    mn = std::min(mn, s);
    mx = std::max(mx, s);
  }
  // Pair sums must fit in {mu, mu + 1}; a genuine spread needs mu odd so
  // that an even homothety shift lands the sums in {1, 2}.
  if (mx == mn) return true;
  return mx - mn == 1 && ((mn % 2) + 2) % 2 == 1;
}

lat::Lattice realize_vertex(const ApartmentVertex& v, unsigned q) {
  check_coords(v);
  std::vector<int> exps(v.a);
  exps.insert(exps.end(), v.b.begin(), v.b.end());
  return realize_exps(q, exps);
}

lat::Lattice realize_vertex_in_basis(const lat::PolyMat& basis_cols,
                                     int bshift, const ApartmentVertex& v) {
  check_coords(v);
  if (basis_cols.cols != 2 * static_cast<int>(v.a.size()))
    throw DimensionMismatch("basis does not match the coordinates");
  std::vector<int> exps(v.a);
  exps.insert(exps.end(), v.b.begin(), v.b.end());
  int m0 = *std::min_element(exps.begin(), exps.end());
  for (int& e : exps) e -= m0;
  lat::PolyMat gens =
      lat::pm_mul(basis_cols, lat::PolyMat::diag_powers(basis_cols.q, exps));
  return lat::lattice_from_generators(gens, bshift + m0);
}

std::string SpChamber::encode() const {
  std::string s = base.encode();
  for (const auto& S : flag.chain) {
    s += '|';
    s += S.encode();
  }
  return s;
}

bool SpChamber::operator<(const SpChamber& o) const {
  if (!(base == o.base)) return base < o.base;
  return std::lexicographical_compare(flag.chain.begin(), flag.chain.end(),
                                      o.flag.chain.begin(),
                                      o.flag.chain.end());
}

std::vector<lat::Lattice> sp_chamber_chain(const SpChamber& c) {
  int n = c.base.rep.n / 2;
  lat::Lattice L0 = sp_primitive_rep(c.base, n, c.base.rep.q);
  lat::Window W = lat::make_window(L0, lat::scale(L0, 1));
  std::vector<lat::Lattice> chain;
  chain.reserve(c.flag.chain.size());
  for (const auto& S : c.flag.chain) chain.push_back(lat::window_lift(W, S));
  return chain;
}

std::vector<lat::HomothetyClass> sp_chamber_vertices(const SpChamber& c) {
  std::vector<lat::HomothetyClass> out{c.base};
  for (const auto& Li : sp_chamber_chain(c))
    out.push_back(lat::HomothetyClass::of(Li));
  return out;
}

SpChamber make_sp_chamber(const lat::Lattice& L0,
                          const std::vector<lat::Lattice>& chain) {
  check_even_rank(L0);
  int n = L0.n / 2;
  if (!is_primitive_lattice(L0))
    throw DomainError("chamber base is not primitive");
  if (static_cast<int>(chain.size()) != n)
    throw DomainError("chamber chain has the wrong length");
  lat::Lattice prev = lat::scale(L0, 1);
  for (const auto& Li : chain) {
    if (!lat::contains(Li, prev) || lat::index_exp(Li, prev) != 1)
      throw DomainError("chamber chain steps must have index q");
    if (!pairing_in_pi(Li))
      throw DomainError("chamber chain member pairs outside piO");
    prev = Li;
  }
  if (!lat::contains(L0, prev) || lat::index_exp(L0, prev) != n)
    throw DomainError("chamber top step must have index q^n");

  lat::Window W = lat::make_window(L0, lat::scale(L0, 1));
  std::vector<gfq::Subspace> coords;
  coords.reserve(chain.size());
  for (const auto& Li : chain) coords.push_back(lat::window_coords(W, Li));
  return SpChamber{lat::HomothetyClass::of(L0),
                   gfq::Flag::make(2 * n, std::move(coords))};
}

SpChamber fundamental_chamber(int n, unsigned q) {
  if (n < 1) throw DomainError("rank must be at least 1");
  lat::Lattice L0 = lat::standard_lattice(q, 2 * n);
  std::vector<lat::Lattice> chain;
  for (int j = 1; j <= n; ++j) {
    std::vector<int> exps(2 * n, 1);
    for (int i = 0; i < j; ++i) exps[i] = 0;
    chain.push_back(realize_exps(q, exps));
  }
  return make_sp_chamber(L0, chain);
}

std::vector<SpChamber> sp_chambers_containing(const lat::HomothetyClass& t,
                                              int n, unsigned q) {
  lat::Lattice L0 = sp_primitive_rep(t, n, q);
  try {
    if (r_delta_formula(n, q) > kEnumCap)
      throw EnumerationTooLarge("too many chambers through the vertex");
  } catch (const OverflowError&) {
    throw EnumerationTooLarge("too many chambers through the vertex");
  }
  lat::Window W = lat::make_window(L0, lat::scale(L0, 1));
  gfq::GramForm Gk = residue_gram(W);
  std::vector<SpChamber> out;
  lat::HomothetyClass base = lat::HomothetyClass::of(L0);
  for (auto& f : gfq::enumerate_isotropic_flags(Gk))
    out.push_back(SpChamber{base, std::move(f)});
  return out;
}

std::vector<SpChamber> sp_chambers_across(const SpChamber& c, int slot) {
  int n = c.base.rep.n / 2;
  unsigned q = c.base.rep.q;
  if (slot < 0 || slot > n) throw DomainError("vertex slot out of range");
  if (static_cast<int>(c.flag.chain.size()) != n)
    throw DomainError("chamber flag is not maximal");
  lat::Lattice L0 = sp_primitive_rep(c.base, n, q);
  std::vector<lat::Lattice> chain = sp_chamber_chain(c);

  std::vector<SpChamber> out;
  [[maybe_unused]] bool saw_self = false;

  if (slot == 0) {
    // Replacement bases are the primitive lattices strictly between L_n and
    // pi^{-1} L_1.
    lat::Window W =
        lat::make_window(lat::scale(chain[0], -1), chain[n - 1]);
    assert(W.digit_dim == n + 1);
    for (const auto& S : gfq::enumerate_subspaces(n + 1, n, q)) {
      lat::Lattice N = lat::window_lift(W, S);
      if (!is_primitive_lattice(N)) continue;
      SpChamber ch = make_sp_chamber(N, chain);
      if (ch == c) saw_self = true;
      out.push_back(std::move(ch));
    }
    assert(saw_self);
    return out;
  }

  lat::Window W0 = lat::make_window(L0, lat::scale(L0, 1));
  gfq::GramForm Gk = residue_gram(W0);
  gfq::Subspace lo = (slot >= 2) ? c.flag.chain[slot - 2]
                                 : gfq::Subspace::zero(q, 2 * n);
  gfq::Subspace hi = (slot <= n - 1)
                         ? c.flag.chain[slot]
                         : gfq::orthogonal_complement(
                               n >= 2 ? c.flag.chain[n - 2]
                                      : gfq::Subspace::zero(q, 2 * n),
                               Gk);
  assert(hi.dim() - lo.dim() == 2);

  // Two vectors spanning hi over lo; the q+1 replacement subspaces are
  // lo + a projective line through them.
  const FieldTable& F = FieldTable::get(q);
  std::vector<std::vector<felt>> comp;
  gfq::Subspace grow = lo;
  for (int r = 0; r < hi.basis.rows && comp.size() < 2; ++r) {
    std::vector<felt> v(hi.basis.a.begin() + r * hi.basis.cols,
                        hi.basis.a.begin() + (r + 1) * hi.basis.cols);
    if (grow.contains_vector(v)) continue;
    comp.push_back(v);
    std::vector<std::vector<felt>> rows;
    for (int i = 0; i < grow.basis.rows; ++i)
      rows.emplace_back(grow.basis.a.begin() + i * grow.basis.cols,
                        grow.basis.a.begin() + (i + 1) * grow.basis.cols);
    rows.push_back(v);
    grow = gfq::Subspace::from_vectors(rows_matrix(q, 2 * n, rows));
  }
  assert(comp.size() == 2);

  std::vector<std::pair<felt, felt>> proj;
  proj.emplace_back(1, 0);
  for (unsigned a = 0; a < q; ++a) proj.emplace_back(static_cast<felt>(a), 1);
  for (auto [al, be] : proj) {
    std::vector<felt> v(2 * n, 0);
    for (int i = 0; i < 2 * n; ++i)
      v[i] = F.add(F.mul(al, comp[0][i]), F.mul(be, comp[1][i]));
    std::vector<std::vector<felt>> rows;
    for (int i = 0; i < lo.basis.rows; ++i)
      rows.emplace_back(lo.basis.a.begin() + i * lo.basis.cols,
                        lo.basis.a.begin() + (i + 1) * lo.basis.cols);
    rows.push_back(v);
    gfq::Subspace T =
        gfq::Subspace::from_vectors(rows_matrix(q, 2 * n, rows));
    assert(T.dim() == slot && gfq::is_totally_isotropic(T, Gk));
    std::vector<gfq::Subspace> coords = c.flag.chain;
    coords[slot - 1] = T;
    SpChamber ch{c.base, gfq::Flag::make(2 * n, std::move(coords))};
    if (ch == c) saw_self = true;
    out.push_back(std::move(ch));
  }
  assert(saw_self);
  return out;
}

std::uint64_t r_delta_formula(int n, unsigned q) {
  if (n < 1) throw DomainError("rank must be at least 1");
  if (q < 2) throw DomainError("q must be at least 2");
  std::uint64_t r = 1;
  for (int m = 1; m <= n; ++m)
    r = checked_mul(r, gfq::gaussian_binomial(2 * m, 1, q));
  return r;
}

std::uint64_t omega_delta_formula(int n, unsigned q) {
  if (n < 2) throw DomainError("close-vertex counts need n >= 2");
  return checked_mul(gfq::gaussian_binomial(2 * n, 1, q),
                     static_cast<std::uint64_t>(q));
}

std::uint64_t coset_count_sp(int n, unsigned q) {
  return omega_delta_formula(n, q);
}

SpRelationReport verify_sp_relation(int n, unsigned q) {
  if (n < 2) throw DomainError("relation needs n >= 2");
  SpRelationReport r;
  r.n = n;
  r.q = q;
  r.r_n = r_delta_formula(n, q);
  r.r_nm1 = r_delta_formula(n - 1, q);
  r.omega = omega_delta_formula(n, q);
  r.lhs = checked_mul(static_cast<std::uint64_t>(q), r.r_n);
  r.rhs = checked_mul(r.r_nm1, r.omega);
  r.ok = r.lhs == r.rhs;
  return r;
}

SpClosePair make_sp_close_pair(const lat::HomothetyClass& t,
                               const lat::HomothetyClass& tp) {
  int N = t.rep.n;
  if (N < 4 || N % 2 != 0)
    throw DomainError("close pairs need n >= 2");
  int n = N / 2;
  unsigned q = t.rep.q;
  check_vertex(tp, n, q, 2);
  if (t == tp) throw NotClose("a vertex is not close to itself");
  lat::Lattice L = sp_primitive_rep(t, n, q);

  int det = tp.rep.det_exp();
  if (det % N != 0)
    throw NotClose("the other class has no primitive representative");
  lat::Lattice M = lat::scale(tp.rep, -det / N);
  if (!is_primitive_lattice(M))
    throw NotClose("the other class has no primitive representative");

  lat::Lattice cup = lat::lattice_sum(L, M);
  if (lat::index_exp(cup, L) != 1 || lat::index_exp(cup, M) != 1)
    throw NotClose("index criterion fails");

#ifndef NDEBUG
  std::vector<int> rp = lat::relative_position(L, M);
  assert(rp.front() == -1 && rp.back() == 1);
  for (size_t i = 1; i + 1 < rp.size(); ++i) assert(rp[i] == 0);
#endif
  return SpClosePair{t, tp, L, M};
}

SpClosePair standard_sp_close_pair(int n, unsigned q) {
  if (n < 2) throw DomainError("close pairs need n >= 2");
  lat::Lattice L = lat::standard_lattice(q, 2 * n);
  std::vector<int> exps(2 * n, 0);
  exps[0] = -1;
  exps[n] = 1;
  lat::Lattice M = realize_exps(q, exps);
  return make_sp_close_pair(lat::HomothetyClass::of(L),
                            lat::HomothetyClass::of(M));
}

std::vector<lat::Lattice> sp_witness_chain(const SpClosePair& p) {
  check_sp_pair(p);
  unsigned q = p.L.q;
  int n = p.L.n / 2;
  lat::Window W = between_window(p);
  gfq::GramForm Gk = residue_gram(W);

  // Greedy maximal isotropic flag: extend by any vector of the orthogonal
  // complement not already in the subspace.
  std::vector<lat::Lattice> chain{W.bottom};
  gfq::Subspace S = gfq::Subspace::zero(q, W.digit_dim);
  for (int i = 1; i <= n - 1; ++i) {
    gfq::Subspace perp = gfq::orthogonal_complement(S, Gk);
    bool extended = false;
    for (int r = 0; r < perp.basis.rows && !extended; ++r) {
      std::vector<felt> v(perp.basis.a.begin() + r * perp.basis.cols,
                          perp.basis.a.begin() + (r + 1) * perp.basis.cols);
      if (S.contains_vector(v)) continue;
      std::vector<std::vector<felt>> rows;
      for (int k = 0; k < S.basis.rows; ++k)
        rows.emplace_back(S.basis.a.begin() + k * S.basis.cols,
                          S.basis.a.begin() + (k + 1) * S.basis.cols);
      rows.push_back(v);
      S = gfq::Subspace::from_vectors(rows_matrix(q, W.digit_dim, rows));
      extended = true;
    }
    assert(extended && S.dim() == i && gfq::is_totally_isotropic(S, Gk));
    chain.push_back(lat::window_lift(W, S));
  }

  // The chain must complete to chambers over both base vertices: that is
  // the length-one gallery.
  make_sp_chamber(p.L, chain);
  make_sp_chamber(p.M, chain);
  return chain;
}

SpCloseSurvey sp_close_survey(const lat::HomothetyClass& t, int n, unsigned q,
                              const lat::EnumOptions& opt) {
  check_vertex(t, n, q, 2);
  lat::Lattice L = sp_primitive_rep(t, n, q);
  SpCloseSurvey out;
  int N = 2 * n;
  for (const auto& cls : sl::close_vertices(t, N, q, opt)) {
    ++out.ambient;
    int det = cls.rep.det_exp();
    if (det % N != 0) {
      ++out.rejected_type;
      continue;
    }
    lat::Lattice M = lat::scale(cls.rep, -det / N);
    if (!is_primitive_lattice(M)) {
      ++out.rejected_nonprimitive;
      continue;
    }
    sp_witness_chain(SpClosePair{t, cls, L, M});
    out.close.push_back(cls);
  }
  return out;
}

std::vector<lat::HomothetyClass> sp_close_vertices(
    const lat::HomothetyClass& t, int n, unsigned q,
    const lat::EnumOptions& opt) {
  return sp_close_survey(t, n, q, opt).close;
}

std::uint64_t sp_gallery_multiplicity(const SpClosePair& p) {
  check_sp_pair(p);
  lat::Window W = between_window(p);
  gfq::GramForm Gk = residue_gram(W);
  return gfq::enumerate_isotropic_flags(Gk).size();
}

SpCloseComplex sp_close_complex(const SpClosePair& p) {
  check_sp_pair(p);
  unsigned q = p.L.q;
  int n = p.L.n / 2;
  lat::Window W = between_window(p);
  int d = W.digit_dim;
  gfq::GramForm Gk = residue_gram(W);
  sph::Complex building = sph::build_C_building(n - 1, q);

  std::unordered_map<std::string, int> codomain_index;
  for (int i = 0; i < building.vertex_count(); ++i)
    codomain_index.emplace(building.labels[i], i);

  // Rewriting digit vectors in a symplectic basis of the residue form
  // carries isotropic subspaces to isotropic subspaces of the standard
  // form: rows transform by the inverse transpose of the basis matrix.
  gfq::MatrixK P = gfq::symplectic_basis(Gk);
  gfq::MatrixK Q = gfq::mat_transpose(mat_inverse(P));

  std::vector<std::string> labels;
  std::vector<int> to_flags;
  std::unordered_map<std::string, int> vertex_index;
  for (int g = 1; g <= n - 1; ++g) {
    for (const auto& S : gfq::enumerate_subspaces(d, g, q)) {
      if (!gfq::is_totally_isotropic(S, Gk)) continue;
      lat::Lattice N = lat::window_lift(W, S);
      assert(pairing_in_pi(N));
      labels.push_back(lat::HomothetyClass::of(N).encode());
      vertex_index.emplace(S.encode(), static_cast<int>(labels.size()) - 1);
      gfq::Subspace Sstd =
          gfq::Subspace::from_vectors(gfq::mat_mul(S.basis, Q));
      auto it = codomain_index.find(Sstd.encode());
      assert(it != codomain_index.end());
      to_flags.push_back(it->second);
    }
  }

  std::vector<std::vector<int>> facets;
  for (const auto& f : gfq::enumerate_isotropic_flags(Gk)) {
    std::vector<int> facet;
    facet.reserve(f.chain.size());
    for (const auto& S : f.chain) facet.push_back(vertex_index.at(S.encode()));
    facets.push_back(std::move(facet));
  }

  sph::Complex cx = sph::make_complex(std::move(labels), std::move(facets));
  return SpCloseComplex{cx, sph::VertexMap{cx, building, to_flags}};
}

GspElement make_gsp(const lat::PolyMat& mat, int mshift) {
  if (mat.rows != mat.cols || mat.rows < 2 || mat.rows % 2 != 0)
    throw DomainError("similitudes need even square matrices");
  unsigned q = mat.q;
  int n = mat.rows / 2;
  const FieldTable& F = FieldTable::get(q);
  lat::PolyMat A = lat::pm_mul(lat::pm_transpose(mat),
                               lat::pm_mul(standard_j_mat(q, n), mat));
  Poly nu = A.at(0, n);
  if (lat::poly_is_zero(nu)) throw DomainError("matrix is not a similitude");
  Poly mnu = lat::poly_scale(F, F.neg(1), nu);
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) {
      const Poly* want = nullptr;
      if (j == i + n)
        want = &nu;
      else if (i == j + n)
        want = &mnu;
      if (want ? !(A.at(i, j) == *want) : !lat::poly_is_zero(A.at(i, j)))
        throw DomainError("matrix is not a similitude");
    }
  }
  GspElement g;
  g.mat = mat;
  g.mshift = mshift;
  g.nu = nu;
  g.nu_ord = 2 * mshift + lat::poly_val(nu);
  g.n = n;
  return g;
}

GspElement gsp_scalar(unsigned q, int n, int u) {
  return make_gsp(lat::PolyMat::identity(q, 2 * n), u);
}

GspElement gsp_eta(unsigned q, int n) {
  lat::PolyMat m(q, 2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    m.at(n + i, i) = Poly{1};
    m.at(i, n + i) = lat::monomial(1);
  }
  return make_gsp(m, 0);
}

GspElement gsp_diag(unsigned q, const std::vector<int>& s) {
  if (s.empty()) throw DomainError("rank must be at least 1");
  std::vector<int> exps(s);
  for (int e : s) exps.push_back(-e);
  int m0 = *std::min_element(exps.begin(), exps.end());
  for (int& e : exps) e -= m0;
  return make_gsp(lat::PolyMat::diag_powers(q, exps), m0);
}

GspElement gsp_transvection(unsigned q, int n, const std::vector<lat::Poly>& v,
                            const lat::Poly& c) {
  if (static_cast<int>(v.size()) != 2 * n)
    throw DimensionMismatch("transvection vector has the wrong length");
  const FieldTable& F = FieldTable::get(q);
  lat::PolyMat m = lat::PolyMat::identity(q, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    // <e_j, v> = v_{n+j} for j < n, -v_{j-n} otherwise
    Poly pj = (j < n) ? v[n + j] : lat::poly_scale(F, F.neg(1), v[j - n]);
    Poly cv = lat::poly_mul(F, c, pj);
    for (int i = 0; i < 2 * n; ++i)
      m.at(i, j) =
          lat::poly_add(F, m.at(i, j), lat::poly_mul(F, cv, v[i]));
  }
  return make_gsp(m, 0);
}

GspElement gsp_mul(const GspElement& g, const GspElement& h) {
  return make_gsp(lat::pm_mul(g.mat, h.mat), g.mshift + h.mshift);
}

int gsp_det_ord(const GspElement& g) { return g.n * g.nu_ord; }

lat::Lattice gsp_apply(const GspElement& g, const lat::Lattice& L) {
  return lat::apply_matrix(g.mat, g.mshift, L);
}

std::pair<lat::PolyMat, int> gsp_basis_matrix(const GspElement& g) {
  const FieldTable& F = FieldTable::get(g.mat.q);
  int n = g.n;
  int val = lat::poly_val(g.nu);
  Poly winv = lat::poly_unit_inv(F, lat::poly_div_exact(g.nu, val));
  // First block nu^{-1} g u_i = t^{-mshift-val} (w^{-1} g u_i), second block
  // g w_i = t^{mshift} g w_i; fold to a common scale.
  int s1 = -g.mshift - val;
  int s2 = g.mshift;
  int b = std::min(s1, s2);
  lat::PolyMat B(g.mat.q, 2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < n; ++j)
      B.at(i, j) = lat::poly_shift_up(
          lat::poly_mul(F, winv, g.mat.at(i, j)), s1 - b);
    for (int j = n; j < 2 * n; ++j)
      B.at(i, j) = lat::poly_shift_up(g.mat.at(i, j), s2 - b);
  }
  return {B, b};
}

ApartmentVertex gsp_act(const GspElement& g, const ApartmentVertex& v) {
  check_coords(v);
  if (static_cast<int>(v.a.size()) != g.n)
    throw DimensionMismatch("element and vertex ranks differ");
  ApartmentVertex out;
  out.basis = v.basis + "_g";
  out.a = v.a;
  for (int& e : out.a) e += g.nu_ord;
  out.b = v.b;
  return out;
}

bool gsp_image_in_delta(const GspElement& g, const ApartmentVertex& v) {
  return coords_in_delta(gsp_act(g, v));
}

SpChamber gsp_act_chamber(const GspElement& g, const SpChamber& c) {
  int n = c.base.rep.n / 2;
  unsigned q = c.base.rep.q;
  if (g.n != n || g.mat.q != q)
    throw DomainError("element and chamber do not match");
  lat::Lattice L0 = sp_primitive_rep(c.base, n, q);
  std::vector<lat::Lattice> chain = sp_chamber_chain(c);

  if (g.nu_ord % 2 == 0) {
    int r = g.nu_ord / 2;
    std::vector<lat::Lattice> nchain;
    for (const auto& Li : chain)
      nchain.push_back(lat::scale(gsp_apply(g, Li), -r));
    return make_sp_chamber(lat::scale(gsp_apply(g, L0), -r), nchain);
  }

  // Odd similitude order: complete the chain to a Xi_{2n} chamber, then
  // re-base at the image of the type-n vertex.
  int r = (g.nu_ord - 1) / 2;
  lat::Window Wc = lat::make_window(L0, chain[n - 1]);
  assert(Wc.digit_dim == n);
  std::vector<lat::Lattice> ext;
  for (int k = 1; k <= n - 1; ++k) {
    gfq::MatrixK rows(q, k, n);
    for (int i = 0; i < k; ++i) rows.at(i, i) = 1;
    ext.push_back(lat::window_lift(Wc, gfq::Subspace::from_vectors(rows)));
  }
  lat::Lattice nbase = lat::scale(gsp_apply(g, chain[n - 1]), -(r + 1));
  std::vector<lat::Lattice> nchain;
  for (const auto& Li : ext)
    nchain.push_back(lat::scale(gsp_apply(g, Li), -r));
  nchain.push_back(lat::scale(gsp_apply(g, L0), -r));
  return make_sp_chamber(nbase, nchain);
}

GspElement transitivity_witness(const ApartmentVertex& v,
                                const ApartmentVertex& w, unsigned q) {
  if (!coords_is_special(v) || !coords_is_special(w))
    throw DomainError("transitivity witnesses need special vertices");
  if (v.a.size() != w.a.size())
    throw DimensionMismatch("vertex ranks differ");
  int n = static_cast<int>(v.a.size());
  int muv = v.a[0] + v.b[0];
  int muw = w.a[0] + w.b[0];

  ApartmentVertex cur = v;
  GspElement g = gsp_scalar(q, n, 0);
  if (((muw - muv) % 2 + 2) % 2 == 1) {
    // eta sends (a; b) to (b + 1; a), flipping the parity of mu.
    g = gsp_eta(q, n);
    ApartmentVertex next;
    next.a = cur.b;
    for (int& e : next.a) e += 1;
    next.b = cur.a;
    cur = next;
  }
  int u = (muw - (cur.a[0] + cur.b[0])) / 2;
  std::vector<int> s(v.a.size());
  for (int i = 0; i < n; ++i) s[i] = w.a[i] - cur.a[i] - u;
  return gsp_mul(gsp_scalar(q, n, u), gsp_mul(gsp_diag(q, s), g));
}

std::pair<sl::SLChamber, sl::SLChamber> lift_gallery(const SpChamber& C,
                                                     const SpChamber& Cp) {
  int N = C.base.rep.n;
  unsigned q = C.base.rep.q;
  if (Cp.base.rep.n != N || Cp.base.rep.q != q)
    throw DomainError("chambers from different buildings");
  int n = N / 2;
  lat::Lattice L0 = sp_primitive_rep(C.base, n, q);
  lat::Lattice L0p = sp_primitive_rep(Cp.base, n, q);
  std::vector<lat::Lattice> chain = sp_chamber_chain(C);
  std::vector<lat::Lattice> chainp = sp_chamber_chain(Cp);

  std::vector<int> a = diag_coords(L0);
  std::vector<int> ap = diag_coords(L0p);
  std::vector<std::vector<int>> cc, ccp;
  for (const auto& Li : chain) cc.push_back(diag_coords(Li));
  for (const auto& Li : chainp) ccp.push_back(diag_coords(Li));

  int j = -1, differ = 0;
  if (!(L0 == L0p)) {
    j = 0;
    ++differ;
  }
  for (int i = 0; i < n; ++i) {
    if (!(chain[i] == chainp[i])) {
      j = i + 1;
      ++differ;
    }
  }
  if (differ > 1) throw NotAdjacent("chambers share no codimension-one face");

  const std::vector<int>& b = cc[n - 1];
#ifndef NDEBUG
  for (int i = 0; i < n; ++i) {
    assert(a[n + i] == -a[i]);
    assert(b[n + i] == 1 - b[i]);
  }
#endif

  if (differ == 0) {
    // C = C': any completion serves for both ends.
    std::vector<lat::Lattice> full = chain;
    for (const auto& cv : interpolate_coords(b, a))
      full.push_back(realize_exps(q, cv));
    sl::SLChamber D = build_sl_chamber(L0, full);
    return {D, D};
  }

  if (1 <= j && j <= n - 1) {
    // The shared interpolation from L_n to L_0 completes both chains.
    std::vector<std::vector<int>> mid = interpolate_coords(b, a);
    std::vector<lat::Lattice> full = chain, fullp = chainp;
    for (const auto& cv : mid) {
      full.push_back(realize_exps(q, cv));
      fullp.push_back(realize_exps(q, cv));
    }
    return {build_sl_chamber(L0, full), build_sl_chamber(L0p, fullp)};
  }

  if (j == n) {
    std::vector<lat::Lattice> full = chain, fullp = chainp;
    if (n >= 2) {
      const std::vector<int>& bp = ccp[n - 1];
      std::vector<int> cmin(2 * n);
      for (int i = 0; i < 2 * n; ++i) cmin[i] = std::min(b[i], bp[i]);
      lat::Lattice Lsum = realize_exps(q, cmin);
      if (!(Lsum == lat::lattice_sum(chain[n - 1], chainp[n - 1])))
        throw NotAdjacent("tops do not meet in one step");
      full.push_back(Lsum);
      fullp.push_back(Lsum);
      for (const auto& cv : interpolate_coords(cmin, a)) {
        full.push_back(realize_exps(q, cv));
        fullp.push_back(realize_exps(q, cv));
      }
    }
    return {build_sl_chamber(L0, full), build_sl_chamber(L0p, fullp)};
  }

  // j = 0: the bases differ and the shared chain runs up to their
  // intersection.
  std::vector<int> cmax(2 * n);
  for (int i = 0; i < 2 * n; ++i) cmax[i] = std::max(a[i], ap[i]);
  std::vector<lat::Lattice> full = chain;
  if (n >= 2) {
    lat::Lattice Lcap = realize_exps(q, cmax);
    if (!(Lcap == lat::lattice_intersect(L0, L0p)))
      throw NotAdjacent("bases do not meet in one step");
    for (const auto& cv : interpolate_coords(b, cmax))
      full.push_back(realize_exps(q, cv));
    full.push_back(Lcap);
  }
  return {build_sl_chamber(L0, full), build_sl_chamber(L0p, full)};
}

}  // namespace bldg::sp
