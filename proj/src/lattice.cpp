#include "bldg/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>

#include "bldg/common.hpp"

namespace bldg::lat {

namespace {

// Maximum degree accepted in generator input.  Leaves kMaxDetExp headroom in
// the kWorkPrec window so every certified digit of the output is genuine.
constexpr int kMaxInputDeg = kWorkPrec - kMaxDetExp - 1;

Poly high_part(const Poly& a, int k) {
  // floor(a / t^k): coefficients from t^k upward
  if (static_cast<int>(a.size()) <= k) return {};
  return poly_trim(Poly(a.begin() + k, a.end()));
}

}  // namespace

Poly poly_trim(Poly a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
  return a;
}

Poly poly_make(std::initializer_list<unsigned> coeffs) {
  Poly a;
  for (unsigned c : coeffs) a.push_back(static_cast<felt>(c));
  return poly_trim(std::move(a));
}

Poly monomial(int k, felt c) {
  if (k < 0) throw DomainError("monomial exponent must be nonnegative");
  if (c == 0) return {};
  if (k >= kWorkPrec) throw PrecisionOverflow("monomial beyond work precision");
  Poly a(static_cast<size_t>(k) + 1, 0);
  a.back() = c;
  return a;
}

int poly_val(const Poly& a) {
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i]) return static_cast<int>(i);
  return kWorkPrec;
}

int poly_deg(const Poly& a) { return static_cast<int>(a.size()) - 1; }

bool poly_is_zero(const Poly& a) { return a.empty(); }

Poly poly_add(const FieldTable& F, const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < r.size(); ++i) {
    felt x = i < a.size() ? a[i] : 0;
    felt y = i < b.size() ? b[i] : 0;
    r[i] = F.add(x, y);
  }
  return poly_trim(std::move(r));
}

Poly poly_sub(const FieldTable& F, const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < r.size(); ++i) {
    felt x = i < a.size() ? a[i] : 0;
    felt y = i < b.size() ? b[i] : 0;
    r[i] = F.sub(x, y);
  }
  return poly_trim(std::move(r));
}

Poly poly_mul(const FieldTable& F, const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  size_t n = std::min<size_t>(a.size() + b.size() - 1, kWorkPrec);
  Poly r(n, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (size_t j = 0; j < b.size() && i + j < n; ++j)
      r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
  }
  return poly_trim(std::move(r));
}

Poly poly_scale(const FieldTable& F, felt c, const Poly& a) {
  if (c == 0) return {};
  Poly r = a;
  for (auto& x : r) x = F.mul(c, x);
  return poly_trim(std::move(r));
}

Poly poly_shift_up(const Poly& a, int k) {
  if (k < 0) throw DomainError("negative shift");
  if (a.empty()) return {};
  if (poly_deg(a) + k >= kWorkPrec)
    throw PrecisionOverflow("shift beyond work precision");
  Poly r(a.size() + static_cast<size_t>(k), 0);
  std::copy(a.begin(), a.end(), r.begin() + k);
  return r;
}

Poly poly_div_exact(const Poly& a, int k) {
  if (k < 0) throw DomainError("negative divisor exponent");
  if (a.empty()) return {};
  if (poly_val(a) < k)
    throw DomainError("polynomial not divisible by t^" + std::to_string(k));
  return Poly(a.begin() + k, a.end());
}

Poly poly_mod(const Poly& a, int m) {
  if (m < 0) throw DomainError("negative truncation point");
  if (static_cast<int>(a.size()) <= m) return a;
  return poly_trim(Poly(a.begin(), a.begin() + m));
}

Poly poly_unit_inv(const FieldTable& F, const Poly& a) {
  if (poly_val(a) != 0) throw DomainError("inverse of a non-unit");
  felt c0 = F.inv(a[0]);
  Poly b(kWorkPrec, 0);
  b[0] = c0;
  for (int k = 1; k < kWorkPrec; ++k) {
    felt s = 0;
    for (int i = 1; i <= k && i < static_cast<int>(a.size()); ++i)
      s = F.add(s, F.mul(a[static_cast<size_t>(i)], b[static_cast<size_t>(k - i)]));
    b[static_cast<size_t>(k)] = F.mul(F.neg(s), c0);
  }
  return poly_trim(std::move(b));
}

std::string poly_str(const Poly& a) {
  if (a.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    if (!s.empty()) s += "+";
    if (i == 0) {
      s += std::to_string(a[i]);
    } else {
      if (a[i] != 1) s += std::to_string(a[i]);
      s += "t";
      if (i > 1) s += "^" + std::to_string(i);
    }
  }
  return s;
}

PolyMat PolyMat::identity(unsigned q, int n) {
  PolyMat m(q, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = monomial(0);
  return m;
}

PolyMat PolyMat::diag_powers(unsigned q, const std::vector<int>& exps) {
  int n = static_cast<int>(exps.size());
  PolyMat m(q, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = monomial(exps[static_cast<size_t>(i)]);
  return m;
}

PolyMat pm_mul(const PolyMat& A, const PolyMat& B) {
  if (A.cols != B.rows || A.q != B.q)
    throw DimensionMismatch("matrix product shape mismatch");
  const FieldTable& F = FieldTable::get(A.q);
  PolyMat C(A.q, A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const Poly& aik = A.at(i, k);
      if (aik.empty()) continue;
      for (int j = 0; j < B.cols; ++j) {
        if (B.at(k, j).empty()) continue;
        C.at(i, j) = poly_add(F, C.at(i, j), poly_mul(F, aik, B.at(k, j)));
      }
    }
  return C;
}

PolyMat pm_transpose(const PolyMat& A) {
  PolyMat T(A.q, A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
  return T;
}

gfq::MatrixK pm_mod_t(const PolyMat& A) {
  gfq::MatrixK m(A.q, A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      m.at(i, j) = A.at(i, j).empty() ? 0 : A.at(i, j)[0];
  return m;
}

int Lattice::det_exp() const {
  return n * shift + std::accumulate(diag.begin(), diag.end(), 0);
}

std::string Lattice::encode() const {
  std::string s = "t^(" + std::to_string(shift) + ")[";
  for (int i = 0; i < n; ++i) {
    if (i) s += ";";
    for (int j = 0; j < n; ++j) {
      if (j) s += ",";
      s += poly_str(G.at(i, j));
    }
  }
  s += "]";
  return s;
}

bool Lattice::operator<(const Lattice& o) const {
  if (n != o.n) return n < o.n;
  if (shift != o.shift) return shift < o.shift;
  return G.a < o.G.a;
}

namespace {

// In-place column Hermite reduction.  On return M is n x n lower triangular
// with diagonal exactly t^{diag[i]}, entries below the diagonal of degree
// < diag[row], and every column beyond n eliminated.
std::vector<int> hermite_in_place(PolyMat& M) {
  const FieldTable& F = FieldTable::get(M.q);
  int n = M.rows, m = M.cols;
  if (m < n) throw SingularMatrix("fewer generators than ambient dimension");
  std::vector<int> diag(static_cast<size_t>(n), 0);
  int loss = 0;
  for (int r = 0; r < n; ++r) {
    int best = -1, bestv = kWorkPrec;
    for (int j = r; j < m; ++j) {
      int v = poly_val(M.at(r, j));
      if (v < bestv) {
        bestv = v;
        best = j;
      }
    }
    if (bestv >= kWorkPrec)
      throw SingularMatrix("generators do not span a full-rank lattice");
    if (loss + bestv > kMaxDetExp)
      throw PrecisionOverflow("pivot exponents exceed the certified budget");
    if (best != r)
      for (int i = 0; i < n; ++i) std::swap(M.at(i, best), M.at(i, r));
    diag[static_cast<size_t>(r)] = bestv;
    loss += bestv;
    Poly unit = poly_div_exact(M.at(r, r), bestv);
    Poly ui = poly_unit_inv(F, unit);
    for (int i = r; i < n; ++i) M.at(i, r) = poly_mul(F, M.at(i, r), ui);
    M.at(r, r) = monomial(bestv);
    for (int j = r + 1; j < m; ++j) {
      if (poly_is_zero(M.at(r, j))) continue;
      Poly f = poly_div_exact(M.at(r, j), bestv);
      for (int i = r + 1; i < n; ++i)
        M.at(i, j) = poly_sub(F, M.at(i, j), poly_mul(F, f, M.at(i, r)));
      M.at(r, j) = {};
    }
  }
  // below-diagonal reduction: entry (i, j) ends up of degree < diag[i]
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) {
      Poly f = high_part(M.at(i, j), diag[static_cast<size_t>(i)]);
      if (poly_is_zero(f)) continue;
      for (int i2 = i; i2 < n; ++i2)
        M.at(i2, j) = poly_sub(F, M.at(i2, j), poly_mul(F, f, M.at(i2, i)));
    }
  if (m > n) {
    PolyMat sq(M.q, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sq.at(i, j) = M.at(i, j);
    M = std::move(sq);
  }
  return diag;
}

int sum_of(const std::vector<int>& v) {
  return std::accumulate(v.begin(), v.end(), 0);
}

// X with G X = t^{sum(diag)} B for the canonical lower triangular G.  B must
// have polynomial entries; the result is always integral.
PolyMat solve_scaled(const PolyMat& G, const std::vector<int>& diag,
                     const PolyMat& B) {
  const FieldTable& F = FieldTable::get(G.q);
  int n = G.rows;
  if (B.rows != n) throw DimensionMismatch("solve shape mismatch");
  int E = sum_of(diag);
  PolyMat R(B.q, B.rows, B.cols);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < B.cols; ++j)
      R.at(i, j) = poly_is_zero(B.at(i, j)) ? Poly{}
                                            : poly_shift_up(B.at(i, j), E);
  PolyMat X(B.q, n, B.cols);
  for (int j = 0; j < B.cols; ++j)
    for (int i = 0; i < n; ++i) {
      X.at(i, j) = poly_div_exact(R.at(i, j), diag[static_cast<size_t>(i)]);
      for (int i2 = i + 1; i2 < n; ++i2)
        R.at(i2, j) =
            poly_sub(F, R.at(i2, j), poly_mul(F, G.at(i2, i), X.at(i, j)));
    }
  return X;
}

int min_val(const PolyMat& A) {
  int v = kWorkPrec;
  for (const auto& p : A.a) v = std::min(v, poly_val(p));
  return v;
}

// Elementary divisor exponents of a square integral matrix, ascending.  If
// transforms are requested, *uinv and *u satisfy: columns of uinv form a
// basis transform with X = uinv . diag(t^d) . V^{-1}, and u = uinv^{-1}.
// `known` is the number of trustworthy low-order coefficients in X.
std::vector<int> smith_core(PolyMat X, int known, PolyMat* uinv, PolyMat* u) {
  const FieldTable& F = FieldTable::get(X.q);
  if (X.rows != X.cols) throw DimensionMismatch("smith form needs square input");
  int n = X.rows;
  if (uinv) *uinv = PolyMat::identity(X.q, n);
  if (u) *u = PolyMat::identity(X.q, n);
  int certified = known;
  std::vector<int> d(static_cast<size_t>(n), 0);
  for (int k = 0; k < n; ++k) {
    int bi = -1, bj = -1, bestv = kWorkPrec;
    for (int i = k; i < n; ++i)
      for (int j = k; j < n; ++j) {
        int v = poly_val(X.at(i, j));
        if (v < bestv) {
          bestv = v;
          bi = i;
          bj = j;
        }
      }
    if (bestv >= kWorkPrec)
      throw SingularMatrix("matrix is singular over the series ring");
    if (bestv + 1 > certified)
      throw PrecisionOverflow("elementary divisors exceed certified precision");
    if (bi != k) {
      for (int j = 0; j < n; ++j) std::swap(X.at(bi, j), X.at(k, j));
      if (uinv)
        for (int i = 0; i < n; ++i) std::swap(uinv->at(i, bi), uinv->at(i, k));
      if (u)
        for (int j = 0; j < n; ++j) std::swap(u->at(bi, j), u->at(k, j));
    }
    if (bj != k)
      for (int i = 0; i < n; ++i) std::swap(X.at(i, bj), X.at(i, k));
    d[static_cast<size_t>(k)] = bestv;
    Poly unit = poly_div_exact(X.at(k, k), bestv);
    Poly ui = poly_unit_inv(F, unit);
    for (int j = k; j < n; ++j) X.at(k, j) = poly_mul(F, X.at(k, j), ui);
    X.at(k, k) = monomial(bestv);
    if (uinv)
      for (int i = 0; i < n; ++i)
        uinv->at(i, k) = poly_mul(F, uinv->at(i, k), unit);
    if (u)
      for (int j = 0; j < n; ++j) u->at(k, j) = poly_mul(F, u->at(k, j), ui);
    for (int i = k + 1; i < n; ++i) {
      if (poly_is_zero(X.at(i, k))) continue;
      Poly f = poly_div_exact(X.at(i, k), bestv);
      for (int j = k; j < n; ++j)
        X.at(i, j) = poly_sub(F, X.at(i, j), poly_mul(F, f, X.at(k, j)));
      X.at(i, k) = {};
      if (uinv)
        for (int i2 = 0; i2 < n; ++i2)
          uinv->at(i2, k) =
              poly_add(F, uinv->at(i2, k), poly_mul(F, f, uinv->at(i2, i)));
      if (u)
        for (int j = 0; j < n; ++j)
          u->at(i, j) = poly_sub(F, u->at(i, j), poly_mul(F, f, u->at(k, j)));
    }
    for (int j = k + 1; j < n; ++j) {
      if (poly_is_zero(X.at(k, j))) continue;
      Poly g = poly_div_exact(X.at(k, j), bestv);
      for (int i = k + 1; i < n; ++i)
        X.at(i, j) = poly_sub(F, X.at(i, j), poly_mul(F, g, X.at(i, k)));
      X.at(k, j) = {};
    }
    certified -= bestv;
  }
  return d;
}

}  // namespace

Lattice lattice_from_generators(const PolyMat& gens, int shift) {
  if (gens.rows < 1) throw DomainError("lattice needs a positive dimension");
  FieldTable::get(gens.q);
  PolyMat M = gens;
  int minv = kWorkPrec;
  for (auto& p : M.a) {
    p = poly_trim(std::move(p));
    if (poly_deg(p) > kMaxInputDeg)
      throw PrecisionOverflow("generator entries exceed the supported degree");
    minv = std::min(minv, poly_val(p));
  }
  if (minv >= kWorkPrec)
    throw SingularMatrix("generators do not span a full-rank lattice");
  if (minv > 0) {
    for (auto& p : M.a)
      if (!p.empty()) p = poly_div_exact(p, minv);
    shift += minv;
  }
  Lattice L;
  L.q = gens.q;
  L.n = gens.rows;
  L.shift = shift;
  L.diag = hermite_in_place(M);
  L.G = std::move(M);
  if (min_val(L.G) != 0)
    throw Error("internal: canonical form lost its unit entry");
  return L;
}

Lattice standard_lattice(unsigned q, int n) {
  if (n < 1) throw DomainError("lattice needs a positive dimension");
  Lattice L;
  L.q = q;
  L.n = n;
  L.shift = 0;
  L.G = PolyMat::identity(q, n);
  L.diag.assign(static_cast<size_t>(n), 0);
  return L;
}

Lattice scale(const Lattice& L, int k) {
  Lattice r = L;
  r.shift += k;
  return r;
}

namespace {

void check_same_space(const Lattice& A, const Lattice& B) {
  if (A.q != B.q || A.n != B.n)
    throw DimensionMismatch("lattices live in different spaces");
}

}  // namespace

bool contains(const Lattice& outer, const Lattice& inner) {
  check_same_space(outer, inner);
  PolyMat X = solve_scaled(outer.G, outer.diag, inner.G);
  int E = sum_of(outer.diag);
  int threshold = E - (inner.shift - outer.shift);
  if (threshold > kWorkPrec - E - 1)
    throw PrecisionOverflow("containment test beyond certified precision");
  return min_val(X) >= threshold;
}

int index_exp(const Lattice& outer, const Lattice& inner) {
  if (!contains(outer, inner)) throw NotContained("inner is not a sublattice");
  return inner.det_exp() - outer.det_exp();
}

std::vector<int> relative_position(const Lattice& A, const Lattice& B) {
  check_same_space(A, B);
  PolyMat X = solve_scaled(A.G, A.diag, B.G);
  int E = sum_of(A.diag);
  int minv = min_val(X);
  if (minv >= kWorkPrec)
    throw SingularMatrix("transition matrix is singular");
  if (minv > 0)
    for (auto& p : X.a)
      if (!p.empty()) p = poly_div_exact(p, minv);
  auto d = smith_core(std::move(X), kWorkPrec - E - minv, nullptr, nullptr);
  int base = minv + (B.shift - A.shift) - E;
  for (auto& x : d) x += base;
  return d;
}

Lattice lattice_sum(const Lattice& A, const Lattice& B) {
  check_same_space(A, B);
  int s = std::min(A.shift, B.shift);
  int n = A.n;
  PolyMat gens(A.q, n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gens.at(i, j) = poly_is_zero(A.G.at(i, j))
                          ? Poly{}
                          : poly_shift_up(A.G.at(i, j), A.shift - s);
      gens.at(i, n + j) = poly_is_zero(B.G.at(i, j))
                              ? Poly{}
                              : poly_shift_up(B.G.at(i, j), B.shift - s);
    }
  return lattice_from_generators(gens, s);
}

Lattice dual_lattice(const Lattice& L) {
  int E = sum_of(L.diag);
  PolyMat adj = solve_scaled(L.G, L.diag, PolyMat::identity(L.q, L.n));
  return lattice_from_generators(pm_transpose(adj), -L.shift - E);
}

Lattice lattice_intersect(const Lattice& A, const Lattice& B) {
  check_same_space(A, B);
  return dual_lattice(lattice_sum(dual_lattice(A), dual_lattice(B)));
}

Lattice apply_matrix(const PolyMat& g, int gshift, const Lattice& L) {
  if (g.rows != L.n || g.cols != L.n || g.q != L.q)
    throw DimensionMismatch("matrix does not act on this space");
  return lattice_from_generators(pm_mul(g, L.G), gshift + L.shift);
}

int vertex_type(const Lattice& L, int modulus) {
  if (modulus < 1) throw DomainError("type modulus must be positive");
  int t = L.det_exp() % modulus;
  return t < 0 ? t + modulus : t;
}

HomothetyClass HomothetyClass::of(const Lattice& L) {
  HomothetyClass c;
  c.rep = L;
  c.rep.shift = 0;
  return c;
}

Lattice adjacent_representative(const Lattice& L, const HomothetyClass& c) {
  // exponents of c.rep relative to L; scaling by t^k shifts all of them by k
  std::vector<int> d = relative_position(L, c.rep);
  if (d.back() - d.front() != 1)
    throw NotAdjacent("no scaling of the class lies strictly between tL and L");
  return scale(c.rep, -d.front());
}

int Window::digit_offset(int i) const {
  int o = 0;
  for (int k = 0; k < i; ++k) o += depths[static_cast<size_t>(k)];
  return o;
}

Window make_window(const Lattice& top, const Lattice& bottom) {
  check_same_space(top, bottom);
  if (!contains(top, bottom))
    throw NotContained("window bottom is not inside the top");
  int E = sum_of(top.diag);
  int c = E - (bottom.shift - top.shift);
  PolyMat X = solve_scaled(top.G, top.diag, bottom.G);
  if (c > 0)
    for (auto& p : X.a)
      if (!p.empty()) p = poly_div_exact(p, c);
  if (c < 0)
    for (auto& p : X.a)
      if (!p.empty()) p = poly_shift_up(p, -c);
  PolyMat uinv, u;
  int known = kWorkPrec - E - std::max(c, 0);
  auto d = smith_core(X, known, &uinv, &u);
  Window W;
  W.top = top;
  W.bottom = bottom;
  W.depths = d;
  W.digit_dim = sum_of(d);
  if (W.digit_dim > kMaxDetExp)
    throw PrecisionOverflow("window quotient exceeds the certified budget");
  W.basis = pm_mul(top.G, uinv);
  // entries only matter modulo the bottom; truncate the series tails
  int keep = (bottom.shift - top.shift) + sum_of(bottom.diag);
  if (keep > known - W.digit_dim)
    throw PrecisionOverflow("window basis beyond certified precision");
  for (auto& p : W.basis.a) p = poly_mod(p, keep);
  W.u = std::move(u);
  for (auto& p : W.u.a) p = poly_mod(p, keep);
  return W;
}

gfq::MatrixK window_t_action(const Window& W) {
  gfq::MatrixK T(W.top.q, W.digit_dim, W.digit_dim);
  int ofs = 0;
  for (int i = 0; i < W.top.n; ++i) {
    int di = W.depths[static_cast<size_t>(i)];
    for (int j = 0; j + 1 < di; ++j) T.at(ofs + j + 1, ofs + j) = 1;
    ofs += di;
  }
  return T;
}

Lattice window_lift(const Window& W, const gfq::Subspace& digits) {
  if (digits.ambient != W.digit_dim)
    throw DimensionMismatch("digit vector length does not match the window");
  // t-stability makes the span an O-module, not merely a k-space
  gfq::MatrixK Tt = gfq::mat_transpose(window_t_action(W));
  gfq::MatrixK shifted = gfq::mat_mul(digits.basis, Tt);
  for (int r = 0; r < shifted.rows; ++r) {
    std::vector<felt> v(static_cast<size_t>(W.digit_dim));
    for (int j = 0; j < W.digit_dim; ++j) v[static_cast<size_t>(j)] = shifted.at(r, j);
    if (!digits.contains_vector(v))
      throw DomainError("digit subspace is not closed under t");
  }
  const FieldTable& F = FieldTable::get(W.top.q);
  int n = W.top.n;
  int m = digits.dim();
  PolyMat gens(W.top.q, n, m + n);
  for (int b = 0; b < m; ++b) {
    int ofs = 0;
    for (int i = 0; i < n; ++i) {
      int di = W.depths[static_cast<size_t>(i)];
      Poly coef;
      for (int j = di - 1; j >= 0; --j) {
        felt cdig = digits.basis.at(b, ofs + j);
        if (cdig && static_cast<int>(coef.size()) <= j) coef.resize(j + 1, 0);
        if (cdig) coef[static_cast<size_t>(j)] = cdig;
      }
      if (!coef.empty())
        for (int r = 0; r < n; ++r)
          gens.at(r, b) = poly_add(
              F, gens.at(r, b), poly_mul(F, coef, W.basis.at(r, i)));
      ofs += di;
    }
  }
  int up = W.bottom.shift - W.top.shift;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gens.at(i, m + j) = poly_is_zero(W.bottom.G.at(i, j))
                              ? Poly{}
                              : poly_shift_up(W.bottom.G.at(i, j), up);
  return lattice_from_generators(gens, W.top.shift);
}

gfq::Subspace window_coords(const Window& W, const Lattice& M) {
  if (!contains(W.top, M) || !contains(M, W.bottom))
    throw NotInWindow("lattice is outside the window");
  int E = sum_of(W.top.diag);
  int c = E - (M.shift - W.top.shift);
  PolyMat X = solve_scaled(W.top.G, W.top.diag, M.G);
  if (c > 0)
    for (auto& p : X.a)
      if (!p.empty()) p = poly_div_exact(p, c);
  if (c < 0)
    for (auto& p : X.a)
      if (!p.empty()) p = poly_shift_up(p, -c);
  PolyMat Y = pm_mul(W.u, X);
  int n = W.top.n;
  int maxd = 0;
  for (int d : W.depths) maxd = std::max(maxd, d);
  std::vector<std::vector<felt>> rows;
  for (int col = 0; col < n; ++col) {
    std::vector<Poly> y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      y[static_cast<size_t>(i)] =
          poly_mod(Y.at(i, col), W.depths[static_cast<size_t>(i)]);
    for (int s = 0; s < maxd; ++s) {
      std::vector<felt> row(static_cast<size_t>(W.digit_dim), 0);
      bool nz = false;
      int ofs = 0;
      for (int i = 0; i < n; ++i) {
        int di = W.depths[static_cast<size_t>(i)];
        const Poly& p = y[static_cast<size_t>(i)];
        for (int j = 0; j < di && j < static_cast<int>(p.size()); ++j) {
          row[static_cast<size_t>(ofs + j)] = p[static_cast<size_t>(j)];
          if (p[static_cast<size_t>(j)]) nz = true;
        }
        ofs += di;
      }
      if (nz) rows.push_back(std::move(row));
      for (int i = 0; i < n; ++i) {
        Poly& p = y[static_cast<size_t>(i)];
        if (!p.empty())
          p = poly_mod(poly_shift_up(p, 1), W.depths[static_cast<size_t>(i)]);
      }
    }
  }
  gfq::MatrixK stack(W.top.q, static_cast<int>(rows.size()), W.digit_dim);
  for (size_t r = 0; r < rows.size(); ++r)
    for (int j = 0; j < W.digit_dim; ++j) stack.at(static_cast<int>(r), j) = rows[r][static_cast<size_t>(j)];
  gfq::Subspace S = gfq::Subspace::from_vectors(stack);
  if (S.dim() != index_exp(M, W.bottom))
    throw Error("internal: window coordinates lost rank");
  return S;
}

namespace {

struct QShape {
  std::vector<int> depths;
  std::vector<int> offset;
  int D = 0;

  explicit QShape(const std::vector<int>& d) : depths(d) {
    offset.reserve(d.size());
    for (int x : d) {
      if (x < 0) throw DomainError("negative quotient depth");
      offset.push_back(D);
      D += x;
    }
  }
};

gfq::MatrixK shape_t_action(const QShape& s, unsigned q) {
  gfq::MatrixK T(q, s.D, s.D);
  for (size_t i = 0; i < s.depths.size(); ++i)
    for (int j = 0; j + 1 < s.depths[i]; ++j)
      T.at(s.offset[i] + j + 1, s.offset[i] + j) = 1;
  return T;
}

std::vector<felt> apply_k(const gfq::MatrixK& T, const std::vector<felt>& v) {
  const FieldTable& F = FieldTable::get(T.q);
  std::vector<felt> out(static_cast<size_t>(T.rows), 0);
  for (int i = 0; i < T.rows; ++i) {
    felt s = 0;
    for (int j = 0; j < T.cols; ++j)
      s = F.add(s, F.mul(T.at(i, j), v[static_cast<size_t>(j)]));
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

// Residue of v after eliminating against the RREF basis of U.
std::vector<felt> reduce_mod(const gfq::Subspace& U, std::vector<felt> v) {
  const FieldTable& F = FieldTable::get(U.q);
  for (int r = 0; r < U.basis.rows; ++r) {
    int lead = 0;
    while (lead < U.ambient && !U.basis.at(r, lead)) ++lead;
    if (lead == U.ambient) continue;
    felt f = v[static_cast<size_t>(lead)];
    if (!f) continue;
    for (int j = 0; j < U.ambient; ++j)
      v[static_cast<size_t>(j)] =
          F.sub(v[static_cast<size_t>(j)], F.mul(f, U.basis.at(r, j)));
  }
  return v;
}

bool is_zero_vec(const std::vector<felt>& v) {
  return std::all_of(v.begin(), v.end(), [](felt x) { return x == 0; });
}

}  // namespace

std::vector<gfq::Subspace> enumerate_submodules(const std::vector<int>& depths,
                                                unsigned q,
                                                const EnumOptions& opt) {
  const FieldTable& F = FieldTable::get(q);
  QShape shape(depths);
  int maxd = 0;
  for (int d : depths) maxd = std::max(maxd, d);

  if (shape.D == 0) {
    if (opt.dim > 0 || opt.bottom_dim > 0) return {};
    return {gfq::Subspace::zero(q, 0)};
  }

  if (maxd <= 1) {
    // t acts as zero: submodules are exactly the subspaces
    if (opt.bottom_dim > 0) return {};
    std::vector<gfq::Subspace> out;
    int lo = opt.dim >= 0 ? opt.dim : 0;
    int hi = opt.dim >= 0 ? opt.dim : shape.D;
    for (int d = lo; d <= hi && d <= shape.D; ++d) {
      auto part = gfq::enumerate_subspaces(shape.D, d, q);
      if (out.size() + part.size() > opt.cap)
        throw EnumerationTooLarge("submodule count exceeds the cap");
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }

  std::vector<int> tdep;
  tdep.reserve(depths.size());
  for (int d : depths) tdep.push_back(std::max(d - 1, 0));
  QShape tshape(tdep);

  EnumOptions inner;
  inner.dim = opt.bottom_dim;
  inner.cap = opt.cap;
  inner.threads = 1;
  auto As = enumerate_submodules(tdep, q, inner);

  // embed tQ digit coordinates into Q: (i, j) -> (i, j + 1)
  std::vector<int> emb(static_cast<size_t>(tshape.D));
  for (size_t i = 0; i < depths.size(); ++i)
    for (int j = 0; j < tdep[i]; ++j)
      emb[static_cast<size_t>(tshape.offset[i] + j)] = shape.offset[i] + j + 1;

  gfq::MatrixK T = shape_t_action(shape, q);
  std::vector<int> actives;
  for (size_t i = 0; i < depths.size(); ++i)
    if (depths[i] >= 1) actives.push_back(static_cast<int>(i));
  int m = static_cast<int>(actives.size());

  std::vector<int> t2digits;  // flat positions of digits (i, j >= 2)
  for (size_t i = 0; i < depths.size(); ++i)
    for (int j = 2; j < depths[i]; ++j) t2digits.push_back(shape.offset[i] + j);

  std::vector<int> tdigits;  // flat positions of digits (i, j >= 1)
  for (size_t i = 0; i < depths.size(); ++i)
    for (int j = 1; j < depths[i]; ++j) tdigits.push_back(shape.offset[i] + j);

  std::atomic<std::uint64_t> produced{0};

  auto process = [&](int part) -> std::vector<gfq::Subspace> {
    // lift A from the tQ digit space into Q
    const gfq::Subspace& At = As[static_cast<size_t>(part)];
    gfq::MatrixK lifted(q, At.dim(), shape.D);
    for (int r = 0; r < At.dim(); ++r)
      for (int c = 0; c < tshape.D; ++c)
        lifted.at(r, emb[static_cast<size_t>(c)]) = At.basis.at(r, c);
    gfq::Subspace A = gfq::Subspace::from_vectors(lifted);

    // A_plus = A + t^2 Q
    gfq::MatrixK t2rows(q, static_cast<int>(t2digits.size()), shape.D);
    for (size_t r = 0; r < t2digits.size(); ++r)
      t2rows.at(static_cast<int>(r), t2digits[r]) = 1;
    gfq::Subspace Aplus =
        A.sum(gfq::Subspace::from_vectors(t2rows));

    // Wmax: residue combinations whose t-image lands in A + t^2 Q
    gfq::MatrixK resid(q, m, shape.D);
    for (int r = 0; r < m; ++r) {
      std::vector<felt> w(static_cast<size_t>(shape.D), 0);
      w[static_cast<size_t>(shape.offset[static_cast<size_t>(actives[static_cast<size_t>(r)])])] = 1;
      auto red = reduce_mod(Aplus, apply_k(T, w));
      for (int j = 0; j < shape.D; ++j) resid.at(r, j) = red[static_cast<size_t>(j)];
    }
    gfq::MatrixK wcoef = gfq::kernel_basis(gfq::mat_transpose(resid));
    int mw = wcoef.rows;
    gfq::MatrixK wmax(q, mw, shape.D);
    for (int r = 0; r < mw; ++r)
      for (int c = 0; c < m; ++c)
        wmax.at(r, shape.offset[static_cast<size_t>(actives[static_cast<size_t>(c)])]) =
            wcoef.at(r, c);

    // P_A = {delta in tQ : t delta in A}, then a complement of A inside it
    int dt = static_cast<int>(tdigits.size());
    gfq::MatrixK presid(q, dt, shape.D);
    for (int r = 0; r < dt; ++r) {
      std::vector<felt> w(static_cast<size_t>(shape.D), 0);
      w[static_cast<size_t>(tdigits[static_cast<size_t>(r)])] = 1;
      auto red = reduce_mod(A, apply_k(T, w));
      for (int j = 0; j < shape.D; ++j) presid.at(r, j) = red[static_cast<size_t>(j)];
    }
    gfq::MatrixK pcoef = gfq::kernel_basis(gfq::mat_transpose(presid));
    std::vector<std::vector<felt>> comp;
    {
      gfq::Subspace running = A;
      for (int r = 0; r < pcoef.rows; ++r) {
        std::vector<felt> v(static_cast<size_t>(shape.D), 0);
        for (int c = 0; c < dt; ++c) {
          felt co = pcoef.at(r, c);
          if (!co) continue;
          size_t pos = static_cast<size_t>(tdigits[static_cast<size_t>(c)]);
          v[pos] = F.add(v[pos], co);
        }
        if (!running.contains_vector(v)) {
          gfq::MatrixK one(q, 1, shape.D);
          for (int j = 0; j < shape.D; ++j) one.at(0, j) = v[static_cast<size_t>(j)];
          running = running.sum(gfq::Subspace::from_vectors(one));
          comp.push_back(std::move(v));
        }
      }
    }
    int cd = static_cast<int>(comp.size());

    // decomposition targets: rows of [A basis ; t^2 unit digits]
    gfq::MatrixK decomp(q, A.dim() + static_cast<int>(t2digits.size()), shape.D);
    for (int r = 0; r < A.dim(); ++r)
      for (int j = 0; j < shape.D; ++j) decomp.at(r, j) = A.basis.at(r, j);
    for (size_t r = 0; r < t2digits.size(); ++r)
      decomp.at(A.dim() + static_cast<int>(r), t2digits[r]) = 1;
    gfq::MatrixK decompT = gfq::mat_transpose(decomp);

    std::vector<gfq::Subspace> out;
    int lo = 0, hi = mw;
    if (opt.dim >= 0) {
      int w = opt.dim - A.dim();
      if (w < 0 || w > mw) return out;
      lo = hi = w;
    }
    for (int wd = lo; wd <= hi; ++wd) {
      auto wsubs = gfq::enumerate_subspaces(mw, wd, q);
      for (const auto& wabs : wsubs) {
        // concrete residue vectors and their particular lifts
        std::vector<std::vector<felt>> lifts;
        bool feasible = true;
        for (int b = 0; b < wd; ++b) {
          std::vector<felt> wb(static_cast<size_t>(shape.D), 0);
          for (int c = 0; c < mw; ++c) {
            felt co = wabs.basis.at(b, c);
            if (!co) continue;
            for (int j = 0; j < shape.D; ++j)
              wb[static_cast<size_t>(j)] =
                  F.add(wb[static_cast<size_t>(j)],
                        F.mul(co, wmax.at(c, j)));
          }
          auto tw = apply_k(T, wb);
          auto sol = gfq::solve_linear(decompT, tw);
          if (!sol) {
            feasible = false;
            break;
          }
          // subtract the preimage of the t^2 component
          for (size_t r = 0; r < t2digits.size(); ++r) {
            felt y = (*sol)[static_cast<size_t>(A.dim()) + r];
            if (!y) continue;
            // digit (i, j) pulls back to digit (i, j - 1)
            size_t pos = static_cast<size_t>(t2digits[r] - 1);
            wb[pos] = F.sub(wb[pos], y);
          }
          auto chk = reduce_mod(A, apply_k(T, wb));
          if (!is_zero_vec(chk))
            throw Error("internal: particular lift failed");
          lifts.push_back(std::move(wb));
        }
        if (!feasible)
          throw Error("internal: Wmax residue without decomposition");

        // gamma: every assignment of complement corrections to the lifts
        std::vector<felt> g(static_cast<size_t>(wd * cd), 0);
        bool more = true;
        while (more) {
          gfq::MatrixK rowsm(q, A.dim() + wd, shape.D);
          for (int r = 0; r < A.dim(); ++r)
            for (int j = 0; j < shape.D; ++j) rowsm.at(r, j) = A.basis.at(r, j);
          for (int b = 0; b < wd; ++b) {
            std::vector<felt> v = lifts[static_cast<size_t>(b)];
            for (int r = 0; r < cd; ++r) {
              felt co = g[static_cast<size_t>(b * cd + r)];
              if (!co) continue;
              for (int j = 0; j < shape.D; ++j)
                v[static_cast<size_t>(j)] =
                    F.add(v[static_cast<size_t>(j)],
                          F.mul(co, comp[static_cast<size_t>(r)][static_cast<size_t>(j)]));
            }
            for (int j = 0; j < shape.D; ++j)
              rowsm.at(A.dim() + b, j) = v[static_cast<size_t>(j)];
          }
          gfq::Subspace S = gfq::Subspace::from_vectors(rowsm);
          if (S.dim() != A.dim() + wd)
            throw Error("internal: submodule rank collapsed");
          if (produced.fetch_add(1) + 1 > opt.cap)
            throw EnumerationTooLarge("submodule count exceeds the cap");
          out.push_back(std::move(S));
          // odometer
          size_t k = 0;
          while (k < g.size() && g[k] == q - 1) g[k++] = 0;
          if (k < g.size())
            ++g[k];
          else
            more = false;
        }
      }
    }
    return out;
  };

  auto parts = run_partitioned<std::vector<gfq::Subspace>>(
      static_cast<int>(As.size()), opt.threads, process);
  std::vector<gfq::Subspace> out;
  for (auto& p : parts) {
    out.insert(out.end(), std::make_move_iterator(p.begin()),
               std::make_move_iterator(p.end()));
  }
  return out;
}

}  // namespace bldg::lat
