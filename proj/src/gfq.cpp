#include "bldg/gfq.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <set>

#include "bldg/common.hpp"

namespace bldg::gfq {

namespace {

// Fixed irreducible moduli for the extension fields we support, written as
// coefficient lists of x^e = -(c_0 + c_1 x + ...), i.e. the reduction rule.
struct ExtSpec {
  unsigned p, e;
  std::vector<unsigned> mod;  // monic modulus coefficients c_0..c_e
  const char* text;
};

const ExtSpec* ext_spec(unsigned q) {
  static const std::vector<ExtSpec> specs = {
      {2, 2, {1, 1, 1}, "x^2+x+1"},
      {2, 3, {1, 1, 0, 1}, "x^3+x+1"},
      {3, 2, {2, 2, 1}, "x^2+2x+2"},
  };
  for (const auto& s : specs)
    if (upow(s.p, s.e) == q) return &s;
  return nullptr;
}

}  // namespace

FieldTable::FieldTable(unsigned q_) : q(q_) {
  if (q < 2)
    throw NotPrimePower("field order " + std::to_string(q) +
                        " is not a prime power");
  unsigned pf = q;
  for (unsigned d = 2; d * d <= q; ++d)
    if (q % d == 0) {
      pf = d;
      break;
    }
  unsigned rest = q, ee = 0;
  while (rest % pf == 0) {
    rest /= pf;
    ++ee;
  }
  if (rest != 1)
    throw NotPrimePower("field order " + std::to_string(q) +
                        " is not a prime power");
  if (q > 9) throw OrderTooLarge("field order " + std::to_string(q) + " > 9");
  p = pf;
  e = ee;
  if (e == 1) {
    modulus_ = "x";
  } else {
    modulus_ = ext_spec(q)->text;
  }

  add_.assign(q * q, 0);
  mul_.assign(q * q, 0);
  neg_.assign(q, 0);
  inv_.assign(q, 0);

  // Element i has base-p digits d_0..d_{e-1} over the basis 1, x, ..., x^{e-1}.
  auto digits = [&](unsigned v) {
    std::vector<unsigned> d(e);
    for (unsigned i = 0; i < e; ++i) {
      d[i] = v % p;
      v /= p;
    }
    return d;
  };
  auto undigits = [&](const std::vector<unsigned>& d) {
    unsigned v = 0;
    for (unsigned i = e; i-- > 0;) v = v * p + d[i];
    return v;
  };

  for (unsigned a = 0; a < q; ++a) {
    auto da = digits(a);
    for (unsigned i = 0; i < e; ++i) da[i] = (p - da[i]) % p;
    neg_[a] = static_cast<felt>(undigits(da));
  }

  for (unsigned a = 0; a < q; ++a)
    for (unsigned b = 0; b < q; ++b) {
      auto da = digits(a), db = digits(b);
      std::vector<unsigned> s(e);
      for (unsigned i = 0; i < e; ++i) s[i] = (da[i] + db[i]) % p;
      add_[a * q + b] = static_cast<felt>(undigits(s));
    }

  const ExtSpec* s = ext_spec(q);
  for (unsigned a = 0; a < q; ++a)
    for (unsigned b = 0; b < q; ++b) {
      auto da = digits(a), db = digits(b);
      std::vector<unsigned> prod(2 * e - 1, 0);
      for (unsigned i = 0; i < e; ++i)
        for (unsigned j = 0; j < e; ++j)
          prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
      // reduce x^k for k >= e via the modulus
      for (unsigned k = 2 * e - 2; k >= e && k < prod.size(); --k) {
        unsigned c = prod[k];
        if (c) {
          prod[k] = 0;
          for (unsigned i = 0; i < e; ++i)
            prod[k - e + i] = (prod[k - e + i] + c * (p - s->mod[i] % p)) % p;
        }
        if (k == e) break;
      }
      std::vector<unsigned> low(prod.begin(), prod.begin() + e);
      mul_[a * q + b] = static_cast<felt>(undigits(low));
    }

  for (unsigned a = 1; a < q; ++a)
    for (unsigned b = 1; b < q; ++b)
      if (mul_[a * q + b] == 1) inv_[a] = static_cast<felt>(b);
}

const FieldTable& FieldTable::get(unsigned q) {
  static std::mutex mu;
  static std::map<unsigned, std::unique_ptr<FieldTable>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(q);
  if (it == cache.end()) {
    it = cache.emplace(q, std::unique_ptr<FieldTable>(new FieldTable(q))).first;
  }
  return *it->second;
}

felt FieldTable::inv(felt a) const {
  if (a == 0) throw DomainError("inverse of zero");
  return inv_[a];
}

MatrixK MatrixK::identity(unsigned q, int n) {
  MatrixK m(q, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

MatrixK mat_mul(const MatrixK& A, const MatrixK& B) {
  if (A.cols != B.rows || A.q != B.q)
    throw DimensionMismatch("matrix product shape mismatch");
  const FieldTable& F = FieldTable::get(A.q);
  MatrixK C(A.q, A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      felt aik = A.at(i, k);
      if (!aik) continue;
      for (int j = 0; j < B.cols; ++j)
        C.at(i, j) = F.add(C.at(i, j), F.mul(aik, B.at(k, j)));
    }
  return C;
}

MatrixK mat_transpose(const MatrixK& A) {
  MatrixK T(A.q, A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
  return T;
}

RrefResult rref(const MatrixK& A) {
  const FieldTable& F = FieldTable::get(A.q);
  MatrixK m = A;
  int r = 0;
  for (int c = 0; c < m.cols && r < m.rows; ++c) {
    int piv = -1;
    for (int i = r; i < m.rows; ++i)
      if (m.at(i, c)) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != r)
      for (int j = 0; j < m.cols; ++j) std::swap(m.at(piv, j), m.at(r, j));
    felt s = F.inv(m.at(r, c));
    for (int j = 0; j < m.cols; ++j) m.at(r, j) = F.mul(m.at(r, j), s);
    for (int i = 0; i < m.rows; ++i) {
      if (i == r) continue;
      felt f = m.at(i, c);
      if (!f) continue;
      for (int j = 0; j < m.cols; ++j)
        m.at(i, j) = F.sub(m.at(i, j), F.mul(f, m.at(r, j)));
    }
    ++r;
  }
  return {std::move(m), r};
}

MatrixK kernel_basis(const MatrixK& A) {
  auto R = rref(A);
  const FieldTable& F = FieldTable::get(A.q);
  std::vector<int> pivot_col(static_cast<size_t>(R.rank));
  std::vector<bool> is_pivot(static_cast<size_t>(A.cols), false);
  for (int r = 0; r < R.rank; ++r) {
    int c = 0;
    while (!R.m.at(r, c)) ++c;
    pivot_col[static_cast<size_t>(r)] = c;
    is_pivot[static_cast<size_t>(c)] = true;
  }
  MatrixK K(A.q, A.cols - R.rank, A.cols);
  int row = 0;
  for (int c = 0; c < A.cols; ++c) {
    if (is_pivot[static_cast<size_t>(c)]) continue;
    K.at(row, c) = 1;
    for (int r = 0; r < R.rank; ++r)
      K.at(row, pivot_col[static_cast<size_t>(r)]) = F.neg(R.m.at(r, c));
    ++row;
  }
  return rref(K).m;
}

std::optional<std::vector<felt>> solve_linear(const MatrixK& A,
                                              const std::vector<felt>& b) {
  if (static_cast<int>(b.size()) != A.rows)
    throw DimensionMismatch("right-hand side length != row count");
  MatrixK aug(A.q, A.rows, A.cols + 1);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, A.cols) = b[static_cast<size_t>(i)];
  }
  auto R = rref(aug);
  std::vector<felt> x(static_cast<size_t>(A.cols), 0);
  for (int r = 0; r < R.rank; ++r) {
    int lead = 0;
    while (lead <= A.cols && !R.m.at(r, lead)) ++lead;
    if (lead == A.cols) return std::nullopt;  // pivot in the constant column
    x[static_cast<size_t>(lead)] = R.m.at(r, A.cols);
  }
  return x;
}

Subspace Subspace::zero(unsigned q, int ambient) {
  Subspace s;
  s.q = q;
  s.ambient = ambient;
  s.basis = MatrixK(q, 0, ambient);
  return s;
}

Subspace Subspace::full(unsigned q, int ambient) {
  Subspace s;
  s.q = q;
  s.ambient = ambient;
  s.basis = MatrixK::identity(q, ambient);
  return s;
}

Subspace Subspace::from_vectors(const MatrixK& rows) {
  auto R = rref(rows);
  Subspace s;
  s.q = rows.q;
  s.ambient = rows.cols;
  s.basis = MatrixK(rows.q, R.rank, rows.cols);
  std::copy(R.m.a.begin(),
            R.m.a.begin() + static_cast<size_t>(R.rank) * rows.cols,
            s.basis.a.begin());
  return s;
}

bool Subspace::contains_vector(const std::vector<felt>& v) const {
  if (static_cast<int>(v.size()) != ambient)
    throw DimensionMismatch("vector length != ambient dimension");
  const FieldTable& F = FieldTable::get(q);
  std::vector<felt> w = v;
  for (int r = 0; r < basis.rows; ++r) {
    int lead = 0;
    while (lead < ambient && !basis.at(r, lead)) ++lead;
    if (lead == ambient) continue;
    felt f = w[static_cast<size_t>(lead)];
    if (!f) continue;
    for (int j = 0; j < ambient; ++j)
      w[static_cast<size_t>(j)] =
          F.sub(w[static_cast<size_t>(j)], F.mul(f, basis.at(r, j)));
  }
  return std::all_of(w.begin(), w.end(), [](felt x) { return x == 0; });
}

bool Subspace::contains(const Subspace& other) const {
  if (ambient != other.ambient)
    throw DimensionMismatch("subspaces in different ambient spaces");
  for (int r = 0; r < other.basis.rows; ++r) {
    std::vector<felt> v(static_cast<size_t>(ambient));
    for (int j = 0; j < ambient; ++j) v[static_cast<size_t>(j)] = other.basis.at(r, j);
    if (!contains_vector(v)) return false;
  }
  return true;
}

Subspace Subspace::sum(const Subspace& other) const {
  if (ambient != other.ambient)
    throw DimensionMismatch("subspaces in different ambient spaces");
  MatrixK stack(q, basis.rows + other.basis.rows, ambient);
  std::copy(basis.a.begin(), basis.a.end(), stack.a.begin());
  std::copy(other.basis.a.begin(), other.basis.a.end(),
            stack.a.begin() + static_cast<long>(basis.a.size()));
  return from_vectors(stack);
}

Subspace Subspace::intersect(const Subspace& other) const {
  if (ambient != other.ambient)
    throw DimensionMismatch("subspaces in different ambient spaces");
  // x = c . basis lies in `other` iff c annihilates the residues of our
  // basis rows after reduction modulo the other subspace.
  const FieldTable& F = FieldTable::get(q);
  MatrixK resid(q, basis.rows, ambient);
  for (int r = 0; r < basis.rows; ++r) {
    std::vector<felt> w(static_cast<size_t>(ambient));
    for (int j = 0; j < ambient; ++j) w[static_cast<size_t>(j)] = basis.at(r, j);
    for (int s = 0; s < other.basis.rows; ++s) {
      int lead = 0;
      while (lead < ambient && !other.basis.at(s, lead)) ++lead;
      if (lead == ambient) continue;
      felt f = w[static_cast<size_t>(lead)];
      if (!f) continue;
      for (int j = 0; j < ambient; ++j)
        w[static_cast<size_t>(j)] =
            F.sub(w[static_cast<size_t>(j)], F.mul(f, other.basis.at(s, j)));
    }
    for (int j = 0; j < ambient; ++j) resid.at(r, j) = w[static_cast<size_t>(j)];
  }
  MatrixK coeffs = kernel_basis(mat_transpose(resid));
  return from_vectors(mat_mul(coeffs, basis));
}

bool Subspace::operator<(const Subspace& o) const {
  if (ambient != o.ambient) return ambient < o.ambient;
  if (basis.rows != o.basis.rows) return basis.rows < o.basis.rows;
  return basis.a < o.basis.a;
}

std::string Subspace::encode() const {
  std::string s = "S(" + std::to_string(ambient) + "," +
                  std::to_string(basis.rows) + ")[";
  for (int r = 0; r < basis.rows; ++r) {
    if (r) s += ";";
    for (int c = 0; c < ambient; ++c) s += static_cast<char>('0' + basis.at(r, c));
  }
  s += "]";
  return s;
}

Flag Flag::make(int ambient, std::vector<Subspace> chain, bool allow_improper) {
  Flag f;
  f.ambient = ambient;
  for (size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].ambient != ambient)
      throw DimensionMismatch("flag member in wrong ambient space");
    if (!allow_improper &&
        (chain[i].dim() == 0 || chain[i].dim() == ambient))
      throw DomainError("flag member must be proper and nonzero");
    if (i > 0) {
      if (chain[i - 1].dim() >= chain[i].dim() ||
          !chain[i].contains(chain[i - 1]))
        throw DomainError("flag members must be strictly nested");
    }
  }
  f.chain = std::move(chain);
  return f;
}

std::vector<Subspace> enumerate_subspaces(int m, int d, unsigned q) {
  if (d < 0 || d > m) throw DomainError("subspace dimension out of range");
  FieldTable::get(q);  // validate q
  std::vector<Subspace> out;
  // choose pivot columns p_0 < ... < p_{d-1}, then fill free entries:
  // entry (i, c) is free iff c > p_i and c is not a pivot column.
  std::vector<int> piv(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) piv[static_cast<size_t>(i)] = i;
  auto emit = [&]() {
    std::vector<std::pair<int, int>> free_pos;
    std::vector<bool> is_piv(static_cast<size_t>(m), false);
    for (int i = 0; i < d; ++i) is_piv[static_cast<size_t>(piv[static_cast<size_t>(i)])] = true;
    for (int i = 0; i < d; ++i)
      for (int c = piv[static_cast<size_t>(i)] + 1; c < m; ++c)
        if (!is_piv[static_cast<size_t>(c)]) free_pos.emplace_back(i, c);
    std::vector<felt> vals(free_pos.size(), 0);
    for (;;) {
      MatrixK b(q, d, m);
      for (int i = 0; i < d; ++i) b.at(i, piv[static_cast<size_t>(i)]) = 1;
      for (size_t k = 0; k < free_pos.size(); ++k)
        b.at(free_pos[k].first, free_pos[k].second) = vals[k];
      Subspace s;
      s.q = q;
      s.ambient = m;
      s.basis = std::move(b);
      out.push_back(std::move(s));
      size_t k = 0;
      while (k < vals.size() && vals[k] == q - 1) vals[k++] = 0;
      if (k == vals.size()) break;
      ++vals[k];
    }
  };
  if (d == 0) {
    out.push_back(Subspace::zero(q, m));
  } else {
    for (;;) {
      emit();
      int i = d - 1;
      while (i >= 0 && piv[static_cast<size_t>(i)] == m - d + i) --i;
      if (i < 0) break;
      ++piv[static_cast<size_t>(i)];
      for (int j = i + 1; j < d; ++j)
        piv[static_cast<size_t>(j)] = piv[static_cast<size_t>(j - 1)] + 1;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t gaussian_binomial(int m, int d, unsigned q) {
  if (d < 0 || d > m) throw DomainError("gaussian binomial out of range");
  FieldTable::get(q);
  std::uint64_t g = 1;
  for (int i = 1; i <= d; ++i) {
    std::uint64_t num = upow(q, static_cast<unsigned>(m - d + i)) - 1;
    std::uint64_t den = upow(q, static_cast<unsigned>(i)) - 1;
    unsigned __int128 t = static_cast<unsigned __int128>(g) * num;
    if (t % den != 0) throw Error("internal: gaussian binomial not integral");
    t /= den;
    if (t > UINT64_MAX) throw OverflowError("gaussian binomial overflow");
    g = static_cast<std::uint64_t>(t);
  }
  return g;
}

std::uint64_t complete_flag_count(int n, unsigned q) {
  if (n < 1) throw DomainError("flag count needs n >= 1");
  FieldTable::get(q);
  std::uint64_t r = 1;
  for (int m = 1; m <= n; ++m)
    r = checked_mul(r, (upow(q, static_cast<unsigned>(m)) - 1) / (q - 1));
  return r;
}

namespace {

// Representatives of the lines of (candidates mod U): one normalized residue
// per line of the quotient, restricted to vectors drawn from `within` if
// given.  Each returned vector v satisfies v not in U, and distinct vectors
// span distinct lines modulo U.
std::vector<std::vector<felt>> line_reps_mod(const Subspace& U,
                                             const Subspace* within) {
  const FieldTable& F = FieldTable::get(U.q);
  int m = U.ambient;
  std::set<std::vector<felt>> seen;
  std::vector<std::vector<felt>> reps;
  // iterate the vectors of `within` (or of the full space)
  int gens = within ? within->dim() : m;
  std::vector<felt> coef(static_cast<size_t>(gens), 0);
  for (;;) {
    std::vector<felt> v(static_cast<size_t>(m), 0);
    for (int g = 0; g < gens; ++g) {
      felt c = coef[static_cast<size_t>(g)];
      if (!c) continue;
      for (int j = 0; j < m; ++j) {
        felt base = within ? within->basis.at(g, j)
                           : static_cast<felt>(g == j ? 1 : 0);
        v[static_cast<size_t>(j)] = F.add(v[static_cast<size_t>(j)], F.mul(c, base));
      }
    }
    // reduce mod U
    std::vector<felt> w = v;
    for (int r = 0; r < U.basis.rows; ++r) {
      int lead = 0;
      while (lead < m && !U.basis.at(r, lead)) ++lead;
      if (lead == m) continue;
      felt f = w[static_cast<size_t>(lead)];
      if (!f) continue;
      for (int j = 0; j < m; ++j)
        w[static_cast<size_t>(j)] =
            F.sub(w[static_cast<size_t>(j)], F.mul(f, U.basis.at(r, j)));
    }
    bool nz = false;
    int lead = -1;
    for (int j = 0; j < m; ++j)
      if (w[static_cast<size_t>(j)]) {
        nz = true;
        lead = j;
        break;
      }
    if (nz) {
      felt s = F.inv(w[static_cast<size_t>(lead)]);
      for (int j = 0; j < m; ++j)
        w[static_cast<size_t>(j)] = F.mul(w[static_cast<size_t>(j)], s);
      if (seen.insert(w).second) reps.push_back(v);
    }
    size_t k = 0;
    while (k < coef.size() && coef[k] == U.q - 1) coef[k++] = 0;
    if (k == coef.size()) break;
    ++coef[k];
  }
  return reps;
}

Subspace extend_by(const Subspace& U, const std::vector<felt>& v) {
  MatrixK rows(U.q, U.dim() + 1, U.ambient);
  std::copy(U.basis.a.begin(), U.basis.a.end(), rows.a.begin());
  for (int j = 0; j < U.ambient; ++j)
    rows.at(U.dim(), j) = v[static_cast<size_t>(j)];
  return Subspace::from_vectors(rows);
}

}  // namespace

std::vector<Flag> enumerate_complete_flags(int m, unsigned q) {
  if (m < 1) throw DomainError("flag enumeration needs ambient dim >= 1");
  FieldTable::get(q);
  std::vector<Flag> out;
  std::vector<Subspace> chain;
  Subspace cur = Subspace::zero(q, m);
  std::function<void()> walk = [&]() {
    if (cur.dim() == m - 1) {
      out.push_back(Flag::make(m, chain));
      return;
    }
    for (const auto& v : line_reps_mod(cur, nullptr)) {
      Subspace next = extend_by(cur, v);
      Subspace save = cur;
      cur = next;
      chain.push_back(next);
      walk();
      chain.pop_back();
      cur = save;
    }
  };
  if (m == 1) {
    out.push_back(Flag::make(1, {}));
  } else {
    walk();
  }
  return out;
}

GramForm GramForm::make(const MatrixK& J) {
  if (J.rows != J.cols) throw DomainError("Gram matrix must be square");
  const FieldTable& F = FieldTable::get(J.q);
  if (rref(J).rank != J.rows) throw DomainError("Gram matrix is degenerate");
  for (int i = 0; i < J.rows; ++i) {
    if (J.at(i, i) != 0)
      throw DomainError("alternating form needs zero diagonal");
    for (int j = 0; j < J.cols; ++j)
      if (J.at(i, j) != F.neg(J.at(j, i)))
        throw DomainError("Gram matrix is not skew-symmetric");
  }
  GramForm g;
  g.J = J;
  return g;
}

GramForm GramForm::standard_symplectic(int n, unsigned q) {
  const FieldTable& F = FieldTable::get(q);
  MatrixK J(q, 2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    J.at(i, n + i) = 1;
    J.at(n + i, i) = F.neg(1);
  }
  return make(J);
}

felt pairing(const GramForm& G, const std::vector<felt>& u,
             const std::vector<felt>& v) {
  const FieldTable& F = FieldTable::get(G.J.q);
  if (static_cast<int>(u.size()) != G.dim() ||
      static_cast<int>(v.size()) != G.dim())
    throw DimensionMismatch("pairing argument length");
  felt acc = 0;
  for (int i = 0; i < G.dim(); ++i) {
    if (!u[static_cast<size_t>(i)]) continue;
    for (int j = 0; j < G.dim(); ++j)
      acc = F.add(acc, F.mul(u[static_cast<size_t>(i)],
                             F.mul(G.J.at(i, j), v[static_cast<size_t>(j)])));
  }
  return acc;
}

bool is_totally_isotropic(const Subspace& U, const GramForm& G) {
  if (U.ambient != G.dim())
    throw DimensionMismatch("subspace/form dimension mismatch");
  std::vector<std::vector<felt>> rows;
  for (int r = 0; r < U.dim(); ++r) {
    std::vector<felt> v(static_cast<size_t>(U.ambient));
    for (int j = 0; j < U.ambient; ++j) v[static_cast<size_t>(j)] = U.basis.at(r, j);
    rows.push_back(std::move(v));
  }
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = i; j < rows.size(); ++j)
      if (pairing(G, rows[i], rows[j]) != 0) return false;
  return true;
}

Subspace orthogonal_complement(const Subspace& U, const GramForm& G) {
  if (U.ambient != G.dim())
    throw DimensionMismatch("subspace/form dimension mismatch");
  if (U.dim() == 0) return Subspace::full(U.q, U.ambient);
  MatrixK M = mat_mul(U.basis, G.J);  // rows u_i J; complement = right kernel
  MatrixK K = kernel_basis(M);
  Subspace s;
  s.q = U.q;
  s.ambient = U.ambient;
  s.basis = K;
  return s;
}

std::vector<Flag> enumerate_isotropic_flags(const GramForm& G) {
  unsigned q = G.J.q;
  int dim2n = G.dim();
  if (dim2n % 2 != 0) throw DomainError("alternating form needs even dimension");
  int n = dim2n / 2;
  std::vector<Flag> out;
  std::vector<Subspace> chain;
  Subspace cur = Subspace::zero(q, dim2n);
  std::function<void()> walk = [&]() {
    if (cur.dim() == n) {
      out.push_back(Flag::make(dim2n, chain));
      return;
    }
    Subspace perp = orthogonal_complement(cur, G);
    for (const auto& v : line_reps_mod(cur, &perp)) {
      Subspace next = extend_by(cur, v);
      Subspace save = cur;
      cur = next;
      chain.push_back(next);
      walk();
      chain.pop_back();
      cur = save;
    }
  };
  walk();
  return out;
}

MatrixK symplectic_basis(const GramForm& G) {
  const FieldTable& F = FieldTable::get(G.J.q);
  int m = G.dim();
  if (m % 2 != 0) throw DomainError("alternating form needs even dimension");
  int n = m / 2;
  // Work with a list of remaining basis vectors; peel off hyperbolic pairs.
  std::vector<std::vector<felt>> rem;
  for (int i = 0; i < m; ++i) {
    std::vector<felt> e(static_cast<size_t>(m), 0);
    e[static_cast<size_t>(i)] = 1;
    rem.push_back(std::move(e));
  }
  std::vector<std::vector<felt>> us, ws;
  while (!rem.empty()) {
    std::vector<felt> u = rem.front();
    size_t wi = 0;
    felt c = 0;
    for (size_t j = 1; j < rem.size(); ++j) {
      c = pairing(G, u, rem[j]);
      if (c) {
        wi = j;
        break;
      }
    }
    if (!c) throw DomainError("degenerate alternating form");
    std::vector<felt> w = rem[wi];
    felt ci = F.inv(c);
    for (auto& x : w) x = F.mul(x, ci);  // now <u, w> = 1
    std::vector<std::vector<felt>> next;
    for (size_t j = 1; j < rem.size(); ++j) {
      if (j == wi) continue;
      std::vector<felt> x = rem[j];
      felt xu = pairing(G, x, u);
      felt xw = pairing(G, x, w);
      // x' = x + <x,u> w - <x,w> u is orthogonal to both u and w
      for (int t = 0; t < m; ++t) {
        felt v = x[static_cast<size_t>(t)];
        v = F.add(v, F.mul(xu, w[static_cast<size_t>(t)]));
        v = F.sub(v, F.mul(xw, u[static_cast<size_t>(t)]));
        x[static_cast<size_t>(t)] = v;
      }
      next.push_back(std::move(x));
    }
    us.push_back(std::move(u));
    ws.push_back(std::move(w));
    rem = std::move(next);
  }
  MatrixK P(G.J.q, m, m);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < m; ++t) {
      P.at(t, i) = us[static_cast<size_t>(i)][static_cast<size_t>(t)];
      P.at(t, n + i) = ws[static_cast<size_t>(i)][static_cast<size_t>(t)];
    }
  return P;
}

}  // namespace bldg::gfq
