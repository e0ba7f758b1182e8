#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bldg/errors.hpp"
#include "bldg/gfq.hpp"

// Exact lattice arithmetic over O = F_q[[t]] inside K = F_q((t)).
//
// A full-rank O-lattice in K^n is stored in a canonical form: an overall
// power of t (the shift) times the column span of a lower triangular matrix
// G over O in column Hermite form.  The Hermite form is unique, so two
// Lattice values are equal as structs iff they are equal as lattices.
//
// Polynomial entries are carried to kWorkPrec coefficients.  Every public
// operation either returns an exact result or throws PrecisionOverflow; the
// certificate is that all pivot exponents stay below kMaxDetExp, which keeps
// the truncated computation faithful to the untruncated one.

namespace bldg::lat {

using gfq::FieldTable;
using gfq::felt;

inline constexpr int kWorkPrec = 64;
inline constexpr int kMaxDetExp = 20;

// Dense polynomial in t over F_q: coefficient c[i] multiplies t^i.  Stored
// trimmed (no trailing zeros); products are truncated to kWorkPrec
// coefficients, which the degree checks in the lattice layer keep faithful.
using Poly = std::vector<felt>;

Poly poly_trim(Poly a);
Poly poly_make(std::initializer_list<unsigned> coeffs);
Poly monomial(int k, felt c = 1);  // c t^k, k >= 0
int poly_val(const Poly& a);       // kWorkPrec if a == 0
int poly_deg(const Poly& a);       // -1 if a == 0
bool poly_is_zero(const Poly& a);
Poly poly_add(const FieldTable& F, const Poly& a, const Poly& b);
Poly poly_sub(const FieldTable& F, const Poly& a, const Poly& b);
Poly poly_mul(const FieldTable& F, const Poly& a, const Poly& b);
Poly poly_scale(const FieldTable& F, felt c, const Poly& a);
Poly poly_shift_up(const Poly& a, int k);     // * t^k
Poly poly_div_exact(const Poly& a, int k);    // / t^k; DomainError if val < k
Poly poly_mod(const Poly& a, int m);          // coefficients below t^m
// Inverse of a unit (val 0) to kWorkPrec coefficients; DomainError otherwise.
Poly poly_unit_inv(const FieldTable& F, const Poly& a);
std::string poly_str(const Poly& a);          // e.g. "1+t+2t^3", "0"

// Matrix over O with Poly entries, row-major.
struct PolyMat {
  unsigned q = 2;
  int rows = 0, cols = 0;
  std::vector<Poly> a;

  PolyMat() = default;
  PolyMat(unsigned q_, int r, int c)
      : q(q_), rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  Poly& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const Poly& at(int r, int c) const {
    return a[static_cast<size_t>(r) * cols + c];
  }

  bool operator==(const PolyMat& o) const {
    return q == o.q && rows == o.rows && cols == o.cols && a == o.a;
  }

  static PolyMat identity(unsigned q, int n);
  // Matrix with the given t-exponents on the diagonal.
  static PolyMat diag_powers(unsigned q, const std::vector<int>& exps);
};

PolyMat pm_mul(const PolyMat& A, const PolyMat& B);
PolyMat pm_transpose(const PolyMat& A);
// Entrywise reduction mod t and reinterpretation over F_q.
gfq::MatrixK pm_mod_t(const PolyMat& A);

// t^shift times the column span of G; G is the canonical Hermite form:
// lower triangular, diagonal entries exactly t^{diag[i]}, entries below the
// diagonal of degree < the diagonal exponent of their row, and minimum
// entry valuation 0 (any common power of t is folded into the shift).
struct Lattice {
  unsigned q = 2;
  int n = 0;
  int shift = 0;
  PolyMat G;
  std::vector<int> diag;

  // ord of the determinant of a basis matrix: n*shift + sum(diag).
  int det_exp() const;
  std::string encode() const;

  bool operator==(const Lattice& o) const {
    return q == o.q && n == o.n && shift == o.shift && G == o.G;
  }
  bool operator<(const Lattice& o) const;
};

// Canonicalizes the column span of gens (n rows, >= n columns) scaled by
// t^shift.  Throws SingularMatrix if the columns do not span a full-rank
// lattice, PrecisionOverflow if entry degrees or pivot exponents exceed the
// certified range.
Lattice lattice_from_generators(const PolyMat& gens, int shift = 0);
Lattice standard_lattice(unsigned q, int n);  // O^n
Lattice scale(const Lattice& L, int k);       // t^k L

bool contains(const Lattice& outer, const Lattice& inner);
// e with [outer : inner] = q^e; throws NotContained.
int index_exp(const Lattice& outer, const Lattice& inner);

// Elementary divisor exponents of the transition matrix from A to B, sorted
// ascending: B has a basis {t^{d_i} a_i} for some basis {a_i} of A.
std::vector<int> relative_position(const Lattice& A, const Lattice& B);

Lattice lattice_sum(const Lattice& A, const Lattice& B);
Lattice lattice_intersect(const Lattice& A, const Lattice& B);
// {x in K^n : sum_i x_i y_i in O for all y in L}.
Lattice dual_lattice(const Lattice& L);

// g t^{gshift} L for an n x n matrix g over O; SingularMatrix if g is not
// invertible over K.
Lattice apply_matrix(const PolyMat& g, int gshift, const Lattice& L);

// det_exp mod `modulus`, reduced to 0..modulus-1.
int vertex_type(const Lattice& L, int modulus);

// Homothety class [L] = {t^k L}.  The representative is the unique member
// with shift 0.
struct HomothetyClass {
  Lattice rep;

  static HomothetyClass of(const Lattice& L);
  std::string encode() const { return rep.encode(); }

  bool operator==(const HomothetyClass& o) const { return rep == o.rep; }
  bool operator<(const HomothetyClass& o) const { return rep < o.rep; }
};

// The unique member L' of c with t L ⊊ L' ⊊ L.  Such a scaling exists (and
// is unique) exactly when [L] and c are distinct incident vertex classes;
// otherwise throws NotAdjacent.  Independent of which member of c is stored
// as the representative.
Lattice adjacent_representative(const Lattice& L, const HomothetyClass& c);

// The quotient top/bottom of two nested lattices, presented as a digit
// space: an adapted O-basis a_1..a_n of top with t^{depths[i]} a_i a basis
// of bottom, so top/bottom = (+)_i O/t^{depths[i]}.  Digit (i, j), for
// 0 <= j < depths[i], is the coefficient of t^j a_i; digits are flattened
// in row order i = 0..n-1, j ascending, into a k-vector space of dimension
// digit_dim = sum(depths).  Sublattices between bottom and top correspond
// exactly to the t-stable subspaces of the digit space.
struct Window {
  Lattice top, bottom;
  PolyMat basis;            // columns: adapted basis, at top's shift
  PolyMat u;                // digit-basis coords = u * (top G-basis coords)
  std::vector<int> depths;  // ascending order is not guaranteed
  int digit_dim = 0;

  int digit_offset(int i) const;  // start of component i in the flat space
};

Window make_window(const Lattice& top, const Lattice& bottom);

// The sublattice corresponding to a t-stable digit subspace.
Lattice window_lift(const Window& W, const gfq::Subspace& digits);
// Digit subspace of a lattice M with bottom <= M <= top; NotInWindow
// otherwise.
gfq::Subspace window_coords(const Window& W, const Lattice& M);
// The t-action on the digit space of W (digit (i,j) -> (i,j+1), top killed).
gfq::MatrixK window_t_action(const Window& W);

struct EnumOptions {
  int dim = -1;              // total k-dimension, -1 = all
  int bottom_dim = -1;       // k-dimension of S intersect tQ, -1 = all
  std::uint64_t cap = 10'000'000;  // EnumerationTooLarge beyond this
  int threads = 1;
};

// All O-submodules of Q = (+)_i O/t^{depths[i]} as t-stable digit
// subspaces, each exactly once, in a deterministic order independent of
// `threads`.  Digit convention matches Window.
std::vector<gfq::Subspace> enumerate_submodules(const std::vector<int>& depths,
                                                unsigned q,
                                                const EnumOptions& opt = {});

}  // namespace bldg::lat
