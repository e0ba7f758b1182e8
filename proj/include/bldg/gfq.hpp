#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bldg/errors.hpp"

// Exact linear algebra over small finite fields F_q, q = p^e <= 9.
//
// Types: FieldTable (arithmetic tables), MatrixK (dense matrix), Subspace
// (row space in reduced row echelon form, the canonical representative),
// Flag (strictly nested chain of subspaces), GramForm (nondegenerate
// alternating form).  Counting helpers return exact 64-bit integers and
// throw OverflowError rather than wrap.

namespace bldg::gfq {

using felt = std::uint8_t;

// Arithmetic tables for F_q.  Elements are encoded 0..q-1; for extension
// fields the encoding is base-p digits over the polynomial basis 1, x, x^2
// with fixed modulus: x^2+x+1 (q=4), x^3+x+1 (q=8), x^2+2x+2 (q=9).
class FieldTable {
 public:
  // Returns the shared table for F_q.  Throws NotPrimePower if q is not a
  // prime power, OrderTooLarge if q > 9.  Tables are immutable after
  // construction and safe for concurrent reads.
  static const FieldTable& get(unsigned q);

  unsigned q = 0, p = 0, e = 0;

  felt add(felt a, felt b) const { return add_[a * q + b]; }
  felt sub(felt a, felt b) const { return add_[a * q + neg_[b]]; }
  felt mul(felt a, felt b) const { return mul_[a * q + b]; }
  felt neg(felt a) const { return neg_[a]; }
  // Multiplicative inverse; throws DomainError on 0.
  felt inv(felt a) const;

  const std::string& modulus() const { return modulus_; }

 private:
  explicit FieldTable(unsigned q);
  std::vector<felt> add_, mul_, neg_, inv_;
  std::string modulus_;
};

struct MatrixK {
  unsigned q = 2;
  int rows = 0, cols = 0;
  std::vector<felt> a;  // row-major

  MatrixK() = default;
  MatrixK(unsigned q_, int r, int c)
      : q(q_), rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}

  felt& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  felt at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  bool operator==(const MatrixK& o) const {
    return q == o.q && rows == o.rows && cols == o.cols && a == o.a;
  }

  static MatrixK identity(unsigned q, int n);
};

MatrixK mat_mul(const MatrixK& A, const MatrixK& B);
MatrixK mat_transpose(const MatrixK& A);

// Gauss-Jordan reduction.  Returns the reduced row echelon form; the rank is
// the number of nonzero rows.
struct RrefResult {
  MatrixK m;
  int rank = 0;
};
RrefResult rref(const MatrixK& A);

// Basis of the right kernel {v : A v = 0}, rows in RREF.
MatrixK kernel_basis(const MatrixK& A);

// Any solution x of A x = b, or nullopt if the system is inconsistent.
std::optional<std::vector<felt>> solve_linear(const MatrixK& A,
                                              const std::vector<felt>& b);

// A subspace of k^ambient, stored as its RREF basis with zero rows dropped.
// Two Subspace values are equal iff they are the same subspace.
struct Subspace {
  unsigned q = 2;
  int ambient = 0;
  MatrixK basis;  // dim x ambient, RREF, no zero rows

  int dim() const { return basis.rows; }

  static Subspace zero(unsigned q, int ambient);
  static Subspace full(unsigned q, int ambient);
  // Canonicalizes the row span of the given vectors.
  static Subspace from_vectors(const MatrixK& rows);

  bool contains_vector(const std::vector<felt>& v) const;
  bool contains(const Subspace& other) const;
  Subspace sum(const Subspace& other) const;
  Subspace intersect(const Subspace& other) const;

  bool operator==(const Subspace& o) const {
    return ambient == o.ambient && basis == o.basis;
  }
  bool operator<(const Subspace& o) const;

  std::string encode() const;  // canonical label, e.g. "S(4,2)[1100;0011]"
};

// Strictly increasing chain of subspaces of a common ambient space.  By
// default every member must be proper and nonzero; pass allow_improper for
// chains that include 0 or the full space.
struct Flag {
  int ambient = 0;
  std::vector<Subspace> chain;

  static Flag make(int ambient, std::vector<Subspace> chain,
                   bool allow_improper = false);
};

// All d-dimensional subspaces of k^m in lexicographic order of their
// canonical basis matrices (row-major entry sequence).
std::vector<Subspace> enumerate_subspaces(int m, int d, unsigned q);

// Gaussian binomial [m choose d]_q.  DomainError unless 0 <= d <= m.
std::uint64_t gaussian_binomial(int m, int d, unsigned q);

// Number of complete flags of k^n: prod_{m=1..n} (q^m - 1)/(q - 1).
std::uint64_t complete_flag_count(int n, unsigned q);

// All complete flags of k^m: chains of proper nontrivial subspaces with one
// member of each dimension 1..m-1.
std::vector<Flag> enumerate_complete_flags(int m, unsigned q);

// Nondegenerate alternating bilinear form on k^{2n}, given by its Gram
// matrix.  Validation: square, invertible, J^T = -J, zero diagonal (the
// diagonal condition is what makes the form alternating in characteristic 2).
struct GramForm {
  MatrixK J;
  static GramForm make(const MatrixK& J);
  // Block form ((0, I), (-I, 0)) on k^{2n}.
  static GramForm standard_symplectic(int n, unsigned q);
  int dim() const { return J.rows; }
};

felt pairing(const GramForm& G, const std::vector<felt>& u,
             const std::vector<felt>& v);

bool is_totally_isotropic(const Subspace& U, const GramForm& G);

// {v : <u, v> = 0 for all u in U}; dim = ambient - dim U.
Subspace orthogonal_complement(const Subspace& U, const GramForm& G);

// All maximal chains of nonzero totally isotropic subspaces (dims 1..n in
// k^{2n}).
std::vector<Flag> enumerate_isotropic_flags(const GramForm& G);

// Change of basis P (columns are the new basis vectors) with
// P^T J P = standard symplectic Gram matrix.  DomainError if J is not a
// valid nondegenerate alternating form.
MatrixK symplectic_basis(const GramForm& G);

}  // namespace bldg::gfq
