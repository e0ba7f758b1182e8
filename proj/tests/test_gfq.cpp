#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bldg/common.hpp"
#include "bldg/gfq.hpp"
#include "oracles.hpp"

using namespace bldg;
using namespace bldg::gfq;

namespace {
const unsigned kOrders[] = {2, 3, 4, 5, 7, 8, 9};
}

TEST_CASE("field axioms hold exhaustively for every supported order") {
  for (unsigned q : kOrders) {
    const FieldTable& F = FieldTable::get(q);
    CHECK(F.q == q);
    for (unsigned a = 0; a < q; ++a) {
      CHECK(F.add(a, 0) == a);
      CHECK(F.mul(a, 1) == a);
      CHECK(F.mul(a, 0) == 0);
      CHECK(F.add(a, F.neg(a)) == 0);
      CHECK(F.sub(a, a) == 0);
      if (a) CHECK(F.mul(a, F.inv(a)) == 1);
      for (unsigned b = 0; b < q; ++b) {
        CHECK(F.add(a, b) == F.add(b, a));
        CHECK(F.mul(a, b) == F.mul(b, a));
        for (unsigned c = 0; c < q; ++c) {
          CHECK(F.add(F.add(a, b), c) == F.add(a, F.add(b, c)));
          CHECK(F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c)));
          CHECK(F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c)));
        }
      }
    }
    // the multiplicative group has order q-1: no zero divisors
    for (unsigned a = 1; a < q; ++a)
      for (unsigned b = 1; b < q; ++b) CHECK(F.mul(a, b) != 0);
  }
}

TEST_CASE("extension field encodings match their moduli") {
  // In F_4 = F_2[x]/(x^2+x+1): x*x = x+1, encoded 2*2 = 3.
  CHECK(FieldTable::get(4).mul(2, 2) == 3);
  CHECK(FieldTable::get(4).mul(2, 3) == 1);
  // In F_8 = F_2[x]/(x^3+x+1): x*x^2 = x+1, encoded 2*4 = 3.
  CHECK(FieldTable::get(8).mul(2, 4) == 3);
  // In F_9 = F_3[x]/(x^2+2x+2): x*x = x+1, encoded 3*3 = 4.
  CHECK(FieldTable::get(9).mul(3, 3) == 4);
  CHECK(FieldTable::get(4).modulus() == "x^2+x+1");
  CHECK(FieldTable::get(8).modulus() == "x^3+x+1");
  CHECK(FieldTable::get(9).modulus() == "x^2+2x+2");
}

TEST_CASE("invalid field orders are rejected") {
  CHECK_THROWS_AS(FieldTable::get(0), NotPrimePower);
  CHECK_THROWS_AS(FieldTable::get(1), NotPrimePower);
  CHECK_THROWS_AS(FieldTable::get(6), NotPrimePower);
  CHECK_THROWS_AS(FieldTable::get(10), NotPrimePower);
  CHECK_THROWS_AS(FieldTable::get(12), NotPrimePower);
  CHECK_THROWS_AS(FieldTable::get(16), OrderTooLarge);
  CHECK_THROWS_AS(FieldTable::get(11), OrderTooLarge);
  CHECK_THROWS_AS(FieldTable::get(2).inv(0), DomainError);
}

TEST_CASE("rref preserves the row span and is canonical") {
  std::mt19937 rng(20240811);
  for (unsigned q : {2u, 3u, 4u, 5u}) {
    for (int trial = 0; trial < 20; ++trial) {
      MatrixK A = oracles::random_matrix(q, 3, 4, rng);
      auto R = rref(A);
      CHECK(oracles::span_set(A) == oracles::span_set(R.m));
      CHECK(rref(R.m).m == R.m);
      // rank nonzero rows on top, zero rows below
      for (int r = 0; r < R.rank; ++r) {
        int lead = 0;
        while (lead < A.cols && !R.m.at(r, lead)) ++lead;
        CHECK(lead < A.cols);
        CHECK(R.m.at(r, lead) == 1);
        for (int i = 0; i < A.rows; ++i)
          if (i != r) CHECK(R.m.at(i, lead) == 0);
      }
      for (int r = R.rank; r < A.rows; ++r)
        for (int c = 0; c < A.cols; ++c) CHECK(R.m.at(r, c) == 0);
      // span size determines rank
      CHECK(oracles::span_set(A).size() == upow(q, R.rank));
    }
  }
}

TEST_CASE("two generating sets of the same span reduce identically") {
  std::mt19937 rng(7);
  for (unsigned q : {2u, 3u}) {
    const FieldTable& F = FieldTable::get(q);
    for (int trial = 0; trial < 10; ++trial) {
      MatrixK A = oracles::random_matrix(q, 2, 4, rng);
      // B spans the same space: row ops + a redundant sum row
      MatrixK B(q, 3, 4);
      for (int j = 0; j < 4; ++j) {
        B.at(0, j) = F.add(A.at(0, j), A.at(1, j));
        B.at(1, j) = A.at(1, j);
        B.at(2, j) = F.add(B.at(0, j), F.mul(q - 1, A.at(1, j)));
      }
      CHECK(Subspace::from_vectors(A) == Subspace::from_vectors(B));
    }
  }
}

TEST_CASE("kernel basis solves A v = 0 and has the right size") {
  std::mt19937 rng(99);
  for (unsigned q : {2u, 3u, 4u}) {
    for (int trial = 0; trial < 15; ++trial) {
      MatrixK A = oracles::random_matrix(q, 3, 5, rng);
      MatrixK K = kernel_basis(A);
      auto R = rref(A);
      CHECK(K.rows == A.cols - R.rank);
      for (int r = 0; r < K.rows; ++r) {
        const FieldTable& F = FieldTable::get(q);
        for (int i = 0; i < A.rows; ++i) {
          felt s = 0;
          for (int j = 0; j < A.cols; ++j)
            s = F.add(s, F.mul(A.at(i, j), K.at(r, j)));
          CHECK(s == 0);
        }
      }
      CHECK(oracles::brute_kernel_count(A) == upow(q, K.rows));
      CHECK(rref(K).rank == K.rows);
    }
  }
}

TEST_CASE("subspace membership agrees with the explicit span set") {
  std::mt19937 rng(2025);
  for (unsigned q : {2u, 3u}) {
    for (int trial = 0; trial < 8; ++trial) {
      MatrixK A = oracles::random_matrix(q, 2, 3, rng);
      Subspace U = Subspace::from_vectors(A);
      auto span = oracles::span_set(A);
      std::vector<felt> v(3, 0);
      for (;;) {
        CHECK(U.contains_vector(v) == (span.count(v) > 0));
        size_t k = 0;
        while (k < v.size() && v[k] == q - 1) v[k++] = 0;
        if (k == v.size()) break;
        ++v[k];
      }
    }
  }
}

TEST_CASE("sum and intersection match set union-span and set intersection") {
  std::mt19937 rng(31337);
  for (unsigned q : {2u, 3u}) {
    for (int trial = 0; trial < 12; ++trial) {
      MatrixK A = oracles::random_matrix(q, 2, 4, rng);
      MatrixK B = oracles::random_matrix(q, 2, 4, rng);
      Subspace U = Subspace::from_vectors(A);
      Subspace W = Subspace::from_vectors(B);

      Subspace S = U.sum(W);
      MatrixK stacked(q, 4, 4);
      std::copy(A.a.begin(), A.a.end(), stacked.a.begin());
      std::copy(B.a.begin(), B.a.end(),
                stacked.a.begin() + static_cast<long>(A.a.size()));
      CHECK(oracles::span_set(S.basis) == oracles::span_set(stacked));

      Subspace I = U.intersect(W);
      std::set<std::vector<felt>> expect;
      auto sa = oracles::span_set(A);
      for (const auto& v : oracles::span_set(B))
        if (sa.count(v)) expect.insert(v);
      CHECK(oracles::span_set(I.basis) == expect);

      CHECK(S.dim() + I.dim() == U.dim() + W.dim());
      CHECK(U.contains(I));
      CHECK(W.contains(I));
      CHECK(S.contains(U));
      CHECK(S.contains(W));
    }
  }
}

TEST_CASE("subspace enumeration is sorted, complete, and duplicate-free") {
  auto one_dim_f2 = enumerate_subspaces(2, 1, 2);
  REQUIRE(one_dim_f2.size() == 3);
  CHECK(one_dim_f2[0].basis.a == std::vector<felt>{0, 1});
  CHECK(one_dim_f2[1].basis.a == std::vector<felt>{1, 0});
  CHECK(one_dim_f2[2].basis.a == std::vector<felt>{1, 1});

  CHECK(enumerate_subspaces(3, 1, 3).size() == 13);
  CHECK(enumerate_subspaces(4, 2, 2).size() == 35);
  CHECK(enumerate_subspaces(3, 0, 2).size() == 1);
  CHECK(enumerate_subspaces(3, 3, 2).size() == 1);

  for (unsigned q : {2u, 3u}) {
    for (int m = 0; m <= 4; ++m) {
      for (int d = 0; d <= m; ++d) {
        auto subs = enumerate_subspaces(m, d, q);
        CHECK(subs.size() == gaussian_binomial(m, d, q));
        CHECK(std::is_sorted(subs.begin(), subs.end()));
        CHECK(std::adjacent_find(subs.begin(), subs.end()) == subs.end());
        for (const auto& s : subs) {
          CHECK(s.dim() == d);
          CHECK(Subspace::from_vectors(s.basis) == s);
        }
      }
    }
  }
  CHECK_THROWS_AS(enumerate_subspaces(2, 3, 2), DomainError);
}

TEST_CASE("gaussian binomials: frozen values, symmetry, Pascal rule") {
  CHECK(gaussian_binomial(3, 1, 2) == 7);
  CHECK(gaussian_binomial(4, 2, 2) == 35);
  CHECK(gaussian_binomial(5, 2, 2) == 155);
  CHECK(gaussian_binomial(4, 2, 3) == 130);
  CHECK(gaussian_binomial(6, 3, 2) == 1395);

  for (unsigned q : kOrders)
    for (int m = 0; m <= 6; ++m)
      for (int d = 0; d <= m; ++d) {
        CHECK(gaussian_binomial(m, d, q) == gaussian_binomial(m, m - d, q));
        if (d >= 1 && d < m)
          CHECK(gaussian_binomial(m, d, q) ==
                checked_add(checked_mul(upow(q, d),
                                        gaussian_binomial(m - 1, d, q)),
                            gaussian_binomial(m - 1, d - 1, q)));
      }
  CHECK_THROWS_AS(gaussian_binomial(3, 4, 2), DomainError);
  CHECK_THROWS_AS(gaussian_binomial(3, -1, 2), DomainError);
}

TEST_CASE("complete flag counts match explicit incidence counting") {
  CHECK(complete_flag_count(1, 2) == 1);
  CHECK(complete_flag_count(1, 9) == 1);
  CHECK(complete_flag_count(2, 2) == 3);
  CHECK(complete_flag_count(2, 3) == 4);
  CHECK(complete_flag_count(3, 2) == 21);
  CHECK(complete_flag_count(3, 3) == 52);
  CHECK(complete_flag_count(4, 2) == 315);
  CHECK(complete_flag_count(4, 3) == 2080);
  CHECK(complete_flag_count(5, 2) == 9765);

  // oracle: count nested (U_1 c U_2) pairs directly
  for (unsigned q : {2u, 3u}) {
    std::uint64_t pairs = 0;
    auto lines = enumerate_subspaces(3, 1, q);
    auto planes = enumerate_subspaces(3, 2, q);
    for (const auto& w : planes)
      for (const auto& u : lines)
        if (w.contains(u)) ++pairs;
    CHECK(pairs == complete_flag_count(3, q));
  }
}

TEST_CASE("complete flag enumeration produces each flag exactly once") {
  for (unsigned q : {2u, 3u}) {
    for (int m = 1; m <= 3; ++m) {
      auto flags = enumerate_complete_flags(m, q);
      CHECK(flags.size() == complete_flag_count(m, q));
      std::set<std::vector<std::string>> seen;
      for (const auto& f : flags) {
        CHECK(static_cast<int>(f.chain.size()) == m - 1);
        std::vector<std::string> key;
        for (size_t i = 0; i < f.chain.size(); ++i) {
          CHECK(f.chain[i].dim() == static_cast<int>(i) + 1);
          if (i) CHECK(f.chain[i].contains(f.chain[i - 1]));
          key.push_back(f.chain[i].encode());
        }
        seen.insert(key);
      }
      CHECK(seen.size() == flags.size());
    }
  }
}

TEST_CASE("flag validation rejects broken chains") {
  auto lines = enumerate_subspaces(3, 1, 2);
  auto planes = enumerate_subspaces(3, 2, 2);
  // a line not inside the chosen plane
  Subspace w = planes[0];
  size_t i = 0;
  while (w.contains(lines[i])) ++i;
  Subspace u = lines[i];
  REQUIRE(!w.contains(u));
  CHECK_THROWS_AS(Flag::make(3, {u, w}), DomainError);
  CHECK_THROWS_AS(Flag::make(3, {Subspace::zero(2, 3)}), DomainError);
  CHECK_NOTHROW(Flag::make(3, {Subspace::zero(2, 3)}, true));
  CHECK_THROWS_AS(Flag::make(4, {u}), DimensionMismatch);
}

TEST_CASE("gram form validation") {
  CHECK_NOTHROW(GramForm::standard_symplectic(1, 2));
  CHECK_NOTHROW(GramForm::standard_symplectic(3, 9));

  // symmetric with zero diagonal is alternating in characteristic 2
  MatrixK J(2, 2, 2);
  J.at(0, 1) = 1;
  J.at(1, 0) = 1;
  CHECK_NOTHROW(GramForm::make(J));

  MatrixK bad_diag = J;
  bad_diag.at(0, 0) = 1;
  CHECK_THROWS_AS(GramForm::make(bad_diag), DomainError);

  MatrixK not_skew(3, 2, 2);
  not_skew.at(0, 1) = 1;
  not_skew.at(1, 0) = 1;  // over F_3 this is symmetric, not skew
  CHECK_THROWS_AS(GramForm::make(not_skew), DomainError);

  MatrixK singular(2, 2, 2);  // zero matrix
  CHECK_THROWS_AS(GramForm::make(singular), DomainError);

  MatrixK rect(2, 2, 4);
  CHECK_THROWS_AS(GramForm::make(rect), DomainError);
}

TEST_CASE("pairing is bilinear and antisymmetric") {
  std::mt19937 rng(5150);
  for (unsigned q : {2u, 3u, 4u}) {
    GramForm G = GramForm::standard_symplectic(2, q);
    const FieldTable& F = FieldTable::get(q);
    std::uniform_int_distribution<unsigned> pick(0, q - 1);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<felt> u(4), v(4), w(4);
      for (int j = 0; j < 4; ++j) {
        u[j] = pick(rng);
        v[j] = pick(rng);
        w[j] = pick(rng);
      }
      CHECK(pairing(G, u, v) == F.neg(pairing(G, v, u)));
      CHECK(pairing(G, u, u) == 0);
      std::vector<felt> vw(4);
      for (int j = 0; j < 4; ++j) vw[j] = F.add(v[j], w[j]);
      CHECK(pairing(G, u, vw) == F.add(pairing(G, u, v), pairing(G, u, w)));
    }
  }
}

TEST_CASE("orthogonal complements: frozen example, dimension, duality") {
  GramForm G = GramForm::standard_symplectic(2, 2);
  // e_1^perp in the standard form on k^4 is spanned by e_1, e_2, f_2
  MatrixK e1(2, 1, 4);
  e1.at(0, 0) = 1;
  Subspace U = Subspace::from_vectors(e1);
  Subspace P = orthogonal_complement(U, G);
  MatrixK expect(2, 3, 4);
  expect.at(0, 0) = 1;
  expect.at(1, 1) = 1;
  expect.at(2, 3) = 1;
  CHECK(P == Subspace::from_vectors(expect));

  std::mt19937 rng(404);
  for (unsigned q : {2u, 3u}) {
    GramForm H = GramForm::standard_symplectic(2, q);
    for (int trial = 0; trial < 10; ++trial) {
      MatrixK A = oracles::random_matrix(q, 2, 4, rng);
      Subspace W = Subspace::from_vectors(A);
      Subspace Wp = orthogonal_complement(W, H);
      CHECK(Wp.dim() == 4 - W.dim());
      CHECK(orthogonal_complement(Wp, H) == W);
      // isotropic iff contained in own complement
      CHECK(is_totally_isotropic(W, H) == Wp.contains(W));
    }
  }
}

TEST_CASE("isotropic flag enumeration matches the closed-form counts") {
  // chains of isotropic subspaces of dims 1..n in k^{2n}:
  // prod_{m=1..n} (q^{2m}-1)/(q-1)
  auto expected = [](int n, unsigned q) {
    std::uint64_t r = 1;
    for (int m = 1; m <= n; ++m)
      r = checked_mul(r, (upow(q, 2 * m) - 1) / (q - 1));
    return r;
  };
  for (unsigned q : {2u, 3u}) {
    for (int n = 1; n <= 2; ++n) {
      GramForm G = GramForm::standard_symplectic(n, q);
      auto flags = enumerate_isotropic_flags(G);
      CHECK(flags.size() == expected(n, q));
      std::set<std::vector<std::string>> seen;
      for (const auto& f : flags) {
        CHECK(static_cast<int>(f.chain.size()) == n);
        std::vector<std::string> key;
        for (size_t i = 0; i < f.chain.size(); ++i) {
          CHECK(f.chain[i].dim() == static_cast<int>(i) + 1);
          CHECK(is_totally_isotropic(f.chain[i], G));
          if (i) CHECK(f.chain[i].contains(f.chain[i - 1]));
          key.push_back(f.chain[i].encode());
        }
        seen.insert(key);
      }
      CHECK(seen.size() == flags.size());
    }
  }
  CHECK(enumerate_isotropic_flags(GramForm::standard_symplectic(2, 2)).size() ==
        45);
  CHECK(enumerate_isotropic_flags(GramForm::standard_symplectic(2, 3)).size() ==
        160);
}

TEST_CASE("symplectic basis transforms any valid form to the standard one") {
  std::mt19937 rng(1234);
  for (unsigned q : {2u, 3u, 5u}) {
    for (int n = 1; n <= 2; ++n) {
      GramForm Gstd = GramForm::standard_symplectic(n, q);
      for (int trial = 0; trial < 8; ++trial) {
        MatrixK P = oracles::random_invertible(q, 2 * n, rng);
        MatrixK J = mat_mul(mat_transpose(P), mat_mul(Gstd.J, P));
        GramForm G = GramForm::make(J);
        MatrixK B = symplectic_basis(G);
        CHECK(mat_mul(mat_transpose(B), mat_mul(G.J, B)) == Gstd.J);
      }
    }
  }
  // char 2 form that is not block standard
  MatrixK J(2, 4, 4);
  auto setpair = [&](int i, int j) {
    J.at(i, j) = 1;
    J.at(j, i) = 1;
  };
  setpair(0, 3);
  setpair(1, 2);
  setpair(0, 1);
  GramForm G = GramForm::make(J);
  MatrixK B = symplectic_basis(G);
  CHECK(mat_mul(mat_transpose(B), mat_mul(G.J, B)) ==
        GramForm::standard_symplectic(2, 2).J);
}
