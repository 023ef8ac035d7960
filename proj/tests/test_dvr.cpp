#include <doctest.h>

#include <random>

#include "kronord/linalg.hpp"
#include "kronord/zpk.hpp"
#include "support.hpp"

using namespace kronord;
using test::PrimeGuard;

TEST_CASE("valuation and reduction at p = 3") {
    PrimeGuard g(3);
    CHECK(valuation(mpq_class(18, 5)) == 2);
    CHECK(valuation(mpq_class(5, 9)) == -2);
    CHECK(valuation(mpq_class(0)) == kInfValuation);
    CHECK(is_local(mpq_class(7, 2)));
    CHECK_FALSE(is_local(mpq_class(1, 3)));
    CHECK(reduce(mpq_class(1, 2)) == 2);
    CHECK(reduce(mpq_class(-1)) == 2);
    CHECK(reduce(mpq_class(6, 7)) == 0);
    CHECK_THROWS_AS(reduce(mpq_class(1, 3)), Error);
    CHECK(epsilon_pow(3) == 27);
}

TEST_CASE("unit inverse and residue field") {
    PrimeGuard g(5);
    CHECK(unit_inverse(mpq_class(2, 7)) == mpq_class(7, 2));
    CHECK_THROWS(unit_inverse(mpq_class(5)));
    for (Residue a = 1; a < 5; ++a) CHECK(fp_mul(a, fp_inv(a)) == 1);
    CHECK(fp_from_int(-1) == 4);
    CHECK(fp_sub(1, 3) == 3);
    CHECK(fp_neg(0) == 0);
}

TEST_CASE("prime configuration") {
    PrimeGuard g(3);
    CHECK(is_prime(2));
    CHECK(is_prime(7));
    CHECK_FALSE(is_prime(9));
    CHECK_FALSE(is_prime(1));
    CHECK_THROWS(set_prime(4));
    CHECK(prime() == 3);
}

TEST_CASE("scalar text round trip") {
    mpq_class x(-14, 9);
    CHECK(parse_scalar(to_string(x)) == x);
    CHECK(parse_scalar("6/4") == mpq_class(3, 2));
    CHECK_THROWS_AS(parse_scalar("x1"), Error);
}

TEST_CASE("Smith form over the local ring") {
    PrimeGuard g(3);
    OMatrix M = test::qmat({{3, 6, 0}, {1, 2, 9}, {mpq_class(1, 2), 0, 3}});
    SmithForm s = smith_local(M);
    CHECK(is_unit_matrix(s.U));
    CHECK(is_unit_matrix(s.V));
    CHECK(mul(mul(s.U, M), s.V) == s.D);
    for (int i = 0; i < s.D.rows; ++i)
        for (int j = 0; j < s.D.cols; ++j)
            if (i != j) CHECK(s.D(i, j) == 0);
    // det M = 27.
    int total = 0;
    for (int i = 0; i < 3; ++i) total += valuation(s.D(i, i));
    CHECK(total == 3);
}

TEST_CASE("solve over O distinguishes Q-solutions") {
    PrimeGuard g(3);
    OMatrix M = test::qmat({{3, 0}, {0, 1}});
    CHECK(try_solve(M, test::qmat({{6}, {1}})).has_value());
    CHECK_FALSE(try_solve(M, test::qmat({{1}, {0}})).has_value());
    CHECK_THROWS_AS(solve(M, test::qmat({{1}, {0}})), NoSolution);
    LocalSolver ls(M);
    CHECK(ls.rank() == 2);
    CHECK(ls.solve(test::qmat({{9}, {2}})).value() == test::qmat({{3}, {2}}));
}

TEST_CASE("saturated kernels are pure: property") {
    PrimeGuard g(3);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> d(-4, 4);
    for (int trial = 0; trial < 40; ++trial) {
        int m = 1 + trial % 4, n = 2 + trial % 5;
        OMatrix M(m, n);
        for (auto& x : M.a) x = mpq_class(3 * d(rng) + (trial % 3 == 0 ? 0 : d(rng)), 1 + 3 * (d(rng) & 1) + 1);
        OMatrix K = kernel_saturated(M);
        CHECK(K.cols == n - rank_q(M));
        CHECK(is_zero(mul(M, K)));
        CHECK(is_local(K));
        CHECK(rank_k(reduce(K)) == K.cols);
        OMatrix N = normalize_pure_basis(K);
        CHECK(try_solve(K, N).has_value());
        CHECK(try_solve(N, K).has_value());
    }
}

TEST_CASE("saturate and span basis") {
    PrimeGuard g(3);
    OMatrix G = test::qmat({{3}, {6}});
    OMatrix S = saturate(G);
    CHECK(S.cols == 1);
    CHECK(try_solve(S, test::qmat({{1}, {2}})).has_value());
    OMatrix B = span_basis_local(test::qmat({{3, 6}, {6, 12}}));
    CHECK(B.cols == 1);
    CHECK_FALSE(try_solve(B, test::qmat({{1}, {2}})).has_value());
}

TEST_CASE("F_p linear algebra") {
    PrimeGuard g(5);
    KMatrix A(2, 3);
    A(0, 0) = 1, A(0, 1) = 2, A(0, 2) = 3;
    A(1, 0) = 2, A(1, 1) = 4, A(1, 2) = 2;
    CHECK(rank_k(A) == 2);
    KMatrix K = kernel_k(A);
    CHECK(K.cols == 1);
    CHECK(is_zero_k(mul_k(A, K)));
    KMatrix B = columns_k(A, {0, 2});
    CHECK(mul_k(B, inverse_k(B)) == identity_k(2));
    CHECK(pivot_columns_k(A) == std::vector<int>{0, 2});
    KEchelon e(3);
    CHECK(e.insert({1, 2, 3}));
    CHECK_FALSE(e.insert({2, 4, 1}));
    CHECK(e.contains({3, 1, 4}));
}

TEST_CASE("Z/p^K arithmetic") {
    PrimeGuard g(3);
    Zpk R(5);
    CHECK(R.modulus() == 243);
    CHECK(R.val(R.from_int(18)) == 2);
    CHECK(R.val(0) == 5);
    CHECK(R.mul(R.inv(R.from_int(7)), 7) == 1);
    CHECK(R.from(mpq_class(1, 2)) == 122);
    CHECK(R.to_int(R.from_int(-4)) == -4);
    OMatrix M = test::qmat({{1, 3}, {2, 1}});
    ZMatrix Z = R.from(M);
    CHECK(R.mul(Z, R.inverse(Z)) == R.identity(2));
    CHECK(max_zpk_precision() >= 39);
}

TEST_CASE("LLL reduction") {
    std::vector<std::vector<mpz_class>> b{{1, 1, 1}, {-1, 0, 2}, {3, 5, 6}};
    auto r = lll_reduce(b);
    OMatrix Bm(3, 3), Rm(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Bm(i, j) = b[i][j], Rm(i, j) = r[i][j];
    QMatrix T = mul(Rm, inverse_q(Bm));
    for (const auto& x : T.a) CHECK(x.get_den() == 1);
    mpz_class n0 = 0;
    for (const auto& x : r[0]) n0 += x * x;
    CHECK(n0 <= 2);
    CHECK_THROWS_AS(lll_reduce({{1, 2}, {2, 4}}), Error);
}

TEST_CASE("reduced saturated basis") {
    PrimeGuard g(3);
    // Span of (2,4,6) and (1,0,1) over Q meets Z^3 in a lattice containing (1,2,3).
    OMatrix B = test::qmat({{2, 1}, {4, 0}, {6, 1}});
    OMatrix K = reduced_saturated_basis(B);
    CHECK(K.cols == 2);
    for (const auto& x : K.a) CHECK(x.get_den() == 1);
    CHECK(rank_q(hstack(K, B)) == 2);
    CHECK(try_solve(K, test::qmat({{1}, {2}, {3}})));
    CHECK(try_solve(K, test::qmat({{1}, {0}, {1}})));
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> d(-50, 50);
    for (int t = 0; t < 10; ++t) {
        OMatrix G(6, 3);
        for (auto& x : G.a) x = mpq_class(d(rng), 1 + (d(rng) + 50) % 7 * 3 % 7 + 1);
        OMatrix S = saturate(G), R = reduced_saturated_basis(G);
        CHECK(R.cols == S.cols);
        CHECK(try_solve(R, S));
        CHECK(try_solve(S, R));
    }
}
