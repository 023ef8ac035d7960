#pragma once

#include <random>
#include <vector>

#include "kronord/dvr.hpp"
#include "kronord/linalg.hpp"
#include "kronord/order.hpp"

namespace test {

using namespace kronord;

// Restores the process-wide prime when a test switches it.
struct PrimeGuard {
    unsigned saved;
    explicit PrimeGuard(unsigned p) : saved(prime()) { set_prime(p); }
    ~PrimeGuard() { set_prime(saved); }
};

// Monomials of A in the order used by regular(): e, Xe, Ye, XYe.
enum Mono { E = 0, X = 1, Y = 2, XY = 3 };

struct Term {
    mpq_class c;
    Mono m;
    int gen;  // 1-based generator index of A^k
};

inline mpq_class eps(int k = 1) { return epsilon_pow(k); }

// Columns are the given vectors of A^k.
inline OMatrix vectors(int k, const std::vector<std::vector<Term>>& vs) {
    OMatrix B(4 * k, static_cast<int>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j)
        for (const Term& t : vs[j]) B(4 * (t.gen - 1) + t.m, static_cast<int>(j)) += t.c;
    return B;
}

inline OMatrix flatten(const std::vector<OMatrix>& ms) {
    if (ms.empty()) return OMatrix(0, 0);
    OMatrix F(ms[0].rows * ms[0].cols, static_cast<int>(ms.size()));
    for (std::size_t j = 0; j < ms.size(); ++j)
        for (std::size_t i = 0; i < ms[j].a.size(); ++i) F(static_cast<int>(i), static_cast<int>(j)) = ms[j].a[i];
    return F;
}

// Equality of O-spans of two families of equally shaped matrices.
inline bool same_span(const std::vector<OMatrix>& a, const std::vector<OMatrix>& b) {
    OMatrix A = flatten(a), B = flatten(b);
    return try_solve(A, B).has_value() && try_solve(B, A).has_value();
}

inline bool in_span(const std::vector<OMatrix>& a, const OMatrix& m) {
    return try_solve(flatten(a), flatten({m})).has_value();
}

inline OMatrix qmat(const std::vector<std::vector<mpq_class>>& rows) {
    OMatrix M(static_cast<int>(rows.size()), rows.empty() ? 0 : static_cast<int>(rows[0].size()));
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) M(i, j) = rows[i][j];
    return M;
}

inline KMatrix random_invertible_k(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<unsigned> d(0, prime() - 1);
    for (;;) {
        KMatrix g(n, n);
        for (auto& x : g.a) x = d(rng);
        if (rank_k(g) == n) return g;
    }
}

// Random matrix over O whose reduction is invertible.
inline OMatrix lift_unit(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(-1, 1);
    OMatrix P = lift(random_invertible_k(n, rng));
    for (auto& x : P.a) x += static_cast<int>(prime()) * d(rng);
    return P;
}

// Integer unimodular base change of small height: a shuffle followed by elementary operations.
inline OMatrix small_unit(int n, std::mt19937_64& rng) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    OMatrix P(n, n);
    for (int i = 0; i < n; ++i) P(perm[i], i) = 1;
    std::uniform_int_distribution<int> pick(0, n - 1), sign(0, 1);
    for (int it = 0; it < 2 * n; ++it) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        int c = sign(rng) ? 1 : -1;
        for (int k = 0; k < n; ++k) P(i, k) += c * P(j, k);
    }
    return P;
}

}  // namespace test
