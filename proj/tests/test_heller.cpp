#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "kronord/ars.hpp"
#include "kronord/heller.hpp"

using namespace kronord;
using namespace fixtures;
using test::PrimeGuard;

namespace {

Decomposition dec(const Lattice& L) { return decompose(tensor_k(L)); }

Decomposition two(SummandLabel a, SummandLabel b) {
    Decomposition d;
    ++d[a];
    ++d[b];
    return d;
}

}  // namespace

TEST_CASE("Heller lattices of strings reduce to the string and its syzygy") {
    PrimeGuard g(3);
    CHECK(dec(heller(label_h(0))) == two(label_h(0), label_v(1)));
    for (int m = 1; m <= 4; ++m) {
        CHECK(dec(heller(label_h(m))) == two(label_h(m), label_h(m - 1)));
        CHECK(dec(heller(label_v(m))) == two(label_v(m), label_v(m + 1)));
        CHECK(heller(label_h(m)).rank == 4 * m);
        CHECK(heller(label_v(m)).rank == 4 * (m + 1));
    }
}

TEST_CASE("Heller lattices of bands") {
    for (unsigned p : {3u, 5u}) {
        PrimeGuard g(p);
        for (int n = 1; n <= 3; ++n) {
            for (Residue l = 0; l < p; ++l)
                CHECK(dec(heller(label_b(l, n))) == two(label_b(l, n), label_b(fp_neg(l), n)));
            // The band at infinity is its own negative.
            CHECK(dec(heller(label_binf(n))) == Decomposition{{label_binf(n), 2}});
            CHECK(heller(label_binf(n)).rank == 4 * n);
        }
    }
}

TEST_CASE("projective input is rejected") {
    CHECK_THROWS_AS(heller(label_proj()), ProjectiveInput);
    CHECK(syzygy(regular(2)).rank == 0);
}

TEST_CASE("Z_n naming and ranks") {
    PrimeGuard g(3);
    CHECK(heller_z(0).rank == 4);
    CHECK(heller_z(3).rank == 12);
    CHECK(heller_z(-2).rank == 12);
    for (int n = -3; n <= 3; ++n) {
        CHECK(heller_z(n).valid());
        CHECK(is_generically_free(heller_z(n)));
        CHECK_FALSE(is_projective(heller_z(n)));
    }
}

TEST_CASE("projective covers of lattices") {
    PrimeGuard g(3);
    for (int n = -2; n <= 2; ++n) {
        Lattice Z = heller_z(n);
        CoverData c = projective_cover(Z);
        CHECK(c.g == top_dim(tensor_k(Z)));
        CHECK(rank_k(reduce(c.cover)) == Z.rank);
        CHECK((LatticeMap{c.source, Z, c.cover}.is_linear()));
        Lattice K = syzygy(Z);
        CHECK(K.rank == 4 * c.g - Z.rank);
    }
}

TEST_CASE("syzygy ranks are divisible by 4: property") {
    PrimeGuard g(3);
    std::mt19937_64 rng(3);
    std::vector<SummandLabel> labels;
    for (int n = 1; n <= 3; ++n) {
        labels.push_back(label_h(n));
        labels.push_back(label_v(n));
        labels.push_back(label_binf(n));
        labels.push_back(label_b(1, n));
    }
    for (const auto& l : labels) {
        Lattice L = heller(l);
        for (int i = 0; i < 3; ++i) {
            CHECK(L.rank % 4 == 0);
            L = syzygy(change_basis(L, test::lift_unit(L.rank, rng)));
        }
    }
}

TEST_CASE("tau Z_n = Z_{n-1}") {
    PrimeGuard g(3);
    std::mt19937_64 rng(0);
    for (int n = -3; n <= 3; ++n) {
        IsoResult r = iso_test(syzygy(heller_z(n)), heller_z(n - 1), rng, {}, true);
        CHECK(r.iso);
        CHECK(is_unit_matrix(r.witness));
    }
}

TEST_CASE("tau fixes the bands at 0 and infinity") {
    PrimeGuard g(3);
    std::mt19937_64 rng(0);
    for (int n = 1; n <= 3; ++n) {
        for (const SummandLabel& l : {label_binf(n), label_b(0, n)}) {
            Lattice Z = heller(l);
            CHECK(iso_test(syzygy(Z), Z, rng, {}, true).iso);
        }
    }
}

namespace {

// Some F_p-combination of a Hom basis reduces to an invertible matrix.
bool hom_has_unit(const Lattice& a, const Lattice& b) {
    auto B = HomSpace(a, b).basis_k();
    long total = 1;
    for (std::size_t i = 0; i < B.size(); ++i) total *= prime();
    for (long c = 0; c < total; ++c) {
        long x = c;
        KMatrix M(b.rank, a.rank);
        for (std::size_t i = 0; i < B.size(); ++i, x /= prime()) M = add_k(M, scale_k(B[i], static_cast<Residue>(x % prime())));
        if (rank_k(M) == a.rank) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("tau exchanges the bands at lambda and -lambda") {
    PrimeGuard g(3);
    std::mt19937_64 rng(0);
    // Exhaustive over F_3 for n = 1.
    Lattice Z1 = heller(label_b(1, 1)), Z2 = heller(label_b(2, 1));
    CHECK_FALSE(hom_has_unit(Z1, Z2));
    CHECK_FALSE(hom_has_unit(syzygy(Z1), Z1));
    CHECK(hom_has_unit(syzygy(Z1), Z2));
    for (int n = 1; n <= 3; ++n) {
        Lattice Z = heller(label_b(1, n)), W = heller(label_b(2, n));
        CHECK(local_test(end_algebra(Z)).local);
        CHECK(dec(Z) == dec(W));
        CHECK_FALSE(iso_test(syzygy(Z), Z, rng, {}, true).iso);
        CHECK(iso_test(syzygy(Z), W, rng, {}, true).iso);
        CHECK(iso_test(syzygy(syzygy(Z)), Z, rng, {}, true).iso);
    }
}

TEST_CASE("explicit bases span the Heller lattices") {
    PrimeGuard g(3);
    std::mt19937_64 rng(0);
    for (int n = -3; n <= 3; ++n) {
        int gs = n >= 0 ? std::max(n, 1) : 1 - n;
        std::vector<std::vector<V>> bases;
        if (n >= 0) bases = {basis_pos(n)};
        else bases = {basis_neg1(n), basis_neg2(n)};
        for (const auto& b : bases) {
            Lattice L = sublattice(regular(gs), test::vectors(gs, b));
            CHECK(L.rank == heller_z(n).rank);
            CHECK(iso_test(L, heller_z(n), rng, {}, true).iso);
        }
        if (n < 0) {
            OMatrix B1 = test::vectors(gs, bases[0]), B2 = test::vectors(gs, bases[1]);
            CHECK(try_solve(B1, B2).has_value());
            CHECK(try_solve(B2, B1).has_value());
            // Scaling Ye_k - Xe_{k-1} by eps gives a different lattice.
            OMatrix B3 = test::vectors(gs, basis_neg1(n, true, true));
            CHECK_FALSE(try_solve(B3, B2).has_value());
        }
    }
}

TEST_CASE("kernels of explicit covers and sign base changes") {
    PrimeGuard g(3);
    for (int n : {1, 2, 3, 4, 0, -1, -2, -3, -4}) {
        CAPTURE(n);
        TauFixture f = fixture(n);
        const int gc = static_cast<int>(f.cover.size());
        OMatrix B = test::vectors(f.g_src, f.source);
        OMatrix pi = cover_map(f.g_src, f.cover);
        CHECK(try_solve(B, pi).has_value());
        CHECK(try_solve(pi, B).has_value());
        CHECK(gc == top_dim(tensor_k(heller_z(n))));
        OMatrix K = test::vectors(gc, f.kernel);
        CHECK(is_zero(mul(pi, K)));
        OMatrix Ks = kernel_saturated(pi);
        CHECK(try_solve(K, Ks).has_value());
        CHECK(try_solve(Ks, K).has_value());
        Lattice T = change_basis(sublattice(regular(gc), K), f.P);
        Lattice Z = sublattice(regular(f.g_dst), test::vectors(f.g_dst, f.target));
        CHECK(T.actX == Z.actX);
        CHECK(T.actY == Z.actY);
    }
}

TEST_CASE("tau Z_-1: block sign change diag(E4, P, P) is not an intertwiner") {
    PrimeGuard g(3);
    TauFixture f = fixture(-1);
    Lattice T = sublattice(regular(5), test::vectors(5, f.kernel));
    Lattice Z = sublattice(regular(3), test::vectors(3, f.target));
    Lattice W = change_basis(T, diag_q({1, 1, 1, 1, -1, 1, -1, 1, -1, 1, -1, 1}));
    CHECK_FALSE((W.actX == Z.actX && W.actY == Z.actY));
    // Exactly two diagonal sign changes work: +-f.P.
    int found = 0;
    for (int mask = 0; mask < 4096; ++mask) {
        std::vector<int> d(12);
        for (int i = 0; i < 12; ++i) d[i] = (mask >> i) & 1 ? -1 : 1;
        Lattice U = change_basis(T, diag_q(d));
        if (U.actX == Z.actX && U.actY == Z.actY) ++found;
    }
    CHECK(found == 2);
}
