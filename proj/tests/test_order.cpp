#include <doctest.h>

#include "kronord/heller.hpp"
#include "kronord/io.hpp"
#include "kronord/order.hpp"
#include "support.hpp"

using namespace kronord;
using test::PrimeGuard;

TEST_CASE("regular lattice") {
    PrimeGuard g(3);
    Lattice A = regular(1);
    CHECK(A.valid());
    CHECK(A.rank == 4);
    CHECK(is_projective(A));
    CHECK(is_projective(regular(3)));
    CHECK(is_generically_free(regular(2)));
    CHECK(decompose(tensor_k(regular(2))) == Decomposition{{label_proj(), 2}});
    CHECK_THROWS(regular(0));
}

TEST_CASE("make_lattice enforces the relations") {
    OMatrix X = test::qmat({{0, 0}, {1, 0}});
    CHECK_NOTHROW(make_lattice(X, OMatrix(2, 2)));
    CHECK_THROWS_AS(make_lattice(X, transpose(X)), Error);
    CHECK_THROWS_AS(make_lattice(test::qmat({{0, 0}, {mpq_class(1, 3), 0}}), OMatrix(2, 2)), Error);
}

TEST_CASE("End(A) is A") {
    PrimeGuard g(3);
    Lattice A = regular(1);
    auto B = hom_basis(A, A);
    CHECK(B.size() == 4);
    // Right multiplications by e, X, Y, XY span the same O-module.
    std::vector<OMatrix> expected{identity_q(4), A.actX, A.actY, mul(A.actX, A.actY)};
    CHECK(test::same_span(B, expected));
}

TEST_CASE("Hom spaces consist of intertwiners: property") {
    PrimeGuard g(3);
    std::vector<Lattice> Ls{regular(1), heller_z(0), heller_z(1), heller_z(-1), heller_z(2)};
    for (const auto& L1 : Ls)
        for (const auto& L2 : Ls) {
            HomSpace H(L1, L2);
            auto B = H.basis();
            CHECK(static_cast<int>(B.size()) == H.dim());
            CHECK(test::same_span(B, hom_basis(L1, L2)));
            for (const auto& T : B) {
                CHECK(is_local(T));
                CHECK((LatticeMap{L1, L2, T}.is_linear()));
            }
            // Saturation: a map in the Q-span lying in O must lie in the O-span.
            if (!B.empty()) {
                OMatrix sum = B[0];
                for (std::size_t i = 1; i < B.size(); ++i) sum = add(sum, B[i]);
                CHECK(test::in_span(B, sum));
                CHECK_FALSE(test::in_span(B, scale(B[0], mpq_class(1, 3))));
            }
        }
}

TEST_CASE("lattice cover") {
    PrimeGuard g(3);
    for (int n : {-2, -1, 0, 1, 2, 3}) {
        Lattice Z = heller_z(n);
        LatticeCover c = lattice_cover(Z);
        CHECK(c.g == top_dim(tensor_k(Z)));
        CHECK(rank_k(reduce(c.P)) == Z.rank);
        CHECK((LatticeMap{regular(c.g), Z, c.P}.is_linear()));
    }
}

TEST_CASE("change of basis and sublattices") {
    PrimeGuard g(3);
    Lattice Z = heller_z(2);
    std::mt19937_64 rng(5);
    OMatrix P = test::lift_unit(Z.rank, rng);
    Lattice W = change_basis(Z, P);
    CHECK(W.valid());
    CHECK(decompose(tensor_k(W)) == decompose(tensor_k(Z)));
    CHECK((LatticeMap{W, Z, P}.is_linear()));
    CHECK_THROWS(change_basis(Z, scale(identity_q(Z.rank), 3)));
    // eps A is a sublattice isomorphic to A.
    Lattice A = regular(1);
    Lattice E = sublattice(A, scale(identity_q(4), 3));
    CHECK(E.actX == A.actX);
    // XA is A-stable but its actions on itself are zero.
    Lattice S = sublattice(A, test::vectors(1, {{{1, test::X, 1}}, {{1, test::XY, 1}}}));
    CHECK(S.rank == 2);
    CHECK_FALSE(is_generically_free(S));
}

TEST_CASE("direct sums") {
    PrimeGuard g(3);
    Lattice D = direct_sum(heller_z(1), heller_z(-1));
    CHECK(D.rank == 12);
    CHECK(decompose(tensor_k(D)) == merge(decompose(tensor_k(heller_z(1))), decompose(tensor_k(heller_z(-1)))));
    CHECK(direct_sum(zero_lattice(), regular(1)).rank == 4);
}

TEST_CASE("JSON round trips") {
    PrimeGuard g(3);
    QMatrix M = test::qmat({{mpq_class(1, 2), -3}, {0, mpq_class(7, 9)}});
    CHECK(matrix_from_json(matrix_to_json(M)) == M);
    Lattice Z = heller_z(-2);
    Lattice L = lattice_from_json(lattice_to_json(Z));
    CHECK(L.actX == Z.actX);
    CHECK(L.actY == Z.actY);
    CHECK(L.name == Z.name);
    ModK H = string_module(label_b(2, 3));
    ModK H2 = modk_from_json(modk_to_json(H));
    CHECK(H2.actX == H.actX);
    CHECK(H2.actY == H.actY);
    Decomposition d{{label_h(0), 4}, {label_b(1, 2), 1}, {label_binf(1), 2}};
    CHECK(decomposition_from_json(decomposition_to_json(d)) == d);
    // ModK files use integers mod p.
    Json j = Json::parse(R"({"dim": 1, "actX": [[0]], "actY": [[0]]})");
    CHECK(modk_from_json(j).dim == 1);
    CHECK_THROWS(modk_from_json(Json::parse(R"({"dim": 2, "actX": [[0]], "actY": [[0]]})")));
    CHECK_THROWS(lattice_from_json(Json::parse(R"({"rank": 2, "actX": [[0,1],[0,0]], "actY": [[0,0],[1,0]]})")));
}
