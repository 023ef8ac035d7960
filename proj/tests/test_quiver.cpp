#include <doctest.h>

#include <algorithm>

#include "kronord/heller.hpp"
#include "kronord/quiver.hpp"
#include "support.hpp"

using namespace kronord;
using test::PrimeGuard;

namespace {

const ComponentWindow& window() {
    static const ComponentWindow W = [] {
        PrimeGuard g(3);
        return build_component(-2, 2, 3);
    }();
    return W;
}

}  // namespace

TEST_CASE("d' counts non-projective summands") {
    PrimeGuard g(3);
    CHECK(d_prime(heller_z(1)) == 2);
    CHECK(d_prime(heller_z(-2)) == 2);
    CHECK(d_prime(regular(2)) == 0);
    CHECK(d_prime(Decomposition{{label_proj(), 3}, {label_h(1), 2}}) == 2);
}

TEST_CASE("window -2..2 of depth 3") {
    PrimeGuard g(3);
    const ComponentWindow& W = window();
    for (int n = -2; n <= 2; ++n) {
        const QuiverVertex* z = W.at(0, n);
        REQUIRE(z);
        CHECK(z->name == "Z_" + std::to_string(n));
        CHECK(z->rank == heller_z(n).rank);
        CHECK_FALSE(z->frontier);
        const QuiverVertex* e = W.at(1, n);
        REQUIRE(e);
        CHECK(e->dprime == 4);
        CHECK(W.at(2, n));
    }
    CHECK(W.at(1, 1)->rank == 4);
    CHECK(W.at(1, 0)->rank == 12);
    CHECK(W.at(1, -1)->rank == 20);
    CHECK(W.at(2, 1)->dec == Decomposition{{label_h(0), 3}, {label_v(1), 3}});
    VerifyReport R = verify_za_infinity(W);
    for (const auto& c : R.checks) {
        INFO(c.name);
        CHECK(c.pass);
    }
    CHECK(R.all_pass());
    CHECK(R.max_in_degree <= 3);
    CHECK(R.z_row_strict == 0);
}

TEST_CASE("d' is constant along tau orbits") {
    const ComponentWindow& W = window();
    CHECK_FALSE(W.tau_edges.empty());
    for (const auto& t : W.tau_edges) CHECK(W.vertices[t.vertex].dprime == W.vertices[t.tau].dprime);
    for (const auto& v : W.vertices) {
        auto t = W.tau_of(v.id);
        if (t) CHECK(W.vertices[*t].col == v.col - 1);
    }
}

TEST_CASE("window JSON round trip") {
    PrimeGuard g(3);
    const ComponentWindow& W = window();
    ComponentWindow back = parse_window(emit_json(W));
    CHECK(back.vertices.size() == W.vertices.size());
    CHECK(back.edges.size() == W.edges.size());
    CHECK(emit_dot(back) == emit_dot(W));
    CHECK(emit_json(back) == emit_json(W));
    CHECK(verify_za_infinity(back).to_json() == verify_za_infinity(W).to_json());
}

TEST_CASE("negative control: a deleted arrow is detected") {
    PrimeGuard g(3);
    ComponentWindow W = window();
    const QuiverVertex* e0 = W.at(1, 0);
    REQUIRE(e0);
    auto it = std::find_if(W.edges.begin(), W.edges.end(), [&](const QuiverEdge& x) { return x.dst == e0->id; });
    REQUIRE(it != W.edges.end());
    W.edges.erase(it);
    VerifyReport R = verify_za_infinity(W);
    CHECK_FALSE(R.all_pass());
    const CheckResult* c = R.find("c: middles above row 0 are (r+1, n) + (r-1, n-1)");
    REQUIRE(c);
    CHECK_FALSE(c->pass);
}

TEST_CASE("negative control: a changed d' is detected") {
    ComponentWindow W = window();
    W.vertices[W.at(1, 1)->id].dprime = 6;
    VerifyReport R = verify_za_infinity(W);
    CHECK_FALSE(R.find("a: d' = 2(r+1)")->pass);
    CHECK_FALSE(R.find("d' is tau-invariant")->pass);
}

TEST_CASE("DOT output names every vertex") {
    const ComponentWindow& W = window();
    std::string dot = emit_dot(W);
    CHECK(dot.rfind("digraph", 0) == 0);
    for (const auto& v : W.vertices) CHECK(dot.find(v.name) != std::string::npos);
}

TEST_CASE("rank ledgers exclude the Euclidean tree classes") {
    InfeasibilityProof e6 = tree_class_ledger(TreeShape::E6);
    CHECK(e6.infeasible);
    CHECK(e6.steps.back().value == 4);
    InfeasibilityProof e7 = tree_class_ledger(TreeShape::E7);
    CHECK(e7.infeasible);
    REQUIRE(e7.steps.size() >= 2);
    CHECK(e7.steps[e7.steps.size() - 2].value == 68);
    CHECK(e7.steps.back().value == 48);
    CHECK_FALSE(e7.rational_solution);
    InfeasibilityProof e8 = tree_class_ledger(TreeShape::E8);
    CHECK(e8.infeasible);
    CHECK(e8.derived.at("x′") == 64);
    CHECK(e8.derived.at("y′") == -4);
    for (const auto* P : {&e6, &e7, &e8}) {
        CHECK(find_infeasibility(P->system));
        CHECK_FALSE(P->certificate.empty());
        CHECK(P->to_json()["infeasible"] == true);
    }
    CHECK(parse_tree_shape("E7") == TreeShape::E7);
    CHECK_THROWS_AS(parse_tree_shape("D4"), Error);
}

TEST_CASE("determined values of small rank systems") {
    RankSystem S;
    S.unknowns = {"a", "b", "c"};
    S.equations = {{"(1)", {{"a", 1}, {"b", 1}}, 12}, {"(2)", {{"b", 1}, {"c", -1}}, 0}};
    CHECK(determined_value(S, {{"a", 1}, {"c", 1}}) == mpq_class(12));
    CHECK_FALSE(determined_value(S, {{"a", 1}}));
    CHECK(determined_value(S, {{"a", 1}, {"b", 1}}, {"(1)"}) == mpq_class(12));
    CHECK_THROWS_AS(determined_value(S, {{"a", 1}}, {"(9)"}), Error);
    CHECK(rationally_consistent(S));
    CHECK_FALSE(find_infeasibility(S));
    S.equations.push_back({"(3)", {{"a", 1}, {"c", 1}}, 10});
    CHECK_FALSE(rationally_consistent(S));
    CHECK(find_infeasibility(S));
    RankSystem T;
    T.unknowns = {"u", "v"};
    T.equations = {{"(1)", {{"u", 1}, {"v", 1}}, 6}};
    CHECK(find_infeasibility(T));  // positive multiples of 4 cannot sum to 6
    T.equations[0].rhs = 8;
    CHECK_FALSE(find_infeasibility(T));
}

TEST_CASE("rank systems from meshes") {
    std::map<std::string, int> known{{"A", 4}, {"B", 8}};
    std::vector<std::pair<std::string, std::string>> unknown{{"C", "x"}};
    RankSystem S = rank_system_from_meshes(known, unknown, {{"(1)", "A", "B", {"C"}}});
    REQUIRE(S.equations.size() == 1);
    CHECK(determined_value(S, {{"x", 1}}) == mpq_class(12));
}

TEST_CASE("quiver window arguments") {
    CHECK_THROWS_AS(build_component(0, 1, 0), Error);
    CHECK_THROWS_AS(build_component(2, 1, 1), Error);
    QuiverOptions opt;
    opt.band_seeds.push_back(label_binf(1));
    CHECK_THROWS_AS(build_component(0, 1, 1, opt), Error);
}
