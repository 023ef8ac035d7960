#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "kronord/ars.hpp"
#include "kronord/heller.hpp"
#include "kronord/quiver.hpp"

using namespace kronord;
using namespace fixtures;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (!pass) note << "; ";
        pass = false;
        note << what;
    }
};

Decomposition dec(const Lattice& L) { return decompose(tensor_k(L)); }

Decomposition pair_of(const SummandLabel& a, const SummandLabel& b) {
    Decomposition d;
    ++d[a];
    ++d[b];
    return d;
}

std::string show(const Decomposition& d) { return decomposition_to_string(d); }

bool certified_iso(const Lattice& a, const Lattice& b, std::mt19937_64& rng) {
    IsoResult r = iso_test(a, b, rng, {}, true);
    return r.iso && is_unit_matrix(r.witness) && LatticeMap{a, b, r.witness}.is_linear();
}

void criterion1(Outcome& o) {
    std::vector<std::string> binf;
    for (unsigned p : {3u, 5u}) {
        test::PrimeGuard g(p);
        for (int n = 1; n <= 4; ++n) {
            if (p == 3) {
                Decomposition h = dec(heller(label_h(n))), v = dec(heller(label_v(n)));
                o.require(h == pair_of(label_h(n), label_h(n - 1)), "H:" + std::to_string(n) + " gives " + show(h));
                o.require(v == pair_of(label_v(n), label_v(n + 1)), "V:" + std::to_string(n) + " gives " + show(v));
                Decomposition b = dec(heller(label_binf(n)));
                if (b != pair_of(label_h(n), label_h(n - 1))) binf.push_back(show(b));
            }
            std::vector<Residue> lambdas{0, 1, 2};
            if (p == 5) lambdas.push_back(4);
            for (Residue l : lambdas) {
                Residue m = static_cast<Residue>((p - l) % p);
                Decomposition b = dec(heller(label_b(l, n)));
                o.require(b == pair_of(label_b(l, n), label_b(m, n)),
                          "p=" + std::to_string(p) + " B:" + std::to_string(l) + ":" + std::to_string(n) + " gives " + show(b));
            }
        }
    }
    if (!binf.empty()) {
        std::string all;
        for (const auto& s : binf) all += (all.empty() ? "" : " ") + s;
        o.require(false, "Binf:1..4 give " + all + " instead of {H:n, H:n-1}");
    }
}

void criterion2(Outcome& o) {
    test::PrimeGuard g(3);
    std::mt19937_64 rng(0);
    std::uniform_int_distribution<int> kind(0, 3), size(1, 4), lam(0, 2);
    int count = 0, bad = 0;
    auto check = [&](const Lattice& L) {
        ++count;
        if (L.rank % 4 != 0) ++bad;
    };
    for (int i = 0; i < 24; ++i) {
        int n = size(rng);
        SummandLabel l;
        switch (kind(rng)) {
            case 0: l = label_h(n); break;
            case 1: l = label_v(n); break;
            case 2: l = label_b(static_cast<Residue>(lam(rng)), n); break;
            default: l = label_binf(n); break;
        }
        Lattice Z = heller(l);
        check(Z);
        Lattice S = syzygy(Z);
        check(S);
        check(syzygy(S));
    }
    for (int n = -3; n <= 3; ++n) check(almost_split(heller_z(n)).middle);
    o.require(count >= 50, "only " + std::to_string(count) + " lattices");
    o.require(bad == 0, std::to_string(bad) + " ranks not divisible by 4");
    o.note << (o.pass ? "" : "; ") << count << " lattices";
}

void criterion3(Outcome& o) {
    test::PrimeGuard g(3);
    std::mt19937_64 rng(0);
    for (int n = -3; n <= 3; ++n)
        o.require(certified_iso(syzygy(heller_z(n)), heller_z(n - 1), rng), "tau Z_" + std::to_string(n) + " not certified");
    // Printed base changes: P of the cases n > 1, n = 0 and n < -1.
    for (int n : {2, 3, 4, 0, -2, -3, -4}) {
        TauFixture f = fixture(n);
        Lattice T = change_basis(sublattice(regular(static_cast<int>(f.cover.size())), test::vectors(static_cast<int>(f.cover.size()), f.kernel)), f.P);
        Lattice Z = sublattice(regular(f.g_dst), test::vectors(f.g_dst, f.target));
        o.require(T.actX == Z.actX && T.actY == Z.actY, "P fixture n=" + std::to_string(n) + " is not an intertwiner");
    }
    // Printed P-tilde = diag(E4, P, P), P = diag(-1, 1, -1, 1), for tau Z_-1 onto Z_-2.
    TauFixture f = fixture(-1);
    Lattice T = sublattice(regular(5), test::vectors(5, f.kernel));
    Lattice Z = sublattice(regular(3), test::vectors(3, f.target));
    Lattice W = change_basis(T, diag_q({1, 1, 1, 1, -1, 1, -1, 1, -1, 1, -1, 1}));
    o.require(W.actX == Z.actX && W.actY == Z.actY, "printed P-tilde = diag(E4,P,P) does not intertwine tau Z_-1 with Z_-2");
}

void criterion4(Outcome& o) {
    test::PrimeGuard g(3);
    std::mt19937_64 rng(0);
    for (int n = 1; n <= 3; ++n) {
        for (const SummandLabel& l : {label_binf(n), label_b(0, n), label_b(1, n)}) {
            Lattice Z = heller(l);
            o.require(certified_iso(syzygy(Z), Z, rng), "tau Z[" + label_to_string(l) + "] not iso Z[" + label_to_string(l) + "]");
        }
    }
}

struct Middle {
    std::vector<Lattice> projective, other;
};

Middle split_middle(const Lattice& M, std::mt19937_64& rng, bool& ok) {
    AlmostSplitSeq s = almost_split(M);
    SplitCertificate c = split_lattice(s.middle, rng);
    ok = sequence_invariants_hold(s) && c.verify(s.middle);
    Middle out;
    for (const auto& S : c.summands) (is_projective(S) ? out.projective : out.other).push_back(S);
    return out;
}

Lattice e_one;

void criterion5(Outcome& o) {
    test::PrimeGuard g(3);
    std::mt19937_64 rng(0);
    bool ok = false;
    Middle m = split_middle(heller_z(1), rng, ok);
    o.require(ok, "sequence or splitting certificate invalid");
    o.require(m.projective.size() == 1 && m.projective[0].rank == 4, "no single copy of A");
    o.require(m.other.size() == 1, "middle has " + std::to_string(m.other.size()) + " non-projective summands");
    if (m.other.size() != 1) return;
    e_one = m.other[0];
    o.require(e_one.rank == 4, "rank E_1 = " + std::to_string(e_one.rank));
    o.require(dec(e_one) == Decomposition{{label_h(0), 4}}, "E_1 reduces to " + show(dec(e_one)));
}

void criterion6(Outcome& o) {
    test::PrimeGuard g(3);
    std::mt19937_64 rng(0);
    if (e_one.rank == 0) return o.require(false, "E_1 unavailable");
    bool ok = false;
    Middle m = split_middle(e_one, rng, ok);
    o.require(ok, "sequence or splitting certificate invalid");
    o.require(m.projective.empty() && m.other.size() == 2, "middle does not have two non-projective summands");
    if (m.other.size() != 2) return;
    int small = m.other[0].rank == 4 ? 0 : 1;
    const Lattice &Z0 = m.other[small], &F1 = m.other[1 - small];
    o.require(certified_iso(Z0, heller_z(0), rng), "rank-4 summand is not Z_0");
    o.require(F1.rank == 12, "rank F_1 = " + std::to_string(F1.rank));
    EndAlgebra E = end_algebra(F1);
    o.require(local_test(E).local && semisimple_dim(E) == 1, "End(F_1) is not local with 1-dimensional top");
}

void criterion7(Outcome& o) {
    test::PrimeGuard g(3);
    for (int n : {0, -1, -2}) {
        AlmostSplitSeq s = almost_split(heller_z(n));
        Decomposition d = dec(s.middle);
        o.require(d == Decomposition{{label_v(1 - n), 4}}, "E_" + std::to_string(n) + " reduces to " + show(d));
        int gens = lattice_cover(s.middle).g;
        o.require(gens == 4 * -n + 8, "E_" + std::to_string(n) + " has " + std::to_string(gens) + " generators");
    }
}

void criterion8(Outcome& o, const ComponentWindow& W) {
    test::PrimeGuard g(3);
    for (int m = -3; m <= 3; ++m) o.require(d_prime(heller_z(m)) == 2, "d'(Z_" + std::to_string(m) + ") != 2");
    for (int n = -2; n <= 1; ++n) {
        const QuiverVertex* v = W.at(1, n);
        o.require(v && d_prime(v->lattice) == 4, "d'(E_" + std::to_string(n) + ") != 4");
    }
    for (const auto& t : W.tau_edges)
        o.require(W.vertices[t.vertex].dprime == W.vertices[t.tau].dprime,
                  "d' differs on " + W.vertices[t.vertex].name + ", " + W.vertices[t.tau].name);
}

void criterion9(Outcome& o, const ComponentWindow& W) {
    int n = 0;
    for (const auto& m : W.meshes) {
        if (W.vertices[m.head].row == 0) continue;
        ++n;
        const std::string& name = W.vertices[m.head].name;
        o.require(m.dec_middle == merge(m.dec_head, m.dec_tail), name + ": middle reduction is not head + tail");
        o.require(d_prime(m.dec_middle) == d_prime(m.dec_head) + d_prime(m.dec_tail), name + ": d' not additive");
    }
    o.require(n > 0, "no sequences off the Heller row");
    o.note << (o.pass ? "" : "; ") << n << " sequences";
}

void criterion10(Outcome& o, const ComponentWindow& W) {
    VerifyReport R = verify_za_infinity(W);
    for (const auto& c : R.checks)
        o.require(c.pass, c.name + (c.failures.empty() ? "" : ": " + c.failures.front()));
    o.note << (o.pass ? "" : "; ") << W.vertices.size() << " vertices, " << W.meshes.size() << " meshes";
}

void criterion11(Outcome& o) {
    auto at = [](const InfeasibilityProof& P, const std::string& k) {
        auto it = P.derived.find(k);
        return it == P.derived.end() ? mpq_class(-1000) : it->second;
    };
    InfeasibilityProof e6 = tree_class_ledger(TreeShape::E6);
    o.require(e6.infeasible && e6.steps.back().form == LinearForm{{"α′", 1}, {"β′", 1}} && e6.steps.back().value == 4,
              "E6: no alpha' + beta' = 4");
    InfeasibilityProof e7 = tree_class_ledger(TreeShape::E7);
    const auto& s = e7.steps;
    LinearForm xx{{"x′", 1}, {"x″", 1}};
    bool clash = s.size() >= 2 && s[s.size() - 2].form == xx && s.back().form == xx &&
                 s[s.size() - 2].value == 68 && s.back().value == 48;
    o.require(e7.infeasible && clash, "E7: no x' + x'' clash 68 / 48");
    o.require(at(e7, "α") == 24 && at(e7, "α′") == 24 && at(e7, "α″") == 20, "E7: derived alpha values differ");
    InfeasibilityProof e8 = tree_class_ledger(TreeShape::E8);
    auto sum = determined_value(e8.system, {{"x′", 1}, {"y′", 1}}, {"(2)"});
    o.require(e8.infeasible && at(e8, "x′") == 64 && sum && *sum == 60, "E8: no x' = 64 vs x' + y' = 60");
    o.require(at(e8, "α") == 32 && at(e8, "β") == 32, "E8: derived alpha, beta differ");
}

void criterion12(Outcome& o) {
    test::PrimeGuard g(3);
    std::mt19937_64 rng(0);
    std::vector<SummandLabel> cat{label_proj(), label_h(0)};
    for (int n = 1; n <= 4; ++n) {
        cat.push_back(label_h(n));
        cat.push_back(label_v(n));
        cat.push_back(label_binf(n));
        for (Residue l = 0; l < prime(); ++l) cat.push_back(label_b(l, n));
    }
    auto build = [](const Decomposition& d) {
        ModK M{0, KMatrix(0, 0), KMatrix(0, 0)};
        for (const auto& [l, k] : d)
            for (int i = 0; i < k; ++i) M = direct_sum(M, string_module(l));
        return M;
    };
    std::uniform_int_distribution<std::size_t> pick(0, cat.size() - 1);
    int wrong = 0;
    for (int t = 0; t < 200; ++t) {
        Decomposition d;
        while (true) {
            SummandLabel l = cat[pick(rng)];
            if (decomposition_dim(d) + label_dim(l) > 40) break;
            ++d[l];
        }
        if (decompose(conjugate(build(d), test::random_invertible_k(decomposition_dim(d), rng))) != d) ++wrong;
    }
    o.require(wrong == 0, std::to_string(wrong) + " of 200 random multisets misidentified");
    std::vector<Decomposition> fixed{{{label_h(2), 1}, {label_v(3), 2}, {label_b(1, 2), 1}},
                                     {{label_proj(), 2}, {label_binf(3), 1}, {label_h(0), 3}},
                                     {{label_b(0, 4), 2}, {label_b(2, 1), 1}, {label_v(1), 1}, {label_h(4), 1}}};
    int drift = 0;
    for (int t = 0; t < 200; ++t) {
        const Decomposition& d = fixed[t % fixed.size()];
        ModK M = build(d);
        if (decompose(conjugate(M, test::random_invertible_k(M.dim, rng))) != d) ++drift;
    }
    o.require(drift == 0, std::to_string(drift) + " of 200 conjugates decomposed differently");
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    ComponentWindow window;
    bool have_window = false;
    auto get_window = [&]() -> const ComponentWindow& {
        if (!have_window) {
            test::PrimeGuard g(3);
            window = build_component(-3, 3, 3);
            have_window = true;
        }
        return window;
    };
    std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"Heller decompositions", criterion1},
        {"rank law", criterion2},
        {"tau-orbit of Z_n and base-change fixtures", criterion3},
        {"band fixed points", criterion4},
        {"E(Z_1) = A + E_1", criterion5},
        {"E(E_1) = Z_0 + F_1", criterion6},
        {"E_n reductions and generators", criterion7},
        {"d' table", [&](Outcome& o) { criterion8(o, get_window()); }},
        {"split reduction", [&](Outcome& o) { criterion9(o, get_window()); }},
        {"ZA_infinity window (-3, 3, 3)", [&](Outcome& o) { criterion10(o, get_window()); }},
        {"tree-class ledgers", criterion11},
        {"decomposition oracle", criterion12},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        if (!o.pass) ++failed;
        std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first;
        std::string note = o.note.str();
        if (!note.empty()) std::cout << "  (" << note << ")";
        std::cout << std::endl;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria pass in " << secs << " s" << std::endl;
    return failed == 0 ? 0 : 1;
}
