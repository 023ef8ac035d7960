#include <algorithm>
#include <set>
#include <sstream>

#include "kronord/quiver.hpp"

namespace kronord {

namespace {

struct Reduced {
    std::vector<std::vector<mpq_class>> rows;  // augmented, last entry is the rhs
    std::vector<int> pivots;
    bool consistent = true;
};

std::vector<const RankEquation*> select(const RankSystem& S, const std::vector<std::string>& tags) {
    std::vector<const RankEquation*> out;
    for (const auto& e : S.equations)
        if (tags.empty() || std::find(tags.begin(), tags.end(), e.tag) != tags.end()) out.push_back(&e);
    if (!tags.empty() && out.size() != tags.size()) throw Error("rank system: unknown equation tag");
    return out;
}

int index_of(const RankSystem& S, const std::string& u) {
    auto it = std::find(S.unknowns.begin(), S.unknowns.end(), u);
    if (it == S.unknowns.end()) throw Error("rank system: unknown variable " + u);
    return static_cast<int>(it - S.unknowns.begin());
}

std::vector<mpq_class> dense(const RankSystem& S, const LinearForm& f) {
    std::vector<mpq_class> v(S.unknowns.size());
    for (const auto& [u, c] : f) v[index_of(S, u)] += c;
    return v;
}

Reduced rref(const RankSystem& S, const std::vector<std::string>& tags) {
    const int n = static_cast<int>(S.unknowns.size());
    Reduced R;
    for (const RankEquation* e : select(S, tags)) {
        std::vector<mpq_class> row = dense(S, e->lhs);
        row.push_back(e->rhs);
        R.rows.push_back(std::move(row));
    }
    int r = 0;
    for (int c = 0; c < n && r < static_cast<int>(R.rows.size()); ++c) {
        int piv = -1;
        for (int i = r; i < static_cast<int>(R.rows.size()); ++i)
            if (R.rows[i][c] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(R.rows[r], R.rows[piv]);
        mpq_class inv = 1 / R.rows[r][c];
        for (auto& x : R.rows[r]) x *= inv;
        for (int i = 0; i < static_cast<int>(R.rows.size()); ++i) {
            if (i == r || R.rows[i][c] == 0) continue;
            mpq_class f = R.rows[i][c];
            for (int k = 0; k <= n; ++k) R.rows[i][k] -= f * R.rows[r][k];
        }
        R.pivots.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < R.rows.size(); ++i)
        if (R.rows[i][n] != 0) R.consistent = false;
    R.rows.resize(r);
    return R;
}

std::string form_text(const RankSystem& S, const LinearForm& f) {
    std::ostringstream os;
    bool first = true;
    for (const auto& u : S.unknowns) {
        auto it = f.find(u);
        if (it == f.end() || it->second == 0) continue;
        mpq_class c = it->second;
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        mpq_class a = abs(c);
        if (a != 1) os << a.get_str() << " ";
        os << u;
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

std::string equation_text(const RankSystem& S, const LinearForm& f, const mpq_class& v) {
    return form_text(S, f) + " = " + v.get_str();
}

}  // namespace

RankSystem rank_system_from_meshes(const std::map<std::string, int>& known,
                                   const std::vector<std::pair<std::string, std::string>>& unknown_symbol,
                                   const std::vector<RankMesh>& meshes) {
    RankSystem S;
    std::set<std::string> seen;
    for (const auto& m : meshes) {
        RankEquation e;
        e.tag = m.tag;
        e.rhs = 0;
        auto term = [&](const std::string& v, int sign) {
            if (auto k = known.find(v); k != known.end()) {
                e.rhs -= sign * k->second;
            } else if (auto u = std::find_if(unknown_symbol.begin(), unknown_symbol.end(),
                                             [&](const auto& q) { return q.first == v; });
                       u != unknown_symbol.end()) {
                e.lhs[u->second] += sign;
                seen.insert(u->second);
            } else {
                throw Error("rank mesh: vertex without rank or symbol: " + v);
            }
        };
        term(m.tau, 1);
        term(m.head, 1);
        for (const auto& x : m.middle) term(x, -1);
        for (auto it = e.lhs.begin(); it != e.lhs.end();)
            it = it->second == 0 ? e.lhs.erase(it) : std::next(it);
        // Keep the rhs non-negative for readability.
        if (e.rhs < 0 || (e.rhs == 0 && !e.lhs.empty() && e.lhs.begin()->second < 0)) {
            e.rhs = -e.rhs;
            for (auto& [u, c] : e.lhs) c = -c;
        }
        S.equations.push_back(std::move(e));
    }
    for (const auto& [v, sym] : unknown_symbol)
        if (seen.count(sym)) S.unknowns.push_back(sym);
    return S;
}

bool rationally_consistent(const RankSystem& S, const std::vector<std::string>& tags) {
    return rref(S, tags).consistent;
}

std::optional<mpq_class> determined_value(const RankSystem& S, const LinearForm& f,
                                          const std::vector<std::string>& tags) {
    Reduced R = rref(S, tags);
    if (!R.consistent) return std::nullopt;
    const int n = static_cast<int>(S.unknowns.size());
    std::vector<mpq_class> g = dense(S, f);
    mpq_class value = 0;
    for (std::size_t i = 0; i < R.rows.size(); ++i) {
        mpq_class c = g[R.pivots[i]];
        if (c == 0) continue;
        for (int k = 0; k < n; ++k) g[k] -= c * R.rows[i][k];
        value += c * R.rows[i][n];
    }
    for (const auto& x : g)
        if (x != 0) return std::nullopt;
    return value;
}

std::optional<std::string> find_infeasibility(const RankSystem& S) {
    if (!rationally_consistent(S)) {
        for (std::size_t k = 0; k < S.equations.size(); ++k) {
            std::vector<std::string> rest;
            for (std::size_t i = 0; i < S.equations.size(); ++i)
                if (i != k) rest.push_back(S.equations[i].tag);
            auto v = determined_value(S, S.equations[k].lhs, rest);
            if (v && *v != S.equations[k].rhs)
                return "the other equations force " + equation_text(S, S.equations[k].lhs, *v) + ", against " +
                       S.equations[k].tag + ": " + equation_text(S, S.equations[k].lhs, S.equations[k].rhs);
        }
        return std::string("the linear system has no rational solution");
    }
    const int n = static_cast<int>(S.unknowns.size());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            LinearForm f{{S.unknowns[i], 1}};
            if (j != i) f[S.unknowns[j]] += 1;
            auto v = determined_value(S, f);
            if (!v) continue;
            const int terms = j == i ? 1 : 2;
            bool bad = v->get_den() != 1 || *v < 4 * terms || mpz_class(v->get_num() % 4) != 0;
            if (bad)
                return equation_text(S, f, *v) + " cannot hold for positive multiples of 4";
        }
    return std::nullopt;
}

TreeShape parse_tree_shape(const std::string& s) {
    if (s == "E6") return TreeShape::E6;
    if (s == "E7") return TreeShape::E7;
    if (s == "E8") return TreeShape::E8;
    throw Error("unknown tree class shape: " + s + " (expected E6, E7 or E8)");
}

namespace {

struct ShapeData {
    std::string name;
    std::map<std::string, int> known;
    std::vector<std::pair<std::string, std::string>> unknown;
    std::vector<RankMesh> meshes;
    // (derived form, equations and earlier steps used)
    std::vector<std::pair<LinearForm, std::vector<std::string>>> steps;
};

ShapeData shape_data(TreeShape shape) {
    ShapeData d;
    switch (shape) {
        case TreeShape::E6:
            d.name = "E6";
            d.known = {{"Z_0", 4},  {"Z_1", 4},  {"Z_2", 8},  {"Z_3", 12}, {"E_1", 4}, {"E_2", 12},
                       {"E_3", 20}, {"F_1", 12}, {"F_2", 12}, {"F_3", 24}, {"F_4", 36}};
            d.unknown = {{"W_2", "x"},   {"W_3", "x′"},  {"W_4", "x″"}, {"W'_2", "y"}, {"W'_3", "y′"},
                         {"W'_4", "y″"}, {"U_2", "α"},   {"U_3", "α′"}, {"V_2", "β"},  {"V_3", "β′"}};
            d.meshes = {{"(1)", "V_2", "V_3", {"W'_3"}},
                        {"(2)", "U_2", "U_3", {"W_3"}},
                        {"(3)", "F_1", "F_2", {"E_1", "W_2", "W'_2"}},
                        {"(4)", "W_2", "W_3", {"F_2", "U_2"}},
                        {"(5)", "W'_2", "W'_3", {"F_2", "V_2"}}};
            d.steps = {{{{"x", 1}, {"α′", 1}}, {"(2)", "(4)"}},
                       {{{"y", 1}, {"β′", 1}}, {"(1)", "(5)"}},
                       {{{"α′", 1}, {"β′", 1}}, {"(3)", "s1", "s2"}}};
            break;
        case TreeShape::E7:
            d.name = "E7";
            d.known = {{"F_1", 12}, {"F_2", 12}, {"F_3", 24}, {"F_4", 36}, {"G_1", 24},
                       {"G_2", 20}, {"G_3", 24}, {"G_4", 40}, {"G_5", 56}};
            d.unknown = {{"W_1", "x"},  {"W_2", "x′"},  {"W_3", "x″"},  {"W_4", "x‴"},  {"W'_1", "y"},
                         {"W'_2", "y′"}, {"W'_3", "y″"}, {"W'_4", "y‴"}, {"V_1", "α"},   {"V_2", "α′"},
                         {"V_3", "α″"}, {"U_2", "γ"},   {"U_3", "γ′"}};
            d.meshes = {{"(1)", "G_1", "G_2", {"F_1", "W'_1", "W_1"}},
                        {"(2)", "G_2", "G_3", {"F_2", "W'_2", "W_2"}},
                        {"(3)", "G_3", "G_4", {"F_3", "W'_3", "W_3"}},
                        {"(4)", "G_4", "G_5", {"F_4", "W'_4", "W_4"}},
                        {"(5)", "W_1", "W_2", {"G_2", "V_1"}},
                        {"(6)", "W_2", "W_3", {"G_3", "V_2"}},
                        {"(7)", "W_3", "W_4", {"G_4", "V_3"}},
                        {"(8)", "W'_1", "W'_2", {"G_2"}},
                        {"(9)", "W'_2", "W'_3", {"G_3"}},
                        {"(10)", "W'_3", "W'_4", {"G_4"}},
                        {"(11)", "V_1", "V_2", {"W_2", "U_2"}},
                        {"(12)", "V_2", "V_3", {"W_3", "U_3"}},
                        {"(13)", "U_2", "U_3", {"V_2"}}};
            d.steps = {{{{"α", 1}}, {"(1)", "(2)", "(5)", "(8)"}},
                       {{{"α′", 1}}, {"(2)", "(3)", "(6)", "(9)"}},
                       {{{"α″", 1}}, {"(3)", "(4)", "(7)", "(10)"}},
                       {{{"x′", 1}, {"x″", 1}, {"γ", 1}, {"γ′", 1}}, {"(11)", "(12)", "s1", "s2", "s3"}},
                       {{{"x′", 1}, {"x″", 1}}, {"(13)", "s2", "s4"}},
                       {{{"x′", 1}, {"x″", 1}}, {"(6)", "s2"}}};
            break;
        case TreeShape::E8:
            d.name = "E8";
            d.known = {{"K_2", 32}, {"K_3", 32}, {"K_4", 40}, {"G_2", 48}, {"G_3", 44}, {"G_4", 48}, {"G_5", 60}};
            d.unknown = {{"W_2", "x"},  {"W_3", "x′"},  {"W_4", "x″"},   {"W'_2", "y"},
                         {"W'_3", "y′"}, {"W'_4", "y″"}, {"V_-3", "α"}, {"V_-2", "β"}};
            d.meshes = {{"(1)", "G_2", "G_3", {"K_2", "W'_2", "W_2"}},
                        {"(2)", "G_3", "G_4", {"K_3", "W'_3", "W_3"}},
                        {"(3)", "G_4", "G_5", {"K_4", "W'_4", "W_4"}},
                        {"(4)", "W_2", "W_3", {"G_3", "V_-3"}},
                        {"(5)", "W_3", "W_4", {"G_4", "V_-2"}},
                        {"(6)", "W'_2", "W'_3", {"G_3"}},
                        {"(7)", "W'_3", "W'_4", {"G_4"}},
                        {"(8)", "V_-3", "V_-2", {"W_3"}}};
            d.steps = {{{{"α", 1}}, {"(1)", "(2)", "(4)", "(6)"}},
                       {{{"β", 1}}, {"(2)", "(3)", "(5)", "(7)"}},
                       {{{"x′", 1}}, {"(8)", "s1", "s2"}},
                       {{{"y′", 1}}, {"(2)", "s3"}}};
            break;
    }
    return d;
}

}  // namespace

InfeasibilityProof tree_class_ledger(TreeShape shape) {
    ShapeData d = shape_data(shape);
    InfeasibilityProof P;
    P.shape = d.name;
    P.system = rank_system_from_meshes(d.known, d.unknown, d.meshes);
    P.rational_solution = rationally_consistent(P.system);
    // Derived equations join an extended system so later steps can cite them.
    RankSystem ext = P.system;
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        const auto& [form, uses] = d.steps[i];
        auto v = determined_value(ext, form, uses);
        if (!v) throw Error("tree_class_ledger: step " + std::to_string(i + 1) + " is not determined");
        LedgerStep st{equation_text(ext, form, *v), uses, form, *v};
        if (form.size() == 1) P.derived[form.begin()->first] = *v;
        ext.equations.push_back({"s" + std::to_string(i + 1), form, *v});
        P.steps.push_back(std::move(st));
    }
    const auto& last = P.steps.back();
    switch (shape) {
        case TreeShape::E6: {
            bool bad = last.value < 8 || last.value.get_den() != 1 || mpz_class(last.value.get_num() % 4) != 0;
            P.certificate = last.derived + " with α′, β′ ∈ 4ℤ_{>0}";
            P.infeasible = bad;
            break;
        }
        case TreeShape::E7: {
            const auto& a = P.steps[P.steps.size() - 2];
            P.certificate = a.derived + " ∧ " + last.derived;
            P.infeasible = a.form == last.form && a.value != last.value;
            break;
        }
        case TreeShape::E8: {
            const auto& xp = P.steps[P.steps.size() - 2];
            LinearForm sum{{"x′", 1}, {"y′", 1}};
            auto s = determined_value(ext, sum, {"(2)"});
            P.certificate = xp.derived + " ∧ " + equation_text(ext, sum, s.value_or(0)) + " ∧ y′ > 0";
            P.infeasible = s && last.value <= 0;
            break;
        }
    }
    if (!find_infeasibility(P.system)) P.infeasible = false;
    return P;
}

std::string InfeasibilityProof::to_text() const {
    std::ostringstream os;
    os << "tree class " << shape << "\n";
    for (const auto& e : system.equations) os << "  " << e.tag << "  " << equation_text(system, e.lhs, e.rhs) << "\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        os << "  s" << i + 1 << ": " << steps[i].derived << "   [from";
        for (const auto& u : steps[i].uses) os << " " << u;
        os << "]\n";
    }
    os << "  certificate: " << certificate << "\n";
    os << "  " << (infeasible ? "infeasible" : "NOT shown infeasible") << "\n";
    return os.str();
}

Json InfeasibilityProof::to_json() const {
    Json j;
    j["shape"] = shape;
    j["unknowns"] = system.unknowns;
    Json eqs = Json::array();
    for (const auto& e : system.equations) {
        Json lhs = Json::object();
        for (const auto& [u, c] : e.lhs) lhs[u] = c.get_str();
        eqs.push_back({{"tag", e.tag}, {"lhs", lhs}, {"rhs", e.rhs.get_str()}});
    }
    j["equations"] = eqs;
    Json st = Json::array();
    for (const auto& s : steps) st.push_back({{"derived", s.derived}, {"uses", s.uses}, {"value", s.value.get_str()}});
    j["steps"] = st;
    Json der = Json::object();
    for (const auto& [u, v] : derived) der[u] = v.get_str();
    j["derived"] = der;
    j["certificate"] = certificate;
    j["rational_solution"] = rational_solution;
    j["infeasible"] = infeasible;
    return j;
}

}  // namespace kronord
