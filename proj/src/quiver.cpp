#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "kronord/heller.hpp"
#include "kronord/quiver.hpp"

namespace kronord {

int d_prime(const Decomposition& d) {
    int s = 0;
    for (const auto& [l, m] : d)
        if (l.kind != Kind::Proj) s += m;
    return s;
}

int d_prime(const Lattice& L) { return d_prime(decompose(tensor_k(L))); }

const QuiverVertex* ComponentWindow::at(int row, int col) const {
    for (const auto& v : vertices)
        if (!v.band && v.row == row && v.col == col) return &v;
    return nullptr;
}

std::optional<int> ComponentWindow::tau_of(int id) const {
    for (const auto& t : tau_edges)
        if (t.vertex == id) return t.tau;
    return std::nullopt;
}

namespace {

std::string row_name(int row, int col) {
    static const char* names[] = {"Z", "E", "F"};
    std::string base = row < 3 ? names[row] : "R" + std::to_string(row);
    return base + "_" + std::to_string(col);
}

std::uint64_t mix_seed(std::uint64_t seed, int row, int col, int salt) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
    for (std::int64_t v : {std::int64_t(row), std::int64_t(col), std::int64_t(salt)}) {
        h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 0xbf58476d1ce4e5b9ULL;
    }
    return h;
}

struct Expansion {
    AlmostSplitSeq seq;
    SplitCertificate cert;
    std::exception_ptr error;
};

[[noreturn]] void rethrow_at(const std::exception_ptr& e, const std::string& where) {
    try {
        std::rethrow_exception(e);
    } catch (const SplitFailed& x) {
        throw SplitFailed(std::string(x.what()) + " at " + where, x.precision);
    } catch (const Inconclusive& x) {
        throw Inconclusive(std::string(x.what()) + " at " + where);
    }
}

struct Builder {
    const QuiverOptions& opt;
    ComponentWindow W;
    std::map<std::pair<int, int>, std::pair<int, int>> val;  // (src, dst) -> (a, b), 0 unknown

    explicit Builder(const QuiverOptions& o) : opt(o) {}

    int add_vertex(Lattice L, int row, int col, Decomposition dec, bool band = false) {
        QuiverVertex v;
        v.id = static_cast<int>(W.vertices.size());
        v.name = band ? L.name : row_name(row, col);
        L.name = v.name;
        v.rank = L.rank;
        v.dprime = d_prime(dec);
        v.dec = std::move(dec);
        v.row = row;
        v.col = col;
        v.band = band;
        v.lattice = std::move(L);
        W.vertices.push_back(std::move(v));
        return W.vertices.back().id;
    }

    // Registry lookup gated on rank, d' and the reduced decomposition.
    std::optional<int> identify(const Lattice& L, const Decomposition& dec, std::mt19937_64& rng) {
        for (const auto& v : W.vertices)
            if (v.rank == L.rank && v.lattice.actX == L.actX && v.lattice.actY == L.actY) return v.id;
        for (const auto& v : W.vertices) {
            if (v.rank != L.rank || v.dprime != d_prime(dec) || v.dec != dec) continue;
            if (iso_test(v.lattice, L, rng, opt.ars, true).iso) return v.id;
        }
        return std::nullopt;
    }

    void edge(int src, int dst, int a, int b) {
        auto& e = val[{src, dst}];
        if (a) e.first = a;
        if (b) e.second = b;
    }

    Expansion expand(int id) const {
        Expansion ex;
        const QuiverVertex& v = W.vertices[id];
        try {
            std::mt19937_64 rng(mix_seed(opt.seed, v.row, v.col, 0));
            ex.seq = almost_split(v.lattice, true);
            std::vector<Lattice> hints;
            for (const auto& u : W.vertices)
                if (!u.band && u.row == v.row - 1) hints.push_back(u.lattice);
            std::sort(hints.begin(), hints.end(), [](const Lattice& a, const Lattice& b) { return a.rank > b.rank; });
            ex.cert = split_lattice(ex.seq.middle, rng, opt.ars, hints);
        } catch (const SplitFailed&) {
            ex.error = std::current_exception();
        } catch (const Inconclusive&) {
            ex.error = std::current_exception();
        }
        return ex;
    }

    std::vector<Expansion> expand_all(const std::vector<int>& ids) const {
        std::vector<Expansion> out(ids.size());
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> other(ids.size());
        auto worker = [&] {
            for (std::size_t i; (i = next++) < ids.size();) {
                try {
                    out[i] = expand(ids[i]);
                } catch (...) {
                    other[i] = std::current_exception();
                }
            }
        };
        const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(ids.size())));
        std::vector<std::thread> pool;
        for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (other[i]) std::rethrow_exception(other[i]);
        return out;
    }

    void record(int head, Expansion& ex) {
        const QuiverVertex h = W.vertices[head];
        if (ex.error) rethrow_at(ex.error, h.name);
        std::mt19937_64 rng(mix_seed(opt.seed, h.row, h.col, 1));
        Mesh m;
        m.head = head;
        m.dec_head = h.dec;
        m.dec_tail = decompose(tensor_k(ex.seq.tail));
        m.dec_middle = decompose(tensor_k(ex.seq.middle));
        auto t = identify(ex.seq.tail, m.dec_tail, rng);
        m.tail = t ? *t : add_vertex(ex.seq.tail, h.row, h.col - 1, m.dec_tail, h.band);
        std::map<int, int> mult;
        for (const Lattice& S : ex.cert.summands) {
            if (is_projective(S)) {
                m.projective += S.rank / 4;
                continue;
            }
            Decomposition d = decompose(tensor_k(S));
            auto x = identify(S, d, rng);
            ++mult[x ? *x : add_vertex(S, h.row + 1, h.col, d, h.band)];
        }
        for (const auto& [x, k] : mult) {
            m.middle.emplace_back(x, k);
            edge(x, head, k, 0);
            edge(m.tail, x, 0, k);
        }
        W.tau_edges.push_back({head, m.tail});
        W.vertices[head].frontier = false;
        W.meshes.push_back(std::move(m));
    }

    void close_tau() {
        const std::size_t n = W.vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (W.tau_of(static_cast<int>(i))) continue;
            const QuiverVertex v = W.vertices[i];
            Lattice s = syzygy(v.lattice);
            bool candidate = false;
            for (const auto& u : W.vertices) candidate = candidate || u.rank == s.rank;
            if (!candidate) continue;
            std::mt19937_64 rng(mix_seed(opt.seed, v.row, v.col, 2));
            if (auto t = identify(s, decompose(tensor_k(s)), rng)) W.tau_edges.push_back({v.id, *t});
        }
    }

    void finish() {
        for (const auto& [k, ab] : val) {
            QuiverEdge e{k.first, k.second, ab.first, ab.second, false};
            if (!e.a || !e.b) {
                e.inferred = true;
                if (!e.a) e.a = e.b;
                if (!e.b) e.b = e.a;
            }
            W.edges.push_back(e);
        }
        std::vector<int> order(W.vertices.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const auto &x = W.vertices[a], &y = W.vertices[b];
            return std::tie(x.band, x.row, x.col) < std::tie(y.band, y.row, y.col);
        });
        std::vector<int> renum(order.size());
        std::vector<QuiverVertex> vs;
        for (std::size_t i = 0; i < order.size(); ++i) {
            renum[order[i]] = static_cast<int>(i);
            vs.push_back(std::move(W.vertices[order[i]]));
            vs.back().id = static_cast<int>(i);
        }
        W.vertices = std::move(vs);
        for (auto& e : W.edges) e.src = renum[e.src], e.dst = renum[e.dst];
        for (auto& t : W.tau_edges) t.vertex = renum[t.vertex], t.tau = renum[t.tau];
        for (auto& m : W.meshes) {
            m.head = renum[m.head];
            m.tail = renum[m.tail];
            for (auto& [x, k] : m.middle) x = renum[x];
            std::sort(m.middle.begin(), m.middle.end());
        }
        std::sort(W.edges.begin(), W.edges.end(),
                  [](const QuiverEdge& a, const QuiverEdge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
        std::sort(W.tau_edges.begin(), W.tau_edges.end(),
                  [](const TauEdge& a, const TauEdge& b) { return a.vertex < b.vertex; });
        std::sort(W.meshes.begin(), W.meshes.end(), [](const Mesh& a, const Mesh& b) { return a.head < b.head; });
    }
};

}  // namespace

ComponentWindow build_component(int n_min, int n_max, int depth, const QuiverOptions& opt) {
    if (depth < 1) throw Error("build_component: depth must be at least 1");
    if (n_min > n_max) throw Error("build_component: empty column range");
    if (!opt.band_seeds.empty() && !opt.experimental_bands)
        throw Error("build_component: band seeds are refused unless the experimental flag is set");
    Builder B(opt);
    B.W.n_min = n_min;
    B.W.n_max = n_max;
    B.W.depth = depth;
    B.W.prime = prime();
    for (int n = n_min; n <= n_max; ++n) {
        Lattice Z = heller_z(n);
        if (!local_test(end_algebra(Z)).local) throw Error("build_component: seed Z_" + std::to_string(n) + " is decomposable");
        B.add_vertex(Z, 0, n, decompose(tensor_k(Z)));
    }
    std::vector<int> bands;
    for (const auto& s : opt.band_seeds) {
        Lattice L = heller(s);
        L.name = "Z(" + label_to_string(s) + ")";
        bands.push_back(B.add_vertex(L, 0, s.n, decompose(tensor_k(L)), true));
    }
    for (int r = 0; r + 1 < depth; ++r) {
        std::vector<int> ids;
        for (const auto& v : B.W.vertices)
            if (!v.band && v.row == r && v.col >= n_min && v.col <= n_max) ids.push_back(v.id);
        std::sort(ids.begin(), ids.end(), [&](int a, int b) { return B.W.vertices[a].col < B.W.vertices[b].col; });
        if (r == 0) ids.insert(ids.end(), bands.begin(), bands.end());
        std::vector<Expansion> ex = B.expand_all(ids);
        for (std::size_t i = 0; i < ids.size(); ++i) B.record(ids[i], ex[i]);
    }
    B.close_tau();
    B.finish();
    return std::move(B.W);
}

// ---------------------------------------------------------------- verification

bool VerifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerifyReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string VerifyReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
        for (const auto& f : c.failures) os << "     " << f << "\n";
    }
    os << "max in-degree " << max_in_degree << ", strict Z-row meshes " << z_row_strict << "\n";
    return os.str();
}

Json VerifyReport::to_json() const {
    Json j;
    Json cs = Json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"pass", c.pass}, {"failures", c.failures}});
    j["checks"] = cs;
    j["max_in_degree"] = max_in_degree;
    j["z_row_strict"] = z_row_strict;
    j["pass"] = all_pass();
    return j;
}

VerifyReport verify_za_infinity(const ComponentWindow& W) {
    VerifyReport R;
    auto check = [&](const std::string& name) -> CheckResult& {
        R.checks.push_back({name, true, {}});
        return R.checks.back();
    };
    auto fail = [](CheckResult& c, const std::string& msg) {
        c.pass = false;
        c.failures.push_back(msg);
    };
    const auto& V = W.vertices;
    auto name = [&](int id) { return V[id].name; };
    std::map<int, std::map<int, int>> in, out;  // vertex -> neighbour -> valuation side
    for (const auto& e : W.edges) {
        in[e.dst][e.src] += e.a;
        out[e.src][e.dst] += e.b;
    }

    CheckResult& a = check("a: d' = 2(r+1)");
    for (const auto& v : V)
        if (!v.band && v.dprime != 2 * (v.row + 1))
            fail(a, v.name + ": d' = " + std::to_string(v.dprime) + " at row " + std::to_string(v.row));

    CheckResult& b = check("b: one non-projective middle summand on row 0");
    CheckResult& c = check("c: middles above row 0 are (r+1, n) + (r-1, n-1)");
    for (const auto& v : V) {
        if (v.band || v.frontier) continue;
        std::map<int, int> expect;
        auto want = [&](int r, int n) {
            const QuiverVertex* x = W.at(r, n);
            if (x) expect[x->id] = 1;
            else expect[-1 - static_cast<int>(expect.size())] = 1;
        };
        want(v.row + 1, v.col);
        if (v.row > 0) want(v.row - 1, v.col - 1);
        const auto& got = in[v.id];
        if (got != expect) {
            std::string msg = v.name + ": middle {";
            for (const auto& [x, k] : got) msg += " " + name(x) + (k > 1 ? "^" + std::to_string(k) : "");
            fail(v.row == 0 ? b : c, msg + " }");
        }
    }

    CheckResult& d = check("d: tau shifts columns by -1");
    for (const auto& t : W.tau_edges) {
        const auto &x = V[t.vertex], &y = V[t.tau];
        if (x.band || y.band) continue;
        if (y.row != x.row || y.col != x.col - 1) fail(d, "tau " + x.name + " = " + y.name);
    }
    for (const auto& v : V)
        if (!v.band && !v.frontier && !W.tau_of(v.id)) fail(d, v.name + ": no tau translate");

    CheckResult& e = check("e: subadditivity, equality off the Z-row");
    for (const auto& m : W.meshes) {
        const auto& h = V[m.head];
        if (h.band) continue;
        int lhs = h.dprime + V[m.tail].dprime, rhs = 0;
        for (const auto& [x, k] : in[m.head]) rhs += k * V[x].dprime;
        if (lhs < rhs) fail(e, h.name + ": " + std::to_string(lhs) + " < " + std::to_string(rhs));
        else if (lhs > rhs && h.row > 0) fail(e, h.name + ": " + std::to_string(lhs) + " > " + std::to_string(rhs));
        else if (lhs > rhs) ++R.z_row_strict;
    }

    CheckResult& val = check("valuations trivial");
    for (const auto& x : W.edges)
        if (x.a != 1 || x.b != 1)
            fail(val, name(x.src) + " -> " + name(x.dst) + " (" + std::to_string(x.a) + "," + std::to_string(x.b) + ")");

    CheckResult& loops = check("no loops");
    for (const auto& x : W.edges)
        if (x.src == x.dst) fail(loops, name(x.src));

    CheckResult& multi = check("no multiple arrows");
    std::set<std::pair<int, int>> seen;
    for (const auto& x : W.edges)
        if (!seen.insert({x.src, x.dst}).second) fail(multi, name(x.src) + " -> " + name(x.dst));

    CheckResult& deg = check("in-degree at most 3");
    for (const auto& v : V) {
        int k = 0;
        for (const auto& [x, m] : in[v.id]) k += m;
        R.max_in_degree = std::max(R.max_in_degree, k);
        if (k > 3) fail(deg, v.name + ": " + std::to_string(k));
    }

    CheckResult& tr = check("x^- = (tau x)^+");
    for (const auto& v : V) {
        if (v.band || v.frontier) continue;
        auto t = W.tau_of(v.id);
        if (!t) continue;
        if (in[v.id] != out[*t]) fail(tr, v.name);
    }

    CheckResult& inv = check("d' is tau-invariant");
    for (const auto& t : W.tau_edges)
        if (V[t.vertex].dprime != V[t.tau].dprime) fail(inv, name(t.vertex) + " vs " + name(t.tau));

    CheckResult& r4 = check("ranks divisible by 4");
    for (const auto& v : V)
        if (v.rank % 4 != 0) fail(r4, v.name);

    CheckResult& sr = check("split reduction off the Heller boundary");
    for (const auto& m : W.meshes) {
        if (V[m.head].row == 0) continue;
        if (m.dec_middle != merge(m.dec_head, m.dec_tail)) fail(sr, name(m.head));
    }
    return R;
}

// ---------------------------------------------------------------- output

std::string emit_dot(const ComponentWindow& W) {
    std::ostringstream os;
    os << "digraph component {\n";
    os << "  node [shape=box];\n";
    for (const auto& v : W.vertices) {
        os << "  v" << v.id << " [label=\"" << v.name << "\\nrank=" << v.rank << ", d'=" << v.dprime << "\"";
        if (v.frontier) os << ", color=gray";
        os << "];\n";
    }
    for (const auto& e : W.edges) {
        os << "  v" << e.src << " -> v" << e.dst;
        if (e.a != 1 || e.b != 1) os << " [label=\"(" << e.a << "," << e.b << ")\"]";
        os << ";\n";
    }
    for (const auto& t : W.tau_edges) os << "  v" << t.vertex << " -> v" << t.tau << " [style=dashed];\n";
    os << "}\n";
    return os.str();
}

Json emit_json(const ComponentWindow& W) {
    Json j;
    j["n_min"] = W.n_min;
    j["n_max"] = W.n_max;
    j["depth"] = W.depth;
    j["prime"] = W.prime;
    Json vs = Json::array();
    for (const auto& v : W.vertices)
        vs.push_back({{"id", v.id},
                      {"name", v.name},
                      {"row", v.row},
                      {"col", v.col},
                      {"rank", v.rank},
                      {"dprime", v.dprime},
                      {"frontier", v.frontier},
                      {"band", v.band},
                      {"decomposition", decomposition_to_json(v.dec)},
                      {"lattice", lattice_to_json(v.lattice)}});
    j["vertices"] = vs;
    Json es = Json::array();
    for (const auto& e : W.edges)
        es.push_back({{"src", e.src}, {"dst", e.dst}, {"a", e.a}, {"b", e.b}, {"inferred", e.inferred}});
    j["edges"] = es;
    Json ts = Json::array();
    for (const auto& t : W.tau_edges) ts.push_back({{"vertex", t.vertex}, {"tau", t.tau}});
    j["tau"] = ts;
    Json ms = Json::array();
    for (const auto& m : W.meshes) {
        Json mid = Json::array();
        for (const auto& [x, k] : m.middle) mid.push_back({x, k});
        ms.push_back({{"head", m.head},
                      {"tail", m.tail},
                      {"middle", mid},
                      {"projective", m.projective},
                      {"dec_head", decomposition_to_json(m.dec_head)},
                      {"dec_tail", decomposition_to_json(m.dec_tail)},
                      {"dec_middle", decomposition_to_json(m.dec_middle)}});
    }
    j["meshes"] = ms;
    return j;
}

ComponentWindow parse_window(const Json& j) {
    ComponentWindow W;
    W.n_min = j.at("n_min").get<int>();
    W.n_max = j.at("n_max").get<int>();
    W.depth = j.at("depth").get<int>();
    W.prime = j.at("prime").get<unsigned>();
    if (W.prime != prime()) throw Error("window JSON was built for p = " + std::to_string(W.prime));
    for (const auto& v : j.at("vertices")) {
        QuiverVertex q;
        q.id = v.at("id").get<int>();
        q.name = v.at("name").get<std::string>();
        q.row = v.at("row").get<int>();
        q.col = v.at("col").get<int>();
        q.rank = v.at("rank").get<int>();
        q.dprime = v.at("dprime").get<int>();
        q.frontier = v.at("frontier").get<bool>();
        q.band = v.at("band").get<bool>();
        q.dec = decomposition_from_json(v.at("decomposition"));
        q.lattice = lattice_from_json(v.at("lattice"));
        if (q.id != static_cast<int>(W.vertices.size())) throw Error("window JSON: vertex ids must be 0..n-1 in order");
        W.vertices.push_back(std::move(q));
    }
    const int n = static_cast<int>(W.vertices.size());
    auto vid = [n](const Json& x) {
        int i = x.get<int>();
        if (i < 0 || i >= n) throw Error("window JSON: vertex id out of range");
        return i;
    };
    for (const auto& e : j.at("edges"))
        W.edges.push_back({vid(e.at("src")), vid(e.at("dst")), e.at("a").get<int>(), e.at("b").get<int>(),
                           e.at("inferred").get<bool>()});
    for (const auto& t : j.at("tau")) W.tau_edges.push_back({vid(t.at("vertex")), vid(t.at("tau"))});
    for (const auto& m : j.at("meshes")) {
        Mesh x;
        x.head = vid(m.at("head"));
        x.tail = vid(m.at("tail"));
        for (const auto& p : m.at("middle")) x.middle.emplace_back(vid(p.at(0)), p.at(1).get<int>());
        x.projective = m.at("projective").get<int>();
        x.dec_head = decomposition_from_json(m.at("dec_head"));
        x.dec_tail = decomposition_from_json(m.at("dec_tail"));
        x.dec_middle = decomposition_from_json(m.at("dec_middle"));
        W.meshes.push_back(std::move(x));
    }
    return W;
}

}  // namespace kronord
