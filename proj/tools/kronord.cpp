#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "kronord/ars.hpp"
#include "kronord/heller.hpp"
#include "kronord/io.hpp"
#include "kronord/quiver.hpp"

using namespace kronord;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : Error {
    explicit UsageError(const std::string& w) : Error(w) {}
};

struct Config {
    unsigned p = 3;
    int precision = 20;
    int precision_max = 60;
    int iso_samples = 32;
    std::uint64_t seed = 0;
    std::string format = "json";
    int jobs = 1;

    ArsConfig ars() const { return {precision, precision_max, iso_samples}; }
};

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

bool is_file(const std::string& s) { return std::filesystem::is_regular_file(s); }

SummandLabel label_arg(const std::string& s) {
    try {
        return parse_label(s);
    } catch (const Error& e) {
        throw UsageError(std::string(e.what()) + "\nlabels: P | H:m | V:n | B:lambda:n | Binf:n");
    }
}

// A label names the Heller lattice of its string or band module; anything else is a lattice file.
Lattice lattice_arg(const std::string& s) {
    if (is_file(s)) return lattice_from_json(read_json_file(s));
    return heller(label_arg(s));
}

std::string dec_text(const Decomposition& d) { return decomposition_to_string(d); }

void print(const Config& cfg, const Json& j, const std::string& text) {
    if (cfg.format == "text") std::cout << text;
    else std::cout << j.dump(2) << "\n";
}

int cmd_heller(const Config& cfg, const std::string& arg) {
    Lattice L = heller(label_arg(arg));
    Decomposition d = decompose(tensor_k(L));
    Json j{{"lattice", lattice_to_json(L)}, {"decomposition", decomposition_to_json(d)}};
    std::ostringstream os;
    os << L.name << ": rank " << L.rank << ", reduction " << dec_text(d) << "\n";
    print(cfg, j, os.str());
    return kExitPass;
}

// Heller lattices of strings sit in the Z-chain; other inputs are only compared with themselves.
std::optional<int> z_index(const std::string& arg) {
    if (is_file(arg)) return std::nullopt;
    SummandLabel s = label_arg(arg);
    if (s.kind == Kind::H) return s.n;
    if (s.kind == Kind::V) return -s.n;
    return std::nullopt;
}

int cmd_tau(const Config& cfg, const std::string& arg, int iterations) {
    if (iterations < 0) throw UsageError("-n must be non-negative");
    Lattice L = lattice_arg(arg);
    auto z = z_index(arg);
    std::mt19937_64 rng(cfg.seed);
    Json chain = Json::array();
    std::ostringstream os;
    bool ok = true;
    auto entry = [&](const Lattice& M, int step) {
        Decomposition d = decompose(tensor_k(M));
        Json e{{"step", step}, {"rank", M.rank}, {"decomposition", decomposition_to_json(d)}};
        os << "step " << step << ": rank " << M.rank << " " << dec_text(d);
        return e;
    };
    chain.push_back(entry(L, 0));
    os << " (" << (L.name.empty() ? arg : L.name) << ")\n";
    Lattice cur = L;
    for (int i = 1; i <= iterations; ++i) {
        Lattice next = syzygy(cur);
        Json e = entry(next, i);
        Lattice ref = L;
        std::string ref_name = L.name.empty() ? arg : L.name;
        if (z) {
            ref = heller_z(*z - i);
            ref_name = "Z_" + std::to_string(*z - i);
        }
        IsoResult r = iso_test(next, ref, rng, cfg.ars());
        e["compare"] = ref_name;
        e["iso"] = r.iso;
        if (r.iso) {
            e["witness"] = matrix_to_json(r.witness);
            os << "  iso " << ref_name << " (unit witness)\n";
        } else {
            e["reason"] = r.reason;
            os << "  not iso " << ref_name << " (" << r.reason << ")\n";
            ok = false;
        }
        chain.push_back(e);
        cur = std::move(next);
    }
    print(cfg, Json{{"chain", chain}, {"pass", ok}}, os.str());
    return ok ? kExitPass : kExitFail;
}

int cmd_ars(const Config& cfg, const std::string& arg) {
    Lattice M = lattice_arg(arg);
    AlmostSplitSeq s = almost_split(M, true);
    std::mt19937_64 rng(cfg.seed);
    SplitCertificate c = split_lattice(s.middle, rng, cfg.ars());
    bool ok = sequence_invariants_hold(s) && c.verify(s.middle);
    Json summands = Json::array();
    std::ostringstream os;
    os << "0 -> tail (rank " << s.tail.rank << ") -> middle (rank " << s.middle.rank << ") -> head (rank " << s.head.rank
       << ") -> 0\nmiddle summands:";
    int proj = 0;
    for (const Lattice& S : c.summands) {
        if (is_projective(S)) {
            proj += S.rank / 4;
            continue;
        }
        Decomposition d = decompose(tensor_k(S));
        summands.push_back({{"rank", S.rank}, {"projective", false}, {"decomposition", decomposition_to_json(d)}});
        os << " [rank " << S.rank << " " << dec_text(d) << "]";
    }
    if (proj) {
        summands.insert(summands.begin(), Json{{"rank", 4 * proj}, {"projective", true}, {"label", "P:" + std::to_string(proj)}});
        os << " [P:" << proj << "]";
    }
    os << "\n" << (ok ? "sequence invariants hold" : "sequence invariants FAIL") << "\n";
    Json j{{"tail", lattice_to_json(s.tail)},
           {"middle", lattice_to_json(s.middle)},
           {"head", lattice_to_json(s.head)},
           {"inject", matrix_to_json(s.inject.mat)},
           {"project", matrix_to_json(s.project.mat)},
           {"phi", matrix_to_json(s.phi.mat)},
           {"middle_summands", summands},
           {"pass", ok}};
    print(cfg, j, os.str());
    return ok ? kExitPass : kExitFail;
}

int cmd_quiver(const Config& cfg, int n_min, int n_max, int depth) {
    QuiverOptions opt;
    opt.jobs = cfg.jobs;
    opt.seed = cfg.seed;
    opt.ars = cfg.ars();
    ComponentWindow W = build_component(n_min, n_max, depth, opt);
    VerifyReport R = verify_za_infinity(W);
    if (cfg.format == "dot") {
        std::cout << emit_dot(W);
        std::cerr << R.to_text();
    } else if (cfg.format == "text") {
        for (const auto& v : W.vertices)
            std::cout << v.name << "  rank " << v.rank << "  d' " << v.dprime << "  " << dec_text(v.dec)
                      << (v.frontier ? "  (frontier)" : "") << "\n";
        std::cout << R.to_text();
    } else {
        std::cout << Json{{"window", emit_json(W)}, {"report", R.to_json()}}.dump(2) << "\n";
    }
    return R.all_pass() ? kExitPass : kExitFail;
}

int cmd_treeclass(const Config& cfg, const std::string& shape) {
    TreeShape s;
    try {
        s = parse_tree_shape(shape);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    InfeasibilityProof P = tree_class_ledger(s);
    print(cfg, P.to_json(), P.to_text());
    return P.infeasible ? kExitPass : kExitFail;
}

int cmd_decompose(const Config& cfg, const std::string& path) {
    ModK M = modk_from_json(read_json_file(path));
    Decomposition d = decompose(M);
    print(cfg, Json{{"decomposition", decomposition_to_json(d)}}, dec_text(d) + "\n");
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kronord: lattices over the Kronecker algebra and their almost split sequences"};
    app.require_subcommand(1);
    app.fallthrough();
    Config cfg;
    app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
    app.add_option("--p", cfg.p, "prime p")->capture_default_str();
    app.add_option("--precision", cfg.precision, "initial p-adic lifting precision")->capture_default_str();
    app.add_option("--precision-max", cfg.precision_max, "maximal lifting precision")->capture_default_str();
    app.add_option("--iso-samples", cfg.iso_samples, "random samples per isomorphism test")->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"json", "dot", "text"}))
        ->capture_default_str();
    app.add_option("--jobs", cfg.jobs, "parallel expansions in quiver")->check(CLI::PositiveNumber)->capture_default_str();

    std::string arg, shape, path;
    int iterations = 1, n_min = 0, n_max = 0, depth = 3;
    auto* heller_cmd = app.add_subcommand("heller", "Heller lattice of a string or band module");
    heller_cmd->add_option("label", arg, "H:m | V:n | B:lambda:n | Binf:n")->required();
    auto* tau_cmd = app.add_subcommand("tau", "iterate the AR translate with isomorphism certificates");
    tau_cmd->add_option("input", arg, "label or lattice JSON file")->required();
    tau_cmd->add_option("-n", iterations, "iterations")->capture_default_str();
    auto* ars_cmd = app.add_subcommand("ars", "almost split sequence ending in a lattice");
    ars_cmd->add_option("input", arg, "label or lattice JSON file")->required();
    auto* quiver_cmd = app.add_subcommand("quiver", "window of the component through the Heller lattices");
    quiver_cmd->add_option("n_min", n_min)->required();
    quiver_cmd->add_option("n_max", n_max)->required();
    quiver_cmd->add_option("--depth", depth, "rows")->check(CLI::PositiveNumber)->capture_default_str();
    auto* tree_cmd = app.add_subcommand("treeclass", "rank ledger excluding a Euclidean tree class");
    tree_cmd->add_option("shape", shape, "E6 | E7 | E8")->required();
    auto* dec_cmd = app.add_subcommand("decompose", "decompose a module over A (x) k");
    dec_cmd->add_option("file", path, "ModK JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (!is_prime(cfg.p)) throw UsageError("--p must be prime");
        if (cfg.precision < 1 || cfg.precision > cfg.precision_max) throw UsageError("need 1 <= precision <= precision-max");
        if (cfg.iso_samples < 1) throw UsageError("--iso-samples must be at least 1");
        set_prime(cfg.p);
        if (*heller_cmd) return cmd_heller(cfg, arg);
        if (*tau_cmd) return cmd_tau(cfg, arg, iterations);
        if (*ars_cmd) return cmd_ars(cfg, arg);
        if (*quiver_cmd) return cmd_quiver(cfg, n_min, n_max, depth);
        if (*tree_cmd) return cmd_treeclass(cfg, shape);
        if (*dec_cmd) return cmd_decompose(cfg, path);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ProjectiveInput& e) {
        std::cerr << "error: ProjectiveInput: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
