#pragma once

// Finite windows of the stable AR component through the Heller lattices Z_n, their
// verification against the ZA_infinity pattern, DOT/JSON output, and the rank ledgers
// that exclude the Euclidean tree classes.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kronord/ars.hpp"
#include "kronord/io.hpp"
#include "kronord/modk.hpp"

namespace kronord {

// Number of non-projective summands of L (x) k, with multiplicity.
int d_prime(const Lattice& L);
int d_prime(const Decomposition& d);

struct QuiverVertex {
    int id = 0;
    std::string name;
    Lattice lattice;
    int rank = 0;
    int dprime = 0;
    int row = 0;
    int col = 0;
    Decomposition dec;
    bool frontier = true;  // no almost split sequence computed for it
    bool band = false;     // experimental band seed, excluded from verification
};

// Valuation (a, b): a = multiplicity of src in the middle of E(dst), b = multiplicity of
// dst in the middle of the sequence starting at src. A side not seen by any computed
// sequence copies the other one and is marked inferred.
struct QuiverEdge {
    int src = 0;
    int dst = 0;
    int a = 1;
    int b = 1;
    bool inferred = false;
};

struct TauEdge {
    int vertex = 0;
    int tau = 0;
};

// One computed almost split sequence 0 -> tail -> middle -> head -> 0.
struct Mesh {
    int head = 0;
    int tail = 0;
    std::vector<std::pair<int, int>> middle;  // (vertex, multiplicity), non-projective
    int projective = 0;                       // copies of A in the middle
    Decomposition dec_head, dec_tail, dec_middle;
};

struct ComponentWindow {
    int n_min = 0;
    int n_max = 0;
    int depth = 1;
    unsigned prime = 3;
    std::vector<QuiverVertex> vertices;
    std::vector<QuiverEdge> edges;
    std::vector<TauEdge> tau_edges;
    std::vector<Mesh> meshes;

    const QuiverVertex* at(int row, int col) const;
    std::optional<int> tau_of(int id) const;
};

struct QuiverOptions {
    int jobs = 1;
    std::uint64_t seed = 0;
    ArsConfig ars;
    // Band Heller lattices are only expanded on request and never verified.
    std::vector<SummandLabel> band_seeds;
    bool experimental_bands = false;
};

ComponentWindow build_component(int n_min, int n_max, int depth, const QuiverOptions& opt = {});

struct CheckResult {
    std::string name;
    bool pass = true;
    std::vector<std::string> failures;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    int max_in_degree = 0;
    int z_row_strict = 0;  // Z-row meshes where subadditivity is strict

    bool all_pass() const;
    const CheckResult* find(const std::string& name) const;
    std::string to_text() const;
    Json to_json() const;
};

VerifyReport verify_za_infinity(const ComponentWindow& W);

std::string emit_dot(const ComponentWindow& W);
Json emit_json(const ComponentWindow& W);
ComponentWindow parse_window(const Json& j);

// ---------------------------------------------------------------- rank ledgers

using LinearForm = std::map<std::string, mpq_class>;

struct RankEquation {
    std::string tag;
    LinearForm lhs;
    mpq_class rhs;
};

// Unknown ranks subject to exact equations; every unknown is a positive multiple of 4.
struct RankSystem {
    std::vector<std::string> unknowns;
    std::vector<RankEquation> equations;
};

// Mesh relation rank(tau M) + rank(M) = sum of middle ranks over named vertices.
struct RankMesh {
    std::string tag, tau, head;
    std::vector<std::string> middle;
};
RankSystem rank_system_from_meshes(const std::map<std::string, int>& known,
                                   const std::vector<std::pair<std::string, std::string>>& unknown_symbol,
                                   const std::vector<RankMesh>& meshes);

// Value of f on every rational solution of the selected equations (all when empty),
// or nullopt if they are inconsistent or leave f undetermined.
std::optional<mpq_class> determined_value(const RankSystem& S, const LinearForm& f,
                                          const std::vector<std::string>& tags = {});
bool rationally_consistent(const RankSystem& S, const std::vector<std::string>& tags = {});

struct LedgerStep {
    std::string derived;  // text of the derived equation
    std::vector<std::string> uses;
    LinearForm form;
    mpq_class value;
};

struct InfeasibilityProof {
    std::string shape;
    RankSystem system;
    std::vector<LedgerStep> steps;
    std::map<std::string, mpq_class> derived;  // single unknowns fixed by the steps
    std::string certificate;
    bool rational_solution = false;  // the linear part alone is solvable over Q
    bool infeasible = false;

    std::string to_text() const;
    Json to_json() const;
};

enum class TreeShape { E6, E7, E8 };
TreeShape parse_tree_shape(const std::string& s);
InfeasibilityProof tree_class_ledger(TreeShape shape);

// Generic search: rational inconsistency, or a determined sum of at most two unknowns
// that no positive multiples of 4 can reach.
std::optional<std::string> find_infeasibility(const RankSystem& S);

}  // namespace kronord
