#pragma once

// Modules over A (x) k = F_p[X,Y]/(X^2,Y^2): string and band modules and their
// Krull-Schmidt decomposition through the Kronecker pencil of top -> radical.

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "kronord/linalg.hpp"

namespace kronord {

struct ModK {
    int dim = 0;
    KMatrix actX;
    KMatrix actY;

    bool valid() const;
};

enum class Kind { Proj, H, V, B, Binf };

// H(0) is the simple module. B carries lambda in F_p; Binf is the band at infinity.
struct SummandLabel {
    Kind kind = Kind::Proj;
    int n = 0;
    Residue lambda = 0;

    auto operator<=>(const SummandLabel&) const = default;
    bool operator==(const SummandLabel&) const = default;
};

SummandLabel label_proj();
SummandLabel label_h(int m);
SummandLabel label_v(int n);
SummandLabel label_b(Residue lambda, int n);
SummandLabel label_binf(int n);

int label_dim(const SummandLabel& s);
bool label_valid(const SummandLabel& s);
// Text forms: P | H:m | V:n | B:l:n | Binf:n
std::string label_to_string(const SummandLabel& s);
SummandLabel parse_label(const std::string& text);

using Decomposition = std::map<SummandLabel, int>;

int decomposition_dim(const Decomposition& d);
std::string decomposition_to_string(const Decomposition& d);
Decomposition merge(const Decomposition& a, const Decomposition& b);

ModK string_module(const SummandLabel& s);
ModK direct_sum(const ModK& a, const ModK& b);
// Module transported along the base change g: actions g A g^{-1}.
ModK conjugate(const ModK& M, const KMatrix& g);

Decomposition decompose(const ModK& M);
bool mods_isomorphic(const ModK& M, const ModK& N);

// Top dimension, i.e. dim M/(XM + YM).
int top_dim(const ModK& M);
// Basis indices j whose standard vectors complement XM + YM (first-found order).
std::vector<int> top_indices(const ModK& M);

struct CoverK {
    int g = 0;
    KMatrix cover;  // dim M x 4g, generator blocks ordered e, Xe, Ye, XYe
};
CoverK projective_cover_k(const ModK& M);

}  // namespace kronord
