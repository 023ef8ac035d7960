#pragma once

// Almost split sequences of A-lattices: endomorphism algebras, the ideal of maps
// factoring through the projective cover, the choice of phi, pullback middles,
// exact splitting into indecomposables and isomorphism testing.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kronord/order.hpp"
#include "kronord/zpk.hpp"

namespace kronord {

struct ArsConfig {
    int precision = 20;      // initial p-adic precision for idempotent lifting
    int precision_max = 60;  // doubling stops here
    int iso_samples = 32;    // random samples before iso_test gives up
};

struct EndAlgebra {
    Lattice lattice;
    HomSpace space;
    std::vector<KMatrix> reduced;
    // Flattened entry positions where the reduced basis is independent; reading an
    // endomorphism at these entries and multiplying by coord_k gives its coordinates.
    std::vector<int> pivots;
    KMatrix coord_k;

    int dim() const { return space.dim(); }
    std::vector<OMatrix> basis() const { return space.basis(); }
    std::vector<Residue> coords(const KMatrix& f) const;
    // Inverse of the pivot block modulo p^K, from the basis reduced modulo p^K.
    ZMatrix coord_zpk(const Zpk& R, const std::vector<ZMatrix>& bz) const;
    OMatrix element(const std::vector<mpz_class>& c) const { return space.element(c); }
};

EndAlgebra end_algebra(const Lattice& L);
// table[i][j] holds the coordinates of b_i b_j in End (x) k. Quadratic in dim.
std::vector<std::vector<std::vector<Residue>>> reduced_structure(const EndAlgebra& E);

// End (x) k = F_p 1 + N with N nilpotent: chi(b_k) is the eigenvalue of b_k.
struct LocalTest {
    bool local = false;
    std::vector<Residue> chi;
};
LocalTest local_test(const EndAlgebra& E);

// Radical of End (x) k as coordinate vectors (F_p-basis).
std::vector<std::vector<Residue>> radical_k(const EndAlgebra& E);
int semisimple_dim(const EndAlgebra& E);
// O-basis of {f in End : reduce(f) in rad(End (x) k)}.
std::vector<OMatrix> radical_basis(const EndAlgebra& E);
std::vector<LatticeMap> radical_endos(const EndAlgebra& E);

// Exact O-span of {p o psi : psi in Hom(L, A^g)} inside End, as matrices.
std::vector<OMatrix> factor_through_basis(const Lattice& L);
std::vector<LatticeMap> factor_through_cover(const Lattice& L);

struct PhiResult {
    OMatrix phi;
    bool from_basis = false;     // found among the End basis rather than the socle
    bool one_side_enough = true;  // right-composition conditions alone gave the same space
};
PhiResult find_phi_ex(const Lattice& L);
LatticeMap find_phi(const Lattice& L);

struct AlmostSplitSeq {
    Lattice tail;
    Lattice middle;
    Lattice head;
    LatticeMap inject;
    LatticeMap project;
    LatticeMap phi;
};
AlmostSplitSeq almost_split(const Lattice& M, bool check_tail = true);
// Rank additivity, project o inject = 0, exactness after reduction, linearity.
bool sequence_invariants_hold(const AlmostSplitSeq& s);

struct SplitCertificate {
    std::vector<Lattice> summands;
    std::vector<LatticeMap> embeddings;
    OMatrix witness;  // columns: embedded summand bases, in order
    bool verify(const Lattice& L) const;
};

// Hints are lattices tried as direct summands before the idempotent method.
SplitCertificate split_lattice(const Lattice& L, std::mt19937_64& rng, const ArsConfig& cfg = {},
                               const std::vector<Lattice>& hints = {});

// If S is isomorphic to a direct summand of L: inclusion s and retraction t with t s = 1_S.
// The complement is returned as the quotient L / s(S) on the coordinates outside a unit
// block of s, which keeps its entries small; rest_embedding maps it onto ker t.
struct Peel {
    OMatrix s, t;
    Lattice rest;
    OMatrix rest_embedding;
};
bool peel_summand(const Lattice& S, const Lattice& L, std::mt19937_64& rng, int samples, Peel& out);

struct IsoResult {
    bool iso = false;
    OMatrix witness;  // L2-coordinates of the image of L1's basis
    std::string reason;
};
// With l1_indecomposable the miss probability of a false verdict is at most p^-k;
// otherwise it is bounded by (rank/p)^k and Inconclusive is raised when rank >= p.
IsoResult iso_test(const Lattice& L1, const Lattice& L2, std::mt19937_64& rng, const ArsConfig& cfg = {},
                   bool l1_indecomposable = false);

}  // namespace kronord
