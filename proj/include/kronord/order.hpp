#pragma once

// Lattices over A = O[X,Y]/(X^2,Y^2): a free O-module with two commuting square-zero actions.

#include <string>
#include <vector>

#include "kronord/linalg.hpp"
#include "kronord/zpk.hpp"

namespace kronord {

struct ModK;

struct Lattice {
    int rank = 0;
    OMatrix actX;
    OMatrix actY;
    std::string name;

    bool valid() const;
};

struct LatticeMap {
    Lattice src;
    Lattice dst;
    OMatrix mat;  // dst.rank x src.rank

    bool is_linear() const;
};

Lattice make_lattice(OMatrix X, OMatrix Y, std::string name = {});
Lattice zero_lattice();
Lattice regular(int n);
Lattice direct_sum(const Lattice& a, const Lattice& b);
ModK tensor_k(const Lattice& L);

// O-basis of {T : T X1 = X2 T, T Y1 = Y2 T}, kept as images of the generators of L1
// so that reductions and single combinations are cheap to form.
class HomSpace {
public:
    HomSpace() = default;
    HomSpace(const Lattice& L1, const Lattice& L2);
    int dim() const { return S_.cols; }
    const Lattice& source() const { return L1_; }
    const Lattice& target() const { return L2_; }
    OMatrix element(const std::vector<mpz_class>& c) const;
    OMatrix basis_element(int s) const;
    std::vector<OMatrix> basis() const;
    std::vector<KMatrix> basis_k() const;
    std::vector<ZMatrix> basis_zpk(const Zpk& R) const;
    std::vector<ZMatrix> basis_zpk(const Zpk& R, const std::vector<int>& which) const;

private:
    OMatrix assemble(const std::vector<mpq_class>& m) const;
    Lattice L1_, L2_;
    int g_ = 0;
    OMatrix S_;  // g*r2 x dim: stacked generator images
    OMatrix W_;  // 4g x r1: basis vector j of L1 is the image of W[:, j]
    OMatrix XY2_;
};

// Matrices only; basis of {T : T X1 = X2 T, T Y1 = Y2 T} over O.
std::vector<OMatrix> hom_basis(const Lattice& L1, const Lattice& L2);
std::vector<LatticeMap> hom_space(const Lattice& L1, const Lattice& L2);
bool is_projective(const Lattice& L);

// Minimal cover regular(g) -> L sending generator i to the basis vector gens[i].
struct LatticeCover {
    int g = 0;
    std::vector<int> gens;
    OMatrix P;  // rank x 4g
};
LatticeCover lattice_cover(const Lattice& L);

// Restriction of the actions to a pure A-stable sublattice with basis columns B.
Lattice sublattice(const Lattice& L, const OMatrix& B, std::string name = {});
// Same lattice in the basis given by the columns of the unit-determinant matrix P.
Lattice change_basis(const Lattice& L, const OMatrix& P);
// Q-ranks of X, Y, XY equal rank/2, rank/2, rank/4: the lattice is free over A after tensoring with Q.
bool is_generically_free(const Lattice& L);

}  // namespace kronord
