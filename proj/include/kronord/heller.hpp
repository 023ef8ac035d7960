#pragma once

// Projective covers, Heller lattices and the syzygy (= AR translate) of lattices.

#include "kronord/modk.hpp"
#include "kronord/order.hpp"

namespace kronord {

struct CoverData {
    int g = 0;
    Lattice source;  // regular(g)
    OMatrix cover;   // target.rank x 4g; for modules: reduced cover lifted to O
};

// Kernel of the projective cover A^g -> M of an A(x)k-module regarded as an A-module.
Lattice heller(const ModK& M, std::string name = {});
Lattice heller(const SummandLabel& s);

CoverData projective_cover(const Lattice& L);
Lattice syzygy(const Lattice& L);

// Z_n = heller(H:n) for n >= 0 and heller(V:-n) for n < 0.
Lattice heller_z(int n);

}  // namespace kronord
