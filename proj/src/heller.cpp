#include "kronord/heller.hpp"

namespace kronord {

Lattice heller(const ModK& M, std::string name) {
    if (!M.valid()) throw Error("heller: invalid module");
    if (rank_k(mul_k(M.actX, M.actY)) > 0) throw ProjectiveInput("heller: module has a projective summand");
    CoverK c = projective_cover_k(M);
    const int n = 4 * c.g;
    // Reduced-echelon kernel basis: pivot rows carry 1, so lifts plus p*e_i for
    // the remaining coordinates form an O-basis of the kernel lattice.
    KMatrix K = kernel_k(c.cover);
    KMatrix Kt = transpose_k(K);
    std::vector<int> piv = rref_k(Kt);
    OMatrix B(n, n);
    std::vector<char> used(n, 0);
    int col = 0;
    for (std::size_t r = 0; r < piv.size(); ++r) {
        for (int i = 0; i < n; ++i) B(i, col) = Kt(static_cast<int>(r), i);
        used[piv[r]] = 1;
        ++col;
    }
    const mpq_class eps = prime();
    for (int i = 0; i < n; ++i)
        if (!used[i]) B(i, col++) = eps;
    Lattice F = regular(c.g);
    Lattice Z = sublattice(F, B, std::move(name));
    return Z;
}

Lattice heller(const SummandLabel& s) {
    if (s.kind == Kind::Proj) throw ProjectiveInput("heller: projective label");
    std::string name;
    switch (s.kind) {
        case Kind::H: name = "Z" + std::to_string(s.n); break;
        case Kind::V: name = "Z-" + std::to_string(s.n); break;
        default: name = "Z[" + label_to_string(s) + "]"; break;
    }
    return heller(string_module(s), name);
}

Lattice heller_z(int n) {
    return n >= 0 ? heller(label_h(n)) : heller(label_v(-n));
}

CoverData projective_cover(const Lattice& L) {
    CoverData d;
    if (L.rank == 0) {
        d.source = zero_lattice();
        d.cover = OMatrix(0, 0);
        return d;
    }
    LatticeCover c = lattice_cover(L);
    d.g = c.g;
    d.source = regular(c.g);
    d.cover = std::move(c.P);
    return d;
}

Lattice syzygy(const Lattice& L) {
    if (L.rank == 0) return zero_lattice();
    CoverData c = projective_cover(L);
    OMatrix K = kernel_saturated(c.cover);
    std::string name = L.name.empty() ? "" : "tau(" + L.name + ")";
    return sublattice(c.source, K, name);
}

}  // namespace kronord
