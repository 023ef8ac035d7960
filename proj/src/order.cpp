#include "kronord/order.hpp"

#include "kronord/modk.hpp"

namespace kronord {

bool Lattice::valid() const {
    if (actX.rows != rank || actX.cols != rank || actY.rows != rank || actY.cols != rank) return false;
    if (!is_local(actX) || !is_local(actY)) return false;
    return is_zero(mul(actX, actX)) && is_zero(mul(actY, actY)) && mul(actX, actY) == mul(actY, actX);
}

bool LatticeMap::is_linear() const {
    if (mat.rows != dst.rank || mat.cols != src.rank) return false;
    return mul(mat, src.actX) == mul(dst.actX, mat) && mul(mat, src.actY) == mul(dst.actY, mat);
}

Lattice make_lattice(OMatrix X, OMatrix Y, std::string name) {
    Lattice L;
    L.rank = X.rows;
    L.actX = std::move(X);
    L.actY = std::move(Y);
    L.name = std::move(name);
    if (!L.valid()) throw Error("make_lattice: actions are not commuting square-zero O-matrices");
    return L;
}

Lattice zero_lattice() { return Lattice{0, OMatrix(0, 0), OMatrix(0, 0), "0"}; }

Lattice regular(int n) {
    if (n < 1) throw Error("regular: n must be positive");
    Lattice L{4 * n, OMatrix(4 * n, 4 * n), OMatrix(4 * n, 4 * n), n == 1 ? "A" : "A^" + std::to_string(n)};
    for (int b = 0; b < n; ++b) {
        int o = 4 * b;
        L.actX(o + 1, o) = 1;
        L.actX(o + 3, o + 2) = 1;
        L.actY(o + 2, o) = 1;
        L.actY(o + 3, o + 1) = 1;
    }
    return L;
}

Lattice direct_sum(const Lattice& a, const Lattice& b) {
    std::string name = a.name.empty() || b.name.empty() ? "" : a.name + "+" + b.name;
    if (a.rank == 0) return b;
    if (b.rank == 0) return a;
    return Lattice{a.rank + b.rank, block_diag(a.actX, b.actX), block_diag(a.actY, b.actY), name};
}

ModK tensor_k(const Lattice& L) { return ModK{L.rank, reduce(L.actX), reduce(L.actY)}; }

bool is_generically_free(const Lattice& L) {
    if (L.rank % 4 != 0) return false;
    return rank_q(L.actX) == L.rank / 2 && rank_q(L.actY) == L.rank / 2 &&
           rank_q(mul(L.actX, L.actY)) == L.rank / 4;
}

LatticeCover lattice_cover(const Lattice& L) {
    LatticeCover c;
    c.gens = top_indices(tensor_k(L));
    c.g = static_cast<int>(c.gens.size());
    c.P = OMatrix(L.rank, 4 * c.g);
    OMatrix XY = mul(L.actX, L.actY);
    for (int k = 0; k < c.g; ++k) {
        int j = c.gens[k];
        for (int i = 0; i < L.rank; ++i) {
            c.P(i, 4 * k) = i == j ? 1 : 0;
            c.P(i, 4 * k + 1) = L.actX(i, j);
            c.P(i, 4 * k + 2) = L.actY(i, j);
            c.P(i, 4 * k + 3) = XY(i, j);
        }
    }
    return c;
}

bool is_projective(const Lattice& L) {
    if (L.rank == 0) return true;
    return L.rank == 4 * top_dim(tensor_k(L));
}

Lattice sublattice(const Lattice& L, const OMatrix& B, std::string name) {
    if (B.cols == 0) return zero_lattice();
    Lattice S;
    S.rank = B.cols;
    S.actX = solve_unique(B, mul(L.actX, B));
    S.actY = solve_unique(B, mul(L.actY, B));
    S.name = std::move(name);
    if (!is_local(S.actX) || !is_local(S.actY)) throw Error("sublattice: basis does not span a pure A-stable sublattice");
    return S;
}

Lattice change_basis(const Lattice& L, const OMatrix& P) {
    if (!is_unit_matrix(P)) throw Error("change_basis: matrix is not invertible over O");
    return sublattice(L, P, L.name);
}

HomSpace::HomSpace(const Lattice& L1, const Lattice& L2) : L1_(L1), L2_(L2) {
    const int r1 = L1.rank, r2 = L2.rank;
    if (r1 == 0 || r2 == 0) {
        S_ = OMatrix(0, 0);
        return;
    }
    LatticeCover cov = lattice_cover(L1);
    g_ = cov.g;
    OMatrix K = kernel_saturated(cov.P);  // relations, 4g x (4g - r1)

    // A-generators of the relation module suffice.
    std::vector<int> rel_cols;
    if (K.cols > 0) {
        Lattice Om = sublattice(regular(g_), K);
        rel_cols = top_indices(tensor_k(Om));
    }
    const int nrel = static_cast<int>(rel_cols.size());
    XY2_ = mul(L2.actX, L2.actY);
    const OMatrix* acts[4] = {nullptr, &L2.actX, &L2.actY, &XY2_};

    // Unknowns: images m_0..m_{g-1} in L2, stacked.
    OMatrix C(nrel * r2, g_ * r2);
    for (int q = 0; q < nrel; ++q) {
        int col = rel_cols[q];
        for (int i = 0; i < g_; ++i)
            for (int k = 0; k < 4; ++k) {
                const mpq_class& c = K(4 * i + k, col);
                if (sgn(c) == 0) continue;
                for (int a = 0; a < r2; ++a) {
                    if (k == 0) {
                        C(q * r2 + a, i * r2 + a) += c;
                        continue;
                    }
                    for (int b = 0; b < r2; ++b) {
                        const mpq_class& v = (*acts[k])(a, b);
                        if (sgn(v) == 0) continue;
                        C(q * r2 + a, i * r2 + b) += c * v;
                    }
                }
            }
    }
    S_ = kernel_saturated(C);
    W_ = solve(cov.P, identity_q(r1));
}

OMatrix HomSpace::assemble(const std::vector<mpq_class>& m) const {
    const int r1 = L1_.rank, r2 = L2_.rank;
    // V[:, 4i+k] = a_k m_i, then T = V W.
    OMatrix V(r2, 4 * g_);
    const OMatrix* acts[4] = {nullptr, &L2_.actX, &L2_.actY, &XY2_};
    mpq_class t;
    for (int i = 0; i < g_; ++i) {
        for (int a = 0; a < r2; ++a) V(a, 4 * i) = m[i * r2 + a];
        for (int k = 1; k < 4; ++k)
            for (int a = 0; a < r2; ++a)
                for (int b = 0; b < r2; ++b) {
                    const mpq_class& x = (*acts[k])(a, b);
                    const mpq_class& y = m[i * r2 + b];
                    if (sgn(x) == 0 || sgn(y) == 0) continue;
                    mpq_mul(t.get_mpq_t(), x.get_mpq_t(), y.get_mpq_t());
                    V(a, 4 * i + k) += t;
                }
    }
    (void)r1;
    return mul(V, W_);
}

OMatrix HomSpace::element(const std::vector<mpz_class>& c) const {
    std::vector<mpq_class> m(S_.rows);
    for (int s = 0; s < dim(); ++s) {
        if (c[s] == 0) continue;
        mpq_class cs(c[s]);
        for (int i = 0; i < S_.rows; ++i)
            if (sgn(S_(i, s))) m[i] += cs * S_(i, s);
    }
    return assemble(m);
}

OMatrix HomSpace::basis_element(int s) const {
    std::vector<mpq_class> m(S_.rows);
    for (int i = 0; i < S_.rows; ++i) m[i] = S_(i, s);
    return assemble(m);
}

std::vector<OMatrix> HomSpace::basis() const {
    std::vector<OMatrix> out;
    out.reserve(dim());
    for (int s = 0; s < dim(); ++s) out.push_back(basis_element(s));
    return out;
}

std::vector<ZMatrix> HomSpace::basis_zpk(const Zpk& R, const std::vector<int>& which) const {
    const int r2 = L2_.rank;
    ZMatrix X = R.from(L2_.actX), Y = R.from(L2_.actY), XY = R.from(XY2_), W = R.from(W_);
    const ZMatrix* acts[4] = {nullptr, &X, &Y, &XY};
    ZMatrix Sz = R.from(S_);
    std::vector<ZMatrix> out;
    out.reserve(which.size());
    for (int s : which) {
        ZMatrix V(r2, 4 * g_);
        for (int i = 0; i < g_; ++i) {
            for (int a = 0; a < r2; ++a) V(a, 4 * i) = Sz(i * r2 + a, s);
            for (int k = 1; k < 4; ++k)
                for (int a = 0; a < r2; ++a) {
                    std::uint64_t acc = 0;
                    for (int b = 0; b < r2; ++b) {
                        std::uint64_t x = (*acts[k])(a, b), y = Sz(i * r2 + b, s);
                        if (x && y) acc = R.add(acc, R.mul(x, y));
                    }
                    V(a, 4 * i + k) = acc;
                }
        }
        out.push_back(R.mul(V, W));
    }
    return out;
}

std::vector<ZMatrix> HomSpace::basis_zpk(const Zpk& R) const {
    std::vector<int> all(dim());
    for (int s = 0; s < dim(); ++s) all[s] = s;
    return basis_zpk(R, all);
}

std::vector<KMatrix> HomSpace::basis_k() const {
    Zpk R(1);
    std::vector<KMatrix> out;
    for (auto& Z : basis_zpk(R)) {
        KMatrix K(Z.rows, Z.cols);
        for (std::size_t i = 0; i < Z.a.size(); ++i) K.a[i] = static_cast<Residue>(Z.a[i]);
        out.push_back(std::move(K));
    }
    return out;
}

std::vector<OMatrix> hom_basis(const Lattice& L1, const Lattice& L2) { return HomSpace(L1, L2).basis(); }

std::vector<LatticeMap> hom_space(const Lattice& L1, const Lattice& L2) {
    std::vector<LatticeMap> out;
    for (auto& T : hom_basis(L1, L2)) out.push_back(LatticeMap{L1, L2, std::move(T)});
    return out;
}

}  // namespace kronord
