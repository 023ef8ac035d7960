#include "kronord/ars.hpp"

#include <algorithm>
#include <numeric>

#include "kronord/heller.hpp"
#include "kronord/modk.hpp"

namespace kronord {

namespace {

Residue random_residue(std::mt19937_64& rng) {
    return static_cast<Residue>(std::uniform_int_distribution<unsigned>(0, prime() - 1)(rng));
}

std::vector<mpz_class> to_mpz(const std::vector<Residue>& v) {
    std::vector<mpz_class> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<unsigned long>(v[i]);
    return out;
}

KMatrix flatten_rows(const std::vector<KMatrix>& ms) {
    if (ms.empty()) return KMatrix(0, 0);
    const int n = ms[0].rows * ms[0].cols;
    KMatrix F(static_cast<int>(ms.size()), n);
    for (std::size_t k = 0; k < ms.size(); ++k)
        std::copy(ms[k].a.begin(), ms[k].a.end(), F.a.begin() + static_cast<std::ptrdiff_t>(k) * n);
    return F;
}

// Matrix power over F_p by repeated squaring.
KMatrix power_k(KMatrix A, long long e) {
    KMatrix R = identity_k(A.rows);
    while (e > 0) {
        if (e & 1) R = mul_k(R, A);
        A = mul_k(A, A);
        e >>= 1;
    }
    return R;
}

// Columns spanning the column space of A, as a matrix in column echelon form
// whose pivot rows carry an identity block.
struct Subspace {
    KMatrix B;
    std::vector<int> rows;
};

Subspace column_space(const KMatrix& A) {
    KMatrix T = transpose_k(A);
    std::vector<int> piv = rref_k(T);
    Subspace s;
    s.rows = piv;
    s.B = KMatrix(A.rows, static_cast<int>(piv.size()));
    for (std::size_t c = 0; c < piv.size(); ++c)
        for (int i = 0; i < A.rows; ++i) s.B(i, static_cast<int>(c)) = T(static_cast<int>(c), i);
    return s;
}

// Trace of b restricted to the b-invariant subspace s.
Residue restricted_trace(const KMatrix& b, const Subspace& s) {
    Residue t = 0;
    for (std::size_t c = 0; c < s.rows.size(); ++c) {
        int i = s.rows[c];
        for (int m = 0; m < b.cols; ++m)
            if (b(i, m) && s.B(m, static_cast<int>(c))) t = fp_add(t, fp_mul(b(i, m), s.B(m, static_cast<int>(c))));
    }
    return t;
}

}  // namespace

// ------------------------------------------------------------ End algebra

std::vector<Residue> EndAlgebra::coords(const KMatrix& f) const {
    const int d = dim();
    std::vector<Residue> v(d), c(d, 0);
    for (int i = 0; i < d; ++i) v[i] = f.a[pivots[i]];
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            if (coord_k(k, i) && v[i]) c[k] = fp_add(c[k], fp_mul(coord_k(k, i), v[i]));
    return c;
}

ZMatrix EndAlgebra::coord_zpk(const Zpk& R, const std::vector<ZMatrix>& bz) const {
    const int d = dim();
    ZMatrix G(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) G(i, k) = bz[k].a[pivots[i]];
    return R.inverse(G);
}

EndAlgebra end_algebra(const Lattice& L) {
    EndAlgebra E;
    E.lattice = L;
    E.space = HomSpace(L, L);
    const int d = E.dim();
    if (d == 0) return E;
    E.reduced = E.space.basis_k();
    E.pivots = pivot_columns_k(flatten_rows(E.reduced));
    if (static_cast<int>(E.pivots.size()) != d) throw Error("end_algebra: basis is not saturated");
    KMatrix G(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) G(i, k) = E.reduced[k].a[E.pivots[i]];
    E.coord_k = inverse_k(G);
    return E;
}

std::vector<std::vector<std::vector<Residue>>> reduced_structure(const EndAlgebra& E) {
    const int d = E.dim();
    std::vector<std::vector<std::vector<Residue>>> t(d, std::vector<std::vector<Residue>>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) t[i][j] = E.coords(mul_k(E.reduced[i], E.reduced[j]));
    return t;
}

LocalTest local_test(const EndAlgebra& E) {
    LocalTest out;
    const int d = E.dim(), r = E.lattice.rank;
    if (d == 0) return out;
    const unsigned p = prime();

    // Eigenvalues from traces on an End-invariant subspace of dimension prime to p.
    ModK Mk = tensor_k(E.lattice);
    KMatrix XY = mul_k(Mk.actX, Mk.actY);
    std::vector<KMatrix> spans = {identity_k(r), hstack_k(Mk.actX, Mk.actY), XY, Mk.actX, Mk.actY,
                                  kernel_k(vstack_k(Mk.actX, Mk.actY))};
    std::optional<Subspace> probe;
    for (const auto& S : spans) {
        Subspace s = column_space(S);
        int m = static_cast<int>(s.rows.size());
        if (m > 0 && m % static_cast<int>(p) != 0) {
            probe = std::move(s);
            break;
        }
    }
    out.chi.assign(d, 0);
    std::vector<KMatrix> nil(d);
    for (int k = 0; k < d; ++k) {
        const KMatrix& b = E.reduced[k];
        Residue lam = 0;
        if (probe) {
            lam = fp_mul(restricted_trace(b, *probe), fp_inv(static_cast<Residue>(probe->rows.size() % p)));
        } else {
            int found = 0;
            for (Residue l = 0; l < p; ++l)
                if (rank_k(sub_k(b, scale_k(identity_k(r), l))) < r) {
                    lam = l;
                    ++found;
                }
            if (found != 1) return out;
        }
        out.chi[k] = lam;
        nil[k] = sub_k(b, scale_k(identity_k(r), lam));
    }

    // The b_k - chi_k must generate a nilpotent algebra: descend the flag V, N V, N^2 V, ...
    std::vector<std::vector<Residue>> cur;
    {
        KEchelon W(r);
        for (int k = 0; k < d && W.rank() < r; ++k)
            for (int c = 0; c < r; ++c) {
                std::vector<Residue> v(r);
                for (int i = 0; i < r; ++i) v[i] = nil[k](i, c);
                if (W.insert(v)) cur.push_back(std::move(v));
            }
        if (W.rank() == r) return out;
    }
    while (!cur.empty()) {
        KEchelon W(r);
        std::vector<std::vector<Residue>> next;
        for (int k = 0; k < d; ++k)
            for (const auto& v : cur) {
                std::vector<Residue> w(r, 0);
                for (int i = 0; i < r; ++i) {
                    std::uint64_t acc = 0;
                    for (int j = 0; j < r; ++j)
                        if (nil[k](i, j) && v[j]) acc += static_cast<std::uint64_t>(nil[k](i, j)) * v[j];
                    w[i] = static_cast<Residue>(acc % p);
                }
                if (W.insert(w)) next.push_back(std::move(w));
            }
        if (next.size() >= cur.size()) return out;
        cur = std::move(next);
    }
    out.local = true;
    return out;
}

namespace {

// Rows of the result are coordinate vectors of an F_p-basis of rad(End (x) k),
// by iterated trace forms on lifts to Z/p^{i+1}.
std::vector<std::vector<Residue>> radical_general(const EndAlgebra& E) {
    const int d = E.dim(), r = E.lattice.rank;
    const unsigned p = prime();
    int l = 0;
    for (long long q = p; q <= r; q *= p) ++l;
    // Current ideal I as coordinate rows.
    std::vector<std::vector<Residue>> I(d, std::vector<Residue>(d, 0));
    for (int k = 0; k < d; ++k) I[k][k] = 1;
    auto matrix_of = [&](const std::vector<Residue>& c) {
        KMatrix M(r, r);
        for (int k = 0; k < d; ++k)
            if (c[k]) M = add_k(M, scale_k(E.reduced[k], c[k]));
        return M;
    };
    for (int i = 0; i <= l && !I.empty(); ++i) {
        Zpk R(i + 1);
        std::uint64_t pi = 1;
        for (int t = 0; t < i; ++t) pi *= p;
        const int m = static_cast<int>(I.size());
        KMatrix G(m, d);
        for (int a = 0; a < m; ++a) {
            KMatrix A = matrix_of(I[a]);
            for (int j = 0; j < d; ++j) {
                KMatrix AB = mul_k(A, E.reduced[j]);
                ZMatrix Z(r, r);
                for (std::size_t q = 0; q < AB.a.size(); ++q) Z.a[q] = AB.a[q];
                ZMatrix Pw = R.identity(r);
                for (std::uint64_t e = 0; e < pi; ++e) Pw = R.mul(Pw, Z);
                std::uint64_t tr = 0;
                for (int q = 0; q < r; ++q) tr = R.add(tr, Pw(q, q));
                G(a, j) = static_cast<Residue>((tr / pi) % p);
            }
        }
        // Left kernel of G inside span(I).
        KMatrix Kc = kernel_k(transpose_k(G));
        std::vector<std::vector<Residue>> next;
        for (int c = 0; c < Kc.cols; ++c) {
            std::vector<Residue> v(d, 0);
            for (int a = 0; a < m; ++a)
                if (Kc(a, c))
                    for (int k = 0; k < d; ++k) v[k] = fp_add(v[k], fp_mul(Kc(a, c), I[a][k]));
            next.push_back(std::move(v));
        }
        I = std::move(next);
    }
    return I;
}

}  // namespace

std::vector<std::vector<Residue>> radical_k(const EndAlgebra& E) {
    const int d = E.dim();
    LocalTest lt = local_test(E);
    if (!lt.local) return radical_general(E);
    int k0 = 0;
    while (k0 < d && lt.chi[k0] == 0) ++k0;
    std::vector<std::vector<Residue>> out;
    Residue inv0 = fp_inv(lt.chi[k0]);
    for (int k = 0; k < d; ++k) {
        if (k == k0) continue;
        std::vector<Residue> v(d, 0);
        v[k] = 1;
        v[k0] = fp_neg(fp_mul(lt.chi[k], inv0));
        out.push_back(std::move(v));
    }
    return out;
}

int semisimple_dim(const EndAlgebra& E) { return E.dim() - static_cast<int>(radical_k(E).size()); }

std::vector<OMatrix> radical_basis(const EndAlgebra& E) {
    const int d = E.dim();
    auto rad = radical_k(E);
    KMatrix Rm(static_cast<int>(rad.size()), d);
    for (std::size_t i = 0; i < rad.size(); ++i)
        for (int k = 0; k < d; ++k) Rm(static_cast<int>(i), k) = rad[i][k];
    std::vector<int> piv = rref_k(Rm);
    std::vector<char> used(d, 0);
    std::vector<OMatrix> out;
    for (std::size_t i = 0; i < piv.size(); ++i) {
        std::vector<mpz_class> c(d);
        for (int k = 0; k < d; ++k) c[k] = Rm(static_cast<int>(i), k);
        used[piv[i]] = 1;
        out.push_back(E.element(c));
    }
    for (int k = 0; k < d; ++k)
        if (!used[k]) out.push_back(scale(E.space.basis_element(k), mpq_class(prime())));
    return out;
}

std::vector<LatticeMap> radical_endos(const EndAlgebra& E) {
    std::vector<LatticeMap> out;
    for (auto& m : radical_basis(E)) out.push_back(LatticeMap{E.lattice, E.lattice, std::move(m)});
    return out;
}

// ------------------------------------------------ maps through the cover

namespace {

// Generators p_i o psi_j of the maps factoring through the projective cover.
std::vector<OMatrix> factor_generators(const Lattice& L) {
    LatticeCover cov = lattice_cover(L);
    std::vector<OMatrix> psi = hom_basis(L, regular(1));
    std::vector<OMatrix> out;
    for (int i = 0; i < cov.g; ++i) {
        OMatrix Pi = columns(cov.P, 4 * i, 4);
        for (const auto& s : psi) out.push_back(mul(Pi, s));
    }
    return out;
}

}  // namespace

std::vector<OMatrix> factor_through_basis(const Lattice& L) {
    if (L.rank == 0) return {};
    const int r = L.rank;
    std::vector<OMatrix> gens = factor_generators(L);
    OMatrix G(r * r, static_cast<int>(gens.size()));
    for (std::size_t k = 0; k < gens.size(); ++k)
        for (int i = 0; i < r * r; ++i) G(i, static_cast<int>(k)) = gens[k].a[i];
    OMatrix B = span_basis_local(G);
    std::vector<OMatrix> out;
    for (int c = 0; c < B.cols; ++c) {
        OMatrix M(r, r);
        for (int i = 0; i < r * r; ++i) M.a[i] = B(i, c);
        out.push_back(std::move(M));
    }
    return out;
}

std::vector<LatticeMap> factor_through_cover(const Lattice& L) {
    std::vector<LatticeMap> out;
    for (auto& m : factor_through_basis(L)) out.push_back(LatticeMap{L, L, std::move(m)});
    return out;
}

// ---------------------------------------------------------------- phi

namespace {

// End coordinates modulo p^K together with the Smith data of the ideal T.
struct TIdeal {
    Zpk R;
    ZMatrix Ginv;   // pivot values -> coordinates
    ZMatrix UG;     // U * Ginv
    ZMatrix Uinv;
    std::vector<int> a;
    explicit TIdeal(int K) : R(K) {}
};

std::vector<std::uint64_t> pivot_values(const Zpk& R, const EndAlgebra& E, const ZMatrix& f) {
    std::vector<std::uint64_t> v(E.pivots.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.a[E.pivots[i]];
    (void)R;
    return v;
}

// Entries of f g at the pivot positions only.
std::vector<std::uint64_t> product_at_pivots(const Zpk& R, const EndAlgebra& E, const ZMatrix& f, const ZMatrix& g) {
    const int r = f.rows;
    std::vector<std::uint64_t> v(E.pivots.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        int row = E.pivots[i] / r, col = E.pivots[i] % r;
        unsigned __int128 acc = 0;
        for (int m = 0; m < r; ++m) {
            std::uint64_t x = f(row, m), y = g(m, col);
            if (x && y) acc += static_cast<unsigned __int128>(R.mul(x, y));
        }
        v[i] = static_cast<std::uint64_t>(acc % R.modulus());
    }
    return v;
}

std::vector<std::uint64_t> apply(const Zpk& R, const ZMatrix& M, const std::vector<std::uint64_t>& v) {
    std::vector<std::uint64_t> out(M.rows, 0);
    for (int i = 0; i < M.rows; ++i) {
        unsigned __int128 acc = 0;
        for (int j = 0; j < M.cols; ++j)
            if (M(i, j) && v[j]) acc += static_cast<unsigned __int128>(R.mul(M(i, j), v[j]));
        out[i] = static_cast<std::uint64_t>(acc % R.modulus());
    }
    return out;
}

bool build_t_ideal(const EndAlgebra& E, const std::vector<ZMatrix>& bz, const std::vector<OMatrix>& gens, TIdeal& T) {
    const int d = E.dim();
    T.Ginv = E.coord_zpk(T.R, bz);
    ZMatrix TC(d, static_cast<int>(gens.size()));
    for (std::size_t k = 0; k < gens.size(); ++k) {
        ZMatrix g = T.R.from(gens[k]);
        auto c = apply(T.R, T.Ginv, pivot_values(T.R, E, g));
        for (int i = 0; i < d; ++i) TC(i, static_cast<int>(k)) = c[i];
    }
    ZSmith s = smith_zpk(T.R, TC);
    if (static_cast<int>(s.a.size()) < d) return false;
    T.a = s.a;
    T.UG = T.R.mul(s.U, T.Ginv);
    T.Uinv = s.Uinv;
    return true;
}

// Powers of p as residues modulo p^K.
std::uint64_t ppow(int e) {
    std::uint64_t x = 1;
    for (int i = 0; i < e; ++i) x *= prime();
    return x;
}

}  // namespace

PhiResult find_phi_ex(const Lattice& L) {
    if (is_projective(L)) throw ProjectiveInput("find_phi: projective lattice");
    EndAlgebra E = end_algebra(L);
    LocalTest lt = local_test(E);
    if (!lt.local) throw NoPhiFound("find_phi: End is not local");
    const int d = E.dim(), r = L.rank;
    const unsigned p = prime();
    std::vector<OMatrix> gens = factor_generators(L);

    std::optional<TIdeal> Topt;
    std::vector<ZMatrix> bz;
    for (int K = std::min(6, max_zpk_precision());; K = std::min(2 * K, max_zpk_precision())) {
        TIdeal T(K);
        bz = E.space.basis_zpk(T.R);
        if (build_t_ideal(E, bz, gens, T)) {
            Topt.emplace(std::move(T));
            break;
        }
        if (K == max_zpk_precision()) throw NoPhiFound("find_phi: precision exhausted");
    }
    TIdeal& T = *Topt;
    const Zpk& R = T.R;

    // Radical generators besides eps * 1: b_k - chi_k / chi_k0 b_k0.
    int k0 = 0;
    while (lt.chi[k0] == 0) ++k0;
    std::vector<ZMatrix> rad;
    Residue inv0 = fp_inv(lt.chi[k0]);
    for (int k = 0; k < d; ++k) {
        if (k == k0) continue;
        std::uint64_t c = R.from_int(static_cast<long long>(fp_mul(lt.chi[k], inv0)));
        ZMatrix f = bz[k];
        for (std::size_t i = 0; i < f.a.size(); ++i) f.a[i] = R.sub(f.a[i], R.mul(c, bz[k0].a[i]));
        rad.push_back(std::move(f));
    }

    // z = U c; membership in T needs v(z_j) >= a_j.
    auto in_T = [&](const std::vector<std::uint64_t>& z, int slack) {
        for (int j = 0; j < d; ++j)
            if (R.val(z[j]) < T.a[j] - slack) return false;
        return true;
    };
    auto z_of = [&](const std::vector<std::uint64_t>& piv) { return apply(R, T.UG, piv); };

    PhiResult res;
    // Candidates from the End basis.
    for (int k = 0; k < d; ++k) {
        auto z = z_of(pivot_values(R, E, bz[k]));
        if (in_T(z, 0) || !in_T(z, 1)) continue;
        bool ok = true;
        for (const auto& f : rad) {
            if (!in_T(z_of(product_at_pivots(R, E, bz[k], f)), 0) || !in_T(z_of(product_at_pivots(R, E, f, bz[k])), 0)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            res.phi = E.space.basis_element(k);
            res.from_basis = true;
            break;
        }
    }

    // Socle of End / T: classes v_j = U^{-1} e_j p^{a_j - 1}.
    std::vector<int> J;
    for (int j = 0; j < d; ++j)
        if (T.a[j] >= 1) J.push_back(j);
    const int s = static_cast<int>(J.size());
    if (s == 0) throw NoPhiFound("find_phi: T equals End");
    std::vector<std::vector<std::uint64_t>> vcoord(s);
    std::vector<ZMatrix> vm(s);
    for (int q = 0; q < s; ++q) {
        int j = J[q];
        std::uint64_t sc = ppow(T.a[j] - 1);
        vcoord[q].resize(d);
        for (int k = 0; k < d; ++k) vcoord[q][k] = R.mul(T.Uinv(k, j), sc);
        ZMatrix M(r, r);
        for (int k = 0; k < d; ++k) {
            if (!vcoord[q][k]) continue;
            for (std::size_t i = 0; i < M.a.size(); ++i)
                if (bz[k].a[i]) M.a[i] = R.add(M.a[i], R.mul(vcoord[q][k], bz[k].a[i]));
        }
        vm[q] = std::move(M);
    }
    auto cls = [&](const std::vector<std::uint64_t>& z) {
        std::vector<Residue> c(s);
        for (int q = 0; q < s; ++q) c[q] = static_cast<Residue>((z[J[q]] / ppow(T.a[J[q]] - 1)) % p);
        return c;
    };
    // Conditions: one row per (f, class component), one column per socle vector.
    std::vector<std::vector<Residue>> rrows, lrows;
    for (const auto& f : rad) {
        std::vector<std::vector<Residue>> cr(s), cl(s);
        for (int q = 0; q < s; ++q) {
            cr[q] = cls(z_of(product_at_pivots(R, E, vm[q], f)));
            cl[q] = cls(z_of(product_at_pivots(R, E, f, vm[q])));
        }
        for (int comp = 0; comp < s; ++comp) {
            std::vector<Residue> row(s), rowl(s);
            for (int q = 0; q < s; ++q) {
                row[q] = cr[q][comp];
                rowl[q] = cl[q][comp];
            }
            rrows.push_back(std::move(row));
            lrows.push_back(std::move(rowl));
        }
    }
    auto to_matrix = [s](const std::vector<std::vector<Residue>>& rows) {
        KMatrix A(static_cast<int>(rows.size()), s);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (int q = 0; q < s; ++q) A(static_cast<int>(i), q) = rows[i][q];
        return A;
    };
    KMatrix Ar = to_matrix(rrows);
    KMatrix A = vstack_k(Ar, to_matrix(lrows));
    res.one_side_enough = rank_k(Ar) == rank_k(A);
    if (res.from_basis) return res;
    KMatrix ker = kernel_k(A);
    if (ker.cols == 0) throw NoPhiFound("find_phi: empty solution space");
    std::vector<std::uint64_t> coord(d, 0);
    for (int q = 0; q < s; ++q)
        if (ker(q, 0))
            for (int k = 0; k < d; ++k) coord[k] = R.add(coord[k], R.mul(ker(q, 0), vcoord[q][k]));
    std::vector<mpz_class> c(d);
    for (int k = 0; k < d; ++k) c[k] = R.to_int(coord[k]);
    res.phi = E.element(c);
    return res;
}

LatticeMap find_phi(const Lattice& L) { return LatticeMap{L, L, find_phi_ex(L).phi}; }

// ------------------------------------------------------ almost split

bool sequence_invariants_hold(const AlmostSplitSeq& s) {
    if (s.middle.rank != s.tail.rank + s.head.rank) return false;
    if (!s.inject.is_linear() || !s.project.is_linear()) return false;
    if (!is_zero(mul(s.project.mat, s.inject.mat))) return false;
    KMatrix i = reduce(s.inject.mat), q = reduce(s.project.mat);
    return rank_k(i) == s.tail.rank && rank_k(q) == s.head.rank && is_zero_k(mul_k(q, i));
}

AlmostSplitSeq almost_split(const Lattice& M, bool check_tail) {
    if (is_projective(M)) throw ProjectiveInput("almost_split: projective lattice");
    PhiResult ph = find_phi_ex(M);
    LatticeCover cov = lattice_cover(M);
    const int g = cov.g, r = M.rank;
    OMatrix Mat = hstack(cov.P, scale(ph.phi, mpq_class(-1)));
    OMatrix Kmid = kernel_saturated(Mat);
    Lattice total = direct_sum(regular(g), M);
    std::string nm = M.name.empty() ? "" : "E(" + M.name + ")";
    AlmostSplitSeq s;
    s.head = M;
    s.middle = sublattice(total, Kmid, nm);
    OMatrix K0 = kernel_saturated(cov.P);
    s.tail = sublattice(regular(g), K0, M.name.empty() ? "" : "tau(" + M.name + ")");
    s.inject = LatticeMap{s.tail, s.middle, solve_unique(Kmid, vstack(K0, OMatrix(r, K0.cols)))};
    s.project = LatticeMap{s.middle, s.head, rows_of(Kmid, 4 * g, r)};
    s.phi = LatticeMap{M, M, ph.phi};
    if (!sequence_invariants_hold(s)) throw NotAlmostSplit("almost_split: sequence invariants fail");
    if (check_tail && !local_test(end_algebra(s.tail)).local)
        throw NotAlmostSplit("almost_split: tail is not indecomposable");
    return s;
}

// ------------------------------------------------------------ splitting

bool SplitCertificate::verify(const Lattice& L) const {
    if (summands.size() != embeddings.size()) return false;
    int total = 0;
    OMatrix W(L.rank, 0);
    for (std::size_t i = 0; i < summands.size(); ++i) {
        const LatticeMap& e = embeddings[i];
        if (e.mat.rows != L.rank || e.mat.cols != summands[i].rank) return false;
        if (!(e.src.actX == summands[i].actX) || !(e.src.actY == summands[i].actY)) return false;
        if (!(e.dst.actX == L.actX) || !(e.dst.actY == L.actY)) return false;
        if (!e.is_linear()) return false;
        total += summands[i].rank;
        W = hstack(W, e.mat);
    }
    return total == L.rank && W == witness && is_unit_matrix(witness);
}

bool peel_summand(const Lattice& S, const Lattice& L, std::mt19937_64& rng, int samples, Peel& out) {
    if (S.rank == 0 || S.rank > L.rank) return false;
    HomSpace H1(S, L), H2(L, S);
    if (H1.dim() == 0 || H2.dim() == 0) return false;
    std::vector<KMatrix> h1 = H1.basis_k(), h2 = H2.basis_k();
    // The complement only depends on the image of s, so s is taken as sparse as possible:
    // single basis elements, then pairs, then random combinations.
    const int d1 = static_cast<int>(h1.size());
    const int singles = d1, pairs = d1 * (d1 - 1) / 2;
    const int sparse = singles + std::min(pairs, 4 * samples);
    const int total = sparse + samples;
    int pi = 0, pj = 1;
    for (int it = 0; it < total; ++it) {
        std::vector<Residue> a(h1.size()), b(h2.size());
        KMatrix sk(L.rank, S.rank);
        if (it < singles) {
            a[it] = 1;
        } else if (it < sparse) {
            a[pi] = 1;
            a[pj] = 1;
            if (++pj == d1) pj = ++pi + 1;
        } else {
            for (auto& x : a) x = random_residue(rng);
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i]) sk = add_k(sk, scale_k(h1[i], a[i]));
        if (rank_k(sk) < S.rank) continue;
        // Only h2 elements that are nonzero on s matter; a split s is found with few tries.
        std::vector<KMatrix> h2s(h2.size());
        for (std::size_t i = 0; i < h2.size(); ++i) h2s[i] = mul_k(h2[i], sk);
        bool split = false;
        for (int tr = 0; tr < 8 && !split; ++tr) {
            KMatrix ts(S.rank, S.rank);
            for (std::size_t i = 0; i < b.size(); ++i) {
                b[i] = random_residue(rng);
                if (b[i] && !is_zero_k(h2s[i])) ts = add_k(ts, scale_k(h2s[i], b[i]));
            }
            split = rank_k(ts) == S.rank;
        }
        if (!split) continue;
        OMatrix s = H1.element(to_mpz(a));
        OMatrix t = H2.element(to_mpz(b));
        out.t = mul(inverse_q(mul(t, s)), t);
        const int n = L.rank, r = S.rank, q = n - r;
        std::vector<int> prow = pivot_columns_k(transpose_k(sk));
        std::vector<char> in_p(n, 0);
        for (int i : prow) in_p[i] = 1;
        std::vector<int> qrow;
        for (int i = 0; i < n; ++i)
            if (!in_p[i]) qrow.push_back(i);
        OMatrix sP(r, r), sQ(q, r);
        for (int i = 0; i < r; ++i)
            for (int c = 0; c < r; ++c) sP(i, c) = s(prow[i], c);
        for (int i = 0; i < q; ++i)
            for (int c = 0; c < r; ++c) sQ(i, c) = s(qrow[i], c);
        OMatrix G = mul(sQ, inverse_q(sP));
        auto induced = [&](const OMatrix& X) {
            OMatrix XQQ(q, q), XPQ(r, q);
            for (int j = 0; j < q; ++j) {
                for (int i = 0; i < q; ++i) XQQ(i, j) = X(qrow[i], qrow[j]);
                for (int i = 0; i < r; ++i) XPQ(i, j) = X(prow[i], qrow[j]);
            }
            return sub(XQQ, mul(G, XPQ));
        };
        out.rest = make_lattice(induced(L.actX), induced(L.actY));
        OMatrix proj = sub(identity_q(n), mul(s, out.t));
        out.rest_embedding = OMatrix(n, q);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < q; ++j) out.rest_embedding(i, j) = proj(i, qrow[j]);
        out.s = std::move(s);
        return true;
    }
    return false;
}

namespace {

struct Splitter {
    const Lattice& L;
    std::mt19937_64& rng;
    const ArsConfig& cfg;
    const std::vector<Lattice>& hints;
    std::vector<Decomposition> hint_dec;
    SplitCertificate cert;

    void emit(const Lattice& S, const OMatrix& emb) {
        cert.summands.push_back(S);
        cert.embeddings.push_back(LatticeMap{S, L, emb});
    }

    static bool contains(const Decomposition& big, const Decomposition& small) {
        for (const auto& [k, m] : small) {
            auto it = big.find(k);
            if (it == big.end() || it->second < m) return false;
        }
        return true;
    }

    // Idempotent of End (x) k from a random element with a proper generalized eigenspace.
    std::optional<KMatrix> find_idempotent(const EndAlgebra& E) {
        const int r = E.lattice.rank, d = E.dim();
        for (int it = 0; it < 64; ++it) {
            KMatrix a(r, r);
            for (int k = 0; k < d; ++k) {
                Residue c = random_residue(rng);
                if (c) a = add_k(a, scale_k(E.reduced[k], c));
            }
            for (Residue lam = 0; lam < prime(); ++lam) {
                KMatrix N = power_k(sub_k(a, scale_k(identity_k(r), lam)), r);
                KMatrix W1 = kernel_k(N);
                if (W1.cols == 0 || W1.cols == r) continue;
                Subspace W2 = column_space(N);
                KMatrix Bm = hstack_k(W1, W2.B);
                KMatrix D(r, r);
                for (int i = 0; i < W1.cols; ++i) D(i, i) = 1;
                return mul_k(mul_k(Bm, D), inverse_k(Bm));
            }
        }
        return std::nullopt;
    }

    // Exact rational idempotent congruent to the p-adic lift e: the projection onto the
    // A-span of free generators taken from the columns of e, along the A-span of free
    // generators taken from the columns of 1 - e. It lies in End(C) once the
    // precision exceeds the valuation of the determinant of those generators.
    std::optional<OMatrix> rational_idempotent(const Lattice& C, const Zpk& R, const ZMatrix& e, int r1) {
        const int r = C.rank;
        ZMatrix f = R.identity(r);
        for (std::size_t i = 0; i < f.a.size(); ++i) f.a[i] = R.sub(f.a[i], e.a[i]);
        OMatrix XY = mul(C.actX, C.actY);
        OMatrix G(r, 0);
        int rk = 0;
        // Independence must survive the truncation error p^K: count only Smith invariants of
        // valuation below K/2, so a column whose generator part is truncation noise is skipped.
        const int t = (R.K() + 1) / 2;
        auto robust_rank = [&](const OMatrix& H) {
            SmithForm sf = smith_local(H);
            int n = 0;
            for (int i = 0; i < std::min(sf.D.rows, sf.D.cols); ++i)
                if (sgn(sf.D(i, i)) != 0 && valuation(sf.D(i, i)) < t) ++n;
            return n;
        };
        auto take = [&](const ZMatrix& m, int want) {
            OMatrix M = R.to_o(m);
            for (int j = 0; j < r && want > 0; ++j) {
                OMatrix v = columns(M, j, 1);
                OMatrix orbit = hstack(hstack(v, mul(C.actX, v)), hstack(mul(C.actY, v), mul(XY, v)));
                OMatrix H = hstack(G, orbit);
                int hr = robust_rank(H);
                if (hr != rk + 4) continue;
                G = std::move(H);
                rk = hr;
                want -= 4;
            }
            return want == 0;
        };
        if (r1 % 4 != 0 || !take(e, r1) || !take(f, r - r1)) return std::nullopt;
        OMatrix D(r, r);
        for (int i = 0; i < r1; ++i) D(i, i) = 1;
        OMatrix e0 = mul(mul(G, D), inverse_q(G));
        if (!is_local(e0)) return std::nullopt;
        return e0;
    }

    bool split_by_idempotent(const Lattice& C, const OMatrix& B, const EndAlgebra& E) {
        auto eb = find_idempotent(E);
        if (!eb) return false;
        std::vector<Residue> c = E.coords(*eb);
        const int r1 = rank_k(*eb);
        for (int N = cfg.precision; N <= cfg.precision_max; N *= 2) {
            int K = std::min(N, max_zpk_precision());
            Zpk R(K);
            std::vector<ZMatrix> bz = E.space.basis_zpk(R);
            ZMatrix e(C.rank, C.rank);
            for (int k = 0; k < E.dim(); ++k) {
                if (!c[k]) continue;
                for (std::size_t i = 0; i < e.a.size(); ++i) e.a[i] = R.add(e.a[i], R.mul(c[k], bz[k].a[i]));
            }
            for (int it = 0; it < 8; ++it) {
                ZMatrix e2 = R.mul(e, e), e3 = R.mul(e2, e);
                for (std::size_t i = 0; i < e.a.size(); ++i)
                    e.a[i] = R.sub(R.mul(3, e2.a[i]), R.mul(2, e3.a[i]));
            }
            // Coarse truncations give generators of small height; the first that certifies wins.
            for (int k = 1;; k = std::min(2 * k, K)) {
                Zpk Rk(k);
                ZMatrix ek = e;
                for (auto& x : ek.a) x %= Rk.modulus();
                if (auto e0 = rational_idempotent(C, Rk, ek, r1)) {
                    OMatrix B1 = span_basis_local(*e0);
                    OMatrix B2 = span_basis_local(sub(identity_q(C.rank), *e0));
                    if (B1.cols == r1 && is_unit_matrix(hstack(B1, B2))) {
                        B1 = reduced_saturated_basis(B1);
                        B2 = reduced_saturated_basis(B2);
                        Lattice S1 = sublattice(C, B1), S2 = sublattice(C, B2);
                        run(S1, mul(B, B1));
                        run(S2, mul(B, B2));
                        return true;
                    }
                }
                if (k == K) break;
            }
            if (K == max_zpk_precision()) break;
        }
        throw SplitFailed("split_lattice: idempotent lifts did not certify", cfg.precision_max);
    }

    void run(const Lattice& C, const OMatrix& B) {
        if (C.rank == 0) return;
        if (is_projective(C)) {
            LatticeCover cov = lattice_cover(C);
            Lattice A = regular(1);
            for (int i = 0; i < cov.g; ++i) emit(A, mul(B, columns(cov.P, 4 * i, 4)));
            return;
        }
        ModK Ck = tensor_k(C);
        if (rank_k(mul_k(Ck.actX, Ck.actY)) > 0) {
            Peel pl;
            if (peel_summand(regular(1), C, rng, 4 * cfg.iso_samples, pl)) {
                emit(regular(1), mul(B, pl.s));
                pl.rest.name = C.name;
                run(pl.rest, mul(B, pl.rest_embedding));
                return;
            }
            throw SplitFailed("split_lattice: projective summand could not be split off", 0);
        }
        Decomposition dec = decompose(Ck);
        for (std::size_t h = 0; h < hints.size(); ++h) {
            const Lattice& S = hints[h];
            if (S.rank == 0 || S.rank >= C.rank || !contains(dec, hint_dec[h])) continue;
            Peel pl;
            if (peel_summand(S, C, rng, cfg.iso_samples, pl)) {
                emit(S, mul(B, pl.s));
                run(pl.rest, mul(B, pl.rest_embedding));
                return;
            }
        }
        EndAlgebra E = end_algebra(C);
        if (local_test(E).local) {
            emit(C, B);
            return;
        }
        if (!split_by_idempotent(C, B, E))
            throw SplitFailed("split_lattice: End is not local but no idempotent was found", cfg.precision);
    }
};

}  // namespace

SplitCertificate split_lattice(const Lattice& L, std::mt19937_64& rng, const ArsConfig& cfg,
                               const std::vector<Lattice>& hints) {
    Splitter sp{L, rng, cfg, hints, {}, {}};
    for (const auto& h : hints) sp.hint_dec.push_back(decompose(tensor_k(h)));
    sp.run(L, identity_q(L.rank));
    OMatrix W(L.rank, 0);
    for (const auto& e : sp.cert.embeddings) W = hstack(W, e.mat);
    sp.cert.witness = W;
    if (sp.cert.summands.size() == 1 && L.rank > 0) sp.cert.summands[0].name = L.name;
    if (!is_unit_matrix(W)) throw SplitFailed("split_lattice: assembled witness is not a unit", cfg.precision);
    return sp.cert;
}

// ------------------------------------------------------------ isomorphism

IsoResult iso_test(const Lattice& L1, const Lattice& L2, std::mt19937_64& rng, const ArsConfig& cfg,
                   bool l1_indecomposable) {
    IsoResult res;
    if (L1.rank != L2.rank) {
        res.reason = "rank";
        return res;
    }
    if (L1.rank == 0) {
        res.iso = true;
        return res;
    }
    ModK a = tensor_k(L1), b = tensor_k(L2);
    auto ranks = [](const ModK& m) {
        return std::vector<int>{rank_k(m.actX), rank_k(m.actY), rank_k(add_k(m.actX, m.actY)),
                                rank_k(mul_k(m.actX, m.actY))};
    };
    if (ranks(a) != ranks(b)) {
        res.reason = "reduced ranks";
        return res;
    }
    if (decompose(a) != decompose(b)) {
        res.reason = "reduced decomposition";
        return res;
    }
    HomSpace H(L1, L2);
    if (H.dim() == 0) {
        res.reason = "no homomorphisms";
        return res;
    }
    std::vector<KMatrix> hk = H.basis_k();
    for (int it = 0; it < cfg.iso_samples; ++it) {
        std::vector<Residue> c(hk.size());
        KMatrix m(L2.rank, L1.rank);
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] = random_residue(rng);
            if (c[i]) m = add_k(m, scale_k(hk[i], c[i]));
        }
        if (rank_k(m) < L1.rank) continue;
        OMatrix w = H.element(to_mpz(c));
        if (!is_unit_matrix(w)) continue;
        res.iso = true;
        res.witness = std::move(w);
        return res;
    }
    if (!l1_indecomposable && static_cast<unsigned>(L1.rank) >= prime())
        throw Inconclusive("iso_test: no isomorphism found in " + std::to_string(cfg.iso_samples) +
                           " samples and p is below the lattice rank");
    res.reason = "no invertible homomorphism in " + std::to_string(cfg.iso_samples) + " samples";
    return res;
}

}  // namespace kronord
