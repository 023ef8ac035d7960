#pragma once

// Explicit O-bases of Heller lattices inside free A-modules and the kernels of their
// projective covers, for checking tau Z_n = Z_{n-1} by base change.

#include "kronord/heller.hpp"
#include "support.hpp"

namespace fixtures {

using namespace kronord;
using test::Term;
using V = std::vector<Term>;
inline Term te(mpq_class c, int g) { return {c, test::E, g}; }
inline Term tx(mpq_class c, int g) { return {c, test::X, g}; }
inline Term ty(mpq_class c, int g) { return {c, test::Y, g}; }
inline Term txy(mpq_class c, int g) { return {c, test::XY, g}; }
inline mpq_class ep() { return epsilon_pow(1); }

// A-linear map A^k -> A^g sending generator i to images[i].
inline OMatrix cover_map(int g, const std::vector<V>& images) {
    Lattice R = regular(g);
    OMatrix Vm = test::vectors(g, images);
    OMatrix XY = mul(R.actX, R.actY);
    OMatrix P(4 * g, 4 * static_cast<int>(images.size()));
    for (int i = 0; i < static_cast<int>(images.size()); ++i) {
        OMatrix v = columns(Vm, i, 1);
        OMatrix cols[4] = {v, mul(R.actX, v), mul(R.actY, v), mul(XY, v)};
        for (int m = 0; m < 4; ++m)
            for (int r = 0; r < 4 * g; ++r) P(r, 4 * i + m) = cols[m](r, 0);
    }
    return P;
}

// Z_n, n >= 0.
inline std::vector<V> basis_pos(int n) {
    mpq_class e = ep();
    if (n == 0) return {{te(e, 1)}, {tx(1, 1)}, {ty(1, 1)}, {txy(1, 1)}};
    std::vector<V> b;
    for (int k = 1; k < n; ++k) {
        b.push_back({te(e, k)});
        b.push_back({tx(e, k)});
        b.push_back({ty(1, k), tx(-1, k + 1)});
        b.push_back({txy(1, k)});
    }
    b.push_back({te(e, n)});
    b.push_back({tx(e, n)});
    b.push_back({ty(e, n)});
    b.push_back({txy(1, n)});
    return b;
}

// Z_n, n < 0, first basis; the vectors Ye_k - Xe_{k-1} optionally scaled by eps.
inline std::vector<V> basis_neg1(int n, bool mid_eps = false, bool last_eps = false) {
    mpq_class e = ep();
    int m = -n;
    std::vector<V> b{{te(e, 1)}, {tx(e, 1)}, {ty(1, 1)}, {txy(1, 1)}};
    for (int k = 2; k <= m; ++k) {
        mpq_class c = mid_eps ? e : mpq_class(1);
        b.push_back({te(e, k)});
        b.push_back({tx(e, k)});
        b.push_back({ty(c, k), tx(-c, k - 1)});
        b.push_back({txy(1, k)});
    }
    b.push_back({te(e, m + 1)});
    b.push_back({tx(1, m + 1)});
    { mpq_class c = last_eps ? e : mpq_class(1); b.push_back({ty(c, m + 1), tx(-c, m)}); }
    b.push_back({txy(1, m + 1)});
    return b;
}

// Z_n, n < 0, second basis.
inline std::vector<V> basis_neg2(int n) {
    mpq_class e = ep();
    int m = -n;
    std::vector<V> b;
    for (int k = 1; k <= m; ++k) {
        b.push_back({te(e, k)});
        b.push_back({tx(1, k), ty(-1, k + 1)});
        b.push_back(k == 1 ? V{ty(1, 1)} : V{ty(e, k)});
        b.push_back({txy(1, k)});
    }
    b.push_back({te(e, m + 1)});
    b.push_back({tx(1, m + 1)});
    b.push_back({ty(e, m + 1)});
    b.push_back({txy(1, m + 1)});
    return b;
}

struct TauFixture {
    int n;
    int g_src;                 // generators of A^g containing Z_n
    std::vector<V> cover;      // images of the cover generators in A^g_src
    std::vector<V> kernel;     // basis of tau Z_n in A^{cover.size()}
    OMatrix P;                 // base change of tau Z_n
    int g_dst;
    std::vector<V> target;     // basis of Z_{n-1} in A^g_dst
    std::vector<V> source;     // basis of Z_n in A^g_src
};

inline OMatrix diag_q(const std::vector<int>& d) {
    OMatrix M(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) M(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return M;
}

// Fixture for tau Z_n; P is the diagonal sign change onto the basis of Z_{n-1}.
inline TauFixture fixture(int n) {
    mpq_class e = ep();
    TauFixture f;
    f.n = n;
    if (n == 1) {
        f.g_src = 1;
        f.source = basis_pos(1);
        f.cover = {{te(e, 1)}, {txy(1, 1)}};
        f.kernel = {{txy(-1, 1), te(e, 2)}, {tx(1, 2)}, {ty(1, 2)}, {txy(1, 2)}};
        f.P = identity_q(4);
        f.g_dst = 1;
        f.target = basis_pos(0);
    } else if (n > 1) {
        f.g_src = n;
        f.source = basis_pos(n);
        for (int i = 1; i <= 2 * n - 1; ++i) {
            if (i == 2 * n - 1) f.cover.push_back({te(-e, n)});
            else if (i % 2 == 1) f.cover.push_back({te(e, (i + 1) / 2)});
            else { int k = (i + 2) / 2; f.cover.push_back({ty(1, k - 1), tx(-1, k)}); }
        }
        for (int k = 1; k <= n - 2; ++k) {
            f.kernel.push_back({ty(1, 2 * k - 1), tx(-1, 2 * k + 1), te(-e, 2 * k)});
            f.kernel.push_back({txy(1, 2 * k - 1), tx(-e, 2 * k)});
            f.kernel.push_back({tx(-1, 2 * k + 2), ty(-1, 2 * k)});
            f.kernel.push_back({txy(-1, 2 * k)});
        }
        f.kernel.push_back({ty(1, 2 * n - 3), tx(1, 2 * n - 1), te(-e, 2 * n - 2)});
        f.kernel.push_back({txy(1, 2 * n - 3), tx(-e, 2 * n - 2)});
        f.kernel.push_back({txy(1, 2 * n - 1), ty(-e, 2 * n - 2)});
        f.kernel.push_back({txy(-1, 2 * n - 2)});
        std::vector<int> d;
        for (int j = 1; j <= n - 1; ++j)
            for (int r = 0; r < 4; ++r) d.push_back(j % 2 ? -1 : 1);
        f.P = diag_q(d);
        f.g_dst = n - 1;
        f.target = basis_pos(n - 1);
    } else if (n == 0) {
        f.g_src = 1;
        f.source = basis_pos(0);
        f.cover = {{te(e, 1)}, {tx(1, 1)}, {ty(1, 1)}};
        f.kernel = {{ty(-1, 1), te(e, 3)}, {txy(-1, 1), tx(e, 3)}, {ty(1, 3)}, {txy(1, 3)},
                    {tx(-1, 1), te(e, 2)}, {tx(1, 2)}, {ty(1, 2), tx(-1, 3)}, {txy(1, 2)}};
        f.P = identity_q(8);
        f.g_dst = 2;
        f.target = basis_neg1(-1);
    } else if (n == -1) {
        f.g_src = 2;
        f.source = basis_neg2(-1);
        f.cover = {{te(e, 1)}, {ty(1, 1)}, {te(e, 2)}, {tx(1, 2)}, {ty(1, 2), tx(-1, 1)}};
        f.kernel = {{te(e, 2), ty(-1, 1)}, {tx(1, 2), ty(1, 5)}, {ty(1, 2)}, {txy(1, 2)},
                    {ty(1, 3), tx(-1, 1), te(-e, 5)}, {ty(-1, 4), tx(1, 5)}, {txy(1, 1), ty(e, 5)}, {txy(1, 5)},
                    {tx(1, 3), te(-e, 4)}, {tx(1, 4)}, {txy(1, 3), ty(-e, 4)}, {txy(1, 4)}};
        f.P = diag_q({1, 1, 1, 1, 1, -1, -1, -1, 1, -1, 1, -1});
        f.g_dst = 3;
        f.target = basis_neg2(-2);
    } else {
        int m = -n;
        f.g_src = m + 1;
        f.source = basis_neg2(n);
        for (int i = 1; i <= 2 * m + 3; ++i) {
            if (i == 2 * m + 2) f.cover.push_back({tx(1, m + 1)});
            else if (i == 2 * m + 3) f.cover.push_back({ty(1, m + 1), tx(-1, m)});
            else if (i % 2 == 1) f.cover.push_back({te(e, (i + 1) / 2)});
            else if (i == 2) f.cover.push_back({ty(1, 1)});
            else { int k = i / 2; f.cover.push_back({ty(1, k), tx(-1, k - 1)}); }
        }
        // The block k = m - 1 pairs with the last generator.
        f.kernel = {{ty(1, 1), te(-e, 2)}, {ty(1, 4), tx(1, 2)}, {ty(1, 2)}, {txy(1, 2)}};
        for (int k = 1; k <= m - 1; ++k) {
            int second = k == m - 1 ? 2 * m + 3 : 2 * k + 4;
            f.kernel.push_back({ty(1, 2 * k + 1), tx(-1, 2 * k - 1), te(-e, 2 * k + 2)});
            f.kernel.push_back({ty(1, second), tx(1, 2 * k + 2)});
            f.kernel.push_back({txy(1, 2 * k - 1), ty(e, 2 * k + 2)});
            f.kernel.push_back({txy(1, 2 * k + 2)});
        }
        f.kernel.push_back({ty(1, 2 * m + 1), tx(-1, 2 * m - 1), te(-e, 2 * m + 3)});
        f.kernel.push_back({ty(-1, 2 * m + 2), tx(1, 2 * m + 3)});
        f.kernel.push_back({txy(1, 2 * m - 1), ty(e, 2 * m + 3)});
        f.kernel.push_back({txy(1, 2 * m + 3)});
        f.kernel.push_back({tx(1, 2 * m + 1), te(-e, 2 * m + 2)});
        f.kernel.push_back({tx(1, 2 * m + 2)});
        f.kernel.push_back({txy(1, 2 * m + 1), ty(-e, 2 * m + 2)});
        f.kernel.push_back({txy(1, 2 * m + 2)});
        std::vector<int> d;
        for (int j = 0; j <= m; ++j) {
            int s = j % 2 ? -1 : 1;
            for (int a : {-1, 1, 1, 1}) d.push_back(s * a);
        }
        int sn = m % 2 ? -1 : 1;
        for (int a : {-1, 1, -1, 1}) d.push_back(sn * a);
        f.P = diag_q(d);
        f.g_dst = m + 2;
        f.target = basis_neg2(n - 1);
    }
    return f;
}

}  // namespace fixtures
