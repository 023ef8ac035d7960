#include "kronord/modk.hpp"

#include <algorithm>
#include <sstream>

namespace kronord {

bool ModK::valid() const {
    if (actX.rows != dim || actX.cols != dim || actY.rows != dim || actY.cols != dim) return false;
    return is_zero_k(mul_k(actX, actX)) && is_zero_k(mul_k(actY, actY)) &&
           mul_k(actX, actY) == mul_k(actY, actX);
}

SummandLabel label_proj() { return {Kind::Proj, 0, 0}; }
SummandLabel label_h(int m) { return {Kind::H, m, 0}; }
SummandLabel label_v(int n) { return {Kind::V, n, 0}; }
SummandLabel label_b(Residue lambda, int n) { return {Kind::B, n, lambda}; }
SummandLabel label_binf(int n) { return {Kind::Binf, n, 0}; }

int label_dim(const SummandLabel& s) {
    switch (s.kind) {
        case Kind::Proj: return 4;
        case Kind::H: return 2 * s.n + 1;
        case Kind::V: return 2 * s.n + 1;
        case Kind::B:
        case Kind::Binf: return 2 * s.n;
    }
    return 0;
}

bool label_valid(const SummandLabel& s) {
    switch (s.kind) {
        case Kind::Proj: return s.n == 0;
        case Kind::H: return s.n >= 0;
        case Kind::V: return s.n >= 1;
        case Kind::B: return s.n >= 1 && s.lambda < prime();
        case Kind::Binf: return s.n >= 1;
    }
    return false;
}

std::string label_to_string(const SummandLabel& s) {
    switch (s.kind) {
        case Kind::Proj: return "P";
        case Kind::H: return "H:" + std::to_string(s.n);
        case Kind::V: return "V:" + std::to_string(s.n);
        case Kind::B: return "B:" + std::to_string(s.lambda) + ":" + std::to_string(s.n);
        case Kind::Binf: return "Binf:" + std::to_string(s.n);
    }
    return "?";
}

SummandLabel parse_label(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    auto num = [&](const std::string& s) -> long long {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &pos);
        } catch (const std::exception&) {
            throw Error("bad label '" + text + "'");
        }
        if (pos != s.size()) throw Error("bad label '" + text + "'");
        return v;
    };
    SummandLabel l;
    if (parts.size() == 1 && parts[0] == "P") {
        l = label_proj();
    } else if (parts.size() == 2 && parts[0] == "H") {
        l = label_h(static_cast<int>(num(parts[1])));
    } else if (parts.size() == 2 && parts[0] == "V") {
        l = label_v(static_cast<int>(num(parts[1])));
    } else if (parts.size() == 2 && parts[0] == "Binf") {
        l = label_binf(static_cast<int>(num(parts[1])));
    } else if (parts.size() == 3 && parts[0] == "B") {
        l = label_b(fp_from_int(num(parts[1])), static_cast<int>(num(parts[2])));
    } else {
        throw Error("bad label '" + text + "' (expected P | H:m | V:n | B:l:n | Binf:n)");
    }
    if (!label_valid(l)) throw Error("label parameters out of range: '" + text + "'");
    return l;
}

int decomposition_dim(const Decomposition& d) {
    int s = 0;
    for (const auto& [l, k] : d) s += k * label_dim(l);
    return s;
}

std::string decomposition_to_string(const Decomposition& d) {
    std::string out = "{";
    bool first = true;
    for (const auto& [l, k] : d) {
        if (!first) out += ", ";
        first = false;
        out += label_to_string(l);
        if (k != 1) out += " x" + std::to_string(k);
    }
    return out + "}";
}

Decomposition merge(const Decomposition& a, const Decomposition& b) {
    Decomposition r = a;
    for (const auto& [l, k] : b) r[l] += k;
    return r;
}

ModK string_module(const SummandLabel& s) {
    if (!label_valid(s)) throw Error("string_module: invalid label");
    const int d = label_dim(s);
    ModK M{d, KMatrix(d, d), KMatrix(d, d)};
    auto setX = [&](int from, int to, Residue v) { M.actX(to, from) = v; };
    auto setY = [&](int from, int to, Residue v) { M.actY(to, from) = v; };
    const int n = s.n;
    switch (s.kind) {
        case Kind::Proj:
            setX(0, 1, 1);
            setX(2, 3, 1);
            setY(0, 2, 1);
            setY(1, 3, 1);
            break;
        case Kind::H:
            // u_1..u_m then v_0..v_m
            for (int i = 1; i <= n; ++i) {
                setX(i - 1, n + (i - 1), 1);
                setY(i - 1, n + i, 1);
            }
            break;
        case Kind::V:
            // u_1..u_{n+1} then v_1..v_n
            for (int i = 1; i <= n + 1; ++i) {
                if (i <= n) setX(i - 1, n + i, 1);
                if (i >= 2) setY(i - 1, n + i - 1, 1);
            }
            break;
        case Kind::B:
            // u_1..u_n then v_1..v_n
            for (int i = 1; i <= n; ++i) {
                setX(i - 1, n + i - 1, 1);
                if (s.lambda) setY(i - 1, n + i - 1, s.lambda);
                if (i >= 2) setY(i - 1, n + i - 2, 1);
            }
            break;
        case Kind::Binf:
            for (int i = 1; i <= n; ++i) {
                if (i >= 2) setX(i - 1, n + i - 2, 1);
                setY(i - 1, n + i - 1, 1);
            }
            break;
    }
    return M;
}

ModK direct_sum(const ModK& a, const ModK& b) {
    ModK M{a.dim + b.dim, KMatrix(a.dim + b.dim, a.dim + b.dim), KMatrix(a.dim + b.dim, a.dim + b.dim)};
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) {
            M.actX(i, j) = a.actX(i, j);
            M.actY(i, j) = a.actY(i, j);
        }
    for (int i = 0; i < b.dim; ++i)
        for (int j = 0; j < b.dim; ++j) {
            M.actX(a.dim + i, a.dim + j) = b.actX(i, j);
            M.actY(a.dim + i, a.dim + j) = b.actY(i, j);
        }
    return M;
}

ModK conjugate(const ModK& M, const KMatrix& g) {
    KMatrix gi = inverse_k(g);
    return {M.dim, mul_k(mul_k(g, M.actX), gi), mul_k(mul_k(g, M.actY), gi)};
}

std::vector<int> top_indices(const ModK& M) {
    KEchelon E(M.dim);
    for (const KMatrix* A : {&M.actX, &M.actY})
        for (int j = 0; j < M.dim; ++j) {
            std::vector<Residue> v(M.dim);
            for (int i = 0; i < M.dim; ++i) v[i] = (*A)(i, j);
            E.insert(std::move(v));
        }
    std::vector<int> idx;
    for (int j = 0; j < M.dim; ++j) {
        std::vector<Residue> e(M.dim, 0);
        e[j] = 1;
        if (E.insert(std::move(e))) idx.push_back(j);
    }
    return idx;
}

int top_dim(const ModK& M) {
    return M.dim - rank_k(hstack_k(M.actX, M.actY));
}

CoverK projective_cover_k(const ModK& M) {
    std::vector<int> top = top_indices(M);
    CoverK c;
    c.g = static_cast<int>(top.size());
    c.cover = KMatrix(M.dim, 4 * c.g);
    KMatrix XY = mul_k(M.actX, M.actY);
    for (int k = 0; k < c.g; ++k) {
        int j = top[k];
        for (int i = 0; i < M.dim; ++i) {
            c.cover(i, 4 * k) = i == j ? 1 : 0;
            c.cover(i, 4 * k + 1) = M.actX(i, j);
            c.cover(i, 4 * k + 2) = M.actY(i, j);
            c.cover(i, 4 * k + 3) = XY(i, j);
        }
    }
    return c;
}

// ------------------------------------------------------------ decomposition

namespace {

using Poly = std::vector<Residue>;  // coefficients, low degree first

void trim(Poly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

int deg(const Poly& f) { return static_cast<int>(f.size()) - 1; }

// f := f - c * x^s * g
void sub_shifted(Poly& f, const Poly& g, Residue c, int s) {
    if (static_cast<int>(f.size()) < static_cast<int>(g.size()) + s) f.resize(g.size() + s, 0);
    for (std::size_t i = 0; i < g.size(); ++i) f[i + s] = fp_sub(f[i + s], fp_mul(c, g[i]));
    trim(f);
}

// Quotient and remainder of f by g (g nonzero).
std::pair<Poly, Poly> divmod(Poly f, const Poly& g) {
    Poly q;
    Residue lc = fp_inv(g.back());
    while (!f.empty() && deg(f) >= deg(g)) {
        int s = deg(f) - deg(g);
        Residue c = fp_mul(f.back(), lc);
        if (static_cast<int>(q.size()) <= s) q.resize(s + 1, 0);
        q[s] = c;
        sub_shifted(f, g, c, s);
    }
    trim(q);
    return {q, f};
}

Poly mul_poly(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = fp_add(r[i + j], fp_mul(a[i], b[j]));
    trim(r);
    return r;
}

// Product of the invariant factors of a polynomial matrix (made monic).
Poly invariant_product(std::vector<std::vector<Poly>> A) {
    const int m = static_cast<int>(A.size());
    const int n = m ? static_cast<int>(A[0].size()) : 0;
    Poly prod{1};
    int s = 0;
    while (s < m && s < n) {
        int bi = -1, bj = -1, bd = 1 << 30;
        for (int i = s; i < m; ++i)
            for (int j = s; j < n; ++j)
                if (!A[i][j].empty() && deg(A[i][j]) < bd) {
                    bd = deg(A[i][j]);
                    bi = i;
                    bj = j;
                }
        if (bi < 0) break;
        std::swap(A[s], A[bi]);
        for (int i = 0; i < m; ++i) std::swap(A[i][s], A[i][bj]);
        bool clean = true;
        for (int i = s + 1; i < m; ++i) {
            if (A[i][s].empty()) continue;
            auto [q, r] = divmod(A[i][s], A[s][s]);
            for (int j = s; j < n; ++j) {
                Poly t = mul_poly(q, A[s][j]);
                for (std::size_t k = 0; k < t.size(); ++k) {
                    if (A[i][j].size() <= k) A[i][j].resize(k + 1, 0);
                    A[i][j][k] = fp_sub(A[i][j][k], t[k]);
                }
                trim(A[i][j]);
            }
            if (!A[i][s].empty()) clean = false;
        }
        for (int j = s + 1; j < n; ++j) {
            if (A[s][j].empty()) continue;
            auto [q, r] = divmod(A[s][j], A[s][s]);
            for (int i = s; i < m; ++i) {
                Poly t = mul_poly(q, A[i][s]);
                for (std::size_t k = 0; k < t.size(); ++k) {
                    if (A[i][j].size() <= k) A[i][j].resize(k + 1, 0);
                    A[i][j][k] = fp_sub(A[i][j][k], t[k]);
                }
                trim(A[i][j]);
            }
            if (!A[s][j].empty()) clean = false;
        }
        if (!clean) continue;
        prod = mul_poly(prod, A[s][s]);
        ++s;
    }
    Residue lc = fp_inv(prod.back());
    for (auto& c : prod) c = fp_mul(c, lc);
    return prod;
}

std::string poly_to_string(const Poly& f) {
    std::string out;
    for (int i = deg(f); i >= 0; --i) {
        if (f[i] == 0) continue;
        if (!out.empty()) out += " + ";
        if (f[i] != 1 || i == 0) out += std::to_string(f[i]);
        if (i >= 1) out += "t";
        if (i >= 2) out += "^" + std::to_string(i);
    }
    return out;
}

// Kernel dimension of the degree-k polynomial-solution system of sP + tQ.
int poly_kernel_dim(const KMatrix& P, const KMatrix& Q, int k) {
    const int w = P.rows, t = P.cols;
    KMatrix S((k + 2) * w, (k + 1) * t);
    for (int i = 0; i <= k; ++i)
        for (int r = 0; r < w; ++r)
            for (int c = 0; c < t; ++c) {
                S(i * w + r, i * t + c) = P(r, c);
                S((i + 1) * w + r, i * t + c) = Q(r, c);
            }
    return (k + 1) * t - rank_k(S);
}

// Counts of minimal indices of the pencil sP + tQ (column side).
std::vector<int> minimal_indices(const KMatrix& P, const KMatrix& Q) {
    const int t = P.cols;
    std::vector<int> N(t + 2, 0);
    for (int k = 0; k <= t; ++k) N[k] = poly_kernel_dim(P, Q, k);
    std::vector<int> c(t + 1, 0);
    for (int e = 0; e <= t; ++e) {
        int a = N[e];
        int b = e >= 1 ? N[e - 1] : 0;
        int d = e >= 2 ? N[e - 2] : 0;
        c[e] = a - 2 * b + d;
    }
    return c;
}

// Kernel dimension of the j x j block Toeplitz matrix with A on the diagonal, B below it.
int toeplitz_kernel_dim(const KMatrix& A, const KMatrix& B, int j) {
    const int w = A.rows, t = A.cols;
    KMatrix T(j * w, j * t);
    for (int b = 0; b < j; ++b)
        for (int r = 0; r < w; ++r)
            for (int c = 0; c < t; ++c) {
                T(b * w + r, b * t + c) = A(r, c);
                if (b + 1 < j) T((b + 1) * w + r, b * t + c) = B(r, c);
            }
    return j * t - rank_k(T);
}

// Jordan block sizes at the eigenvalue where A degenerates; returns map size -> count.
std::map<int, int> jordan_sizes(const KMatrix& A, const KMatrix& B, int lblocks, int bound) {
    std::vector<int> k(1, 0);
    for (int j = 1; j <= bound + 1; ++j) {
        k.push_back(toeplitz_kernel_dim(A, B, j) - j * lblocks);
        if (k[j] == k[j - 1]) break;
    }
    std::map<int, int> out;
    const int J = static_cast<int>(k.size()) - 1;
    for (int j = 1; j <= J; ++j) {
        int ge = k[j] - k[j - 1];
        int ge_next = j + 1 <= J ? k[j + 1] - k[j] : 0;
        if (ge - ge_next > 0) out[j] = ge - ge_next;
    }
    return out;
}

// Splits off the free part; returns its multiplicity and the complement.
int split_free(const ModK& M, ModK& rest) {
    KMatrix XY = mul_k(M.actX, M.actY);
    std::vector<int> piv = pivot_columns_k(XY);
    const int s = static_cast<int>(piv.size());
    if (s == 0) {
        rest = M;
        return 0;
    }
    KMatrix S = columns_k(XY, piv);
    auto thetaT = solve_k(transpose_k(S), identity_k(s));
    if (!thetaT) throw Error("decompose: socle functionals not found");
    KMatrix Th = transpose_k(*thetaT);
    KMatrix cons = vstack_k(vstack_k(Th, mul_k(Th, M.actX)), vstack_k(mul_k(Th, M.actY), mul_k(Th, XY)));
    KMatrix C = kernel_k(cons);
    if (C.cols != M.dim - 4 * s) throw Error("decompose: free complement has wrong dimension");
    rest.dim = C.cols;
    if (C.cols == 0) {
        rest.actX = KMatrix(0, 0);
        rest.actY = KMatrix(0, 0);
        return s;
    }
    auto x = solve_k(C, mul_k(M.actX, C));
    auto y = solve_k(C, mul_k(M.actY, C));
    if (!x || !y) throw Error("decompose: complement is not A-stable");
    rest.actX = *x;
    rest.actY = *y;
    return s;
}

}  // namespace

Decomposition decompose(const ModK& M) {
    if (!M.valid()) throw Error("decompose: actions violate the module relations");
    Decomposition out;
    ModK C;
    int free = split_free(M, C);
    if (free) out[label_proj()] = free;
    if (C.dim == 0) return out;

    // Pencil top -> radical.
    KMatrix rad = hstack_k(C.actX, C.actY);
    std::vector<int> wcols = pivot_columns_k(rad);
    KMatrix Wb = columns_k(rad, wcols);
    std::vector<int> top = top_indices(C);
    const int t = static_cast<int>(top.size());
    const int w = Wb.cols;
    KMatrix Xh(w, t), Yh(w, t);
    {
        KMatrix xt = columns_k(C.actX, top), yt = columns_k(C.actY, top);
        auto xs = solve_k(Wb, xt);
        auto ys = solve_k(Wb, yt);
        if (!xs || !ys) throw Error("decompose: radical coordinates failed");
        Xh = *xs;
        Yh = *ys;
    }

    std::vector<int> col = minimal_indices(Xh, Yh);
    std::vector<int> row = minimal_indices(transpose_k(Xh), transpose_k(Yh));
    int lblocks = 0, used_t = 0, used_w = 0;
    for (int e = 0; e < static_cast<int>(col.size()); ++e) {
        if (col[e] <= 0) continue;
        lblocks += col[e];
        used_t += col[e] * (e + 1);
        used_w += col[e] * e;
        if (e == 0) out[label_h(0)] += col[e];
        else out[label_v(e)] += col[e];
    }
    for (int e = 0; e < static_cast<int>(row.size()); ++e) {
        if (row[e] <= 0) continue;
        used_t += row[e] * e;
        used_w += row[e] * (e + 1);
        // A lone socle vector outside the radical cannot occur since W is the radical.
        if (e == 0) throw Error("decompose: unexpected zero row index");
        out[label_h(e)] += row[e];
    }
    const int reg = t - used_t;
    if (reg != w - used_w || reg < 0) throw Error("decompose: inconsistent pencil bookkeeping");
    int found = 0;
    for (Residue lam = 0; lam < prime() && found < reg; ++lam) {
        KMatrix A = sub_k(Yh, scale_k(Xh, lam));
        for (const auto& [size, cnt] : jordan_sizes(A, Xh, lblocks, reg)) {
            out[label_b(lam, size)] += cnt;
            found += size * cnt;
        }
    }
    if (found < reg)
        for (const auto& [size, cnt] : jordan_sizes(Xh, Yh, lblocks, reg)) {
            out[label_binf(size)] += cnt;
            found += size * cnt;
        }
    if (found != reg) {
        // Identify the offending factor: the finite spectrum is carried by Y - tX.
        std::vector<std::vector<Poly>> P(w, std::vector<Poly>(t));
        for (int i = 0; i < w; ++i)
            for (int j = 0; j < t; ++j) {
                Poly f{Yh(i, j), fp_neg(Xh(i, j))};
                trim(f);
                P[i][j] = f;
            }
        Poly f = invariant_product(P);
        for (Residue lam = 0; lam < prime(); ++lam) {
            Poly lin{fp_neg(lam), 1};
            for (;;) {
                auto [q, r] = divmod(f, lin);
                if (!r.empty()) break;
                f = q;
            }
        }
        throw IrreducibleOverPrimeField("regular part has factor of degree > 1 over F_" +
                                        std::to_string(prime()) + ": " + poly_to_string(f));
    }
    return out;
}

bool mods_isomorphic(const ModK& M, const ModK& N) {
    if (M.dim != N.dim) return false;
    return decompose(M) == decompose(N);
}

}  // namespace kronord
