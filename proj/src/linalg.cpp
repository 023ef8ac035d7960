#include "kronord/linalg.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace kronord {

// ---------------------------------------------------------------- Q helpers

QMatrix identity_q(int n) {
    QMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1;
    return I;
}

QMatrix mul(const QMatrix& A, const QMatrix& B) {
    if (A.cols != B.rows) throw Error("mul: shape mismatch");
    QMatrix C(A.rows, B.cols);
    mpq_class t;
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const mpq_class& a = A(i, k);
            if (sgn(a) == 0) continue;
            for (int j = 0; j < B.cols; ++j) {
                const mpq_class& b = B(k, j);
                if (sgn(b) == 0) continue;
                mpq_mul(t.get_mpq_t(), a.get_mpq_t(), b.get_mpq_t());
                C(i, j) += t;
            }
        }
    return C;
}

QMatrix add(const QMatrix& A, const QMatrix& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw Error("add: shape mismatch");
    QMatrix C = A;
    for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
    return C;
}

QMatrix sub(const QMatrix& A, const QMatrix& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw Error("sub: shape mismatch");
    QMatrix C = A;
    for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] -= B.a[i];
    return C;
}

QMatrix scale(const QMatrix& A, const mpq_class& s) {
    QMatrix C = A;
    for (auto& x : C.a) x *= s;
    return C;
}

QMatrix transpose(const QMatrix& A) {
    QMatrix T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

QMatrix hstack(const QMatrix& A, const QMatrix& B) {
    if (A.rows != B.rows && A.cols != 0 && B.cols != 0) throw Error("hstack: row mismatch");
    int r = A.cols == 0 ? B.rows : A.rows;
    QMatrix C(r, A.cols + B.cols);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < A.cols; ++j) C(i, j) = A(i, j);
        for (int j = 0; j < B.cols; ++j) C(i, A.cols + j) = B(i, j);
    }
    return C;
}

QMatrix vstack(const QMatrix& A, const QMatrix& B) {
    if (A.cols != B.cols && A.rows != 0 && B.rows != 0) throw Error("vstack: column mismatch");
    int c = A.rows == 0 ? B.cols : A.cols;
    QMatrix C(A.rows + B.rows, c);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < c; ++j) C(i, j) = A(i, j);
    for (int i = 0; i < B.rows; ++i)
        for (int j = 0; j < c; ++j) C(A.rows + i, j) = B(i, j);
    return C;
}

QMatrix block_diag(const QMatrix& A, const QMatrix& B) {
    QMatrix C(A.rows + B.rows, A.cols + B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) C(i, j) = A(i, j);
    for (int i = 0; i < B.rows; ++i)
        for (int j = 0; j < B.cols; ++j) C(A.rows + i, A.cols + j) = B(i, j);
    return C;
}

QMatrix columns(const QMatrix& A, int first, int count) {
    QMatrix C(A.rows, count);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < count; ++j) C(i, j) = A(i, first + j);
    return C;
}

QMatrix rows_of(const QMatrix& A, int first, int count) {
    QMatrix C(count, A.cols);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < A.cols; ++j) C(i, j) = A(first + i, j);
    return C;
}

bool is_zero(const QMatrix& A) {
    return std::all_of(A.a.begin(), A.a.end(), [](const mpq_class& x) { return sgn(x) == 0; });
}

bool is_local(const QMatrix& A) {
    return std::all_of(A.a.begin(), A.a.end(), [](const mpq_class& x) { return is_local(x); });
}

int min_valuation(const QMatrix& A) {
    int v = kInfValuation;
    for (const auto& x : A.a) v = std::min(v, valuation(x));
    return v;
}

// ------------------------------------------------------- sparse elimination

namespace {

struct SparseRow {
    std::vector<int> idx;
    std::vector<mpq_class> val;
};

// Incremental row echelon form over Q. Each stored row has leading entry 1.
class Echelon {
public:
    explicit Echelon(int ncols) : n_(ncols), pivot_(ncols, -1), acc_(ncols), flag_(ncols, 0) {}

    // Reduces the row against stored pivots; stores it if a new pivot appears.
    // Returns the new pivot column or -1.
    int insert(const std::vector<std::pair<int, mpq_class>>& entries) {
        std::priority_queue<int, std::vector<int>, std::greater<int>> heap;
        for (const auto& [j, v] : entries) {
            if (sgn(v) == 0) continue;
            if (!flag_[j]) {
                flag_[j] = 1;
                heap.push(j);
            }
            acc_[j] += v;
        }
        mpq_class t;
        while (!heap.empty()) {
            int c = heap.top();
            heap.pop();
            flag_[c] = 0;
            if (sgn(acc_[c]) == 0) continue;
            int pr = pivot_[c];
            if (pr < 0) {
                SparseRow row;
                mpq_class inv = 1 / acc_[c];
                row.idx.push_back(c);
                row.val.push_back(1);
                acc_[c] = 0;
                while (!heap.empty()) {
                    int j = heap.top();
                    heap.pop();
                    flag_[j] = 0;
                    if (sgn(acc_[j]) == 0) continue;
                    row.idx.push_back(j);
                    row.val.push_back(acc_[j] * inv);
                    acc_[j] = 0;
                }
                pivot_[c] = static_cast<int>(rows_.size());
                rows_.push_back(std::move(row));
                return c;
            }
            mpq_class f = acc_[c];
            acc_[c] = 0;
            const SparseRow& R = rows_[pr];
            for (std::size_t k = 1; k < R.idx.size(); ++k) {
                int j = R.idx[k];
                if (!flag_[j]) {
                    flag_[j] = 1;
                    heap.push(j);
                }
                mpq_mul(t.get_mpq_t(), f.get_mpq_t(), R.val[k].get_mpq_t());
                acc_[j] -= t;
            }
        }
        return -1;
    }

    int rank() const { return static_cast<int>(rows_.size()); }
    int pivot_row(int c) const { return pivot_[c]; }
    const SparseRow& row(int r) const { return rows_[r]; }
    int ncols() const { return n_; }

private:
    int n_;
    std::vector<int> pivot_;
    std::vector<SparseRow> rows_;
    std::vector<mpq_class> acc_;
    std::vector<char> flag_;
};

std::vector<std::pair<int, mpq_class>> sparse_row(const QMatrix& M, int i) {
    std::vector<std::pair<int, mpq_class>> r;
    for (int j = 0; j < M.cols; ++j)
        if (sgn(M(i, j)) != 0) r.emplace_back(j, M(i, j));
    return r;
}

Echelon echelon_of(const QMatrix& M) {
    Echelon E(M.cols);
    for (int i = 0; i < M.rows; ++i) E.insert(sparse_row(M, i));
    return E;
}

// Nullspace from an echelon form; also reports the free columns.
QMatrix nullspace_from(const Echelon& E, std::vector<int>* free_cols) {
    const int n = E.ncols();
    std::vector<int> fr;
    std::vector<int> piv;
    for (int c = 0; c < n; ++c) (E.pivot_row(c) < 0 ? fr : piv).push_back(c);
    QMatrix N(n, static_cast<int>(fr.size()));
    mpq_class t;
    for (std::size_t k = 0; k < fr.size(); ++k) {
        std::vector<mpq_class> x(n);
        x[fr[k]] = 1;
        for (auto it = piv.rbegin(); it != piv.rend(); ++it) {
            const SparseRow& R = E.row(E.pivot_row(*it));
            mpq_class s = 0;
            for (std::size_t q = 1; q < R.idx.size(); ++q) {
                const mpq_class& xv = x[R.idx[q]];
                if (sgn(xv) == 0) continue;
                mpq_mul(t.get_mpq_t(), R.val[q].get_mpq_t(), xv.get_mpq_t());
                s += t;
            }
            x[*it] = -s;
        }
        for (int i = 0; i < n; ++i) N(i, static_cast<int>(k)) = x[i];
    }
    if (free_cols) *free_cols = fr;
    return N;
}

mpq_class pow_p(int k) { return epsilon_pow(k); }

}  // namespace

int rank_q(const QMatrix& M) { return echelon_of(M).rank(); }

QMatrix nullspace_q(const QMatrix& M) {
    Echelon E = echelon_of(M);
    return nullspace_from(E, nullptr);
}

QMatrix solve_unique(const QMatrix& K, const QMatrix& B) {
    if (K.rows != B.rows) throw Error("solve_unique: shape mismatch");
    const int d = K.cols, c = B.cols;
    QMatrix aug = hstack(K, B);
    Echelon E(d + c);
    for (int i = 0; i < aug.rows; ++i) {
        int pc = E.insert(sparse_row(aug, i));
        if (pc >= d) throw NoSolution("solve_unique: inconsistent system");
    }
    for (int j = 0; j < d; ++j)
        if (E.pivot_row(j) < 0) throw Error("solve_unique: matrix lacks full column rank");
    QMatrix X(d, c);
    mpq_class t;
    for (int r = d - 1; r >= 0; --r) {
        const SparseRow& R = E.row(E.pivot_row(r));
        for (std::size_t q = 1; q < R.idx.size(); ++q) {
            int j = R.idx[q];
            if (j >= d) {
                X(r, j - d) += R.val[q];
            } else {
                for (int k = 0; k < c; ++k) {
                    if (sgn(X(j, k)) == 0) continue;
                    mpq_mul(t.get_mpq_t(), R.val[q].get_mpq_t(), X(j, k).get_mpq_t());
                    X(r, k) -= t;
                }
            }
        }
    }
    return X;
}

QMatrix inverse_q(const QMatrix& M) {
    if (M.rows != M.cols) throw Error("inverse_q: not square");
    return solve_unique(M, identity_q(M.rows));
}

// ------------------------------------------------------------- local PID

namespace {

struct SmithWork {
    OMatrix D, U, V;
    std::vector<int> a;  // valuations of the nonzero diagonal entries
};

SmithWork smith_impl(const OMatrix& M, bool want_u, bool want_v) {
    const int m = M.rows, n = M.cols;
    SmithWork w;
    w.D = M;
    if (want_u) w.U = identity_q(m);
    if (want_v) w.V = identity_q(n);
    OMatrix& D = w.D;
    mpq_class t;
    for (int s = 0; s < std::min(m, n); ++s) {
        int bi = -1, bj = -1, bv = kInfValuation;
        for (int i = s; i < m && bv > 0; ++i)
            for (int j = s; j < n; ++j) {
                if (sgn(D(i, j)) == 0) continue;
                int v = valuation(D(i, j));
                if (v < bv) {
                    bv = v;
                    bi = i;
                    bj = j;
                    if (v == 0) break;
                }
            }
        if (bi < 0) break;
        if (bi != s) {
            for (int j = 0; j < n; ++j) std::swap(D(s, j), D(bi, j));
            if (want_u)
                for (int j = 0; j < m; ++j) std::swap(w.U(s, j), w.U(bi, j));
        }
        if (bj != s) {
            for (int i = 0; i < m; ++i) std::swap(D(i, s), D(i, bj));
            if (want_v)
                for (int i = 0; i < n; ++i) std::swap(w.V(i, s), w.V(i, bj));
        }
        mpq_class piv = D(s, s);
        mpq_class unit = piv / pow_p(bv);
        mpq_class uinv = 1 / unit;
        for (int j = s; j < n; ++j) D(s, j) *= uinv;
        if (want_u)
            for (int j = 0; j < m; ++j) w.U(s, j) *= uinv;
        const mpq_class pv = D(s, s);
        for (int i = s + 1; i < m; ++i) {
            if (sgn(D(i, s)) == 0) continue;
            mpq_class f = D(i, s) / pv;
            for (int j = s; j < n; ++j) {
                if (sgn(D(s, j)) == 0) continue;
                mpq_mul(t.get_mpq_t(), f.get_mpq_t(), D(s, j).get_mpq_t());
                D(i, j) -= t;
            }
            if (want_u)
                for (int j = 0; j < m; ++j) {
                    if (sgn(w.U(s, j)) == 0) continue;
                    mpq_mul(t.get_mpq_t(), f.get_mpq_t(), w.U(s, j).get_mpq_t());
                    w.U(i, j) -= t;
                }
        }
        for (int j = s + 1; j < n; ++j) {
            if (sgn(D(s, j)) == 0) continue;
            mpq_class f = D(s, j) / pv;
            D(s, j) = 0;
            if (want_v)
                for (int i = 0; i < n; ++i) {
                    if (sgn(w.V(i, s)) == 0) continue;
                    mpq_mul(t.get_mpq_t(), f.get_mpq_t(), w.V(i, s).get_mpq_t());
                    w.V(i, j) -= t;
                }
        }
        w.a.push_back(bv);
    }
    return w;
}

}  // namespace

SmithForm smith_local(const OMatrix& M) {
    if (!is_local(M)) throw Error("smith_local: entries must lie in O");
    SmithWork w = smith_impl(M, true, true);
    return {std::move(w.U), std::move(w.D), std::move(w.V)};
}

OMatrix saturate(const QMatrix& N) {
    if (N.cols == 0) return QMatrix(N.rows, 0);
    // Scale into O, then the first r columns of U^{-1} span the pure hull.
    int v = min_valuation(N);
    if (v == kInfValuation) return QMatrix(N.rows, 0);
    mpz_class den = 1;
    for (const auto& x : N.a) den = lcm(den, mpz_class(x.get_den()));
    OMatrix G = scale(N, mpq_class(den));
    int gv = min_valuation(G);
    if (gv > 0) G = scale(G, 1 / pow_p(gv));
    SmithWork w = smith_impl(G, true, false);
    int r = static_cast<int>(w.a.size());
    OMatrix Uinv = inverse_q(w.U);
    return columns(Uinv, 0, r);
}

OMatrix kernel_saturated(const OMatrix& M) {
    // Elimination over O: every equation is scaled to minimal valuation 0, so it
    // has a unit pivot; solving for that variable keeps all coefficients in O and
    // the free variables then give a pure basis.
    const int n = M.cols;
    struct Row {
        std::vector<int> idx;
        std::vector<mpq_class> val;
    };
    std::vector<Row> rows;
    std::vector<std::vector<int>> col_rows(n);
    auto normalize = [](Row& r) {
        int v = kInfValuation;
        for (const auto& x : r.val) v = std::min(v, valuation(x));
        if (v != 0 && v != kInfValuation) {
            mpq_class f = pow_p(-v);
            for (auto& x : r.val) x *= f;
        }
    };
    for (int i = 0; i < M.rows; ++i) {
        Row r;
        for (int j = 0; j < n; ++j)
            if (sgn(M(i, j))) {
                r.idx.push_back(j);
                r.val.push_back(M(i, j));
            }
        if (r.idx.empty()) continue;
        normalize(r);
        for (int j : r.idx) col_rows[j].push_back(static_cast<int>(rows.size()));
        rows.push_back(std::move(r));
    }
    std::vector<char> alive(rows.size(), 1), eliminated(n, 0);
    struct Pivot {
        int col;
        Row row;  // x_col = -sum val * x_idx (already divided by the pivot)
    };
    std::vector<Pivot> piv;
    std::priority_queue<std::pair<std::size_t, int>, std::vector<std::pair<std::size_t, int>>, std::greater<>> queue;
    for (std::size_t i = 0; i < rows.size(); ++i) queue.push({rows[i].idx.size(), static_cast<int>(i)});
    std::vector<mpq_class> acc(n);
    std::vector<char> mark(n, 0);
    mpq_class t;
    while (!queue.empty()) {
        auto [len, ri] = queue.top();
        queue.pop();
        if (!alive[ri] || rows[ri].idx.size() != len) continue;
        Row& R = rows[ri];
        // Unit entry whose column meets the fewest rows.
        int best = -1;
        std::size_t bc = 0;
        for (std::size_t k = 0; k < R.idx.size(); ++k) {
            if (valuation(R.val[k]) != 0) continue;
            std::size_t c = col_rows[R.idx[k]].size();
            if (best < 0 || c < bc) {
                best = static_cast<int>(k);
                bc = c;
            }
        }
        const int c = R.idx[best];
        mpq_class inv = 1 / R.val[best];
        Pivot P;
        P.col = c;
        for (std::size_t k = 0; k < R.idx.size(); ++k) {
            if (static_cast<int>(k) == best) continue;
            P.row.idx.push_back(R.idx[k]);
            P.row.val.push_back(R.val[k] * inv);
        }
        alive[ri] = 0;
        eliminated[c] = 1;
        std::vector<int> touched = std::move(col_rows[c]);
        for (int oi : touched) {
            if (oi == ri || !alive[oi]) continue;
            Row& O = rows[oi];
            auto it = std::lower_bound(O.idx.begin(), O.idx.end(), c);
            if (it == O.idx.end() || *it != c) continue;
            mpq_class f = O.val[it - O.idx.begin()];
            std::vector<int> order;
            for (std::size_t k = 0; k < O.idx.size(); ++k) {
                int j = O.idx[k];
                if (j == c) continue;
                acc[j] = O.val[k];
                mark[j] = 1;
                order.push_back(j);
            }
            for (std::size_t k = 0; k < P.row.idx.size(); ++k) {
                int j = P.row.idx[k];
                mpq_mul(t.get_mpq_t(), f.get_mpq_t(), P.row.val[k].get_mpq_t());
                if (!mark[j]) {
                    mark[j] = 1;
                    acc[j] = 0;
                    order.push_back(j);
                    col_rows[j].push_back(oi);
                }
                acc[j] -= t;
            }
            std::sort(order.begin(), order.end());
            Row nr;
            for (int j : order) {
                mark[j] = 0;
                if (sgn(acc[j])) {
                    nr.idx.push_back(j);
                    nr.val.push_back(acc[j]);
                }
                acc[j] = 0;
            }
            if (nr.idx.empty()) {
                alive[oi] = 0;
                O = Row{};
                continue;
            }
            normalize(nr);
            O = std::move(nr);
            queue.push({O.idx.size(), oi});
        }
        piv.push_back(std::move(P));
    }
    std::vector<int> fr;
    std::vector<int> slot(n, -1);
    for (int j = 0; j < n; ++j)
        if (!eliminated[j]) {
            slot[j] = static_cast<int>(fr.size());
            fr.push_back(j);
        }
    const int k = static_cast<int>(fr.size());
    OMatrix K(n, k);
    for (int q = 0; q < k; ++q) K(fr[q], q) = 1;
    for (auto it = piv.rbegin(); it != piv.rend(); ++it) {
        for (std::size_t e = 0; e < it->row.idx.size(); ++e) {
            int j = it->row.idx[e];
            const mpq_class& a = it->row.val[e];
            for (int q = 0; q < k; ++q) {
                if (sgn(K(j, q)) == 0) continue;
                mpq_mul(t.get_mpq_t(), a.get_mpq_t(), K(j, q).get_mpq_t());
                K(it->col, q) -= t;
            }
        }
    }
    return K;
}

OMatrix normalize_pure_basis(const OMatrix& B) {
    if (B.cols == 0) return B;
    std::vector<int> rows = pivot_columns_k(transpose_k(reduce(B)));
    if (static_cast<int>(rows.size()) != B.cols) throw Error("normalize_pure_basis: basis is not pure");
    QMatrix S(B.cols, B.cols);
    for (int i = 0; i < B.cols; ++i)
        for (int j = 0; j < B.cols; ++j) S(i, j) = B(rows[i], j);
    QMatrix R = mul(B, inverse_q(S));
    for (int i = 0; i < B.cols; ++i)
        for (int j = 0; j < B.cols; ++j) R(rows[i], j) = i == j ? 1 : 0;
    return R;
}

OMatrix span_basis_local(const OMatrix& G) {
    if (!is_local(G)) throw Error("span_basis_local: entries must lie in O");
    OMatrix C = G;
    const int m = C.rows;
    int n = C.cols;
    std::vector<int> order(n);
    for (int j = 0; j < n; ++j) order[j] = j;
    int s = 0;
    mpq_class t;
    for (int i = 0; i < m && s < n; ++i) {
        int bj = -1, bv = kInfValuation;
        for (int j = s; j < n; ++j) {
            if (sgn(C(i, j)) == 0) continue;
            int v = valuation(C(i, j));
            if (v < bv) {
                bv = v;
                bj = j;
            }
        }
        if (bj < 0) continue;
        if (bj != s)
            for (int r = 0; r < m; ++r) std::swap(C(r, s), C(r, bj));
        const mpq_class pv = C(i, s);
        for (int j = s + 1; j < n; ++j) {
            if (sgn(C(i, j)) == 0) continue;
            mpq_class f = C(i, j) / pv;
            for (int r = i; r < m; ++r) {
                if (sgn(C(r, s)) == 0) continue;
                mpq_mul(t.get_mpq_t(), f.get_mpq_t(), C(r, s).get_mpq_t());
                C(r, j) -= t;
            }
        }
        ++s;
    }
    return columns(C, 0, s);
}

LocalSolver::LocalSolver(const OMatrix& M) {
    if (!is_local(M)) throw Error("LocalSolver: entries must lie in O");
    SmithWork w = smith_impl(M, true, true);
    s_.U = std::move(w.U);
    s_.D = std::move(w.D);
    s_.V = std::move(w.V);
    a_ = w.a;
    rank_ = static_cast<int>(a_.size());
}

std::optional<OMatrix> LocalSolver::solve(const OMatrix& b) const {
    if (b.rows != s_.U.rows) throw Error("LocalSolver: shape mismatch");
    OMatrix Ub = mul(s_.U, b);
    OMatrix y(s_.V.rows, b.cols);
    for (int i = 0; i < Ub.rows; ++i)
        for (int k = 0; k < b.cols; ++k) {
            if (i < rank_) {
                mpq_class q = Ub(i, k) / pow_p(a_[i]);
                if (!is_local(q)) return std::nullopt;
                y(i, k) = q;
            } else if (sgn(Ub(i, k)) != 0) {
                return std::nullopt;
            }
        }
    return mul(s_.V, y);
}

std::optional<OMatrix> try_solve(const OMatrix& M, const OMatrix& b) {
    return LocalSolver(M).solve(b);
}

OMatrix solve(const OMatrix& M, const OMatrix& b) {
    auto x = try_solve(M, b);
    if (!x) throw NoSolution("solve: right-hand side not in the O-column span");
    return *x;
}

bool is_unit_matrix(const OMatrix& M) {
    if (M.rows != M.cols || !is_local(M)) return false;
    return rank_k(reduce(M)) == M.rows;
}

// ------------------------------------------------------------------ F_p

KMatrix reduce(const OMatrix& M) {
    KMatrix R(M.rows, M.cols);
    for (std::size_t i = 0; i < M.a.size(); ++i) R.a[i] = reduce(M.a[i]);
    return R;
}

OMatrix lift(const KMatrix& M) {
    OMatrix R(M.rows, M.cols);
    for (std::size_t i = 0; i < M.a.size(); ++i) R.a[i] = M.a[i];
    return R;
}

KMatrix identity_k(int n) {
    KMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1;
    return I;
}

KMatrix mul_k(const KMatrix& A, const KMatrix& B) {
    if (A.cols != B.rows) throw Error("mul_k: shape mismatch");
    const std::uint64_t p = prime();
    KMatrix C(A.rows, B.cols);
    std::vector<std::uint64_t> acc(B.cols);
    for (int i = 0; i < A.rows; ++i) {
        std::fill(acc.begin(), acc.end(), 0);
        for (int k = 0; k < A.cols; ++k) {
            std::uint64_t a = A(i, k);
            if (!a) continue;
            const Residue* b = &B.a[static_cast<std::size_t>(k) * B.cols];
            for (int j = 0; j < B.cols; ++j) acc[j] += a * b[j];
            if ((k & 255) == 255)
                for (auto& x : acc) x %= p;
        }
        for (int j = 0; j < B.cols; ++j) C(i, j) = static_cast<Residue>(acc[j] % p);
    }
    return C;
}

KMatrix add_k(const KMatrix& A, const KMatrix& B) {
    KMatrix C = A;
    for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] = fp_add(C.a[i], B.a[i]);
    return C;
}

KMatrix sub_k(const KMatrix& A, const KMatrix& B) {
    KMatrix C = A;
    for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] = fp_sub(C.a[i], B.a[i]);
    return C;
}

KMatrix scale_k(const KMatrix& A, Residue s) {
    KMatrix C = A;
    for (auto& x : C.a) x = fp_mul(x, s);
    return C;
}

KMatrix transpose_k(const KMatrix& A) {
    KMatrix T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

KMatrix hstack_k(const KMatrix& A, const KMatrix& B) {
    int r = A.cols == 0 ? B.rows : A.rows;
    KMatrix C(r, A.cols + B.cols);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < A.cols; ++j) C(i, j) = A(i, j);
        for (int j = 0; j < B.cols; ++j) C(i, A.cols + j) = B(i, j);
    }
    return C;
}

KMatrix vstack_k(const KMatrix& A, const KMatrix& B) {
    int c = A.rows == 0 ? B.cols : A.cols;
    KMatrix C(A.rows + B.rows, c);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < c; ++j) C(i, j) = A(i, j);
    for (int i = 0; i < B.rows; ++i)
        for (int j = 0; j < c; ++j) C(A.rows + i, j) = B(i, j);
    return C;
}

KMatrix columns_k(const KMatrix& A, const std::vector<int>& idx) {
    KMatrix C(A.rows, static_cast<int>(idx.size()));
    for (int i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) C(i, static_cast<int>(j)) = A(i, idx[j]);
    return C;
}

bool is_zero_k(const KMatrix& A) {
    return std::all_of(A.a.begin(), A.a.end(), [](Residue x) { return x == 0; });
}

std::vector<int> rref_k(KMatrix& M) {
    std::vector<int> piv;
    int r = 0;
    for (int c = 0; c < M.cols && r < M.rows; ++c) {
        int pr = -1;
        for (int i = r; i < M.rows; ++i)
            if (M(i, c)) {
                pr = i;
                break;
            }
        if (pr < 0) continue;
        if (pr != r)
            for (int j = 0; j < M.cols; ++j) std::swap(M(r, j), M(pr, j));
        Residue inv = fp_inv(M(r, c));
        for (int j = c; j < M.cols; ++j) M(r, j) = fp_mul(M(r, j), inv);
        for (int i = 0; i < M.rows; ++i) {
            if (i == r || !M(i, c)) continue;
            Residue f = M(i, c);
            for (int j = c; j < M.cols; ++j)
                if (M(r, j)) M(i, j) = fp_sub(M(i, j), fp_mul(f, M(r, j)));
        }
        piv.push_back(c);
        ++r;
    }
    return piv;
}

int rank_k(const KMatrix& M) {
    KMatrix T = M;
    return static_cast<int>(rref_k(T).size());
}

KMatrix kernel_k(const KMatrix& M) {
    KMatrix R = M;
    std::vector<int> piv = rref_k(R);
    std::vector<char> is_piv(M.cols, 0);
    for (int c : piv) is_piv[c] = 1;
    std::vector<int> fr;
    for (int c = 0; c < M.cols; ++c)
        if (!is_piv[c]) fr.push_back(c);
    KMatrix K(M.cols, static_cast<int>(fr.size()));
    for (std::size_t k = 0; k < fr.size(); ++k) {
        K(fr[k], static_cast<int>(k)) = 1;
        for (std::size_t r = 0; r < piv.size(); ++r)
            K(piv[r], static_cast<int>(k)) = fp_neg(R(static_cast<int>(r), fr[k]));
    }
    return K;
}

std::optional<KMatrix> solve_k(const KMatrix& M, const KMatrix& b) {
    KMatrix aug = hstack_k(M, b);
    std::vector<int> piv = rref_k(aug);
    for (int c : piv)
        if (c >= M.cols) return std::nullopt;
    KMatrix x(M.cols, b.cols);
    for (std::size_t r = 0; r < piv.size(); ++r)
        for (int k = 0; k < b.cols; ++k) x(piv[r], k) = aug(static_cast<int>(r), M.cols + k);
    return x;
}

KMatrix inverse_k(const KMatrix& M) {
    if (M.rows != M.cols) throw Error("inverse_k: not square");
    auto x = solve_k(M, identity_k(M.rows));
    if (!x || rank_k(M) != M.rows) throw NotAUnit("inverse_k: singular matrix");
    return *x;
}

std::vector<int> pivot_columns_k(const KMatrix& A) {
    KMatrix T = A;
    return rref_k(T);
}

}  // namespace kronord

namespace kronord {

void KEchelon::reduce(std::vector<Residue>& v) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        Residue f = v[lead_[r]];
        if (!f) continue;
        const auto& R = rows_[r];
        for (int j = lead_[r]; j < n_; ++j)
            if (R[j]) v[j] = fp_sub(v[j], fp_mul(f, R[j]));
    }
}

bool KEchelon::insert(std::vector<Residue> v) {
    reduce(v);
    int c = 0;
    while (c < n_ && v[c] == 0) ++c;
    if (c == n_) return false;
    Residue inv = fp_inv(v[c]);
    for (int j = c; j < n_; ++j) v[j] = fp_mul(v[j], inv);
    // Keep stored rows mutually reduced at the new lead so reduce() stays one pass.
    for (auto& R : rows_) {
        Residue f = R[c];
        if (!f) continue;
        for (int j = c; j < n_; ++j)
            if (v[j]) R[j] = fp_sub(R[j], fp_mul(f, v[j]));
    }
    pivot_[c] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(v));
    lead_.push_back(c);
    return true;
}

bool KEchelon::contains(std::vector<Residue> v) const {
    reduce(v);
    for (Residue x : v)
        if (x) return false;
    return true;
}

}  // namespace kronord

namespace kronord {

namespace {

mpz_class dot(const std::vector<mpz_class>& u, const std::vector<mpz_class>& v) {
    mpz_class s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

// Nearest integer to a / b for b > 0.
mpz_class round_div(const mpz_class& a, const mpz_class& b) {
    mpz_class q;
    mpz_class t = 2 * a + b;
    mpz_fdiv_q(q.get_mpz_t(), t.get_mpz_t(), mpz_class(2 * b).get_mpz_t());
    return q;
}

}  // namespace

// Integral LLL: d[i] are Gram determinants, lam[k][j] the scaled Gram-Schmidt coefficients.
std::vector<std::vector<mpz_class>> lll_reduce(std::vector<std::vector<mpz_class>> b) {
    const int n = static_cast<int>(b.size());
    if (n <= 1) return b;
    std::vector<mpz_class> d(n + 1);
    std::vector<std::vector<mpz_class>> lam(n, std::vector<mpz_class>(n));
    d[0] = 1;
    auto D = [&](int i) -> mpz_class& { return d[i + 1]; };  // D(-1) = 1
    auto red = [&](int k, int l) {
        mpz_class two = 2 * lam[k][l];
        if (abs(two) <= D(l)) return;
        mpz_class q = round_div(lam[k][l], D(l));
        for (std::size_t c = 0; c < b[k].size(); ++c) b[k][c] -= q * b[l][c];
        lam[k][l] -= q * D(l);
        for (int i = 0; i < l; ++i) lam[k][i] -= q * lam[l][i];
    };
    auto incorporate = [&](int k) {
        for (int j = 0; j <= k; ++j) {
            mpz_class u = dot(b[k], b[j]);
            for (int i = 0; i < j; ++i) u = (D(i) * u - lam[k][i] * lam[j][i]) / D(i - 1);
            if (j < k) lam[k][j] = u;
            else D(k) = u;
        }
        if (D(k) == 0) throw Error("lll_reduce: rows are dependent");
    };
    int kmax = 0;
    incorporate(0);
    for (int k = 1; k < n;) {
        if (k > kmax) {
            kmax = k;
            incorporate(k);
        }
        red(k, k - 1);
        mpz_class l = lam[k][k - 1];
        if (4 * D(k) * D(k - 2) < 3 * D(k - 1) * D(k - 1) - 4 * l * l) {
            std::swap(b[k], b[k - 1]);
            for (int j = 0; j < k - 1; ++j) std::swap(lam[k][j], lam[k - 1][j]);
            mpz_class Bv = (D(k - 2) * D(k) + l * l) / D(k - 1);
            for (int i = k + 1; i <= kmax; ++i) {
                mpz_class t = lam[i][k];
                lam[i][k] = (D(k) * lam[i][k - 1] - l * t) / D(k - 1);
                lam[i][k - 1] = (Bv * t + l * lam[i][k]) / D(k);
            }
            D(k - 1) = Bv;
            if (k > 1) --k;
        } else {
            for (int j = k - 2; j >= 0; --j) red(k, j);
            ++k;
        }
    }
    return b;
}

OMatrix reduced_saturated_basis(const QMatrix& B) {
    const int n = B.rows;
    const int m = rank_q(B);
    if (m == 0) return OMatrix(n, 0);
    // Integer equations N x = 0 cutting out the span.
    QMatrix Nq = transpose(nullspace_q(transpose(B)));
    std::vector<std::vector<mpz_class>> N(Nq.rows, std::vector<mpz_class>(n));
    for (int i = 0; i < Nq.rows; ++i) {
        mpz_class den = 1;
        for (int j = 0; j < n; ++j) den = lcm(den, Nq(i, j).get_den());
        for (int j = 0; j < n; ++j) N[i][j] = mpq_class(Nq(i, j) * den).get_num();
    }
    // Kernel by LLL on (e_i | C N e_i): short vectors have zero tail once C is large.
    for (unsigned bits = 32;; bits *= 2) {
        mpz_class C = 1;
        C <<= bits;
        std::vector<std::vector<mpz_class>> rows(n, std::vector<mpz_class>(n + Nq.rows));
        for (int i = 0; i < n; ++i) {
            rows[i][i] = 1;
            for (int e = 0; e < Nq.rows; ++e) rows[i][n + e] = C * N[e][i];
        }
        rows = lll_reduce(std::move(rows));
        OMatrix K(n, m);
        for (int j = 0; j < m; ++j) {
            bool zero_tail = true;
            for (int e = 0; e < Nq.rows; ++e) zero_tail = zero_tail && rows[j][n + e] == 0;
            if (!zero_tail) break;
            for (int i = 0; i < n; ++i) K(i, j) = rows[j][i];
            if (j == m - 1) return K;
        }
        if (bits > 1u << 16) throw Error("reduced_saturated_basis: no convergence");
    }
}

}  // namespace kronord
