#pragma once

// Dense exact matrices over Q (entries normally in O) and over F_p.

#include <cstddef>
#include <optional>
#include <vector>

#include "kronord/dvr.hpp"

namespace kronord {

template <class T>
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<T> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

    T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    bool operator==(const Matrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
    bool empty() const { return rows == 0 || cols == 0; }
};

using QMatrix = Matrix<mpq_class>;
using OMatrix = QMatrix;
using KMatrix = Matrix<Residue>;

// ---- generic shape helpers over Q ----
QMatrix identity_q(int n);
QMatrix mul(const QMatrix& A, const QMatrix& B);
QMatrix add(const QMatrix& A, const QMatrix& B);
QMatrix sub(const QMatrix& A, const QMatrix& B);
QMatrix scale(const QMatrix& A, const mpq_class& s);
QMatrix transpose(const QMatrix& A);
QMatrix hstack(const QMatrix& A, const QMatrix& B);
QMatrix vstack(const QMatrix& A, const QMatrix& B);
QMatrix block_diag(const QMatrix& A, const QMatrix& B);
QMatrix columns(const QMatrix& A, int first, int count);
QMatrix rows_of(const QMatrix& A, int first, int count);
bool is_zero(const QMatrix& A);
bool is_local(const QMatrix& A);
int min_valuation(const QMatrix& A);

// ---- Q-linear algebra ----
int rank_q(const QMatrix& M);
// Columns form a Q-basis of {x : Mx = 0}; free coordinates carry an identity block.
QMatrix nullspace_q(const QMatrix& M);
// Unique solution X of K X = B for K of full column rank; throws NoSolution.
QMatrix solve_unique(const QMatrix& K, const QMatrix& B);
QMatrix inverse_q(const QMatrix& M);

// ---- linear algebra over the local PID O ----
struct SmithForm {
    OMatrix U, D, V;
};
SmithForm smith_local(const OMatrix& M);
// Columns form an O-basis of the pure submodule {x in O^n : Mx = 0}.
OMatrix kernel_saturated(const OMatrix& M);
// Basis of the same pure sublattice with an identity block on the first rows
// (in order) where the reduction has full rank.
OMatrix normalize_pure_basis(const OMatrix& B);
// O-basis of (column span of N over Q) intersected with O^n.
OMatrix saturate(const QMatrix& N);
// LLL-reduced (delta = 3/4) basis of the Z-span of linearly independent integer rows.
std::vector<std::vector<mpz_class>> lll_reduce(std::vector<std::vector<mpz_class>> b);
// Short integer basis of (column span of B over Q) intersected with Z^n. Its O-span is the
// saturation of the O-span of B, so it replaces a saturated basis of large height.
OMatrix reduced_saturated_basis(const QMatrix& B);
// O-basis of the O-span of the columns of G (not saturated).
OMatrix span_basis_local(const OMatrix& G);
// Solution over O of M x = b (b may have several columns); NoSolution otherwise.
OMatrix solve(const OMatrix& M, const OMatrix& b);
std::optional<OMatrix> try_solve(const OMatrix& M, const OMatrix& b);
bool is_unit_matrix(const OMatrix& M);

// Reusable solver for repeated right-hand sides against a fixed M.
class LocalSolver {
public:
    explicit LocalSolver(const OMatrix& M);
    std::optional<OMatrix> solve(const OMatrix& b) const;
    int rank() const { return rank_; }

private:
    SmithForm s_;
    int rank_ = 0;
    std::vector<int> a_;
};

// ---- F_p ----
KMatrix reduce(const OMatrix& M);
OMatrix lift(const KMatrix& M);
KMatrix identity_k(int n);
KMatrix mul_k(const KMatrix& A, const KMatrix& B);
KMatrix add_k(const KMatrix& A, const KMatrix& B);
KMatrix sub_k(const KMatrix& A, const KMatrix& B);
KMatrix scale_k(const KMatrix& A, Residue s);
KMatrix transpose_k(const KMatrix& A);
KMatrix hstack_k(const KMatrix& A, const KMatrix& B);
KMatrix vstack_k(const KMatrix& A, const KMatrix& B);
KMatrix columns_k(const KMatrix& A, const std::vector<int>& idx);
bool is_zero_k(const KMatrix& A);
int rank_k(const KMatrix& M);
KMatrix kernel_k(const KMatrix& M);
// Reduced row echelon form in place; returns pivot columns.
std::vector<int> rref_k(KMatrix& M);
std::optional<KMatrix> solve_k(const KMatrix& M, const KMatrix& b);
KMatrix inverse_k(const KMatrix& M);
// Incremental row space over F_p.
class KEchelon {
public:
    explicit KEchelon(int n) : n_(n), pivot_(n, -1) {}
    // Reduces v in place against the stored rows.
    void reduce(std::vector<Residue>& v) const;
    // Adds v if independent; returns whether it was.
    bool insert(std::vector<Residue> v);
    bool contains(std::vector<Residue> v) const;
    int rank() const { return static_cast<int>(rows_.size()); }
    int dim() const { return n_; }

private:
    int n_;
    std::vector<int> pivot_;
    std::vector<std::vector<Residue>> rows_;
    std::vector<int> lead_;
};

// Column indices of A giving a basis of its column space (first-found order).
std::vector<int> pivot_columns_k(const KMatrix& A);

}  // namespace kronord
