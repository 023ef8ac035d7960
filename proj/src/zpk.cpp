#include "kronord/zpk.hpp"

#include <utility>

namespace kronord {

int max_zpk_precision() {
    int K = 0;
    for (std::uint64_t m = 1; m <= (std::uint64_t{1} << 62) / prime(); m *= prime()) ++K;
    return K;
}

Zpk::Zpk(int K) : K_(K), p_(prime()), m_(1) {
    for (int i = 0; i < K; ++i) {
        if (m_ > (std::uint64_t{1} << 62) / p_) throw Error("Zpk: precision too large");
        m_ *= p_;
    }
}

int Zpk::val(std::uint64_t a) const {
    int v = 0;
    while (a != 0 && a % p_ == 0 && v < K_) {
        a /= p_;
        ++v;
    }
    return a == 0 ? K_ : v;
}

std::uint64_t Zpk::inv(std::uint64_t a) const {
    if (a % p_ == 0) throw NotAUnit("Zpk::inv: not a unit");
    // Newton iteration for the inverse, doubling the p-adic precision.
    std::uint64_t x = fp_inv(static_cast<Residue>(a % p_));
    for (int prec = 1; prec < K_; prec *= 2) x = mul(x, sub(2, mul(a, x)));
    return x;
}

std::uint64_t Zpk::from_int(long long v) const {
    if (v >= 0) return static_cast<std::uint64_t>(v) % m_;
    std::uint64_t r = static_cast<std::uint64_t>(-(v + 1)) % m_;
    return m_ - 1 - r;
}

std::uint64_t Zpk::from(const mpq_class& x) const {
    mpz_class m(static_cast<unsigned long>(m_));
    if (sizeof(unsigned long) < 8) m = mpz_class(std::to_string(m_));
    mpz_class n = x.get_num() % m;
    if (n < 0) n += m;
    mpz_class d = x.get_den() % m;
    std::uint64_t nu = std::stoull(n.get_str()), du = std::stoull(d.get_str());
    if (x.get_den() == 1) return nu;
    return mul(nu, inv(du));
}

mpz_class Zpk::to_int(std::uint64_t a) const {
    mpz_class r(std::to_string(a));
    if (a > m_ / 2) r -= mpz_class(std::to_string(m_));
    return r;
}

ZMatrix Zpk::from(const OMatrix& M) const {
    ZMatrix R(M.rows, M.cols);
    for (std::size_t i = 0; i < M.a.size(); ++i) R.a[i] = sgn(M.a[i]) == 0 ? 0 : from(M.a[i]);
    return R;
}

OMatrix Zpk::to_o(const ZMatrix& M) const {
    OMatrix R(M.rows, M.cols);
    for (std::size_t i = 0; i < M.a.size(); ++i)
        if (M.a[i] != 0) R.a[i] = mpq_class(to_int(M.a[i]));
    return R;
}

ZMatrix Zpk::mul(const ZMatrix& A, const ZMatrix& B) const {
    ZMatrix C(A.rows, B.cols);
    std::vector<unsigned __int128> acc(B.cols);
    for (int i = 0; i < A.rows; ++i) {
        std::fill(acc.begin(), acc.end(), 0);
        int pending = 0;
        for (int k = 0; k < A.cols; ++k) {
            std::uint64_t x = A(i, k);
            if (x == 0) continue;
            const std::uint64_t* row = &B.a[static_cast<std::size_t>(k) * B.cols];
            for (int j = 0; j < B.cols; ++j) acc[j] += static_cast<unsigned __int128>(x) * row[j];
            if (++pending == 8) {
                for (auto& v : acc) v %= m_;
                pending = 0;
            }
        }
        for (int j = 0; j < B.cols; ++j) C(i, j) = static_cast<std::uint64_t>(acc[j] % m_);
    }
    return C;
}

ZMatrix Zpk::identity(int n) const {
    ZMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1 % m_;
    return I;
}

ZMatrix Zpk::inverse(const ZMatrix& M) const {
    const int n = M.rows;
    if (M.cols != n) throw Error("Zpk::inverse: not square");
    ZMatrix A = M, I = identity(n);
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (A(r, c) % p_ != 0) {
                piv = r;
                break;
            }
        if (piv < 0) throw NotAUnit("Zpk::inverse: matrix is not invertible");
        if (piv != c)
            for (int j = 0; j < n; ++j) {
                std::swap(A(c, j), A(piv, j));
                std::swap(I(c, j), I(piv, j));
            }
        std::uint64_t u = inv(A(c, c));
        for (int j = 0; j < n; ++j) {
            A(c, j) = mul(A(c, j), u);
            I(c, j) = mul(I(c, j), u);
        }
        for (int r = 0; r < n; ++r) {
            if (r == c || A(r, c) == 0) continue;
            std::uint64_t f = A(r, c);
            for (int j = 0; j < n; ++j) {
                if (A(c, j)) A(r, j) = sub(A(r, j), mul(f, A(c, j)));
                if (I(c, j)) I(r, j) = sub(I(r, j), mul(f, I(c, j)));
            }
        }
    }
    return I;
}

ZSmith smith_zpk(const Zpk& R, const ZMatrix& M) {
    const int m = M.rows, n = M.cols;
    ZMatrix D = M;
    ZSmith out;
    out.U = R.identity(m);
    out.Uinv = R.identity(m);
    std::uint64_t pk[64];
    pk[0] = 1;
    for (int i = 1; i <= R.K(); ++i) pk[i] = pk[i - 1] * prime();
    for (int s = 0; s < std::min(m, n); ++s) {
        int bi = -1, bj = -1, bv = R.K();
        for (int i = s; i < m && bv > 0; ++i)
            for (int j = s; j < n; ++j) {
                if (D(i, j) == 0) continue;
                int v = R.val(D(i, j));
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
            for (int j = 0; j < m; ++j) std::swap(out.U(s, j), out.U(bi, j));
            for (int i = 0; i < m; ++i) std::swap(out.Uinv(i, s), out.Uinv(i, bi));
        }
        if (bj != s)
            for (int i = 0; i < m; ++i) std::swap(D(i, s), D(i, bj));
        // Scale row s so that the pivot is exactly p^bv.
        std::uint64_t unit = D(s, s) / pk[bv];
        std::uint64_t ui = R.inv(unit);
        for (int j = s; j < n; ++j) D(s, j) = R.mul(D(s, j), ui);
        for (int j = 0; j < m; ++j) out.U(s, j) = R.mul(out.U(s, j), ui);
        for (int i = 0; i < m; ++i) out.Uinv(i, s) = R.mul(out.Uinv(i, s), unit);
        for (int i = s + 1; i < m; ++i) {
            if (D(i, s) == 0) continue;
            std::uint64_t f = D(i, s) / pk[bv];
            for (int j = s; j < n; ++j)
                if (D(s, j)) D(i, j) = R.sub(D(i, j), R.mul(f, D(s, j)));
            for (int j = 0; j < m; ++j)
                if (out.U(s, j)) out.U(i, j) = R.sub(out.U(i, j), R.mul(f, out.U(s, j)));
            // row_i -= f row_s  <=>  col_s of U^{-1} += f col_i
            for (int r = 0; r < m; ++r)
                if (out.Uinv(r, i)) out.Uinv(r, s) = R.add(out.Uinv(r, s), R.mul(f, out.Uinv(r, i)));
        }
        for (int j = s + 1; j < n; ++j) {
            if (D(s, j) == 0) continue;
            std::uint64_t f = D(s, j) / pk[bv];
            for (int i = s; i < m; ++i)
                if (D(i, s)) D(i, j) = R.sub(D(i, j), R.mul(f, D(i, s)));
        }
        out.a.push_back(bv);
    }
    return out;
}

}  // namespace kronord
