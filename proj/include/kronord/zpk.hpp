#pragma once

// Matrices over Z/p^K, used for membership questions in O-lattices that only
// depend on entries modulo a known power of p.

#include <cstdint>
#include <vector>

#include "kronord/linalg.hpp"

namespace kronord {

using ZMatrix = Matrix<std::uint64_t>;

// Largest K with p^K below 2^62 for the current prime.
int max_zpk_precision();

class Zpk {
public:
    explicit Zpk(int K);
    int K() const { return K_; }
    std::uint64_t modulus() const { return m_; }

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return a + b >= m_ ? a + b - m_ : a + b; }
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + m_ - b; }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m_);
    }
    std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : m_ - a; }
    // Valuation capped at K.
    int val(std::uint64_t a) const;
    // Inverse of a unit.
    std::uint64_t inv(std::uint64_t a) const;
    std::uint64_t from(const mpq_class& x) const;
    std::uint64_t from_int(long long v) const;
    // Symmetric representative in (-m/2, m/2].
    mpz_class to_int(std::uint64_t a) const;

    ZMatrix from(const OMatrix& M) const;
    OMatrix to_o(const ZMatrix& M) const;
    ZMatrix mul(const ZMatrix& A, const ZMatrix& B) const;
    ZMatrix identity(int n) const;
    // Inverse of a matrix whose reduction mod p is invertible.
    ZMatrix inverse(const ZMatrix& M) const;

private:
    int K_;
    std::uint64_t p_;
    std::uint64_t m_;
};

// U M V = diag(p^a_0, ..., p^a_{s-1}, 0, ...) modulo p^K. Only U and U^{-1} are kept.
struct ZSmith {
    ZMatrix U, Uinv;
    std::vector<int> a;  // exponents < K of the pivots found
};
ZSmith smith_zpk(const Zpk& R, const ZMatrix& M);

}  // namespace kronord
