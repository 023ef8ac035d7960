#pragma once

// Arithmetic in O = Z localized at p, its residue field F_p and fraction field Q.

#include <climits>
#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "kronord/errors.hpp"

namespace kronord {

using LocalScalar = mpq_class;
using Residue = std::uint32_t;

inline constexpr int kInfValuation = INT_MAX;

// The prime is process-wide configuration; set it before building any data.
void set_prime(unsigned p);
unsigned prime();
bool is_prime(unsigned p);

// Exponent of p in x; kInfValuation for zero. Accepts any rational.
int valuation(const mpq_class& x);
bool is_local(const mpq_class& x);
Residue reduce(const mpq_class& x);
LocalScalar unit_inverse(const LocalScalar& x);
LocalScalar epsilon_pow(int k);

// Residue field helpers.
inline Residue fp_add(Residue a, Residue b) {
    std::uint32_t s = a + b;
    return s >= prime() ? s - prime() : s;
}
inline Residue fp_sub(Residue a, Residue b) { return a >= b ? a - b : a + prime() - b; }
inline Residue fp_mul(Residue a, Residue b) {
    return static_cast<Residue>((static_cast<std::uint64_t>(a) * b) % prime());
}
inline Residue fp_neg(Residue a) { return a == 0 ? 0 : prime() - a; }
Residue fp_inv(Residue a);
Residue fp_from_int(long long v);

std::string to_string(const mpq_class& x);
mpq_class parse_scalar(const std::string& s);

}  // namespace kronord
