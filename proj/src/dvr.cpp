#include "kronord/dvr.hpp"

#include <atomic>

namespace kronord {

namespace {
std::atomic<unsigned> g_prime{3};

int int_valuation(const mpz_class& z, unsigned p) {
    if (z == 0) return kInfValuation;
    mpz_class t = z;
    int v = 0;
    while (mpz_divisible_ui_p(t.get_mpz_t(), p)) {
        mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), p);
        ++v;
    }
    return v;
}
}  // namespace

bool is_prime(unsigned p) {
    if (p < 2) return false;
    for (unsigned d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

void set_prime(unsigned p) {
    if (!is_prime(p)) throw Error("p must be prime, got " + std::to_string(p));
    g_prime.store(p);
}

unsigned prime() { return g_prime.load(std::memory_order_relaxed); }

int valuation(const mpq_class& x) {
    if (x == 0) return kInfValuation;
    const unsigned p = prime();
    return int_valuation(x.get_num(), p) - int_valuation(x.get_den(), p);
}

bool is_local(const mpq_class& x) {
    return !mpz_divisible_ui_p(x.get_den_mpz_t(), prime());
}

Residue reduce(const mpq_class& x) {
    const unsigned p = prime();
    if (!is_local(x)) throw NotAUnit("reduce: denominator divisible by p");
    unsigned long n = mpz_fdiv_ui(x.get_num_mpz_t(), p);
    unsigned long d = mpz_fdiv_ui(x.get_den_mpz_t(), p);
    return fp_mul(static_cast<Residue>(n), fp_inv(static_cast<Residue>(d)));
}

LocalScalar unit_inverse(const LocalScalar& x) {
    if (x == 0 || valuation(x) != 0) throw NotAUnit("unit_inverse of " + to_string(x));
    return 1 / x;
}

LocalScalar epsilon_pow(int k) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), prime(), static_cast<unsigned long>(k < 0 ? -k : k));
    return k < 0 ? mpq_class(1, r) : mpq_class(r);
}

Residue fp_inv(Residue a) {
    const unsigned p = prime();
    if (a % p == 0) throw NotAUnit("fp_inv(0)");
    long long t = 0, nt = 1, r = p, nr = a;
    while (nr != 0) {
        long long q = r / nr;
        long long tmp = t - q * nt; t = nt; nt = tmp;
        tmp = r - q * nr; r = nr; nr = tmp;
    }
    if (t < 0) t += p;
    return static_cast<Residue>(t);
}

Residue fp_from_int(long long v) {
    long long p = prime();
    long long r = v % p;
    if (r < 0) r += p;
    return static_cast<Residue>(r);
}

std::string to_string(const mpq_class& x) {
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

mpq_class parse_scalar(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw Error("cannot parse scalar '" + s + "'");
    q.canonicalize();
    return q;
}

}  // namespace kronord
