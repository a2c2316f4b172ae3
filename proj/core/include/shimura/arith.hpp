#ifndef SHIMURA_ARITH_HPP
#define SHIMURA_ARITH_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "shimura/errors.hpp"

namespace shimura {

// Exact arithmetic types used throughout. All areas, zeta values and class
// number formulas are kept as exact rationals; doubles only appear in the
// Selberg-Zograf bound and the zeta cross-checks.
using Int = long long;
using BigInt = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(Int num, Int den = 1) {
    Rat r(static_cast<long>(num), static_cast<long>(den));
    r.canonicalize();
    return r;
}

// Nonnegative integer square root, exact.
Int isqrt(Int n);

// True if r is the square of a rational; if so and root != nullptr, store the
// nonnegative square root.
bool rat_sqrt(const Rat& r, Rat* root = nullptr);

struct FactoredInteger {
    int sign = 1;                            // -1, 0 or +1
    std::vector<std::pair<Int, int>> factors; // (prime, exponent), primes increasing

    Int value() const;
};

// Deterministic Miller-Rabin, valid for all n < 3.3e24 with the base set used
// (we only ever see n < 1e12).
bool is_prime(Int n);

// Trial division backed by is_prime for the cofactor.  n >= 1.
FactoredInteger factor(Int n);

// Kronecker symbol (a|n), fully general.
int kronecker(Int a, Int n);

Int sigma1(Int n);     // sum of divisors, n >= 1
Int euler_phi(Int n);  // totient, n >= 1

// All positive divisors of n, increasing.
std::vector<Int> divisors(Int n);

Int gcd_ll(Int a, Int b);
Int pow_ll(Int base, int exp);

} // namespace shimura

#endif
