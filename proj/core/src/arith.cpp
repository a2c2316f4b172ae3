#include "shimura/arith.hpp"

#include <algorithm>
#include <cmath>

namespace shimura {

Int isqrt(Int n) {
    if (n < 0) throw Error("isqrt of negative");
    if (n == 0) return 0;
    Int r = static_cast<Int>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool rat_sqrt(const Rat& r, Rat* root) {
    if (sgn(r) < 0) return false;
    if (sgn(r) == 0) {
        if (root) *root = 0;
        return true;
    }
    const BigInt& num = r.get_num();
    const BigInt& den = r.get_den();
    if (!mpz_perfect_square_p(num.get_mpz_t()) ||
        !mpz_perfect_square_p(den.get_mpz_t()))
        return false;
    if (root) {
        BigInt sn, sd;
        mpz_sqrt(sn.get_mpz_t(), num.get_mpz_t());
        mpz_sqrt(sd.get_mpz_t(), den.get_mpz_t());
        *root = Rat(sn) / Rat(sd);
    }
    return true;
}

Int FactoredInteger::value() const {
    Int v = sign;
    for (auto [p, e] : factors)
        for (int i = 0; i < e; ++i) v *= p;
    return v;
}

namespace {

using u128 = unsigned __int128;

Int mulmod(Int a, Int b, Int m) {
    return static_cast<Int>((u128)a * (u128)b % (u128)m);
}

Int powmod(Int base, Int exp, Int m) {
    Int result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

} // namespace

bool is_prime(Int n) {
    if (n < 2) return false;
    for (Int p : {2LL, 3LL, 5LL, 7LL, 11LL, 13LL, 17LL, 19LL, 23LL, 29LL, 31LL, 37LL}) {
        if (n % p == 0) return n == p;
    }
    Int d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (Int a : {2LL, 3LL, 5LL, 7LL, 11LL, 13LL, 17LL, 19LL, 23LL, 29LL, 31LL, 37LL}) {
        Int x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 0; i < s - 1; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

FactoredInteger factor(Int n) {
    if (n == 0) return FactoredInteger{0, {}};
    FactoredInteger f;
    if (n < 0) { f.sign = -1; n = -n; }
    for (Int p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        f.factors.emplace_back(p, e);
        if (n > 1 && is_prime(n)) break;
    }
    if (n > 1) f.factors.emplace_back(n, 1);
    std::sort(f.factors.begin(), f.factors.end());
    return f;
}

int kronecker(Int a, Int n) {
    BigInt A(static_cast<long>(a)), N(static_cast<long>(n));
    return mpz_kronecker(A.get_mpz_t(), N.get_mpz_t());
}

Int sigma1(Int n) {
    if (n < 1) throw Error("sigma1 needs n >= 1");
    Int s = 1;
    for (auto [p, e] : factor(n).factors) {
        Int term = 1, pk = 1;
        for (int i = 0; i < e; ++i) { pk *= p; term += pk; }
        s *= term;
    }
    return s;
}

Int euler_phi(Int n) {
    if (n < 1) throw Error("euler_phi needs n >= 1");
    Int result = n;
    for (auto [p, e] : factor(n).factors) result = result / p * (p - 1);
    return result;
}

std::vector<Int> divisors(Int n) {
    std::vector<Int> divs{1};
    for (auto [p, e] : factor(n).factors) {
        size_t base = divs.size();
        Int pk = 1;
        for (int i = 0; i < e; ++i) {
            pk *= p;
            for (size_t j = 0; j < base; ++j) divs.push_back(divs[j] * pk);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

Int gcd_ll(Int a, Int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) { Int t = a % b; a = b; b = t; }
    return a;
}

Int pow_ll(Int base, int exp) {
    Int r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

} // namespace shimura
