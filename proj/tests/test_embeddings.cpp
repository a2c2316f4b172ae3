#include <doctest.h>

#include "shimura/embeddings.hpp"

using namespace shimura;

namespace {

Ideal by_norm(const BaseField& F, Int m, size_t which = 0) {
    auto v = ideals_of_norm(F, m);
    REQUIRE(v.size() > which);
    return v[which];
}

// classical counts for X_0(N) over Q
Int e2_classical(Int N) {
    if (N % 4 == 0) return 0;
    Int e = 1;
    for (auto [p, k] : factor(N).factors) e *= 1 + kronecker(-4, p);
    return e;
}
Int e3_classical(Int N) {
    if (N % 9 == 0) return 0;
    Int e = 1;
    for (auto [p, k] : factor(N).factors) e *= 1 + kronecker(-3, p);
    return e;
}
Int einf_classical(Int N) {
    Int s = 0;
    for (Int d : divisors(N)) s += euler_phi(gcd_ll(d, N / d));
    return s;
}

} // namespace

TEST_CASE("local embedding counts: spec cases") {
    BaseField Q = make_field(1);
    CMCache cache;
    const CMData& K2 = cache.get(Q, 2);
    // p = 3 | D, 3 inert in Q(i): m = 2
    CHECK(local_embed(K2.orders[0], split_prime(Q, 3)[0],
                      PrimeRole::Discriminant) == 2);
    // p = 2, level e = 2 (X_0(4)): no solutions of x^2+1 = 0 mod 4
    CHECK(local_embed(K2.orders[0], split_prime(Q, 2)[0], PrimeRole::Level, 2) == 0);
    // F = Q(sqrt 5), R = Z_F[i], level (3) inert, e = 1: -1 is a square in F_9
    BaseField F5 = make_field(5);
    CMCache cache5;
    const CMData& K52 = cache5.get(F5, 2);
    CHECK(local_embed(K52.orders[0], split_prime(F5, 3)[0], PrimeRole::Level, 1) == 2);
}

TEST_CASE("odd closed form equals exhaustive counting") {
    // all stored orders, all odd prime powers with N(P)^e <= 343
    std::vector<Int> fields{1, 5, 8, 12, 13, 17, 24, 28, 40};
    for (Int d : fields) {
        BaseField F = make_field(d);
        CMCache cache;
        for (int q : admissible_q(F)) {
            const CMData& data = cache.get(F, q);
            for (const CMOrder& R : data.orders) {
                for (Int p : {3LL, 5LL, 7LL, 11LL}) {
                    for (const PrimeIdeal& P : split_prime(F, p)) {
                        for (int e = 1; pow_ll(P.norm, e) <= 343; ++e) {
                            Int closed = local_embed(R, P, PrimeRole::Level, e);
                            Int brute = local_embed_exhaustive(R, P, e);
                            CHECK_MESSAGE(closed == brute, "d=", d, " q=", q,
                                          " cond=", R.cond.str(), " p=", p,
                                          " norm=", P.norm, " e=", e);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("even-prime staged procedure equals exhaustive counting") {
    // 2-power moduli <= 64 over Q, and both quadratic behaviours of 2
    // (inert for d=5, ramified for d=8), plus split 2 for d=17
    std::vector<Int> fields{1, 5, 8, 17, 12, 24, 28, 40};
    for (Int d : fields) {
        BaseField F = make_field(d);
        CMCache cache;
        for (int q : admissible_q(F)) {
            const CMData& data = cache.get(F, q);
            for (const CMOrder& R : data.orders) {
                for (const PrimeIdeal& P : split_prime(F, 2)) {
                    for (int e = 1; pow_ll(P.norm, e) <= 64; ++e) {
                        Int staged = local_embed(R, P, PrimeRole::Level, e);
                        Int brute = local_embed_exhaustive(R, P, e);
                        CHECK_MESSAGE(staged == brute, "d=", d, " q=", q,
                                      " cond=", R.cond.str(), " norm=", P.norm,
                                      " e=", e);
                    }
                }
            }
        }
    }
}

TEST_CASE("elliptic counts: reference values") {
    BaseField Q = make_field(1);
    CMCache cache;
    CHECK(elliptic_count(cache, Q, 2, rational_ideal(Q, 6), unit_ideal()) == 2);
    CHECK(elliptic_count(cache, Q, 2, rational_ideal(Q, 6), rational_ideal(Q, 5)) == 4);
    CHECK(elliptic_count(cache, Q, 3, rational_ideal(Q, 26), unit_ideal()) == 0);
    BaseField F8 = make_field(8);
    CMCache cache8;
    CHECK(elliptic_count(cache8, F8, 4, by_norm(F8, 2), unit_ideal()) == 1);
    // with the printed 1/(2h) prefactor the order sum over d_F = 12 comes out
    // fractional (the full-calibration value is e_2 = 3)
    BaseField F12 = make_field(12);
    CMCache cache12;
    Ideal D3 = by_norm(F12, 3);
    CHECK(elliptic_count(cache12, F12, 2, D3, unit_ideal()) == 3);
    EllipticConfig half;
    half.half_calibration = true;
    CHECK_THROWS_AS(elliptic_count(cache12, F12, 2, D3, unit_ideal(), half),
                    NonIntegralCount);
}

TEST_CASE("a split prime in the discriminant kills e_q") {
    BaseField Q = make_field(1);
    CMCache cache;
    // 13 splits in Q(i): e_2 of D = 26 vanishes
    CHECK(elliptic_count(cache, Q, 2, rational_ideal(Q, 26), unit_ideal()) == 0);
    BaseField F28 = make_field(28);
    CMCache c28;
    // the norm-2 prime of Q(sqrt 28) splits in K_2 = F(i)
    CHECK(splitting_in_cm(c28.get(F28, 2).field, split_prime(F28, 2)[0]) == 1);
    CHECK(elliptic_count(c28, F28, 2, by_norm(F28, 2), unit_ideal()) == 0);
}

TEST_CASE("classical oracle: X_0(N) for N <= 50") {
    BaseField Q = make_field(1);
    CMCache cache;
    for (Int N = 1; N <= 50; ++N) {
        Ideal lvl = rational_ideal(Q, N);
        CHECK_MESSAGE(elliptic_count(cache, Q, 2, unit_ideal(), lvl) ==
                      e2_classical(N), "N=", N);
        CHECK_MESSAGE(elliptic_count(cache, Q, 3, unit_ideal(), lvl) ==
                      e3_classical(N), "N=", N);
        CHECK(cusp_count(N) == einf_classical(N));
    }
    CHECK(cusp_count(1) == 1);
    CHECK(cusp_count(4) == 3);
    CHECK(cusp_count(12) == 6);
}

TEST_CASE("Galois equivariance of e_q") {
    for (Int d : {5LL, 8LL, 17LL, 40LL}) {
        BaseField F = make_field(d);
        CMCache cache;
        for (int q : admissible_q(F)) {
            for (Int Dn : {2LL, 3LL, 5LL, 7LL, 11LL}) {
                for (const Ideal& D : ideals_of_norm(F, Dn)) {
                    if (!D.squarefree() || D.n_primes() != 1) continue;
                    for (Int Nn : {1LL, 2LL, 3LL, 4LL, 5LL, 9LL}) {
                        for (const Ideal& N : ideals_of_norm(F, Nn)) {
                            if (!coprime(D, N)) continue;
                            CHECK(elliptic_count(cache, F, q, D, N) ==
                                  elliptic_count(cache, F, q, tau_ideal(F, D),
                                                 tau_ideal(F, N)));
                        }
                    }
                }
            }
        }
    }
}
