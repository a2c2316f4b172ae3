#ifndef SHIMURA_EMBEDDINGS_HPP
#define SHIMURA_EMBEDDINGS_HPP

#include <vector>

#include "shimura/cm.hpp"

namespace shimura {

enum class PrimeRole { Unramified, Discriminant, Level };

struct EllipticConfig {
    bool half_calibration = false; // use the 1/(2h(F)) prefactor instead of 1/h(F)
};

// Local optimal-embedding count m(R_P, O_P); e = ord_P(N) for level primes.
Int local_embed(const CMOrder& R, const PrimeIdeal& P, PrimeRole role, int e = 0);

// Same, by exhaustive residue counting (test oracle for the closed forms).
Int local_embed_exhaustive(const CMOrder& R, const PrimeIdeal& P, int e);

// Per-order audit data for one e_q evaluation.
struct OrderContribution {
    Ideal cond;
    Int h_R = 0;
    int Q_R = 1;
    Int unit_index = 1;
    std::vector<std::tuple<PrimeIdeal, int, Int>> local; // (P, ord_P, m)
    Rat term; // h_R/Q_R * prod m
};

struct EllipticDetail {
    int q = 0;
    Rat prefactor;
    std::vector<OrderContribution> orders;
    Int e_q = 0;
};

Int elliptic_count(CMCache& cache, const BaseField& F, int q, const Ideal& D,
                   const Ideal& N, const EllipticConfig& cfg = {});

// The class-number-weighted embedding mass behind e_q, without the
// integrality check; fractional for formal data of the wrong parity.
Rat elliptic_mass(CMCache& cache, const BaseField& F, int q, const Ideal& D,
                  const Ideal& N, const EllipticConfig& cfg = {});

EllipticDetail elliptic_count_detail(CMCache& cache, const BaseField& F, int q,
                                     const Ideal& D, const Ideal& N,
                                     const EllipticConfig& cfg = {});

// Number of cusps of X_0(N) over Q.
Int cusp_count(Int N);

} // namespace shimura

#endif
