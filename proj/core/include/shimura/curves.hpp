#ifndef SHIMURA_CURVES_HPP
#define SHIMURA_CURVES_HPP

#include <string>
#include <vector>

#include "shimura/embeddings.hpp"

namespace shimura {

struct ShimuraDatum {
    const BaseField* F = nullptr;
    Ideal D, N;
};

// Checks squarefreeness, coprimality and the parity condition.
ShimuraDatum validate(const BaseField& F, Ideal D, Ideal N);

// Shimizu: area = A_prim * Phi(D) * Psi(N), exact.
Rat area(const ShimuraDatum& X);

struct Signature {
    Int genus = 0;
    std::vector<std::pair<int, Int>> elliptic; // (order q, count e_q > 0), sorted
    Int cusps = 0;
    Rat area;

    auto key() const { return std::tie(genus, elliptic, cusps); }
    friend bool operator==(const Signature& a, const Signature& b) {
        return a.key() == b.key() && a.area == b.area;
    }
    friend bool operator<(const Signature& a, const Signature& b) {
        if (a.key() != b.key()) return a.key() < b.key();
        return cmp(a.area, b.area) < 0;
    }
};

Signature signature(CMCache& cache, const ShimuraDatum& X,
                    const EllipticConfig& cfg = {});

// "(g;o1^k1,o2^k2;s)" with ^1 suppressed, "-" for no elliptic cycles and the
// cusp part omitted when s = 0.
std::string render_signature(const Signature& sig);
Signature parse_signature(const std::string& text); // genus/elliptic/cusps only

} // namespace shimura

#endif
