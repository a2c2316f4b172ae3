#ifndef SHIMURA_ENUMERATE_HPP
#define SHIMURA_ENUMERATE_HPP

#include <string>
#include <vector>

#include "shimura/curves.hpp"

namespace shimura {

// Selberg-Zograf root discriminant bound (2pi)^(4/3) (16(g+1)/3)^(2/(3n)).
double sz_bound(int n, int g);

// Phi(D)*Psi(N) < M(F,g) = 64(g+1)/(3 A_prim)
Rat search_bound(const BaseField& F, int g);

struct FieldScan {
    std::vector<Int> discs; // sorted fundamental discriminants, degree 2
    double bound = 0;
};
FieldScan field_scan(int g);

struct CurveRecord {
    Int d_F = 1;
    Ideal D, N;
    Signature sig;
    std::string label; // disambiguator when (d_F, ND, NN) collides

    auto key() const { return std::tie(d_F, D.norm, N.norm, D, N); }
    friend bool operator==(const CurveRecord& a, const CurveRecord& b) {
        return a.key() == b.key() && a.sig == b.sig && a.label == b.label;
    }
    friend bool operator<(const CurveRecord& a, const CurveRecord& b) {
        if (a.key() != b.key()) return a.key() < b.key();
        if (!(a.sig == b.sig)) return a.sig < b.sig;
        return a.label < b.label;
    }
};

struct EnumerateOptions {
    bool include_modular = true;   // F = Q only: also list D = (1)
    bool refine_discriminants = false; // solve for Phi(p) instead of scanning
    EllipticConfig elliptic;
};

// canonical representative of the Galois orbit of the pair (D, N)
std::pair<Ideal, Ideal> tau_canonical_pair(const BaseField& F, const Ideal& D,
                                           const Ideal& N);

// Candidate discriminants: complete for genus <= g (soundness tested), possibly
// with extras that the genus test rejects.  Galois-canonical, sorted.
std::vector<Ideal> candidate_discriminants(CMCache& cache, const BaseField& F,
                                           int g, const EnumerateOptions& opt = {});

// All levels for a fixed discriminant, explored in divisibility order.
std::vector<CurveRecord> enumerate_levels(CMCache& cache, const BaseField& F,
                                          const Ideal& D, int g,
                                          const EnumerateOptions& opt = {});

std::vector<CurveRecord> enumerate_all(CMCache& cache, const BaseField& F, int g,
                                       const EnumerateOptions& opt = {});

// Exhaustive scan of all (D, N) with Phi*Psi < M(F,g); the pruning oracle.
std::vector<CurveRecord> naive_enumerate(CMCache& cache, const BaseField& F,
                                         int g, const EnumerateOptions& opt = {});

// Assign disambiguating labels within (d_F, ND, NN) collision groups, in place;
// records must be sorted.
void assign_labels(const BaseField& F, std::vector<CurveRecord>& records);

} // namespace shimura

#endif
