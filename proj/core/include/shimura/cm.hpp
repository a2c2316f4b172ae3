#ifndef SHIMURA_CM_HPP
#define SHIMURA_CM_HPP

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "shimura/local.hpp"
#include "shimura/quadfield.hpp"

namespace shimura {

// Element a + b*theta of K = F(theta), theta = zeta_2q, theta^2 = t*theta - n.
struct KElem {
    FElem a, b;
};

using Vec4 = std::array<Rat, 4>;
using Mat4 = std::array<Vec4, 4>;

// Search bounds for the unit-index computation, and the override hook used
// when the bounded search is inconclusive.
struct CMConfig {
    int unit_search_bound = 8;
    std::string override_path; // empty: no override file
};

struct CMField {
    BaseField F;
    int q = 0;
    FElem t, n;       // theta^2 = t*theta - n
    FElem dtheta;     // t^2 - 4n, totally negative
    int degree = 2;   // absolute degree = 2n

    // degree-1 data: K is the imaginary quadratic field of this discriminant
    Int imag_disc = 0;

    // degree-2 data
    Mat4 basis;       // columns: Z_K basis in {1, w, theta, w*theta} coords
    Mat4 basis_inv;
    BigInt abs_disc;  // |d_K|
    Ideal rel_disc;   // discriminant of K/F
    Ideal cond0;      // conductor of Z_F[theta] in Z_K
    int w_K = 0;
    std::vector<KElem> torsion; // all w_K roots of unity
    KElem eta;        // fundamental unit mod torsion (eps, or a square root of
                      // zeta*eps when the Hasse index is 2)
    bool hasse2 = false;
    Int h_K = 1;
};

struct CMOrder {
    const CMField* K = nullptr;
    Ideal cond;
    std::array<std::array<BigInt, 4>, 4> lat{}; // HNF rows, integral-basis coords
    int w_R = 0;
    Int h_R = 1;
    int Q_R = 1;
    Int unit_index = 1;
    int eta_k = 1; // least k >= 1 with zeta * eta^k in R
};

struct CMData {
    CMField field;
    std::vector<CMOrder> orders; // exactly those with w(R) = 2q
};

// all q >= 2 with [F(zeta_2q) : F] = 2
std::vector<int> admissible_q(const BaseField& F);

CMField cm_field(const BaseField& F, int q, const CMConfig& cfg = {});

// -1 inert / 0 ramified / +1 split in K/F
int splitting_in_cm(const CMField& K, const PrimeIdeal& P);

std::vector<CMOrder> order_lattice(const CMField& K, const CMConfig& cfg = {});

// Local generator data of R at P: gamma with R_P = Z_{F,P}[gamma], returning
// trace, norm and f = v_P(cond R).
struct LocalGenerator {
    FElem tr, nm;
    int f = 0;
    int v_disc = 0; // v_P(tr^2 - 4*nm) = 2f + v_P(disc K/F)
};
LocalGenerator local_poly(const CMOrder& R, const PrimeIdeal& P);

// Square root in K, exact; nullopt when x is not a square.
std::optional<KElem> ksqrt(const CMField& K, const KElem& x);

bool in_order(const CMOrder& R, const KElem& x);

// Memoizing cache, shareable across enumeration workers.
class CMCache {
public:
    explicit CMCache(CMConfig cfg = {}) : cfg_(std::move(cfg)) {}
    const CMData& get(const BaseField& F, int q);
    const CMConfig& config() const { return cfg_; }

private:
    CMConfig cfg_;
    std::mutex mu_;
    std::map<std::pair<Int, int>, std::unique_ptr<CMData>> cache_;
};

// Brute-force class number via Minkowski-bounded prime ideals and T2-bounded
// principality search. Exact but exponential in the regulator; used as a
// cross-check oracle on fields with small fundamental units.
Int class_number_bruteforce(const CMField& K, double t2_budget = 5e7);

} // namespace shimura

#endif
