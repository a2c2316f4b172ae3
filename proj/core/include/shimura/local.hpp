#ifndef SHIMURA_LOCAL_HPP
#define SHIMURA_LOCAL_HPP

#include <vector>

#include "shimura/quadfield.hpp"

namespace shimura {

// Integral element of Z_F in int64 coordinates over {1, omega}.
struct ZElem {
    Int x = 0, y = 0;
    bool is_zero() const { return x == 0 && y == 0; }
};

ZElem zelem_of(const FElem& a); // requires integral coordinates

// Upper-triangular HNF lattice with basis (A, 0), (B, C); index A*C in Z_F.
struct Lat2 {
    Int A = 1, B = 0, C = 1;
    bool contains(Int x, Int y) const;
    std::pair<Int, Int> reduce(Int x, Int y) const;
};

// Arithmetic of Z_F localized at one prime ideal, with cached power lattices.
class LocalPrime {
public:
    LocalPrime(Int d, PrimeIdeal P);

    const PrimeIdeal& prime() const { return P_; }
    Int field_disc() const { return d_; }
    int e2() const { return P_.p == 2 ? P_.e : 0; } // v_P(2)

    Lat2 power(int r); // lattice of P^r, r >= 0
    bool in_power(const ZElem& z, int r);
    int val(const ZElem& z, int cap = 64); // throws if z in P^cap

    ZElem mul(const ZElem& a, const ZElem& b) const;
    ZElem reduce(const ZElem& z, int r);

    std::vector<ZElem> residues(int r);  // representatives of Z_F/P^r
    std::vector<ZElem> cosets(int r);    // representatives of P^r/P^{r+1}

    // True iff z (nonzero) is a square in the completion F_P.
    bool is_local_square(const ZElem& z);

private:
    Int d_;
    PrimeIdeal P_;
    std::vector<Lat2> powers_;
    std::vector<Int> root_lift_; // split/ramified: root of omega-minpoly mod p^k
};

struct LocalRootCount {
    Int roots = 0;  // #E(e):   roots of f mod P^e
    Int image = 0;  // #img(E(e+1) -> Z_F/P^e)
};

// Solutions of x^2 - t*x + n over Z_F/P^e, by the F2-linear + Hensel-lift
// staged procedure (production path for even primes).
LocalRootCount count_roots_staged(LocalPrime& L, const ZElem& t, const ZElem& n, int e);

// Same counts by full enumeration of residues (test oracle).
LocalRootCount count_roots_exhaustive(LocalPrime& L, const ZElem& t, const ZElem& n, int e);

// Degree-1 analogues over Z/p^e.
LocalRootCount count_roots_staged_q(Int p, Int t, Int n, int e);
LocalRootCount count_roots_exhaustive_q(Int p, Int t, Int n, int e);

} // namespace shimura

#endif
