#ifndef SHIMURA_QUADFIELD_HPP
#define SHIMURA_QUADFIELD_HPP

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "shimura/arith.hpp"

namespace shimura {

// Element of a real quadratic field in coordinates over the integral basis
// {1, omega}, omega = (r + sqrt(d))/2 with r = d mod 2.  Exact rational
// coordinates; integral elements have integer coordinates.
struct FElem {
    Int d = 0; // field discriminant; elements of distinct fields never mix
    Rat x, y;  // value = x + y*omega

    FElem() = default;
    FElem(Int d_, Rat x_, Rat y_) : d(d_), x(std::move(x_)), y(std::move(y_)) {}

    int r() const { return static_cast<int>(d & 1); }

    FElem conj() const;          // Galois conjugate
    Rat norm() const;            // x*conj(x)
    Rat trace() const;
    bool is_integral() const;
    bool is_zero() const { return sgn(x) == 0 && sgn(y) == 0; }
    bool is_rational() const { return sgn(y) == 0; }

    // coordinates over {1, sqrt(d)}: value = a + b*sqrt(d)
    std::pair<Rat, Rat> sqrt_basis() const;

    double embed(int which) const; // which = 0: +sqrt(d); 1: -sqrt(d)

    friend FElem operator+(const FElem& a, const FElem& b);
    friend FElem operator-(const FElem& a, const FElem& b);
    friend FElem operator-(const FElem& a);
    friend FElem operator*(const FElem& a, const FElem& b);
    friend FElem operator/(const FElem& a, const FElem& b);
    friend bool operator==(const FElem& a, const FElem& b);

    std::string str() const;
};

FElem felem_int(Int d, Rat value);                 // rational as field element
FElem felem_omega(Int d);                          // omega itself
std::optional<FElem> field_sqrt(const FElem& z);   // square root in F, if any

// Prime ideal of Z_F in a field of discriminant d (or of Z for d = 1).
struct PrimeIdeal {
    Int p = 0;    // rational prime below
    int f = 1;    // residue degree
    int e = 1;    // ramification index
    Int root = -1;  // root of the omega-minpoly mod p (split: this conjugate's
                    // label; ramified: the double root; inert: -1)
    Int norm = 0; // p^f

    bool split() const { return f == 1 && e == 1 && root >= 0; }
    bool inert() const { return f == 2; }
    bool ramified() const { return e == 2; }

    auto operator<=>(const PrimeIdeal&) const = default;
};

// Integral ideal in factored normal form.
struct Ideal {
    std::vector<std::pair<PrimeIdeal, int>> fac; // sorted, exponents >= 1
    Int norm = 1;

    bool is_unit() const { return fac.empty(); }
    bool squarefree() const;
    int n_primes() const { return static_cast<int>(fac.size()); }
    int val(const PrimeIdeal& p) const;

    auto operator<=>(const Ideal&) const = default;
    std::string str() const;
};

Ideal make_ideal(std::vector<std::pair<PrimeIdeal, int>> fac);
Ideal unit_ideal();
Ideal mul(const Ideal& a, const Ideal& b);
bool coprime(const Ideal& a, const Ideal& b);
bool divides(const Ideal& a, const Ideal& b); // a | b
Ideal quotient(const Ideal& b, const Ideal& a); // b / a, requires a | b

// The totally real base field: Q (degree 1) or a real quadratic field.
struct BaseField {
    int degree = 1;
    Int disc = 1;      // 1 for Q, else a fundamental discriminant > 0
    Int h = 1;         // class number
    Int h_plus = 1;    // narrow class number
    int eps_norm = 1;  // N(eps), degree 2 only
    FElem eps;         // fundamental unit, > 1; totally positive if N(eps) = +1
    Rat zeta_m1;       // zeta_F(-1)
    Rat a_prim;        // primitive area

    bool is_rational() const { return degree == 1; }
};

bool is_fundamental_discriminant(Int d); // includes d = 1
BaseField make_field(Int d);

Rat zeta_minus1(Int d);          // exact; Siegel's sigma_1-sum for d > 1
Rat aprim_of_disc(Int d);
Int narrow_class_number(Int d);  // cycles of reduced indefinite forms
Int imag_class_number(Int D);    // D < 0, any discriminant (not just fundamental)

// Fundamental unit of the maximal order, from the continued fraction of omega.
FElem fundamental_unit(Int d);

std::vector<PrimeIdeal> split_prime(const BaseField& F, Int p);
PrimeIdeal conj_prime(const BaseField& F, const PrimeIdeal& P);
Ideal tau_ideal(const BaseField& F, const Ideal& a);
bool tau_invariant(const BaseField& F, const Ideal& a);

// The principal ideal (m) for a positive rational integer m.
Ideal rational_ideal(const BaseField& F, Int m);

// All integral ideals of norm exactly m.
std::vector<Ideal> ideals_of_norm(const BaseField& F, Int m);

Int phi_of(const Ideal& D);  // #(Z_F/D)^*, D squarefree
Int psi_of(const Ideal& N);  // index [Gamma(1) : Gamma_0(N)]

// Numeric Euler-product zeta_F(2) over primes p <= pmax (cross-check only).
double zeta2_numeric(Int d, Int pmax);

// Numeric A_prim = 4 (2pi)^(-2n) d^(3/2) zeta_F(2) via zeta(2) * L(2, chi_d),
// with a proven tail bound from Abel summation (|tail of L| <= 2d/(N+1)^2).
struct NumericAprim {
    double value = 0;
    double tail_bound = 0; // bound on the absolute error of `value`
};
NumericAprim aprim_numeric(Int d, Int nterms);

} // namespace shimura

#endif
