#include "shimura/quadfield.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace shimura {

// ---------------------------------------------------------------- FElem ----

namespace {
// omega^2 = r*omega + (d - r^2)/4
Rat omega_sq_const(Int d) {
    Int r = d & 1;
    return make_rat((d - r * r) / 4);
}
} // namespace

FElem FElem::conj() const {
    // conj(omega) = r - omega
    FElem c(d, x + Rat(r()) * y, -y);
    return c;
}

Rat FElem::norm() const {
    // N(x + y*omega) = x^2 + r*x*y - y^2*(d - r^2)/4
    return x * x + Rat(r()) * x * y - y * y * omega_sq_const(d);
}

Rat FElem::trace() const { return 2 * x + Rat(r()) * y; }

bool FElem::is_integral() const {
    return x.get_den() == 1 && y.get_den() == 1;
}

std::pair<Rat, Rat> FElem::sqrt_basis() const {
    // x + y*(r + sqrt(d))/2 = (x + y*r/2) + (y/2)*sqrt(d)
    return {x + y * Rat(r()) / 2, y / 2};
}

double FElem::embed(int which) const {
    auto [a, b] = sqrt_basis();
    double sd = std::sqrt(static_cast<double>(d));
    return a.get_d() + (which == 0 ? 1.0 : -1.0) * b.get_d() * sd;
}

FElem operator+(const FElem& a, const FElem& b) {
    return FElem(a.d ? a.d : b.d, a.x + b.x, a.y + b.y);
}
FElem operator-(const FElem& a, const FElem& b) {
    return FElem(a.d ? a.d : b.d, a.x - b.x, a.y - b.y);
}
FElem operator-(const FElem& a) { return FElem(a.d, -a.x, -a.y); }

FElem operator*(const FElem& a, const FElem& b) {
    Rat q = omega_sq_const(a.d);
    Rat r(static_cast<long>(a.d & 1));
    return FElem(a.d,
                 a.x * b.x + q * a.y * b.y,
                 a.x * b.y + a.y * b.x + r * a.y * b.y);
}

FElem operator/(const FElem& a, const FElem& b) {
    Rat n = b.norm();
    if (sgn(n) == 0) throw Error("division by zero field element");
    FElem num = a * b.conj();
    return FElem(a.d, num.x / n, num.y / n);
}

bool operator==(const FElem& a, const FElem& b) { return a.x == b.x && a.y == b.y; }

std::string FElem::str() const {
    std::ostringstream os;
    os << x.get_str();
    if (sgn(y) != 0) os << (sgn(y) > 0 ? "+" : "") << y.get_str() << "w";
    return os.str();
}

FElem felem_int(Int d, Rat value) { return FElem(d, std::move(value), 0); }
FElem felem_omega(Int d) { return FElem(d, 0, 1); }

std::optional<FElem> field_sqrt(const FElem& z) {
    if (z.is_zero()) return felem_int(z.d, 0);
    auto [a, b] = z.sqrt_basis(); // z = a + b*sqrt(d)
    if (sgn(b) == 0) {
        Rat s;
        if (rat_sqrt(a, &s)) return felem_int(z.d, s);
        // maybe z = (t*sqrt(d))^2 / d form: a/d a square times d
        Rat t;
        if (rat_sqrt(a / Rat(static_cast<long>(z.d)), &t)) {
            // sqrt = t*sqrt(d) = 2t*omega - t*r
            return FElem(z.d, -t * Rat(z.r()), 2 * t);
        }
        return std::nullopt;
    }
    Rat nz = a * a - Rat(static_cast<long>(z.d)) * b * b; // N(z)
    Rat s;
    if (!rat_sqrt(nz, &s)) return std::nullopt;
    for (int sign = 0; sign < 2; ++sign) {
        Rat cand = (a + (sign ? -s : s)) / 2; // u0^2 where sqrt = u0 + u1*sqrt(d)
        Rat u0;
        if (sgn(cand) >= 0 && rat_sqrt(cand, &u0) && sgn(u0) != 0) {
            Rat u1 = b / (2 * u0);
            // back to omega coordinates
            FElem u(z.d, u0 - u1 * Rat(z.r()), 2 * u1);
            if (u * u == z) return u;
            FElem v = -u;
            if (v * v == z) return v;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- ideals ---

bool Ideal::squarefree() const {
    for (auto& [p, e] : fac)
        if (e > 1) return false;
    return true;
}

int Ideal::val(const PrimeIdeal& p) const {
    for (auto& [q, e] : fac)
        if (q == p) return e;
    return 0;
}

std::string Ideal::str() const {
    if (fac.empty()) return "(1)";
    std::ostringstream os;
    bool first = true;
    for (auto& [p, e] : fac) {
        if (!first) os << "*";
        first = false;
        os << "P" << p.norm;
        if (p.split()) os << "[" << p.root << "]";
        if (p.ramified()) os << "r";
        if (e > 1) os << "^" << e;
    }
    return os.str();
}

Ideal make_ideal(std::vector<std::pair<PrimeIdeal, int>> fac) {
    Ideal a;
    std::sort(fac.begin(), fac.end(), [](auto& l, auto& r) {
        return std::tie(l.first.norm, l.first.root, l.first.p) <
               std::tie(r.first.norm, r.first.root, r.first.p);
    });
    for (auto& [p, e] : fac) {
        if (e == 0) continue;
        if (e < 0) throw Error("negative exponent in ideal");
        if (!a.fac.empty() && a.fac.back().first == p)
            a.fac.back().second += e;
        else
            a.fac.emplace_back(p, e);
    }
    a.norm = 1;
    for (auto& [p, e] : a.fac) a.norm *= pow_ll(p.norm, e);
    return a;
}

Ideal unit_ideal() { return Ideal{}; }

Ideal mul(const Ideal& a, const Ideal& b) {
    auto fac = a.fac;
    fac.insert(fac.end(), b.fac.begin(), b.fac.end());
    return make_ideal(std::move(fac));
}

bool coprime(const Ideal& a, const Ideal& b) {
    for (auto& [p, e] : a.fac)
        if (b.val(p) > 0) return false;
    return true;
}

bool divides(const Ideal& a, const Ideal& b) {
    for (auto& [p, e] : a.fac)
        if (b.val(p) < e) return false;
    return true;
}

Ideal quotient(const Ideal& b, const Ideal& a) {
    if (!divides(a, b)) throw Error("ideal quotient not integral");
    std::vector<std::pair<PrimeIdeal, int>> fac;
    for (auto& [p, e] : b.fac) {
        int e2 = e - a.val(p);
        if (e2 > 0) fac.emplace_back(p, e2);
    }
    return make_ideal(std::move(fac));
}

// ----------------------------------------------------------- base field ----

bool is_fundamental_discriminant(Int d) {
    if (d == 1) return true;
    if (d <= 0) return false;
    auto squarefree = [](Int n) {
        for (auto [p, e] : factor(n).factors)
            if (e > 1) return false;
        return true;
    };
    Int m4 = d % 4;
    if (m4 == 1) return squarefree(d);
    if (m4 == 0) {
        Int m = d / 4;
        Int mm = m % 4;
        return (mm == 2 || mm == 3) && squarefree(m);
    }
    return false;
}

Rat zeta_minus1(Int d) {
    if (d == 1) return make_rat(-1, 12);
    Rat sum = 0;
    Int r = d & 1;
    for (Int b = r; b * b < d; b += 2) {
        Int s = sigma1((d - b * b) / 4);
        sum += make_rat(b == 0 ? s : 2 * s);
    }
    return sum / 60;
}

Rat aprim_of_disc(Int d) {
    // (-1)^n * 2^(2-n) * zeta_F(-1)
    if (d == 1) return make_rat(-2) * zeta_minus1(1);
    return zeta_minus1(d);
}

// Reduced indefinite forms (a,b,c), b^2 - 4ac = d: reduced iff
// 0 < b < sqrt(d) and sqrt(d) - b < 2|a| < sqrt(d) + b.
namespace {

struct Form {
    Int a, b, c;
    auto operator<=>(const Form&) const = default;
};

// reduced indefinite form: 0 < b < sqrt(d) and sqrt(d) - b < 2|a| < sqrt(d) + b
bool form_reduced(Int d, const Form& F) {
    Int b = F.b;
    if (b <= 0 || b * b >= d) return false;
    Int fourA2 = 4 * F.a * F.a;
    Int L = d + b * b - fourA2; // want L < 2b*sqrt(d)
    if (L >= 0 && L * L >= 4 * b * b * d) return false;
    Int R = fourA2 - d - b * b; // want R < 2b*sqrt(d)
    if (R >= 0 && R * R >= 4 * b * b * d) return false;
    return true;
}

Form rho(Int d, const Form& F) {
    Int a2 = F.c;
    Int abs2 = 2 * (a2 < 0 ? -a2 : a2);
    Int s = isqrt(d);
    // b2 = -b mod 2|c|, the unique representative with s+1-2|c| <= b2 <= s
    Int b2 = ((-F.b) % abs2 + abs2) % abs2;
    while (b2 > s) b2 -= abs2;
    while (b2 + abs2 <= s) b2 += abs2;
    Int c2 = (b2 * b2 - d) / (4 * a2);
    return Form{a2, b2, c2};
}

} // namespace

Int narrow_class_number(Int d) {
    if (d == 1) return 1;
    std::set<Form> reduced;
    for (Int b = 1; b * b < d; ++b) {
        if (((b * b - d) % 4 + 4) % 4 != 0) continue;
        Int M = (d - b * b) / 4; // = -a*c > 0
        for (Int a = 1; a * a <= M; ++a) {
            if (M % a) continue;
            Int c = M / a;
            for (auto [A, C] : {std::pair<Int, Int>{a, -c}, {c, -a},
                                {-a, c}, {-c, a}}) {
                Form F{A, b, C};
                if (gcd_ll(gcd_ll(A, b), C) == 1 && form_reduced(d, F))
                    reduced.insert(F);
            }
        }
    }
    Int cycles = 0;
    std::set<Form> seen;
    for (const Form& F : reduced) {
        if (seen.count(F)) continue;
        ++cycles;
        Form g = F;
        size_t guard = 0;
        do {
            seen.insert(g);
            g = rho(d, g);
            if (++guard > 4 * reduced.size() + 16)
                throw InternalInconsistency("form cycle did not close");
        } while (!(g == F));
    }
    return cycles;
}

Int imag_class_number(Int D) {
    Int m = ((D % 4) + 4) % 4;
    if (D >= 0 || (m != 0 && m != 1))
        throw Error("imag_class_number needs a negative discriminant");
    Int h = 0;
    for (Int a = 1; 3 * a * a <= -D; ++a) {
        for (Int b = -a + 1; b <= a; ++b) {
            Int num = b * b - D;
            if (num % (4 * a)) continue;
            Int c = num / (4 * a);
            if (c < a) continue;
            if (b < 0 && c == a) continue; // (a,b,a) ~ (a,-b,a)
            if (gcd_ll(gcd_ll(a, b), c) != 1) continue;
            ++h;
        }
    }
    return h;
}

namespace {
Int floordiv(Int a, Int b) {
    Int q = a / b, rem = a % b;
    if (rem != 0 && ((rem < 0) != (b < 0))) --q;
    return q;
}
} // namespace

FElem fundamental_unit(Int d) {
    if (d == 1) throw Error("fundamental_unit needs degree 2");
    // continued fraction of omega = (r + sqrt(d))/2
    Int r = d & 1;
    Int P = r, Q = 2;
    Int s = isqrt(d);
    std::map<std::pair<Int, Int>, int> seen;
    std::vector<Int> as;
    std::vector<std::pair<Int, Int>> states;
    int start = -1;
    for (int i = 0;; ++i) {
        auto st = std::make_pair(P, Q);
        auto it = seen.find(st);
        if (it != seen.end()) { start = it->second; break; }
        seen[st] = i;
        states.push_back(st);
        // floor((P + sqrt(d))/Q) = floordiv(P + isqrt(d), Q), d non-square
        Int a = floordiv(P + s, Q);
        as.push_back(a);
        P = a * Q - P;
        if (Q == 0) throw Error("discriminant is a perfect square");
        Q = (d - P * P) / Q;
    }
    // convergents over one full period starting at the cycle entry point
    BigInt p2 = 0, p1 = 1, q2 = 1, q1 = 0; // p_{-1}=1, p_{-2}=0 convention
    for (size_t i = start; i < as.size(); ++i) {
        BigInt a(static_cast<long>(as[i]));
        BigInt pn = a * p1 + p2, qn = a * q1 + q2;
        p2 = p1; p1 = pn;
        q2 = q1; q1 = qn;
    }
    // alpha_start is purely periodic: alpha = (p1*alpha + p2)/(q1*alpha + q2),
    // and q1*alpha + q2 is the fundamental automorph, a unit of O_d.
    auto [P0, Q0] = states[start];
    // q1*(P0 + sqrt(d))/Q0 + q2, in {1, sqrt(d)} coordinates
    Rat sq_coef = Rat(q1) / Rat(static_cast<long>(Q0));
    Rat one_coef = Rat(q1) * Rat(static_cast<long>(P0)) /
                       Rat(static_cast<long>(Q0)) +
                   Rat(q2);
    // a + b*sqrt(d) = (a - b*r) + 2b*omega
    FElem eps(d, one_coef - sq_coef * Rat(static_cast<long>(r)), 2 * sq_coef);
    Rat n = eps.norm();
    if (!(n == Rat(1) || n == Rat(-1)) || !eps.is_integral())
        throw InternalInconsistency("continued fraction did not produce a unit");
    // normalize to eps > 1 under the positive embedding
    if (eps.embed(0) < 0) eps = -eps;
    if (eps.embed(0) < 1) {
        FElem inv = eps.conj(); // 1/eps up to sign
        if (n == Rat(-1)) inv = -inv;
        eps = inv;
        if (eps.embed(0) < 0) eps = -eps;
    }
    return eps;
}

BaseField make_field(Int d) {
    if (d < 1) throw NotTotallyReal("discriminant must be positive");
    if (!is_fundamental_discriminant(d))
        throw NonFundamentalDiscriminant("d = " + std::to_string(d));
    BaseField F;
    if (d == 1) {
        F.degree = 1;
        F.disc = 1;
        F.h = F.h_plus = 1;
        F.zeta_m1 = zeta_minus1(1);
        F.a_prim = aprim_of_disc(1);
        return F;
    }
    F.degree = 2;
    F.disc = d;
    F.h_plus = narrow_class_number(d);
    F.eps = fundamental_unit(d);
    F.eps_norm = (F.eps.norm() == Rat(1)) ? 1 : -1;
    F.h = F.eps_norm == 1 ? F.h_plus / 2 : F.h_plus;
    if (F.h * (F.eps_norm == 1 ? 2 : 1) != F.h_plus)
        throw InternalInconsistency("narrow class number parity mismatch");
    F.zeta_m1 = zeta_minus1(d);
    F.a_prim = aprim_of_disc(d);
    if (sgn(F.a_prim) <= 0) throw InternalInconsistency("A_prim must be positive");
    return F;
}

// ------------------------------------------------------- prime splitting ---

std::vector<PrimeIdeal> split_prime(const BaseField& F, Int p) {
    if (!is_prime(p)) throw Error("split_prime needs a prime");
    if (F.is_rational()) {
        return {PrimeIdeal{p, 1, 1, -1, p}};
    }
    Int d = F.disc;
    int k = kronecker(d, p);
    if (k == -1) return {PrimeIdeal{p, 2, 1, -1, p * p}};
    // minpoly of omega: x^2 - r*x + (r^2 - d)/4
    Int r = d & 1;
    Int c = (r * r - d) / 4;
    std::vector<Int> roots;
    for (Int x = 0; x < p; ++x)
        if (((x * x - r * x + c) % p + p) % p == 0) roots.push_back(x);
    if (k == 1) {
        if (roots.size() != 2)
            throw InternalInconsistency("split prime without two roots");
        return {PrimeIdeal{p, 1, 1, roots[0], p},
                PrimeIdeal{p, 1, 1, roots[1], p}};
    }
    if (roots.size() != 1)
        throw InternalInconsistency("ramified prime without a double root");
    return {PrimeIdeal{p, 1, 2, roots[0], p}};
}

PrimeIdeal conj_prime(const BaseField& F, const PrimeIdeal& P) {
    if (!P.split()) return P;
    for (const auto& Q : split_prime(F, P.p))
        if (!(Q == P)) return Q;
    throw InternalInconsistency("conjugate prime not found");
}

Ideal tau_ideal(const BaseField& F, const Ideal& a) {
    std::vector<std::pair<PrimeIdeal, int>> fac;
    for (auto& [p, e] : a.fac) fac.emplace_back(conj_prime(F, p), e);
    return make_ideal(std::move(fac));
}

bool tau_invariant(const BaseField& F, const Ideal& a) {
    return tau_ideal(F, a) == a;
}

Ideal rational_ideal(const BaseField& F, Int m) {
    if (m < 1) throw Error("rational_ideal needs m >= 1");
    std::vector<std::pair<PrimeIdeal, int>> fac;
    for (auto [p, e] : factor(m).factors) {
        for (const auto& P : split_prime(F, p))
            fac.emplace_back(P, P.ramified() ? 2 * e : e);
    }
    return make_ideal(std::move(fac));
}

std::vector<Ideal> ideals_of_norm(const BaseField& F, Int m) {
    if (m < 1) throw Error("ideals_of_norm needs m >= 1");
    std::vector<Ideal> result{unit_ideal()};
    for (auto [p, a] : factor(m).factors) {
        auto primes = split_prime(F, p);
        std::vector<std::vector<std::pair<PrimeIdeal, int>>> local;
        if (F.is_rational()) {
            local.push_back({{primes[0], a}});
        } else if (primes.size() == 2) {
            for (int i = 0; i <= a; ++i) {
                std::vector<std::pair<PrimeIdeal, int>> part;
                if (i) part.emplace_back(primes[0], i);
                if (a - i) part.emplace_back(primes[1], a - i);
                local.push_back(part);
            }
        } else if (primes[0].inert()) {
            if (a % 2) return {};
            local.push_back({{primes[0], a / 2}});
        } else { // ramified
            local.push_back({{primes[0], a}});
        }
        std::vector<Ideal> next;
        for (const Ideal& base : result)
            for (auto& part : local) {
                auto fac = base.fac;
                fac.insert(fac.end(), part.begin(), part.end());
                next.push_back(make_ideal(std::move(fac)));
            }
        result = std::move(next);
    }
    for (const Ideal& a : result)
        if (a.norm != m) throw InternalInconsistency("ideal norm mismatch");
    std::sort(result.begin(), result.end());
    return result;
}

Int phi_of(const Ideal& D) {
    if (!D.squarefree()) throw NotSquarefree("phi_of needs squarefree ideal");
    Int v = 1;
    for (auto& [p, e] : D.fac) v *= (p.norm - 1);
    return v;
}

Int psi_of(const Ideal& N) {
    Int v = 1;
    for (auto& [p, e] : N.fac) v *= pow_ll(p.norm, e - 1) * (p.norm + 1);
    return v;
}

NumericAprim aprim_numeric(Int d, Int nterms) {
    NumericAprim out;
    double zeta2 = M_PI * M_PI / 6.0;
    if (d == 1) {
        out.value = 4.0 / std::pow(2 * M_PI, 2) * zeta2;
        out.tail_bound = 0;
        return out;
    }
    // chi_d is periodic mod d
    std::vector<int> chi(d);
    for (Int n = 0; n < d; ++n) chi[n] = kronecker(d, n);
    double L = 0;
    for (Int n = 1; n <= nterms; ++n) {
        int c = chi[n % d];
        if (c) L += c / (static_cast<double>(n) * n);
    }
    double prefactor =
        4.0 / std::pow(2 * M_PI, 4) * std::pow(static_cast<double>(d), 1.5) * zeta2;
    out.value = prefactor * L;
    double ltail = 2.0 * static_cast<double>(d) /
                   (static_cast<double>(nterms + 1) * (nterms + 1));
    out.tail_bound = prefactor * ltail + 1e-12; // plus double round-off slack
    return out;
}

double zeta2_numeric(Int d, Int pmax) {
    // Euler product over rational primes split according to kronecker(d, .)
    double z = 1.0;
    for (Int p = 2; p <= pmax; ++p) {
        if (!is_prime(p)) continue;
        double q = static_cast<double>(p);
        if (d == 1) {
            z /= (1.0 - 1.0 / (q * q));
            continue;
        }
        int k = kronecker(d, p);
        if (k == 1)
            z /= (1.0 - 1.0 / (q * q)) * (1.0 - 1.0 / (q * q));
        else if (k == -1)
            z /= (1.0 - 1.0 / (q * q * q * q));
        else
            z /= (1.0 - 1.0 / (q * q));
    }
    return z;
}

} // namespace shimura
