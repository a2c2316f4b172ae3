#include "shimura/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace shimura {

double sz_bound(int n, int g) {
    if (n < 1) throw Error("degree must be positive");
    return std::pow(2 * M_PI, 4.0 / 3.0) *
           std::pow(16.0 * (g + 1) / 3.0, 2.0 / (3.0 * n));
}

Rat search_bound(const BaseField& F, int g) {
    return Rat(static_cast<long>(64 * (g + 1)), 3) / F.a_prim;
}

FieldScan field_scan(int g) {
    FieldScan scan;
    scan.bound = sz_bound(2, g);
    double cap = scan.bound * scan.bound;
    for (Int d = 5; static_cast<double>(d) < cap; ++d)
        if (is_fundamental_discriminant(d)) scan.discs.push_back(d);
    return scan;
}

std::pair<Ideal, Ideal> tau_canonical_pair(const BaseField& F, const Ideal& D,
                                           const Ideal& N) {
    if (F.is_rational()) return {D, N};
    auto flipped = std::make_pair(tau_ideal(F, D), tau_ideal(F, N));
    auto direct = std::make_pair(D, N);
    return std::min(direct, flipped);
}

namespace {

// primes of F with norm <= cap, sorted by (norm, label)
std::vector<PrimeIdeal> primes_up_to(const BaseField& F, Int cap) {
    std::vector<PrimeIdeal> out;
    for (Int p = 2; p <= cap; ++p) {
        if (!is_prime(p)) continue;
        for (const PrimeIdeal& P : split_prime(F, p))
            if (P.norm <= cap) out.push_back(P);
    }
    std::sort(out.begin(), out.end(), [](const PrimeIdeal& a, const PrimeIdeal& b) {
        return std::tie(a.norm, a.root, a.p) < std::tie(b.norm, b.root, b.p);
    });
    return out;
}

Int genus_at_level_one(CMCache& cache, const BaseField& F, const Ideal& D,
                       const EllipticConfig& cfg) {
    // genus of X_0^D(1) from Riemann-Hurwitz, regardless of parity validity
    Rat A = F.a_prim * Rat(static_cast<long>(phi_of(D)));
    Rat elliptic_part = 0;
    for (int q : admissible_q(F)) {
        Int eq = elliptic_count(cache, F, q, D, unit_ideal(), cfg);
        elliptic_part += Rat(static_cast<long>(eq)) * (Rat(1) - Rat(1) / Rat(q));
    }
    Int s = F.is_rational() && D.is_unit() ? cusp_count(1) : 0;
    Rat twog = A + 2 - elliptic_part - Rat(static_cast<long>(s));
    if (twog.get_den() != 1 || twog.get_num() % 2 != 0)
        throw InternalInconsistency("genus not integral at D=" + D.str());
    return static_cast<Int>(BigInt(twog.get_num() / 2).get_si());
}

bool parity_ok(const BaseField& F, const Ideal& D) {
    return (F.degree + D.n_primes()) % 2 == 1;
}

// Extensions of `base` by squarefree sets of primes with
// prod (NP-1)/2 <= budget and Phi <= phimax.  Norm-2 primes halve the product,
// so they are enumerated without budget pruning; once a prime of norm > 2 is
// added the product is nondecreasing (primes are sorted by norm) and branches
// above budget can be cut.
void extend_discriminants(const Ideal& base, const std::vector<PrimeIdeal>& primes,
                          size_t from, Rat prod, const Rat& budget, Int phimax,
                          Int phi_so_far, std::vector<Ideal>& out) {
    for (size_t i = from; i < primes.size(); ++i) {
        const PrimeIdeal& P = primes[i];
        if (base.val(P) > 0) continue;
        Rat factor = Rat(static_cast<long>(P.norm - 1), 2);
        Rat prod2 = prod * factor;
        Int phi2 = phi_so_far * (P.norm - 1);
        if (P.norm > 2 && (prod2 > budget || phi2 > phimax)) break;
        Ideal next = mul(base, make_ideal({{P, 1}}));
        if (prod2 <= budget && phi2 <= phimax) out.push_back(next);
        extend_discriminants(next, primes, i + 1, prod2, budget, phimax, phi2, out);
    }
}

// Refined base-prime selection: instead of scanning every prime with
// Phi(p) <= M, solve the Riemann-Hurwitz identity
//   A_prim Phi(p) Phi(a) = 2g' - 2 + sum_q sigma_q e_q(a) (1 - 1/q)
// over sigma in {0,2}^Q and g' <= g for each squarefree product a of norm-2
// primes, and keep the primes whose norm and Artin symbols fit.  Primes of
// norm <= 25 are kept unconditionally: they can ramify in some K_q or meet
// the conductor of Z_F[zeta_2q], where the displayed relation may fail.
std::vector<Ideal> refined_bases(CMCache& cache, const BaseField& F, int g_eff,
                                 Int phimax, const EnumerateOptions& opt) {
    std::vector<Ideal> bases;
    std::vector<PrimeIdeal> norm2;
    for (const PrimeIdeal& P : primes_up_to(F, 2))
        if (P.norm == 2) norm2.push_back(P);
    std::vector<Ideal> aa{unit_ideal()};
    for (size_t mask = 1; mask < (size_t(1) << norm2.size()); ++mask) {
        std::vector<std::pair<PrimeIdeal, int>> fac;
        for (size_t i = 0; i < norm2.size(); ++i)
            if (mask & (size_t(1) << i)) fac.emplace_back(norm2[i], 1);
        aa.push_back(make_ideal(std::move(fac)));
    }
    for (const Ideal& a : aa)
        bases.push_back(a); // products of norm-2 primes are bases themselves
    std::set<std::pair<Int, Int>> wanted_norm_syms; // dedupe (norm, sigma-mask)
    std::set<Ideal> primes;
    for (const PrimeIdeal& P : primes_up_to(F, std::min<Int>(25, phimax + 1)))
        if (P.norm - 1 <= phimax) primes.insert(make_ideal({{P, 1}}));
    auto qs = admissible_q(F);
    for (const Ideal& a : aa) {
        Int phia = phi_of(a);
        if (phia > phimax) continue;
        std::vector<std::pair<int, Rat>> eqa; // (q, e_q(a)) positive ones
        for (int q : qs) {
            Rat e = elliptic_mass(cache, F, q, a, unit_ideal(), opt.elliptic);
            if (sgn(e) > 0) eqa.emplace_back(q, e);
        }
        for (size_t mask = 0; mask < (size_t(1) << eqa.size()); ++mask) {
            Rat ell = 0;
            for (size_t i = 0; i < eqa.size(); ++i)
                if (mask & (size_t(1) << i))
                    ell += Rat(2) * eqa[i].second *
                           (Rat(1) - Rat(1) / Rat(eqa[i].first));
            for (int gp = 0; gp <= g_eff; ++gp) {
                Rat rhs = Rat(2 * gp) - 2 + ell;
                if (sgn(rhs) <= 0) continue;
                Rat phi_p = rhs / (F.a_prim * Rat(static_cast<long>(phia)));
                if (phi_p.get_den() != 1) continue;
                Int phi = static_cast<Int>(phi_p.get_num().get_si());
                if (phi < 1 || phi > phimax) continue;
                Int N = phi + 1;
                if (!wanted_norm_syms.insert({N, static_cast<Int>(mask)}).second)
                    continue;
                std::vector<PrimeIdeal> cands;
                if (is_prime(N)) {
                    for (const PrimeIdeal& P : split_prime(F, N))
                        if (P.norm == N) cands.push_back(P);
                } else {
                    Int r = isqrt(N);
                    if (r * r == N && is_prime(r)) {
                        auto sp = split_prime(F, r);
                        if (sp.size() == 1 && sp[0].inert()) cands.push_back(sp[0]);
                    }
                }
                for (const PrimeIdeal& P : cands) {
                    bool ok = true;
                    for (size_t i = 0; i < eqa.size() && ok; ++i) {
                        int sym = splitting_in_cm(cache.get(F, eqa[i].first).field, P);
                        Int sigma = (mask & (size_t(1) << i)) ? 2 : 0;
                        if (1 - sym != sigma) ok = false;
                    }
                    if (ok) primes.insert(make_ideal({{P, 1}}));
                }
            }
        }
    }
    bases.insert(bases.end(), primes.begin(), primes.end());
    return bases;
}

} // namespace

std::vector<Ideal> candidate_discriminants(CMCache& cache, const BaseField& F,
                                           int g, const EnumerateOptions& opt) {
    int g_eff = std::max(g, 1); // the pruning inequality assumes g >= 1
    Rat M = search_bound(F, g_eff);
    Int phimax = static_cast<Int>(BigInt(M.get_num() / M.get_den()).get_si());
    std::set<Ideal> result;

    std::vector<Ideal> bases;
    if (F.degree % 2 == 1) {
        bases.push_back(unit_ideal());
    } else if (opt.refine_discriminants) {
        bases = refined_bases(cache, F, g_eff, phimax, opt);
    } else {
        for (const PrimeIdeal& P : primes_up_to(F, phimax + 1))
            if (P.norm - 1 <= phimax) bases.push_back(make_ideal({{P, 1}}));
    }
    auto all_primes = primes_up_to(F, phimax + 1);
    for (const Ideal& base : bases) {
        result.insert(base);
        // bases of the wrong parity (refined path only) carry no genus; the
        // extension step runs from the parity-valid bases instead
        if (!parity_ok(F, base)) continue;
        Int gb = genus_at_level_one(cache, F, base, opt.elliptic);
        Rat A = F.a_prim * Rat(static_cast<long>(phi_of(base)));
        // prod over P | D/base of (NP-1)/2 <= 1 + 2(g - g(base))/A(base)
        Rat budget = Rat(1) + Rat(2) * (Rat(g_eff) - Rat(static_cast<long>(gb))) / A;
        if (sgn(budget) < 0) continue;
        std::vector<Ideal> found;
        extend_discriminants(base, all_primes, 0, Rat(1), budget, phimax,
                             phi_of(base), found);
        for (Ideal& Dd : found) result.insert(std::move(Dd));
    }
    // Galois-canonical, parity-valid, sorted
    std::vector<Ideal> out;
    for (const Ideal& D : result) {
        if (!parity_ok(F, D)) continue;
        if (phi_of(D) > phimax) continue;
        auto [cd, cn] = tau_canonical_pair(F, D, unit_ideal());
        if (cd == D) out.push_back(D);
    }
    std::sort(out.begin(), out.end(), [](const Ideal& a, const Ideal& b) {
        return std::tie(a.norm, a) < std::tie(b.norm, b);
    });
    return out;
}

std::vector<CurveRecord> enumerate_levels(CMCache& cache, const BaseField& F,
                                          const Ideal& D, int g,
                                          const EnumerateOptions& opt) {
    std::vector<CurveRecord> out;
    Rat M = search_bound(F, g);
    Rat psi_cap_r = M / Rat(static_cast<long>(phi_of(D)));
    if (psi_cap_r < 1) return out;
    Int psi_cap = static_cast<Int>(BigInt(psi_cap_r.get_num() / psi_cap_r.get_den()).get_si());
    std::map<Ideal, bool> alive; // level -> genus <= g
    for (Int m = 1; m <= psi_cap; ++m) {
        for (const Ideal& N : ideals_of_norm(F, m)) {
            if (!coprime(D, N)) continue;
            if (psi_of(N) > psi_cap) continue;
            // divisibility-order pruning: all maximal divisors must be alive
            bool parent_dead = false;
            for (auto& [P, e] : N.fac) {
                Ideal parent = quotient(N, make_ideal({{P, 1}}));
                auto it = alive.find(parent);
                if (it != alive.end() && !it->second) { parent_dead = true; break; }
            }
            if (parent_dead) {
                alive[N] = false;
                continue;
            }
            Signature sig = signature(cache, validate(F, D, N), opt.elliptic);
            bool ok = sig.genus <= g;
            alive[N] = ok;
            if (!ok) continue;
            auto [cd, cn] = tau_canonical_pair(F, D, N);
            if (cd == D && cn == N)
                out.push_back(CurveRecord{F.disc, D, N, sig, ""});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CurveRecord> enumerate_all(CMCache& cache, const BaseField& F, int g,
                                       const EnumerateOptions& opt) {
    std::vector<CurveRecord> out;
    std::vector<Ideal> cands = candidate_discriminants(cache, F, g, opt);
    if (F.is_rational() && !opt.include_modular)
        std::erase_if(cands, [](const Ideal& D) { return D.is_unit(); });
    for (const Ideal& D : cands) {
        Signature s1 = signature(cache, validate(F, D, unit_ideal()), opt.elliptic);
        if (s1.genus > g) continue; // all levels only increase the genus
        auto recs = enumerate_levels(cache, F, D, g, opt);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    std::sort(out.begin(), out.end());
    assign_labels(F, out);
    return out;
}

std::vector<CurveRecord> naive_enumerate(CMCache& cache, const BaseField& F,
                                         int g, const EnumerateOptions& opt) {
    Rat M = search_bound(F, g);
    Int phimax = static_cast<Int>(BigInt(M.get_num() / M.get_den()).get_si());
    auto primes = primes_up_to(F, phimax + 1);
    // all squarefree parity-valid D with Phi(D) <= M
    std::vector<Ideal> ds;
    std::function<void(Ideal, size_t, Int)> rec = [&](Ideal cur, size_t from, Int phi) {
        ds.push_back(cur);
        for (size_t i = from; i < primes.size(); ++i) {
            Int phi2 = phi * (primes[i].norm - 1);
            if (phi2 > phimax) {
                if (primes[i].norm > 2) break;
                continue;
            }
            rec(mul(cur, make_ideal({{primes[i], 1}})), i + 1, phi2);
        }
    };
    rec(unit_ideal(), 0, 1);
    std::vector<CurveRecord> out;
    for (const Ideal& D : ds) {
        if (!parity_ok(F, D)) continue;
        if (F.is_rational() && D.is_unit() && !opt.include_modular) continue;
        Rat psi_cap_r = M / Rat(static_cast<long>(phi_of(D)));
        if (psi_cap_r < 1) continue;
        Int psi_cap = static_cast<Int>(
            BigInt(psi_cap_r.get_num() / psi_cap_r.get_den()).get_si());
        for (Int m = 1; m <= psi_cap; ++m)
            for (const Ideal& N : ideals_of_norm(F, m)) {
                if (!coprime(D, N) || psi_of(N) > psi_cap) continue;
                Signature sig = signature(cache, validate(F, D, N), opt.elliptic);
                if (sig.genus > g) continue;
                auto [cd, cn] = tau_canonical_pair(F, D, N);
                if (cd == D && cn == N)
                    out.push_back(CurveRecord{F.disc, D, N, sig, ""});
            }
    }
    std::sort(out.begin(), out.end());
    assign_labels(F, out);
    return out;
}

void assign_labels(const BaseField& F, std::vector<CurveRecord>& records) {
    auto key = [](const CurveRecord& r) {
        return std::make_tuple(r.d_F, r.D.norm, r.N.norm);
    };
    // a (d_F, D, N) group with one signature is a single table row: the
    // signature does not depend on which Galois-inequivalent ideal pair with
    // those norms is chosen
    std::vector<CurveRecord> merged;
    for (size_t i = 0; i < records.size();) {
        size_t j = i;
        while (j < records.size() && key(records[j]) == key(records[i])) ++j;
        for (size_t k = i; k < j; ++k) {
            bool dup = false;
            for (size_t l = i; l < k; ++l)
                if (records[l].sig == records[k].sig) dup = true;
            if (!dup) merged.push_back(records[k]);
        }
        i = j;
    }
    records = std::move(merged);
    for (size_t i = 0; i < records.size();) {
        size_t j = i;
        while (j < records.size() && key(records[j]) == key(records[i])) ++j;
        if (j - i > 1) {
            std::vector<std::string> labels(j - i);
            for (size_t k = i; k < j; ++k) {
                const CurveRecord& r = records[k];
                std::string lab;
                if (!tau_invariant(F, r.D))
                    lab = "split"; // depends on the choice of conjugate
                else if (!tau_invariant(F, r.N)) {
                    bool square = true;
                    for (auto& [P, e] : r.N.fac)
                        if (e % 2) square = false;
                    lab = square ? "square" : "conj";
                } else {
                    lab = "rational";
                }
                labels[k - i] = lab;
            }
            // fall back to positional labels when structure does not separate
            std::set<std::string> uniq(labels.begin(), labels.end());
            if (uniq.size() != labels.size())
                for (size_t k = 0; k < labels.size(); ++k)
                    labels[k] = "v" + std::to_string(k + 1);
            for (size_t k = i; k < j; ++k) records[k].label = labels[k - i];
        }
        i = j;
    }
}

} // namespace shimura
