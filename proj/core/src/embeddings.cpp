#include "shimura/embeddings.hpp"

namespace shimura {

namespace {

// unit-part square class of x at P (x = pi^v * u, v even; +1 iff u square)
int unit_square_class(const CMField& K, const PrimeIdeal& P, const FElem& x) {
    if (K.F.is_rational()) {
        Int v = static_cast<Int>(x.x.get_num().get_si());
        while (v % P.p == 0) v /= P.p;
        return kronecker(v, P.p);
    }
    LocalPrime L(K.F.disc, P);
    return L.is_local_square(zelem_of(x)) ? 1 : -1;
}

Int level_count_odd(const CMOrder& R, const PrimeIdeal& P, int e,
                    const LocalGenerator& g) {
    const CMField& K = *R.K;
    Int Q = P.norm;
    int v = g.v_disc;
    FElem dgamma = g.tr * g.tr - felem_int(K.F.disc, 4) * g.nm;
    if (v == 0) return 1 + splitting_in_cm(K, P);
    int chi = unit_square_class(K, P, dgamma); // valuation is even iff relevant
    Int roots, image;
    if (e <= v) {
        roots = pow_ll(Q, e / 2);
    } else {
        roots = (v % 2 == 0 && chi == 1) ? 2 * pow_ll(Q, v / 2) : 0;
    }
    if (e + 1 <= v) {
        image = pow_ll(Q, (e - 1) / 2);
    } else {
        image = (v % 2 == 0 && chi == 1) ? 2 * pow_ll(Q, v / 2 - 1) : 0;
    }
    return roots + image;
}

Int level_count_even(const CMOrder& R, const PrimeIdeal& P, int e,
                     const LocalGenerator& g) {
    const CMField& K = *R.K;
    if (K.F.is_rational()) {
        Int t = static_cast<Int>(g.tr.x.get_num().get_si());
        Int n = static_cast<Int>(g.nm.x.get_num().get_si());
        LocalRootCount c = count_roots_staged_q(P.p, t, n, e);
        return c.roots + (g.v_disc > 0 ? c.image : 0);
    }
    LocalPrime L(K.F.disc, P);
    LocalRootCount c = count_roots_staged(L, zelem_of(g.tr), zelem_of(g.nm), e);
    return c.roots + (g.v_disc > 0 ? c.image : 0);
}

} // namespace

Int local_embed(const CMOrder& R, const PrimeIdeal& P, PrimeRole role, int e) {
    const CMField& K = *R.K;
    switch (role) {
        case PrimeRole::Unramified:
            return 1;
        case PrimeRole::Discriminant:
            if (R.cond.val(P) > 0) return 0;
            return 1 - splitting_in_cm(K, P);
        case PrimeRole::Level: {
            if (e < 1) throw Error("level exponent must be >= 1");
            LocalGenerator g = local_poly(R, P);
            return P.p == 2 ? level_count_even(R, P, e, g)
                            : level_count_odd(R, P, e, g);
        }
    }
    throw Error("unreachable");
}

Int local_embed_exhaustive(const CMOrder& R, const PrimeIdeal& P, int e) {
    const CMField& K = *R.K;
    LocalGenerator g = local_poly(R, P);
    LocalRootCount c;
    if (K.F.is_rational()) {
        Int t = static_cast<Int>(g.tr.x.get_num().get_si());
        Int n = static_cast<Int>(g.nm.x.get_num().get_si());
        c = count_roots_exhaustive_q(P.p, t, n, e);
    } else {
        LocalPrime L(K.F.disc, P);
        c = count_roots_exhaustive(L, zelem_of(g.tr), zelem_of(g.nm), e);
    }
    return c.roots + (g.v_disc > 0 ? c.image : 0);
}

EllipticDetail elliptic_count_detail(CMCache& cache, const BaseField& F, int q,
                                     const Ideal& D, const Ideal& N,
                                     const EllipticConfig& cfg) {
    if (!D.squarefree()) throw NotSquarefree("discriminant must be squarefree");
    if (!coprime(D, N)) throw NotCoprime("level must be coprime to discriminant");
    const CMData& data = cache.get(F, q);
    EllipticDetail detail;
    detail.q = q;
    detail.prefactor = Rat(1) / Rat(static_cast<long>((cfg.half_calibration ? 2 : 1) * F.h));
    Rat sum = 0;
    for (const CMOrder& R : data.orders) {
        OrderContribution oc;
        oc.cond = R.cond;
        oc.h_R = R.h_R;
        oc.Q_R = R.Q_R;
        oc.unit_index = R.unit_index;
        Rat term = Rat(static_cast<long>(R.h_R)) / Rat(R.Q_R);
        for (auto& [P, ee] : D.fac) {
            Int m = local_embed(R, P, PrimeRole::Discriminant);
            oc.local.emplace_back(P, 1, m);
            term *= Rat(static_cast<long>(m));
        }
        for (auto& [P, ee] : N.fac) {
            Int m = sgn(term) == 0 ? 0 : local_embed(R, P, PrimeRole::Level, ee);
            oc.local.emplace_back(P, ee, m);
            term *= Rat(static_cast<long>(m));
        }
        oc.term = term;
        sum += term;
        detail.orders.push_back(std::move(oc));
    }
    Rat total = detail.prefactor * sum;
    if (total.get_den() != 1 || sgn(total) < 0)
        throw NonIntegralCount("e_" + std::to_string(q) + " = " + total.get_str() +
                               " for d=" + std::to_string(F.disc) +
                               " D=" + D.str() + " N=" + N.str());
    detail.e_q = static_cast<Int>(total.get_num().get_si());
    return detail;
}

Int elliptic_count(CMCache& cache, const BaseField& F, int q, const Ideal& D,
                   const Ideal& N, const EllipticConfig& cfg) {
    return elliptic_count_detail(cache, F, q, D, N, cfg).e_q;
}

Rat elliptic_mass(CMCache& cache, const BaseField& F, int q, const Ideal& D,
                  const Ideal& N, const EllipticConfig& cfg) {
    if (!D.squarefree()) throw NotSquarefree("discriminant must be squarefree");
    const CMData& data = cache.get(F, q);
    Rat sum = 0;
    for (const CMOrder& R : data.orders) {
        Rat term = Rat(static_cast<long>(R.h_R)) / Rat(R.Q_R);
        for (auto& [P, ee] : D.fac)
            term *= Rat(static_cast<long>(local_embed(R, P, PrimeRole::Discriminant)));
        for (auto& [P, ee] : N.fac) {
            if (sgn(term) == 0) break;
            term *= Rat(static_cast<long>(local_embed(R, P, PrimeRole::Level, ee)));
        }
        sum += term;
    }
    return sum / Rat(static_cast<long>((cfg.half_calibration ? 2 : 1) * F.h));
}

Int cusp_count(Int N) {
    if (N < 1) throw Error("cusp_count needs N >= 1");
    Int s = 0;
    for (Int d : divisors(N)) s += euler_phi(gcd_ll(d, N / d));
    return s;
}

} // namespace shimura
