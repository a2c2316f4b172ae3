#include "shimura/local.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace shimura {

ZElem zelem_of(const FElem& a) {
    if (!a.is_integral()) throw Error("zelem_of needs integral element");
    return ZElem{static_cast<Int>(a.x.get_num().get_si()),
                 static_cast<Int>(a.y.get_num().get_si())};
}

bool Lat2::contains(Int x, Int y) const {
    if (y % C) return false;
    Int k = y / C;
    return (x - k * B) % A == 0;
}

std::pair<Int, Int> Lat2::reduce(Int x, Int y) const {
    Int j = ((y % C) + C) % C;
    Int k = (y - j) / C;
    Int xx = x - k * B;
    Int i = ((xx % A) + A) % A;
    return {i, j};
}

LocalPrime::LocalPrime(Int d, PrimeIdeal P) : d_(d), P_(std::move(P)) {
    if (d <= 1) throw Error("LocalPrime is for quadratic fields");
}

Lat2 LocalPrime::power(int r) {
    if (r > 62 || (r > 0 && r * std::log2(static_cast<double>(P_.p)) > 62))
        throw PrecisionTooLow("prime power exponent too large");
    while (static_cast<int>(powers_.size()) <= r) {
        int k = static_cast<int>(powers_.size());
        if (k == 0) {
            powers_.push_back(Lat2{1, 0, 1});
            continue;
        }
        Int p = P_.p;
        Lat2 L;
        if (P_.inert()) {
            Int pk = pow_ll(p, k);
            L = Lat2{pk, 0, pk};
        } else if (P_.ramified()) {
            Int ph = pow_ll(p, k / 2);
            if (k % 2 == 0) {
                L = Lat2{ph, 0, ph};
            } else {
                // p^h * (p, omega - root)
                Int t0 = P_.root;
                L = Lat2{ph * p, ((-t0 % p) + p) % p * ph, ph};
            }
        } else {
            // split: P^k = { x + y*omega : x + y*(-t_k) ... } via lifted root
            Int pk = pow_ll(p, k);
            // Hensel-lift root of x^2 - r*x + (r^2-d)/4 mod p^k
            Int r = d_ & 1;
            Int c = (r * r - d_) / 4;
            if (root_lift_.empty()) root_lift_.push_back(P_.root); // mod p
            while (static_cast<int>(root_lift_.size()) < k) {
                int j = static_cast<int>(root_lift_.size());
                Int mod = pow_ll(p, j + 1);
                Int t = root_lift_.back();
                bool found = false;
                for (Int add = 0; add < p; ++add) {
                    Int cand = t + add * pow_ll(p, j);
                    __int128 v = (__int128)cand * cand - (__int128)r * cand + c;
                    if (((v % mod) + mod) % mod == 0) {
                        root_lift_.push_back(cand);
                        found = true;
                        break;
                    }
                }
                if (!found) throw InternalInconsistency("root lift failed");
            }
            Int tk = root_lift_[k - 1];
            // omega = tk mod P^k, so x + y*omega in P^k iff x + y*tk = 0 mod p^k
            L = Lat2{pk, ((-tk % pk) + pk) % pk, 1};
        }
        powers_.push_back(L);
    }
    return powers_[r];
}

bool LocalPrime::in_power(const ZElem& z, int r) {
    return power(r).contains(z.x, z.y);
}

int LocalPrime::val(const ZElem& z, int cap) {
    if (z.is_zero()) throw Error("valuation of zero");
    for (int r = 0; r < cap; ++r)
        if (!in_power(z, r + 1)) return r;
    throw PrecisionTooLow("valuation exceeds cap");
}

ZElem LocalPrime::mul(const ZElem& a, const ZElem& b) const {
    Int r = d_ & 1;
    Int q = (d_ - r * r) / 4;
    return ZElem{a.x * b.x + q * a.y * b.y,
                 a.x * b.y + a.y * b.x + r * a.y * b.y};
}

ZElem LocalPrime::reduce(const ZElem& z, int r) {
    auto [x, y] = power(r).reduce(z.x, z.y);
    return ZElem{x, y};
}

std::vector<ZElem> LocalPrime::residues(int r) {
    const Lat2 L = power(r);
    std::vector<ZElem> out;
    out.reserve(static_cast<size_t>(L.A * L.C));
    for (Int i = 0; i < L.A; ++i)
        for (Int j = 0; j < L.C; ++j) out.push_back(ZElem{i, j});
    return out;
}

std::vector<ZElem> LocalPrime::cosets(int r) {
    const Lat2 Lr = power(r);
    Int p = P_.p;
    std::set<std::pair<Int, Int>> seen;
    std::vector<ZElem> out;
    for (Int u = 0; u < p; ++u)
        for (Int v = 0; v < p; ++v) {
            ZElem z{u * Lr.A + v * Lr.B, v * Lr.C};
            ZElem zr = reduce(z, r + 1);
            if (seen.insert({zr.x, zr.y}).second) out.push_back(z);
        }
    if (static_cast<Int>(out.size()) != P_.norm)
        throw InternalInconsistency("coset count mismatch");
    return out;
}

bool LocalPrime::is_local_square(const ZElem& z) {
    int v = val(z);
    if (v % 2) return false;
    int k = v + 2 * e2() + 1;
    const Lat2 L = power(k);
    for (Int i = 0; i < L.A; ++i)
        for (Int j = 0; j < L.C; ++j) {
            ZElem w{i, j};
            ZElem w2 = mul(w, w);
            ZElem diff{w2.x - z.x, w2.y - z.y};
            if (diff.is_zero() || in_power(diff, k)) return true;
        }
    return false;
}

// ------------------------------------------------ root counting, degree 2 --

namespace {

ZElem eval_poly(LocalPrime& L, const ZElem& t, const ZElem& n, const ZElem& x) {
    ZElem x2 = L.mul(x, x);
    ZElem tx = L.mul(t, x);
    return ZElem{x2.x - tx.x + n.x, x2.y - tx.y + n.y};
}

bool vanishes(LocalPrime& L, const ZElem& v, int r) {
    return v.is_zero() || L.in_power(v, r);
}

// Solutions of f(x) = x^2 - t*x + n = 0 mod P^r for r <= v_P(2): the map
// x -> x^2 - t*x is F2-linear on Z_F/P^r, so solve an affine system.
std::vector<ZElem> f2_phase(LocalPrime& L, const ZElem& t, const ZElem& n, int r) {
    std::vector<ZElem> sols;
    // Z_F/P^r has exponent 2 here, dimension <= 2 over F2
    std::vector<ZElem> basis;
    const Lat2 lat = L.power(r);
    if (lat.A == 2) basis.push_back(ZElem{1, 0});
    if (lat.C == 2) basis.push_back(ZElem{0, 1});
    if (pow_ll(2, static_cast<int>(basis.size())) != lat.A * lat.C)
        throw InternalInconsistency("residue ring is not an F2-space");
    size_t dim = basis.size();
    // images of basis under the linear part x -> x^2 - t*x
    std::vector<ZElem> img(dim);
    for (size_t i = 0; i < dim; ++i) {
        ZElem lx = eval_poly(L, t, ZElem{0, 0}, basis[i]);
        img[i] = L.reduce(lx, r);
    }
    ZElem target = L.reduce(ZElem{-n.x, -n.y}, r);
    for (unsigned mask = 0; mask < (1u << dim); ++mask) {
        ZElem lhs{0, 0};
        ZElem x{0, 0};
        for (size_t i = 0; i < dim; ++i)
            if (mask & (1u << i)) {
                lhs.x += img[i].x; lhs.y += img[i].y;
                x.x += basis[i].x; x.y += basis[i].y;
            }
        lhs = L.reduce(lhs, r);
        if (lhs.x == target.x && lhs.y == target.y) sols.push_back(L.reduce(x, r));
    }
    return sols;
}

std::vector<ZElem> lift_solutions(LocalPrime& L, const ZElem& t, const ZElem& n,
                                  const std::vector<ZElem>& prev, int r) {
    // prev: solutions mod P^r; returns solutions mod P^{r+1}.  Past ord(4)
    // the total count is stable under lifting (Hensel), though an individual
    // residue can carry 0 or N(P) of the lifts when f' is not a unit.
    std::vector<ZElem> out;
    auto deltas = L.cosets(r);
    for (const ZElem& x : prev)
        for (const ZElem& del : deltas) {
            ZElem cand{x.x + del.x, x.y + del.y};
            if (vanishes(L, eval_poly(L, t, n, cand), r + 1))
                out.push_back(L.reduce(cand, r + 1));
        }
    return out;
}

} // namespace

LocalRootCount count_roots_staged(LocalPrime& L, const ZElem& t, const ZElem& n, int e) {
    int e2 = L.e2();
    int r0 = std::min(e, std::max(1, e2));
    std::vector<ZElem> sols;
    if (e2 >= 1) {
        sols = f2_phase(L, t, n, r0);
    } else {
        // odd prime: start from the residue field by enumeration
        r0 = 1;
        for (const ZElem& x : L.residues(1))
            if (vanishes(L, eval_poly(L, t, n, x), 1)) sols.push_back(x);
    }
    for (int r = r0; r < e; ++r) sols = lift_solutions(L, t, n, sols, r);
    LocalRootCount count;
    count.roots = static_cast<Int>(sols.size());
    // image of E(e+1) in Z_F/P^e
    auto lifted = lift_solutions(L, t, n, sols, e);
    std::set<std::pair<Int, Int>> img;
    for (const ZElem& x : lifted) {
        ZElem xr = L.reduce(x, e);
        img.insert({xr.x, xr.y});
    }
    count.image = static_cast<Int>(img.size());
    return count;
}

LocalRootCount count_roots_exhaustive(LocalPrime& L, const ZElem& t, const ZElem& n, int e) {
    LocalRootCount count;
    for (const ZElem& x : L.residues(e))
        if (vanishes(L, eval_poly(L, t, n, x), e)) ++count.roots;
    std::set<std::pair<Int, Int>> img;
    for (const ZElem& x : L.residues(e + 1))
        if (vanishes(L, eval_poly(L, t, n, x), e + 1)) {
            ZElem xr = L.reduce(x, e);
            img.insert({xr.x, xr.y});
        }
    count.image = static_cast<Int>(img.size());
    return count;
}

// ------------------------------------------------ root counting, degree 1 --

namespace {
Int mod_pow_eval(Int t, Int n, Int x, Int m) {
    __int128 v = (__int128)x * x - (__int128)t * x + n;
    Int r = static_cast<Int>(((v % m) + m) % m);
    return r;
}
} // namespace

LocalRootCount count_roots_staged_q(Int p, Int t, Int n, int e) {
    // staged lifting from the residue field (F2-linear solve is the p = 2,
    // r = 1 case of the phase structure; over Z/2 it is plain enumeration)
    std::vector<Int> sols;
    for (Int x = 0; x < p; ++x)
        if (mod_pow_eval(t, n, x, p) == 0) sols.push_back(x);
    auto lift = [&](const std::vector<Int>& prev, int r) {
        Int pr = pow_ll(p, r), pr1 = pr * p;
        std::vector<Int> out;
        for (Int x : prev)
            for (Int k = 0; k < p; ++k) {
                Int cand = x + k * pr;
                if (mod_pow_eval(t, n, cand, pr1) == 0) out.push_back(cand);
            }
        return out;
    };
    for (int r = 1; r < e; ++r) sols = lift(sols, r);
    LocalRootCount count;
    count.roots = static_cast<Int>(sols.size());
    auto lifted = lift(sols, e);
    std::set<Int> img;
    Int pe = pow_ll(p, e);
    for (Int x : lifted) img.insert(x % pe);
    count.image = static_cast<Int>(img.size());
    return count;
}

LocalRootCount count_roots_exhaustive_q(Int p, Int t, Int n, int e) {
    LocalRootCount count;
    Int pe = pow_ll(p, e), pe1 = pe * p;
    for (Int x = 0; x < pe; ++x)
        if (mod_pow_eval(t, n, x, pe) == 0) ++count.roots;
    std::set<Int> img;
    for (Int x = 0; x < pe1; ++x)
        if (mod_pow_eval(t, n, x, pe1) == 0) img.insert(x % pe);
    count.image = static_cast<Int>(img.size());
    return count;
}

} // namespace shimura
