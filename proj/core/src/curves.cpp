#include "shimura/curves.hpp"

#include <algorithm>
#include <sstream>

namespace shimura {

ShimuraDatum validate(const BaseField& F, Ideal D, Ideal N) {
    if (!D.squarefree()) throw NotSquarefree("discriminant " + D.str());
    if (!coprime(D, N)) throw NotCoprime(D.str() + " and " + N.str());
    if ((F.degree + D.n_primes()) % 2 == 0)
        throw ParityViolation("degree " + std::to_string(F.degree) + " with " +
                              std::to_string(D.n_primes()) + " ramified primes");
    return ShimuraDatum{&F, std::move(D), std::move(N)};
}

Rat area(const ShimuraDatum& X) {
    return X.F->a_prim * Rat(static_cast<long>(phi_of(X.D))) *
           Rat(static_cast<long>(psi_of(X.N)));
}

Signature signature(CMCache& cache, const ShimuraDatum& X,
                    const EllipticConfig& cfg) {
    Signature sig;
    sig.area = area(X);
    const BaseField& F = *X.F;
    Rat elliptic_part = 0;
    for (int q : admissible_q(F)) {
        Int eq = elliptic_count(cache, F, q, X.D, X.N, cfg);
        if (eq > 0) {
            sig.elliptic.emplace_back(q, eq);
            elliptic_part += Rat(static_cast<long>(eq)) *
                             (Rat(1) - Rat(1) / Rat(q));
        }
    }
    sig.cusps = 0;
    if (F.is_rational() && X.D.is_unit()) sig.cusps = cusp_count(X.N.norm);
    // Riemann-Hurwitz: area = 2g - 2 + sum e_q (1 - 1/q) + s
    Rat twog = sig.area + 2 - elliptic_part - Rat(static_cast<long>(sig.cusps));
    if (twog.get_den() != 1 || twog.get_num() % 2 != 0 || sgn(twog) < 0)
        throw InternalInconsistency(
            "genus not a nonnegative integer: 2g = " + twog.get_str() + " at d=" +
            std::to_string(F.disc) + " D=" + X.D.str() + " N=" + X.N.str());
    sig.genus = static_cast<Int>(BigInt(twog.get_num() / 2).get_si());
    return sig;
}

std::string render_signature(const Signature& sig) {
    std::ostringstream os;
    os << "(" << sig.genus << ";";
    if (sig.elliptic.empty()) {
        os << "-";
    } else {
        bool first = true;
        for (auto& [q, k] : sig.elliptic) {
            if (!first) os << ",";
            first = false;
            os << q;
            if (k > 1) os << "^" << k;
        }
    }
    if (sig.cusps > 0) os << ";" << sig.cusps;
    os << ")";
    return os.str();
}

Signature parse_signature(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!isspace(static_cast<unsigned char>(c))) s += c;
    if (s.size() < 4 || s.front() != '(' || s.back() != ')')
        throw ParseError("signature " + text);
    s = s.substr(1, s.size() - 2);
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ';') { parts.push_back(cur); cur.clear(); }
        else cur += c;
    }
    parts.push_back(cur);
    if (parts.size() < 2 || parts.size() > 3)
        throw ParseError("signature " + text);
    Signature sig;
    sig.genus = std::stoll(parts[0]);
    if (parts[1] != "-" && !parts[1].empty()) {
        std::istringstream is(parts[1]);
        std::string item;
        while (std::getline(is, item, ',')) {
            auto caret = item.find('^');
            int q = std::stoi(item.substr(0, caret));
            Int k = caret == std::string::npos ? 1 : std::stoll(item.substr(caret + 1));
            if (q < 2 || k < 1) throw ParseError("signature " + text);
            sig.elliptic.emplace_back(q, k);
        }
    }
    sig.cusps = parts.size() == 3 ? std::stoll(parts[2]) : 0;
    std::sort(sig.elliptic.begin(), sig.elliptic.end());
    return sig;
}

} // namespace shimura
