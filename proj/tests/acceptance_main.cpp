// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion.  Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "shimura/tables.hpp"

using namespace shimura;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << number << ": "
              << name;
    if (!detail.empty()) std::cout << " -- " << detail;
    std::cout << std::endl;
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<CurveRecord> enumerate_degree2_all(int jobs_unused = 1) {
    (void)jobs_unused;
    std::vector<CurveRecord> all;
    for (Int d : field_scan(2).discs) {
        BaseField F = make_field(d);
        CMCache cache;
        auto recs = enumerate_all(cache, F, 2);
        all.insert(all.end(), recs.begin(), recs.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

void criterion1(const std::vector<GoldenRow>& golden) {
    auto t0 = std::chrono::steady_clock::now();
    BaseField Q = make_field(1);
    CMCache cache;
    auto recs = enumerate_all(cache, Q, 2);
    DiffReport rep = verify(recs, golden, 1);
    double secs = seconds_since(t0);
    std::ostringstream os;
    os << recs.size() << " rows, " << secs << " s";
    bool pass = rep.empty() && secs < 10.0;
    if (!rep.empty()) os << "; " << rep.missing.size() << " missing, "
                         << rep.extra.size() << " extra";
    report(1, "degree-1 table reproduction", pass, os.str());
}

void criterion2(const std::vector<GoldenRow>& golden,
                const std::vector<CurveRecord>& deg2, double secs) {
    DiffReport rep = verify(deg2, golden, 2);
    bool dup_square = false, dup_rational = false;
    for (auto& r : deg2)
        if (r.d_F == 8 && r.D.norm == 2 && r.N.norm == 49) {
            if (r.label == "square" && render_signature(r.sig) == "(2;3^4)")
                dup_square = true;
            if (r.label == "rational" && render_signature(r.sig) == "(1;3^8)")
                dup_rational = true;
        }
    std::ostringstream os;
    os << deg2.size() << " rows over 257 fields, " << secs << " s";
    if (!rep.empty())
        os << "; " << rep.missing.size() << " missing, " << rep.extra.size()
           << " extra";
    bool pass = rep.empty() && dup_square && dup_rational && secs < 600.0;
    report(2, "degree-2 table reproduction (all quadratic fields)", pass, os.str());
}

void criterion3() {
    FieldScan scan = field_scan(2);
    Int maxd = scan.discs.back();
    std::ostringstream os;
    os << scan.discs.size() << " fields, min " << scan.discs.front() << ", max "
       << maxd << " (published max: 849";
    if (maxd != 849)
        os << "; DISCREPANCY SURFACED: sqrt(" << maxd << ") = "
           << std::sqrt(static_cast<double>(maxd)) << " < bound " << scan.bound;
    os << ")";
    bool pass = scan.discs.size() == 257 && scan.discs.front() == 5;
    report(3, "field scan census", pass, os.str());
}

void criterion4() {
    const double table[] = {29.216, 21.470, 18.405, 16.780, 15.778,
                            15.098, 14.608, 14.238, 13.949};
    bool pass = true;
    std::ostringstream os;
    for (int n = 2; n <= 10; ++n) {
        double b = sz_bound(n, 2);
        if (std::abs(b - table[n - 2]) >= 0.001) {
            pass = false;
            os << "n=" << n << ": " << b << " vs " << table[n - 2] << " ";
        }
    }
    report(4, "Selberg-Zograf bound table to +-0.001", pass, os.str());
}

void criterion5(const std::vector<GoldenRow>& golden) {
    std::map<int, int> hist;
    for (auto& r : golden) ++hist[r.genus];
    bool count_ok = golden.size() == 858;
    bool hist_ok = hist[0] == 258 && hist[1] == 334 && hist[2] == 266;
    std::ostringstream os;
    os << golden.size() << " rows; histogram " << hist[0] << "/" << hist[1] << "/"
       << hist[2] << " vs published 258/334/266";
    if (!hist_ok)
        os << ". The published tables hold 857 rows (histogram 257/334/266); the"
              " unique missing curve of degree <= 2 is (d_F,D,N) = (13,36,1) of"
              " genus 1 (recomputed exactly, included in the bundle), which"
              " meets the 858 count but leaves the published histogram off by a"
              " single genus-0/1 flip that the published data cannot localize.";
    report(5, "golden-data audit (858 rows, histogram)", count_ok && hist_ok,
           os.str());
}

void criterion6() {
    // RH integrality for every (F, D, N) with Phi*Psi < M(F,2), all n <= 2
    // fields, not only genus <= 2; exact rationals, zero tolerance.
    auto t0 = std::chrono::steady_clock::now();
    long checked = 0;
    bool pass = true;
    std::string first_error;
    std::vector<Int> discs{1};
    for (Int d : field_scan(2).discs) discs.push_back(d);
    for (Int d : discs) {
        BaseField F = make_field(d);
        CMCache cache;
        Rat M = search_bound(F, 2);
        Int phimax = static_cast<Int>(BigInt(M.get_num() / M.get_den()).get_si());
        std::vector<PrimeIdeal> primes;
        for (Int p = 2; p <= phimax + 1; ++p) {
            if (!is_prime(p)) continue;
            for (auto& P : split_prime(F, p))
                if (P.norm <= phimax + 1) primes.push_back(P);
        }
        std::function<void(Ideal, size_t, Int)> rec = [&](Ideal D, size_t from,
                                                          Int phi) {
            if ((F.degree + D.n_primes()) % 2 == 1) {
                Rat cap = M / Rat(static_cast<long>(phi));
                if (cap >= 1) {
                    Int ncap = static_cast<Int>(
                        BigInt(cap.get_num() / cap.get_den()).get_si());
                    for (Int m = 1; m <= ncap; ++m)
                        for (const Ideal& N : ideals_of_norm(F, m)) {
                            if (!coprime(D, N) || psi_of(N) > ncap) continue;
                            try {
                                signature(cache, validate(F, D, N));
                                ++checked;
                            } catch (const std::exception& e) {
                                if (pass) first_error = e.what();
                                pass = false;
                            }
                        }
                }
            }
            for (size_t i = from; i < primes.size(); ++i) {
                Int phi2 = phi * (primes[i].norm - 1);
                if (phi2 > phimax) {
                    if (primes[i].norm > 2) break;
                    continue;
                }
                rec(mul(D, make_ideal({{primes[i], 1}})), i + 1, phi2);
            }
        };
        rec(unit_ideal(), 0, 1);
    }
    std::ostringstream os;
    os << checked << " (F,D,N) triples, " << seconds_since(t0) << " s";
    if (!first_error.empty()) os << "; first error: " << first_error;
    report(6, "Riemann-Hurwitz integrality across the full search space", pass,
           os.str());
}

void criterion7() {
    bool pass = true;
    std::ostringstream os;
    for (Int d = 1; d <= 100; ++d) {
        if (!is_fundamental_discriminant(d)) continue;
        NumericAprim numeric = aprim_numeric(d, 3000000);
        double exact = aprim_of_disc(d).get_d();
        if (numeric.tail_bound >= 1e-9 ||
            std::abs(exact - numeric.value) >= 1e-8) {
            pass = false;
            os << "d=" << d << " |diff|=" << std::abs(exact - numeric.value)
               << " tail<" << numeric.tail_bound << " ";
        }
    }
    report(7, "zeta consistency: exact A_prim vs numeric, tail < 1e-9", pass,
           os.str());
}

void criterion8() {
    bool pass = true;
    std::ostringstream os;
    for (Int d : {1LL, 5LL, 8LL, 12LL, 13LL, 17LL, 21LL, 24LL}) {
        BaseField F = make_field(d);
        CMCache cache;
        auto fast = enumerate_all(cache, F, 2);
        auto slow = naive_enumerate(cache, F, 2);
        if (!(fast == slow)) {
            pass = false;
            os << "d=" << d << " pruned " << fast.size() << " vs naive "
               << slow.size() << " ";
        }
    }
    report(8, "pruning soundness oracle (naive == pruned)", pass, os.str());
}

void criterion9() {
    bool pass = true;
    long odd_checked = 0, even_checked = 0;
    std::ostringstream os;
    for (Int d : {1LL, 5LL, 8LL, 12LL, 13LL, 17LL, 21LL, 24LL, 28LL, 33LL, 40LL}) {
        BaseField F = make_field(d);
        CMCache cache;
        for (int q : admissible_q(F)) {
            const CMData& data = cache.get(F, q);
            for (const CMOrder& R : data.orders) {
                for (Int p : {3LL, 5LL, 7LL, 11LL, 13LL}) {
                    for (const PrimeIdeal& P : split_prime(F, p))
                        for (int e = 1; pow_ll(P.norm, e) <= 343; ++e) {
                            if (local_embed(R, P, PrimeRole::Level, e) !=
                                local_embed_exhaustive(R, P, e)) {
                                pass = false;
                                os << "odd d=" << d << " q=" << q
                                   << " norm=" << P.norm << " e=" << e << " ";
                            }
                            ++odd_checked;
                        }
                }
                if (d == 1 || d == 5 || d == 8 || d == 17)
                    for (const PrimeIdeal& P : split_prime(F, 2))
                        for (int e = 1; pow_ll(P.norm, e) <= 64; ++e) {
                            if (local_embed(R, P, PrimeRole::Level, e) !=
                                local_embed_exhaustive(R, P, e)) {
                                pass = false;
                                os << "even d=" << d << " q=" << q
                                   << " norm=" << P.norm << " e=" << e << " ";
                            }
                            ++even_checked;
                        }
            }
        }
    }
    std::ostringstream note;
    note << odd_checked << " odd / " << even_checked << " even cases " << os.str();
    report(9, "embedding-number oracle (closed forms == exhaustive)", pass,
           note.str());
}

void criterion10() {
    BaseField Q = make_field(1);
    CMCache cache;
    bool pass = true;
    std::ostringstream os;
    for (Int N = 1; N <= 50; ++N) {
        Int e2c = N % 4 == 0 ? 0 : 1, e3c = N % 9 == 0 ? 0 : 1;
        for (auto [p, k] : factor(N).factors) {
            if (e2c) e2c *= 1 + kronecker(-4, p);
            if (e3c) e3c *= 1 + kronecker(-3, p);
        }
        Int einf = 0;
        for (Int dd : divisors(N)) einf += euler_phi(gcd_ll(dd, N / dd));
        Ideal lvl = rational_ideal(Q, N);
        if (elliptic_count(cache, Q, 2, unit_ideal(), lvl) != e2c ||
            elliptic_count(cache, Q, 3, unit_ideal(), lvl) != e3c ||
            cusp_count(N) != einf) {
            pass = false;
            os << "N=" << N << " ";
        }
    }
    // the genus <= 2 cutoff set
    auto recs = enumerate_all(cache, Q, 2);
    std::set<Int> modular, expect;
    for (auto& r : recs)
        if (r.D.is_unit()) modular.insert(r.N.norm);
    for (Int N = 1; N <= 29; ++N) expect.insert(N);
    for (Int N : {31, 32, 36, 37, 49, 50}) expect.insert(N);
    if (modular != expect) {
        pass = false;
        os << "cutoff set mismatch";
    }
    report(10, "classical oracle for X_0(N), N <= 50, and the genus cutoff", pass,
           os.str());
}

void criterion11(const std::vector<CurveRecord>& deg2) {
    BaseField Q = make_field(1);
    CMCache cache;
    std::vector<CurveRecord> all = enumerate_all(cache, Q, 2);
    all.insert(all.end(), deg2.begin(), deg2.end());
    Rat best1(1000), best2(1000);
    Int at1 = 0, at1D = 0, at2 = 0, at2D = 0;
    for (auto& r : all) {
        if (r.sig.genus == 1 && r.sig.area < best1) {
            best1 = r.sig.area;
            at1 = r.d_F;
            at1D = r.D.norm;
        }
        if (r.sig.genus == 2 && r.sig.area < best2) {
            best2 = r.sig.area;
            at2 = r.d_F;
            at2D = r.D.norm;
        }
    }
    bool pass = best1 == make_rat(1, 2) && at1 == 13 && at1D == 4 &&
                best2 == make_rat(2) && at2 == 1 && at2D == 26;
    std::ostringstream os;
    os << "min genus-1 area " << best1.get_str() << " at (" << at1 << "," << at1D
       << "), min genus-2 area " << best2.get_str() << " at (" << at2 << ","
       << at2D << ")";
    report(11, "extremal area records recomputed exactly", pass, os.str());
}

} // namespace

int main() {
    std::cout << "acceptance suite" << std::endl;
    std::vector<GoldenRow> golden;
    try {
        golden = parse_tables(default_golden_path());
    } catch (const std::exception& e) {
        std::cout << "[FAIL] cannot load golden data: " << e.what() << std::endl;
        return 1;
    }
    auto t0 = std::chrono::steady_clock::now();
    auto deg2 = enumerate_degree2_all();
    double deg2_secs = seconds_since(t0);

    criterion1(golden);
    criterion2(golden, deg2, deg2_secs);
    criterion3();
    criterion4();
    criterion5(golden);
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11(deg2);

    std::cout << (failures == 0 ? "all criteria passed"
                                : std::to_string(failures) + " criterion(s) failed")
              << std::endl;
    return failures;
}
