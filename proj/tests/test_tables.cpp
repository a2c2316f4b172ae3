#include <doctest.h>

#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "shimura/tables.hpp"

using namespace shimura;

TEST_CASE("golden bundle parses with the full census") {
    auto rows = parse_tables(default_golden_path());
    CHECK(rows.size() == 858);
    std::map<int, int> by_degree;
    for (auto& r : rows) ++by_degree[r.degree];
    CHECK(by_degree[1] == 52);
    CHECK(by_degree[2] == 199);
    CHECK(by_degree[3] == 212);
    CHECK(by_degree[4] == 228);
    CHECK(by_degree[5] == 104);
    CHECK(by_degree[6] == 42);
    CHECK(by_degree[7] == 21);
}

TEST_CASE("round trip: render(parse(row)) is byte-identical") {
    std::ifstream in(default_golden_path());
    std::string line;
    bool seen_header = false;
    auto rows = parse_tables(default_golden_path());
    size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) { seen_header = true; continue; }
        REQUIRE(i < rows.size());
        CHECK(render_row(rows[i]) == line);
        ++i;
    }
    CHECK(i == rows.size());
}

TEST_CASE("lookup") {
    auto rows = parse_tables(default_golden_path());
    auto r1 = lookup(rows, 49, 1, 27);
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].signature == "(1;3)");
    auto r2 = lookup(rows, 8, 2, 49);
    REQUIRE(r2.size() == 2);
    CHECK(r2[0].label != r2[1].label);
    auto r3 = lookup(rows, 8, 2, 49, std::string("square"));
    REQUIRE(r3.size() == 1);
    CHECK(r3[0].signature == "(2;3^4)");
    auto r4 = lookup(rows, 1259712, 3, 1);
    REQUIRE(r4.size() == 1);
    CHECK(r4[0].signature == "(0;2^9,18)");
    CHECK_THROWS_AS(lookup(rows, 5, 999, 1), NotFound);
}

TEST_CASE("verify: clean pass and injected fault") {
    auto rows = parse_tables(default_golden_path());
    BaseField Q = make_field(1);
    CMCache cache;
    auto recs = enumerate_all(cache, Q, 2);
    DiffReport rep = verify(recs, rows, 1);
    CHECK(rep.empty());
    // mutate one golden row: exactly a two-sided singleton diff
    auto mutated = rows;
    for (auto& r : mutated)
        if (r.degree == 1 && r.D == 26) { r.signature = "(2;2^2)"; break; }
    DiffReport rep2 = verify(recs, mutated, 1);
    CHECK(rep2.missing.size() == 1);
    CHECK(rep2.extra.size() == 1);
    CHECK_FALSE(rep2.empty());
    CHECK(rep2.json().find("\"pass\":false") != std::string::npos);
}

TEST_CASE("extremal-record audit from the bundle") {
    auto rows = parse_tables(default_golden_path());
    // largest elliptic cycle order is 18, at degree 6, d_F = 108^3
    int max_order = 0;
    Int max_d = 0;
    for (auto& r : rows) {
        Signature s = parse_signature(r.signature);
        for (auto& [q, k] : s.elliptic)
            if (q > max_order) { max_order = q; max_d = r.d_F; }
    }
    CHECK(max_order == 18);
    CHECK(max_d == 1259712);
    // largest D and N both 232, at d_F = 49
    Int maxD = 0, maxN = 0;
    for (auto& r : rows) { maxD = std::max(maxD, r.D); maxN = std::max(maxN, r.N); }
    CHECK(maxD == 232);
    CHECK(maxN == 232);
    // the degree-5 curve with 20 elliptic cycles of order 2
    auto r5 = lookup(rows, 341692, 1, 1);
    CHECK(r5[0].signature == "(1;2^20,3^3)");
}

TEST_CASE("largest-area records from the bundle (pure data checks)") {
    auto rows = parse_tables(default_golden_path());
    auto implied_area = [](const GoldenRow& r) {
        Signature s = parse_signature(r.signature);
        Rat A = make_rat(2 * s.genus - 2 + s.cusps);
        for (auto& [q, k] : s.elliptic)
            A += Rat(static_cast<long>(k)) * (Rat(1) - Rat(1) / Rat(q));
        return A;
    };
    Rat best0(0), best1(0), best2(0);
    GoldenRow at0, at1, at2;
    for (auto& r : rows) {
        if (r.degree == 1 && r.D == 1) continue; // records exclude X_0(N)
        Rat A = implied_area(r);
        if (r.genus == 0 && A > best0) { best0 = A; at0 = r; }
        if (r.genus == 1 && A > best1) { best1 = A; at1 = r; }
        if (r.genus == 2 && A > best2) { best2 = A; at2 = r; }
    }
    CHECK(best0 == make_rat(17, 2));
    CHECK(at0.d_F == 7168);
    CHECK(at0.D == 7);
    CHECK(best1 == make_rat(38, 3));
    CHECK(at1.d_F == 30056);
    CHECK(best2 == make_rat(15));
    CHECK(at2.d_F == 2000);
    CHECK(at2.N == 25);
}

namespace {

Rat implied_area_of(const GoldenRow& r) {
    Signature s = parse_signature(r.signature);
    Rat A = make_rat(2 * s.genus - 2 + s.cusps);
    for (auto& [q, k] : s.elliptic)
        A += Rat(static_cast<long>(k)) * (Rat(1) - Rat(1) / Rat(q));
    return A;
}

// attainable Psi values of an ideal of norm N in a degree-`deg` field
void psi_options_rec(Int p, int rem, Int acc, int deg, std::set<Int>& out) {
    if (rem == 0) { out.insert(acc); return; }
    for (int f = 1; f <= deg; ++f)
        for (int e = 1; f * e <= rem; ++e)
            psi_options_rec(p, rem - f * e, acc * pow_ll(p, f * (e - 1)) *
                            (pow_ll(p, f) + 1), deg, out);
}

std::set<Int> psi_options(Int N, int deg) {
    std::set<Int> vals{1};
    for (auto [p, a] : factor(N).factors) {
        std::set<Int> local;
        psi_options_rec(p, a, 1, deg, local);
        std::set<Int> next;
        for (Int v : vals)
            for (Int l : local) next.insert(v * l);
        vals = std::move(next);
    }
    return vals;
}

} // namespace

TEST_CASE("bundle internal consistency: level areas scale by attainable Psi") {
    // for rows sharing (degree, d_F, field_index, D) with a level-1 anchor,
    // area(N)/area(1) must be an attainable Psi value of an ideal of norm N
    auto rows = parse_tables(default_golden_path());
    std::map<std::tuple<int, Int, int, Int>, Rat> anchor;
    for (auto& r : rows)
        if (r.N == 1)
            anchor[{r.degree, r.d_F, r.field_index, r.D}] = implied_area_of(r);
    for (auto& r : rows) {
        if (r.N == 1) continue;
        auto it = anchor.find({r.degree, r.d_F, r.field_index, r.D});
        if (it == anchor.end()) continue;
        Rat ratio = implied_area_of(r) / it->second;
        REQUIRE_MESSAGE(ratio.get_den() == 1, render_row(r));
        Int psi = static_cast<Int>(ratio.get_num().get_si());
        CHECK_MESSAGE(psi_options(r.N, r.degree).count(psi) == 1, render_row(r));
    }
}

TEST_CASE("bundle internal consistency: a common A_prim exists per field") {
    // level-1 rows of one field admit one primitive area dividing all of them
    // through attainable Phi values of squarefree ideals
    auto rows = parse_tables(default_golden_path());
    std::map<std::tuple<int, Int, int>, std::vector<GoldenRow>> fields;
    for (auto& r : rows)
        if (r.N == 1) fields[{r.degree, r.d_F, r.field_index}].push_back(r);
    for (auto& [key, lst] : fields) {
        std::set<Rat> common;
        bool first = true;
        for (auto& r : lst) {
            std::set<Rat> cands;
            Rat A = implied_area_of(r);
            // Phi of a squarefree ideal of norm D: products of (p^f - 1)
            std::function<void(std::vector<std::pair<Int, int>>, size_t, Int)> rec =
                [&](std::vector<std::pair<Int, int>> fac, size_t idx, Int acc) {
                    if (idx == fac.size()) { cands.insert(A / Rat(static_cast<long>(acc))); return; }
                    auto [p, a] = fac[idx];
                    std::function<void(int, Int)> split = [&](int rem, Int loc) {
                        if (rem == 0) { rec(fac, idx + 1, acc * loc); return; }
                        for (int f = 1; f <= std::get<0>(key) && f <= rem; ++f)
                            split(rem - f, loc * (pow_ll(p, f) - 1));
                    };
                    split(a, 1);
                };
            rec(factor(r.D).factors, 0, 1);
            if (first) { common = cands; first = false; }
            else {
                std::set<Rat> inter;
                for (const Rat& c : common)
                    if (cands.count(c)) inter.insert(c);
                common = std::move(inter);
            }
        }
        CHECK_MESSAGE(!common.empty(), "degree ", std::get<0>(key), " d_F ",
                      std::get<1>(key), " index ", std::get<2>(key));
    }
}
