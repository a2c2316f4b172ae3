#include <doctest.h>

#include "shimura/curves.hpp"

using namespace shimura;

namespace {
Ideal by_norm(const BaseField& F, Int m, size_t which = 0) {
    auto v = ideals_of_norm(F, m);
    REQUIRE(v.size() > which);
    return v[which];
}
} // namespace

TEST_CASE("validate rejects bad data") {
    BaseField Q = make_field(1);
    CHECK_THROWS_AS(validate(Q, rational_ideal(Q, 4), unit_ideal()), NotSquarefree);
    CHECK_THROWS_AS(validate(Q, rational_ideal(Q, 6), rational_ideal(Q, 2)),
                    NotCoprime);
    BaseField F5 = make_field(5);
    CHECK_THROWS_AS(validate(F5, unit_ideal(), unit_ideal()), ParityViolation);
    CHECK_NOTHROW(validate(Q, unit_ideal(), rational_ideal(Q, 7)));
}

TEST_CASE("areas") {
    BaseField Q = make_field(1);
    CHECK(area(validate(Q, unit_ideal(), unit_ideal())) == make_rat(1, 6));
    CHECK(area(validate(Q, rational_ideal(Q, 6), unit_ideal())) == make_rat(1, 3));
    CHECK(area(validate(Q, rational_ideal(Q, 26), unit_ideal())) == make_rat(2));
    BaseField F13 = make_field(13);
    CHECK(area(validate(F13, by_norm(F13, 4), unit_ideal())) == make_rat(1, 2));
}

TEST_CASE("signatures match reference rows") {
    BaseField Q = make_field(1);
    CMCache cache;
    auto sig_of = [&](const BaseField& F, CMCache& c, Ideal D, Ideal N) {
        return render_signature(signature(c, validate(F, std::move(D), std::move(N))));
    };
    CHECK(sig_of(Q, cache, unit_ideal(), unit_ideal()) == "(0;2,3;1)");
    CHECK(sig_of(Q, cache, rational_ideal(Q, 6), rational_ideal(Q, 5)) == "(1;2^4)");
    CHECK(sig_of(Q, cache, unit_ideal(), rational_ideal(Q, 11)) == "(1;-;2)");
    CHECK(sig_of(Q, cache, rational_ideal(Q, 26), unit_ideal()) == "(2;-)");
    CHECK(sig_of(Q, cache, unit_ideal(), rational_ideal(Q, 13)) == "(0;2^2,3^2;2)");

    BaseField F5 = make_field(5);
    CMCache c5;
    CHECK(sig_of(F5, c5, by_norm(F5, 11), unit_ideal()) == "(0;2^2,3^2)");
    CHECK(sig_of(F5, c5, by_norm(F5, 4), unit_ideal()) == "(0;2,5^2)");
    CHECK(sig_of(F5, c5, by_norm(F5, 4), by_norm(F5, 11)) == "(0;5^4)");

    BaseField F8 = make_field(8);
    CMCache c8;
    CHECK(sig_of(F8, c8, by_norm(F8, 2), unit_ideal()) == "(0;3^2,4)");
    // N = 49: the square of a norm-7 prime vs the rational ideal (7)
    auto i49 = ideals_of_norm(F8, 49);
    REQUIRE(i49.size() == 3);
    std::vector<std::string> sigs;
    for (const Ideal& N : i49)
        sigs.push_back(sig_of(F8, c8, by_norm(F8, 2), N));
    std::sort(sigs.begin(), sigs.end());
    CHECK(sigs == std::vector<std::string>{"(1;3^8)", "(2;3^4)", "(2;3^4)"});

    BaseField F13 = make_field(13);
    CMCache c13;
    CHECK(sig_of(F13, c13, by_norm(F13, 4), unit_ideal()) == "(1;2)");

    BaseField F12 = make_field(12);
    CMCache c12;
    CHECK(sig_of(F12, c12, by_norm(F12, 2), unit_ideal()) == "(0;3^2,6)");
    CHECK(sig_of(F12, c12, by_norm(F12, 3), unit_ideal()) == "(0;2^3,6)");
    CHECK(sig_of(F12, c12, by_norm(F12, 2), by_norm(F12, 13)) == "(0;3^4,6^2)");
}

TEST_CASE("signature rendering and parsing") {
    for (const char* s :
         {"(0;2,3;1)", "(2;-)", "(1;2^4)", "(0;2^2,3^2;2)", "(1;-;2)",
          "(2;2^10,3^3)", "(0;2^9,18)"}) {
        Signature sig = parse_signature(s);
        CHECK(render_signature(sig) == s);
    }
    CHECK(parse_signature("(0; 2,3; 1)").genus == 0); // whitespace tolerated
    CHECK_THROWS_AS(parse_signature("0;2,3"), ParseError);
    CHECK_THROWS_AS(parse_signature("(x;-)"), std::exception);
}

TEST_CASE("genus computation never rounds") {
    // a deliberately wrong calibration surfaces as a hard error, not a warning
    BaseField Q = make_field(1);
    CMCache cache;
    EllipticConfig half;
    half.half_calibration = true;
    CHECK_THROWS_AS(signature(cache, validate(Q, rational_ideal(Q, 6), unit_ideal()),
                              half),
                    InternalInconsistency);
}
