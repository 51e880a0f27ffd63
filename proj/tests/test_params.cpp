#include "gen.hpp"

#include "nsci/errors.hpp"
#include "nsci/params.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsci;
using doctest::Approx;

TEST_SUITE("params") {

TEST_CASE("schedule at q = 0 for the desk preset") {
    const LevelSchedule s = schedule(ParameterConfig{}, 0);
    // lambda_q = 2 pi a^(b^q), delta_q = lambda_q^(-2 beta), computed by hand.
    CHECK(s.lambda_q == Approx(31.41592653589793).epsilon(1e-14));
    CHECK(s.lambda_q1 == Approx(157.07963267948966).epsilon(1e-14));
    CHECK(s.delta_1 == Approx(0.3637274053669079).epsilon(1e-13));
    CHECK(s.delta_q == Approx(0.5018454898710499).epsilon(1e-13));
    CHECK(s.delta_q2 == Approx(0.19106802868396472).epsilon(1e-13));
    CHECK(s.r_perp == Approx(0.010082908788042915).epsilon(1e-13));
    CHECK(s.r_par == Approx(0.05559994423298189).epsilon(1e-13));
    CHECK(s.mu == Approx(866.1804842937687).epsilon(1e-13));
    CHECK(s.ell == Approx(0.0010055555672026178).epsilon(1e-13));
    CHECK(s.p_int == Approx(1.0002187978620323).epsilon(1e-14));
    CHECK(s.S_q == Approx(0.1));
    CHECK(s.I_q.half == Approx(0.1));
    CHECK(s.Itilde_q.half == Approx(0.105));
    CHECK(s.I_q1.half == Approx(0.11));
    CHECK(s.window.half == Approx(0.4));
}

TEST_CASE("epsilon_one") {
    const GeometryConstants k{1.0, 6, 1.0};
    CHECK(epsilon_one(1.0, k) == Approx(2.821618579904114e-08).epsilon(1e-12));
    CHECK(epsilon_one(0.0, k) == 0.0);
    test::for_all(20, 11, [&](test::Gen& g) {
        const double e = g.uniform(1e-3, 1e4);
        CHECK(epsilon_one(2 * e, k) == Approx(4 * epsilon_one(e, k)).epsilon(1e-14));
    });
    CHECK_THROWS_AS(epsilon_one(1.0, GeometryConstants{0.0, 6, 1.0}), Error);
}

TEST_CASE("validation rejects structural violations") {
    ParameterConfig c;
    c.a = 4;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("multiple of n_star"), Error);
    CHECK_NOTHROW(validate(c, false));
    c = ParameterConfig{};
    c.b = 1.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = ParameterConfig{};
    c.t0 = 0.3;
    CHECK_THROWS_AS(validate(c), Error);
    c = ParameterConfig{};
    c.eps = 0;
    CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("overflowing levels are refused") {
    try {
        schedule(ParameterConfig{}, 12);
        FAIL("expected overflow");
    } catch (const Error& e) {
        CHECK(e.kind() == err::schedule_overflow);
    }
}

TEST_CASE("intervals nest and deltas decrease") {
    test::for_all(50, 100, [](test::Gen& g) {
        ParameterConfig c;
        c.s = g.uniform(0.01, 0.24);
        c.b = g.uniform(1.1, 2.5);
        const int q = g.integer(0, 4);
        const LevelSchedule s = schedule(c, q);
        CHECK(s.I_q.half < s.Itilde_q.half);
        CHECK(s.Itilde_q.half < s.I_q1.half);
        CHECK(s.I_q1.half <= 2 * c.s);
        CHECK(s.delta_q1 < s.delta_q);
        CHECK(s.lambda_q1 > s.lambda_q);
        CHECK(s.r_perp < s.r_par);
    });
}

TEST_CASE("constraint report separates structure from asymptotics") {
    const ConstraintReport r = check_constraints(ParameterConfig{}, 2);
    CHECK(r.structural_ok());
    CHECK_FALSE(r.all_ok());
    const ConstraintRecord* ab = r.find("4 < alpha*b");
    REQUIRE(ab != nullptr);
    CHECK_FALSE(ab->satisfied);
    CHECK_FALSE(ab->structural);
    CHECK(ab->margin == Approx(-3.998));
    for (const auto& x : r.records) {
        CAPTURE(x.name);
        CHECK((x.satisfied ? x.margin >= 0 : x.margin <= 0));
    }
}

}
