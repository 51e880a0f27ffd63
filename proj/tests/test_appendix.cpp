#include "gen.hpp"

#include "nsci/appendix.hpp"
#include "nsci/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsci;
using doctest::Approx;

namespace {
ScalarField cosine(const Grid& g, int axis, int k, double amp) {
    Samples s(Eigen::Index(g.real_size()));
    for (int i0 = 0; i0 < g.n; ++i0)
        for (int i1 = 0; i1 < g.n; ++i1)
            for (int i2 = 0; i2 < g.n; ++i2) {
                const int i = axis == 0 ? i0 : axis == 1 ? i1 : i2;
                s(Eigen::Index(g.index(i0, i1, i2))) = amp * std::cos(k * g.x(i));
            }
    return from_samples(g, s);
}
}  // namespace

TEST_SUITE("appendix") {

TEST_CASE("decorrelation with a constant factor is exact") {
    const Grid g = make_grid(32);
    const ScalarField f = constant_field<1>(g, {1.0});
    const ScalarField gs = cosine(g, 0, 8, 1.0) + cosine(g, 1, 8, 0.5);
    for (double p : {1.0, 2.0}) {
        const DecorrelationResult r = decorrelation_check(f, gs, 8, p, 2.0);
        CHECK(r.ratio == Approx(1.0).epsilon(1e-12));
        CHECK(r.bound_ok);
    }
}

TEST_CASE("decorrelation preconditions") {
    const Grid g = make_grid(32);
    const ScalarField f = constant_field<1>(g, {1.0});
    try {
        decorrelation_check(f, cosine(g, 0, 7, 1.0), 8, 2.0, 2.0);
        FAIL("expected precondition");
    } catch (const Error& e) {
        CHECK(e.kind() == err::precondition);
    }
    // sigma = 1 violates the frequency hypothesis; it is reported, not thrown.
    const DecorrelationResult r = decorrelation_check(f, cosine(g, 0, 1, 1.0), 1, 2.0, 2.0);
    CHECK_FALSE(r.hypothesis_ok);
    CHECK_THROWS_AS(decorrelation_check(f, cosine(g, 0, 8, 1.0), 8, 3.0, 2.0), Error);
}

TEST_CASE("mean smallness decays like 1/sigma for a lacunary f") {
    const Grid g = make_grid(64);
    ScalarField f(g);
    for (int j = 2; j <= 4; ++j) f += cosine(g, 0, 1 << j, std::ldexp(1.0, -j));
    std::vector<double> xs, ys;
    for (int sigma : {4, 8, 16}) {
        const MeanSmallnessResult r = mean_smallness_check(f, cosine(g, 0, sigma, 1.0), sigma);
        xs.push_back(sigma);
        ys.push_back(r.lhs);
        CHECK_FALSE(r.flagged);
    }
    CHECK(log_log_slope(xs, ys) == Approx(-1.0).epsilon(1e-12));
    try {
        mean_smallness_check(f, constant_field<1>(g, {1.0}), 4);
        FAIL("expected nonzero mean");
    } catch (const Error& e) {
        CHECK(e.kind() == err::nonzero_mean);
    }
}

TEST_CASE("log-log slope recovers power laws") {
    test::for_all(20, 9, [](test::Gen& g) {
        const double a = g.uniform(-3, 3), c = g.uniform(0.1, 10);
        std::vector<double> x, y;
        for (int i = 1; i <= 4; ++i) {
            x.push_back(i * 1.7);
            y.push_back(c * std::pow(i * 1.7, a));
        }
        CHECK(log_log_slope(x, y) == Approx(a).epsilon(1e-12));
    });
}

TEST_CASE("inverse gradient bound on a high-frequency product") {
    const Grid g = make_grid(32);
    ScalarField a = cosine(g, 0, 1, 0.5);
    a.c[0](0) += 1.0;
    const InvGradResult r = inv_grad_product_check(a, cosine(g, 1, 8, 1.0), 8, 1.5);
    CHECK(r.lhs > 0);
    CHECK(r.lambda == 1);
    CHECK(r.ratio < 1.0);
    CHECK_THROWS_AS(inv_grad_product_check(a, cosine(g, 1, 8, 1.0), 8, 3.0), Error);
}

}
