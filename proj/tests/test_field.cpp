#include "gen.hpp"

#include "nsci/errors.hpp"
#include "nsci/field.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nsci;
using doctest::Approx;

namespace {
template <int C>
double rel(const Field<C>& a, double scale) {
    return l2_parseval(a) / scale;
}
}  // namespace

TEST_SUITE("field") {

TEST_CASE("grids") {
    CHECK_THROWS_AS(make_grid(12), Error);
    CHECK_THROWS_AS(make_grid(4), Error);
    CHECK(make_grid(32).nk() == 17);
    VectorField a(make_grid(16)), b(make_grid(32));
    try {
        a += b;
        FAIL("expected grid mismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == err::grid_mismatch);
    }
}

TEST_CASE("round trip through real space") {
    const Grid g = make_grid(16);
    test::for_all(10, 1, [&](test::Gen& gen) {
        VectorField v = gen.field<3>(g, 7);
        VectorField w = from_samples<3>(g, samples(v));
        CHECK(rel(v - w, l2_parseval(v)) < 1e-14);
    });
}

TEST_CASE("Leray projection is divergence free and idempotent") {
    const Grid g = make_grid(32);
    test::for_all(20, 2, [&](test::Gen& gen) {
        VectorField v = gen.field<3>(g, gen.integer(1, 15));
        VectorField p = helmholtz(v);
        CHECK(rel(div(p), l2_parseval(v)) < 1e-13);
        CHECK(rel(helmholtz(p) - p, l2_parseval(v)) < 1e-14);
        CHECK(rel(curl(v - p), l2_parseval(v)) < 1e-13);
    });
}

TEST_CASE("inverse divergence is a traceless right inverse on nonzero modes") {
    const Grid g = make_grid(32);
    test::for_all(20, 3, [&](test::Gen& gen) {
        VectorField v = gen.field<3>(g, gen.integer(1, 15));
        SymTensorField R = reynolds(v);
        CHECK(rel(div_tensor(R) - project_nonzero(v), l2_parseval(v)) < 1e-13);
        CHECK(rel(trace(R), l2_parseval(R)) < 1e-14);
    });
}

TEST_CASE("calculus identities") {
    const Grid g = make_grid(32);
    test::for_all(10, 4, [&](test::Gen& gen) {
        ScalarField f = gen.field<1>(g, 10);
        VectorField v = gen.field<3>(g, 10);
        CHECK(l2_parseval(curl(grad(f))) < 1e-12 * l2_parseval(f) * 100);
        CHECK(l2_parseval(div(curl(v))) < 1e-12 * l2_parseval(v) * 100);
        ScalarField pf = project_nonzero(f);
        CHECK(rel(laplacian(inv_laplacian(pf)) - pf, l2_parseval(pf)) < 1e-14);
    });
    ScalarField one = constant_field<1>(g, {1.0});
    try {
        inv_laplacian(one);
        FAIL("expected nonzero mean");
    } catch (const Error& e) {
        CHECK(e.kind() == err::nonzero_mean);
    }
}

TEST_CASE("dealiased products match pointwise products when resolvable") {
    const Grid g = make_grid(32);
    test::for_all(10, 5, [&](test::Gen& gen) {
        ScalarField a = gen.field<1>(g, 7), b = gen.field<1>(g, 7);
        Samples exact = to_real(g, a.c[0]) * to_real(g, b.c[0]);
        ScalarField p = product(a, b);
        CHECK((to_real(g, p.c[0]) - exact).abs().maxCoeff() < 1e-12 * exact.abs().maxCoeff());
    });
}

TEST_CASE("Parseval and integrals") {
    const Grid g = make_grid(16);
    const double vol = std::pow(2 * std::numbers::pi, 3);
    test::for_all(10, 6, [&](test::Gen& gen) {
        ScalarField a = gen.field<1>(g, 5), b = gen.field<1>(g, 5);
        const double direct = integral_of_samples(g, to_real(g, a.c[0]) * to_real(g, b.c[0]));
        CHECK(inner(a, b) == Approx(direct).epsilon(1e-12));
        CHECK(lp_norm(a, 2.0) == Approx(l2_parseval(a)).epsilon(1e-12));
    });
    CHECK(integral(constant_field<1>(g, {2.0})) == Approx(2 * vol));
}

TEST_CASE("random fields are deterministic and band-limited") {
    const Grid g = make_grid(16);
    VectorField a = random_field<3>(g, 4, 99), b = random_field<3>(g, 4, 99);
    CHECK(l2_parseval(a - b) == 0.0);
    CHECK(bandwidth(a) == 4);
}

}
