#include "gen.hpp"

#include "nsci/errors.hpp"
#include "nsci/jets.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nsci;
using doctest::Approx;

namespace {
const ProfileSet& compact() {
    static const ProfileSet p = make_profiles(ProfileKind::Compact);
    return p;
}
const ProfileSet& raised() {
    static const ProfileSet p = make_profiles(ProfileKind::RaisedCosine, 1);
    return p;
}
const DirectionSet& dirs() {
    static const DirectionSet s = build_direction_set();
    return s;
}
}  // namespace

TEST_SUITE("jets") {

TEST_CASE("profile normalizations") {
    // Frozen from independent adaptive quadrature of the bump integrals.
    CHECK(compact().c_Phi == Approx(1.15172924291788).epsilon(1e-12));
    CHECK(compact().c_psi == Approx(3.91666854329898).epsilon(1e-12));
    CHECK(compact().phi_l2_normalized == Approx(1.0).epsilon(1e-10));
    CHECK(compact().psi_l2_normalized == Approx(1.0).epsilon(1e-10));
    CHECK(compact().omega_psi == 668);
    CHECK(compact().omega_phi == 838);
    // (1 + cos)^1 profiles: the normalization is 2 sqrt(2) in closed form.
    CHECK(raised().c_psi == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(raised().c_phi_rc == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("scales at sigma = 2") {
    const JetParams p = jet_params_for_sigma(2, 5);
    CHECK(p.sigma == 2);
    CHECK(p.r_perp == Approx(0.00248679598581086).epsilon(1e-12));
    CHECK(p.r_par == Approx(0.0218663973352974).epsilon(1e-12));
    CHECK(p.mu == Approx(7071.75027102254).epsilon(1e-12));
    CHECK(p.lambda * p.r_perp == Approx(2.0).epsilon(1e-14));
    const JetParams q = jet_params(157.07963267948966, 5);
    CHECK(q.sigma == 2);
    CHECK(q.r_perp == Approx(2.0 / 157.07963267948966).epsilon(1e-14));
}

TEST_CASE("predicted exponents") {
    CHECK(predicted_exponent("W", 0, 0, 2) == Approx(0.0));
    CHECK(predicted_exponent("W", 0, 0, 1) == Approx(-8.0 / 7.0));
    CHECK(predicted_exponent("V", 1, 1, 2) == Approx(1.0));
}

TEST_CASE("compact identities in the phase variables") {
    const JetFamily f = build_family(jet_params_for_sigma(2, 5), dirs(), compact());
    CHECK(f.disjoint);
    for (const auto& c : f.certificates) CHECK(c.distance >= c.required);
    const ThetaQuadrature q = theta_quadrature(f);
    for (std::size_t k = 0; k < f.size(); ++k) {
        CAPTURE(k);
        const JetIdentityReport r = check_identities(f, k, q);
        CHECK(r.mean_WW_error < 1e-9);
        CHECK(std::abs(r.W_l2 - 1.0) < 1e-9);
        CHECK(r.div_ratio < 1e-12);
        CHECK(r.transport_ratio < 1e-10);
        CHECK(r.curlcurl_ratio < 1e-12);
    }
}

TEST_CASE("raised-cosine jets on a grid") {
    const JetFamily f = build_family(jet_params_for_sigma(2, 5), dirs(), raised());
    CHECK(jet_bandwidth(f, 0, JetQuantity::W) == 14);
    CHECK(jet_bandwidth(f, 0, JetQuantity::PhiPsiSq) == 28);
    const Grid g = make_grid(32);
    const double vol = std::pow(2 * std::numbers::pi, 3);
    test::for_all(4, 8, [&](test::Gen& gen) {
        const double t = gen.uniform(0.0, 1.0);
        const std::size_t k = std::size_t(gen.integer(0, 5));
        const VectorField W = jet_w(f, k, g, t), Wc = jet_wc(f, k, g, t), V = jet_v(f, k, g, t);
        CHECK(l2_parseval(W) / std::sqrt(vol) == Approx(1.0).epsilon(1e-13));
        CHECK(l2_parseval(W + Wc - curl(curl(V))) < 1e-13 * l2_parseval(W));
        CHECK(l2_parseval(div(W + Wc)) < 1e-13 * l2_parseval(W) * jet_bandwidth(f, k, JetQuantity::W));
        CHECK(std::abs(mean(W)[0]) + std::abs(mean(W)[1]) + std::abs(mean(W)[2]) < 1e-14);
    });
}

TEST_CASE("unresolvable jets are refused with the bandwidth") {
    const JetFamily f = build_family(jet_params_for_sigma(2, 5), dirs(), raised());
    try {
        jet_w(f, 0, make_grid(16), 0.0);
        FAIL("expected under-resolution");
    } catch (const Error& e) {
        CHECK(e.kind() == err::under_resolution);
        CHECK(std::string(e.what()).find("14") != std::string::npos);
    }
}

TEST_CASE("compact supports are disjoint on a grid") {
    const JetFamily f = build_family(jet_params_for_sigma(2, 5), dirs(), compact());
    CHECK(support_overlaps(f, make_grid(32)) == 0);
}

}
