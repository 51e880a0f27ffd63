#include "gen.hpp"

#include "nsci/errors.hpp"
#include "nsci/geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsci;
using doctest::Approx;

TEST_SUITE("geometry") {

TEST_CASE("identity coordinates") {
    const DirectionSet set = build_direction_set();
    REQUIRE(set.size() == 6);
    for (std::size_t k = 0; k < set.size(); ++k)
        CHECK(std::abs(gamma(set, k, Eigen::Matrix3d::Identity()) - 1.0 / std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("certified radius and bounds") {
    const DirectionSet set = build_direction_set();
    // 1/2 divided by the largest Frobenius norm of the coordinate forms.
    CHECK(set.certified_radius == Approx(0.4631234566492528).epsilon(1e-12));
    CHECK(set.sup_gamma_bound == Approx(0.9983124940792295).epsilon(1e-12));
    CHECK(set.sup_gamma_c0 <= set.sup_gamma_bound);
    CHECK(set.min_gamma >= set.min_gamma_bound);
}

TEST_CASE("reconstruction on the certified ball") {
    const DirectionSet set = build_direction_set();
    test::for_all(200, 7, [&](test::Gen& g) {
        const Eigen::Matrix3d R = g.ball_matrix(kDefaultBallRadius);
        Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
        for (std::size_t k = 0; k < set.size(); ++k) {
            const double gk = gamma(set, k, R);
            CHECK(gk > 0);
            sum += gk * gk * set.directions[k].xi_d * set.directions[k].xi_d.transpose();
        }
        CHECK((sum - R).norm() < 1e-13);
    });
}

TEST_CASE("the radius 1/2 ball contains matrices with a negative coordinate") {
    const DirectionSet set = build_direction_set();
    const ReconstructionCheck rc = reconstruction_check(set, kLemmaBallRadius, 10000, 1);
    CHECK(rc.non_real > 0);
    CHECK(rc.min_coordinate < 0);
    CHECK(rc.max_error < 1e-12);
    const ReconstructionCheck ok = reconstruction_check(set, kDefaultBallRadius, 10000, 1);
    CHECK(ok.non_real == 0);
}

TEST_CASE("outside the ball is a domain error") {
    const DirectionSet set = build_direction_set();
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    R(0, 0) += 0.6;
    try {
        gamma(set, 0, R);
        FAIL("expected domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == err::domain);
    }
}

}
