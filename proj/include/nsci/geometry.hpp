#pragma once

#include "nsci/linalg.hpp"

#include <Eigen/Dense>
#include <array>
#include <boost/rational.hpp>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

namespace nsci {

using Rational = boost::rational<long long>;
using RVec3 = std::array<Rational, 3>;

Rational dot(const RVec3& a, const RVec3& b);
RVec3 cross(const RVec3& a, const RVec3& b);
Eigen::Vector3d to_double(const RVec3& v);

// One element of the direction set with its orthonormal triad
// {xi, A, B = xi x A}. The placement shift is filled in by the jets module.
struct Direction {
    RVec3 xi, A, B;
    Eigen::Vector3d xi_d, A_d, B_d;
    Eigen::Vector3d alpha_shift = Eigen::Vector3d::Zero();
};

struct DirectionSet {
    std::vector<Direction> directions;
    int n_star = 0;
    Eigen::Matrix<double, 6, 6> gram;
    // c_xi(R) = <M_xi, R>_F are the coordinates of R in the basis xi (x) xi.
    std::vector<Eigen::Matrix3d> coordinate_forms;
    std::vector<std::array<std::array<Rational, 3>, 3>> coordinate_forms_exact;
    std::vector<Rational> id_coordinates;
    double ball_radius = 0;   // Frobenius radius of the admissible ball around Id
    double certified_radius = 0;  // largest radius on which every coordinate stays positive
    double sup_gamma_c0 = 0;  // sampled sup over the ball
    double min_gamma = 0;     // sampled min over the ball
    double sup_gamma_bound = 0;  // exact sup over the ball from the coordinate forms
    double min_gamma_bound = 0;  // exact inf over the ball

    std::size_t size() const { return directions.size(); }
};

// Radius named in the lemma and the default radius actually used. With six
// directions the coordinate forms have Frobenius norm above 1, so some
// coordinate turns negative inside the radius-1/2 ball; 0.46 is certified.
inline constexpr double kLemmaBallRadius = 0.5;
inline constexpr double kDefaultBallRadius = 0.46;

// Builds the six-direction candidate set and runs the construction checks:
// Gram nonsingular, identity coordinates positive, every coordinate positive
// on the Frobenius ball |R - Id| <= radius (exactly, via the coordinate
// forms, and on a random sample). Throws Error(construction).
DirectionSet build_direction_set(double radius = kDefaultBallRadius, int samples = 10000,
                                 unsigned long long seed = 12345);

// Linear coordinate c_xi(R); any scalar type with + and * works.
template <typename Scalar>
Scalar coordinate(const DirectionSet& set, std::size_t k, const Mat3<Scalar>& R) {
    const Eigen::Matrix3d& M = set.coordinate_forms[k];
    Scalar s = Scalar(0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s = s + R(i, j) * M(i, j);
    return s;
}

// gamma_xi(R) = sqrt(c_xi(R)). Throws Error(domain) outside the ball and
// Error(construction) if a coordinate is not positive inside it.
double gamma(const DirectionSet& set, std::size_t k, const Eigen::Matrix3d& R);
// Same without the ball check, for callers that verified the domain.
double gamma_unchecked(const DirectionSet& set, std::size_t k, const Eigen::Matrix3d& R);

struct GeometryMeasure {
    double sup_gamma_c0 = 0;
    int cardinality = 0;
    double gamma_at_id = 0;
    double min_gamma = 0;
};

GeometryMeasure measure_constants(const DirectionSet& set);

// Reconstruction ||sum gamma^2 xi(x)xi - R||_F over random R in a ball of
// the given radius. Samples where some coordinate is not positive (gamma not
// real) are counted and excluded from the error.
struct ReconstructionCheck {
    double max_error = 0;
    int samples = 0;
    int non_real = 0;
    double min_coordinate = 0;
};
ReconstructionCheck reconstruction_check(const DirectionSet& set, double radius, int samples,
                                         unsigned long long seed);

// Random symmetric R with |R - Id|_F <= radius, uniform in the ball.
Eigen::Matrix3d random_ball_matrix(std::mt19937_64& rng, double radius);

nlohmann::json to_json(const DirectionSet& set);

}  // namespace nsci
