#include "nsci/geometry.hpp"

#include "nsci/errors.hpp"

#include <boost/integer/common_factor.hpp>
#include <cmath>
#include <sstream>

namespace nsci {

namespace {

RVec3 rv(long long a, long long b, long long c, long long d) {
    return {Rational(a, d), Rational(b, d), Rational(c, d)};
}

using RMat6 = std::array<std::array<Rational, 6>, 6>;

// Gauss-Jordan elimination over the rationals; returns false if singular.
bool invert(RMat6 m, RMat6& inv) {
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) inv[i][j] = Rational(i == j ? 1 : 0);
    for (int col = 0; col < 6; ++col) {
        int piv = -1;
        for (int r = col; r < 6; ++r)
            if (m[r][col] != Rational(0)) {
                piv = r;
                break;
            }
        if (piv < 0) return false;
        std::swap(m[piv], m[col]);
        std::swap(inv[piv], inv[col]);
        Rational p = m[col][col];
        for (int j = 0; j < 6; ++j) {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for (int r = 0; r < 6; ++r) {
            if (r == col || m[r][col] == Rational(0)) continue;
            Rational f = m[r][col];
            for (int j = 0; j < 6; ++j) {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return true;
}

double to_d(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

}  // namespace

Rational dot(const RVec3& a, const RVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

RVec3 cross(const RVec3& a, const RVec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Eigen::Vector3d to_double(const RVec3& v) { return {to_d(v[0]), to_d(v[1]), to_d(v[2])}; }

Eigen::Matrix3d random_ball_matrix(std::mt19937_64& rng, double radius) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Eigen::Matrix<double, 6, 1> e;
    for (int i = 0; i < 6; ++i) e(i) = nd(rng);
    e *= radius * std::pow(ud(rng), 1.0 / 6.0) / e.norm();
    // Orthonormal coordinates of symmetric matrices under the Frobenius product.
    const double r2 = std::sqrt(0.5);
    Eigen::Matrix3d E;
    E << e(0), r2 * e(3), r2 * e(4), r2 * e(3), e(1), r2 * e(5), r2 * e(4), r2 * e(5), e(2);
    return Eigen::Matrix3d::Identity() + E;
}

DirectionSet build_direction_set(double radius, int samples, unsigned long long seed) {
    if (!(radius > 0)) throw Error(err::config, "ball radius must be positive");
    // Each entry: xi and its chosen A (both over the common denominator 5).
    const std::array<std::array<RVec3, 2>, 6> candidates{{
        {rv(3, 4, 0, 5), rv(4, -3, 0, 5)},
        {rv(3, -4, 0, 5), rv(4, 3, 0, 5)},
        {rv(0, 3, 4, 5), rv(0, 4, -3, 5)},
        {rv(0, 3, -4, 5), rv(0, 4, 3, 5)},
        {rv(4, 0, 3, 5), rv(3, 0, -4, 5)},
        {rv(-4, 0, 3, 5), rv(3, 0, 4, 5)},
    }};
    DirectionSet set;
    long long lcm = 1;
    for (const auto& c : candidates) {
        Direction d;
        d.xi = c[0];
        d.A = c[1];
        d.B = cross(d.xi, d.A);
        const RVec3* tri[3] = {&d.xi, &d.A, &d.B};
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                if (dot(*tri[i], *tri[j]) != Rational(i == j ? 1 : 0))
                    throw Error(err::construction, "triad is not orthonormal");
        for (const RVec3* v : tri)
            for (const auto& r : *v) lcm = boost::integer::lcm(lcm, r.denominator());
        d.xi_d = to_double(d.xi);
        d.A_d = to_double(d.A);
        d.B_d = to_double(d.B);
        set.directions.push_back(d);
    }
    set.n_star = static_cast<int>(lcm);

    const std::size_t m = set.directions.size();
    RMat6 G, Ginv;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            Rational ip = dot(set.directions[i].xi, set.directions[j].xi);
            G[i][j] = ip * ip;
            set.gram(i, j) = to_d(G[i][j]);
        }
    if (!invert(G, Ginv)) throw Error(err::construction, "gram matrix is singular");

    // c_k(R) = sum_j Ginv[k][j] <R, xi_j (x) xi_j>_F.
    for (std::size_t k = 0; k < m; ++k) {
        std::array<std::array<Rational, 3>, 3> M{};
        for (std::size_t j = 0; j < m; ++j)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    M[a][b] += Ginv[k][j] * set.directions[j].xi[a] * set.directions[j].xi[b];
        Eigen::Matrix3d Md;
        Rational id = 0;
        for (int a = 0; a < 3; ++a) {
            id += M[a][a];
            for (int b = 0; b < 3; ++b) Md(a, b) = to_d(M[a][b]);
        }
        if (id <= Rational(0)) throw Error(err::construction, "identity coordinates are not positive");
        set.coordinate_forms_exact.push_back(M);
        set.coordinate_forms.push_back(Md);
        set.id_coordinates.push_back(id);
    }

    // Over the ball |R - Id|_F <= r, c_k ranges over c_k(Id) -+ r |M_k|_F
    // (M_k is symmetric, so the extremes are attained by symmetric R).
    double lo = INFINITY, hi = 0, cert = INFINITY;
    for (std::size_t k = 0; k < m; ++k) {
        double c0 = to_d(set.id_coordinates[k]);
        double nm = set.coordinate_forms[k].norm();
        lo = std::min(lo, c0 - radius * nm);
        hi = std::max(hi, c0 + radius * nm);
        cert = std::min(cert, c0 / nm);
    }
    set.ball_radius = radius;
    set.certified_radius = cert;
    if (!(lo > 0)) {
        std::ostringstream os;
        os << "gamma is not real on the ball of radius " << radius
           << " (minimum coordinate " << lo << "); largest certified radius " << cert;
        throw Error(err::construction, os.str());
    }
    set.min_gamma_bound = std::sqrt(lo);
    set.sup_gamma_bound = std::sqrt(hi);

    std::mt19937_64 rng(seed);
    double smin = INFINITY, smax = 0;
    for (int s = 0; s < samples; ++s) {
        Eigen::Matrix3d R = random_ball_matrix(rng, radius);
        for (std::size_t k = 0; k < m; ++k) {
            double c = coordinate(set, k, R);
            if (!(c > 0)) throw Error(err::construction, "gamma is not real on the sampled ball");
            smin = std::min(smin, std::sqrt(c));
            smax = std::max(smax, std::sqrt(c));
        }
    }
    for (std::size_t k = 0; k < m; ++k) {
        double g = std::sqrt(to_d(set.id_coordinates[k]));
        smin = std::min(smin, g);
        smax = std::max(smax, g);
    }
    if (smin <= 1e-3) throw Error(err::construction, "minimum sampled gamma is below 1e-3");
    set.min_gamma = smin;
    set.sup_gamma_c0 = smax;
    return set;
}

double gamma_unchecked(const DirectionSet& set, std::size_t k, const Eigen::Matrix3d& R) {
    double c = coordinate(set, k, R);
    if (!(c > 0)) throw Error(err::construction, "negative coordinate inside the ball");
    return std::sqrt(c);
}

double gamma(const DirectionSet& set, std::size_t k, const Eigen::Matrix3d& R) {
    double dist = (R - Eigen::Matrix3d::Identity()).norm();
    if (!(dist <= set.ball_radius))
        throw Error(err::domain, "|R - Id|_F = " + std::to_string(dist) +
                                     " exceeds the ball radius " + std::to_string(set.ball_radius));
    return gamma_unchecked(set, k, 0.5 * (R + R.transpose()));
}

GeometryMeasure measure_constants(const DirectionSet& set) {
    GeometryMeasure g;
    g.sup_gamma_c0 = set.sup_gamma_c0;
    g.cardinality = static_cast<int>(set.size());
    g.gamma_at_id = gamma(set, 0, Eigen::Matrix3d::Identity());
    g.min_gamma = set.min_gamma;
    return g;
}

ReconstructionCheck reconstruction_check(const DirectionSet& set, double radius, int samples,
                                         unsigned long long seed) {
    std::mt19937_64 rng(seed);
    ReconstructionCheck out;
    out.samples = samples;
    out.min_coordinate = INFINITY;
    for (int s = 0; s < samples; ++s) {
        Eigen::Matrix3d R = random_ball_matrix(rng, radius);
        Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
        bool real = true;
        for (std::size_t k = 0; k < set.size(); ++k) {
            double c = coordinate(set, k, R);
            out.min_coordinate = std::min(out.min_coordinate, c);
            if (!(c > 0)) {
                real = false;
                continue;
            }
            double g = std::sqrt(c);
            const auto& xi = set.directions[k].xi_d;
            acc += g * g * xi * xi.transpose();
        }
        if (!real) {
            ++out.non_real;
            continue;
        }
        out.max_error = std::max(out.max_error, (acc - R).norm());
    }
    return out;
}

nlohmann::json to_json(const DirectionSet& set) {
    auto rj = [](const Rational& r) { return nlohmann::json::array({r.numerator(), r.denominator()}); };
    auto vj = [&](const RVec3& v) { return nlohmann::json::array({rj(v[0]), rj(v[1]), rj(v[2])}); };
    nlohmann::json dirs = nlohmann::json::array();
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto& d = set.directions[k];
        dirs.push_back({{"xi", vj(d.xi)},
                        {"A", vj(d.A)},
                        {"xi_cross_A", vj(d.B)},
                        {"id_coordinate", rj(set.id_coordinates[k])},
                        {"alpha_shift", {d.alpha_shift(0), d.alpha_shift(1), d.alpha_shift(2)}}});
    }
    return {{"directions", dirs},
            {"cardinality", set.size()},
            {"n_star", set.n_star},
            {"ball_norm", "frobenius"},
            {"ball_radius", set.ball_radius},
            {"lemma_ball_radius", kLemmaBallRadius},
            {"certified_radius", set.certified_radius},
            {"sup_gamma_c0_sampled", set.sup_gamma_c0},
            {"min_gamma_sampled", set.min_gamma},
            {"sup_gamma_exact", set.sup_gamma_bound},
            {"min_gamma_exact", set.min_gamma_bound}};
}

}  // namespace nsci
