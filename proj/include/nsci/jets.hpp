#pragma once

#include "nsci/dual.hpp"
#include "nsci/field.hpp"
#include "nsci/geometry.hpp"
#include "nsci/params.hpp"

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

namespace nsci {

// Compact: the exponential bumps Phi = c exp(-1/(1-|y|^2)), psi = c d/ds
// exp(-1/(1-s^2)), supported in the unit ball and rescaled by r_perp, r_par.
// RaisedCosine: band-limited 2 pi-periodic profiles built from
// (1 + cos)^degree; they carry the same normalizations and identities but
// not the compact support, which makes them resolvable on desk grids.
enum class ProfileKind { Compact, RaisedCosine };

// Trigonometric polynomial in theta = (theta1, theta2, theta3) with
// coefficients on the box |m_i| <= deg[i].
struct ThetaPoly {
    std::array<int, 3> deg{0, 0, 0};
    std::vector<cplx> c;

    ThetaPoly() = default;
    explicit ThetaPoly(std::array<int, 3> d);
    cplx& at(int m1, int m2, int m3);
    cplx at(int m1, int m2, int m3) const;
    ThetaPoly derivative(int axis) const;
    // Value of the real part and of its partial derivatives of multi-order alpha.
    double eval(const Eigen::Vector3d& theta, const std::array<int, 3>& alpha = {0, 0, 0}) const;
    ThetaPoly& operator*=(double s);
};

ThetaPoly operator*(const ThetaPoly& a, const ThetaPoly& b);
ThetaPoly operator+(const ThetaPoly& a, const ThetaPoly& b);

struct ProfileSet {
    ProfileKind kind = ProfileKind::Compact;
    int degree = 1;
    double c_Phi = 0;  // compact normalization constants
    double c_psi = 0;
    double c_phi_rc = 0;  // raised-cosine normalization of phi
    std::vector<double> beta;  // raised-cosine coefficients, m = 0..degree
    // Measured by adaptive quadrature after normalization.
    double phi_integral = 0, psi_integral = 0;
    double phi_l2_normalized = 0;  // (1/4 pi^2) int phi^2
    double psi_l2_normalized = 0;  // (1/2 pi) int psi^2
    // Compact profiles: frequency beyond which the unit-scale Fourier
    // transforms of psi and of phi, Phi stay below kSpectralTol of their peak.
    double omega_psi = 0, omega_phi = 0;
};

inline constexpr double kSpectralTol = 1e-10;

// Throws Error(quadrature) when the adaptive quadrature does not converge.
ProfileSet make_profiles(ProfileKind kind = ProfileKind::Compact, int degree = 1);

// Rescaled, periodized profiles evaluated in the theta variables.
// psi_bar derivatives of order 0..4 at theta1.
std::array<double, 5> psi_bar(const ProfileSet& p, double r_par, double theta1);

struct PlaneDerivs {
    double v = 0;
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    std::array<Eigen::Matrix2d, 2> t{Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
};

PlaneDerivs Phi_bar(const ProfileSet& p, double r_perp, const Eigen::Vector2d& y);
PlaneDerivs phi_bar(const ProfileSet& p, double r_perp, const Eigen::Vector2d& y);

// Scales of one level. sigma = lambda * r_perp is an integer (snapped).
struct JetParams {
    double lambda = 0;
    double r_perp = 0;
    double r_perp_formula = 0;  // before snapping
    double r_par = 0;
    double mu = 0;
    int sigma = 0;
    int n_star = 5;
    double phase() const { return static_cast<double>(n_star) * sigma; }
};

// r_perp, r_par, mu from their closed forms at lambda, then sigma snapped to
// the nearest integer >= 2 and r_perp reset to sigma / lambda.
JetParams jet_params(double lambda, int n_star);
// lambda = 2 pi sigma^7, where the closed form gives sigma exactly.
JetParams jet_params_for_sigma(int sigma, int n_star);

struct PairCertificate {
    std::size_t i = 0, j = 0;
    long long g = 0;          // gcd of the projected lattice generators
    double spacing = 0;       // h: spacing of axis offsets along m
    double offset = 0;        // (alpha_j - alpha_i) . m / |m| reduced mod h
    double distance = 0;      // min distance between axes
    double required = 0;      // 2 r_perp / (n_star sigma)
    bool disjoint = false;
};

struct JetFamily {
    JetParams params;
    ProfileSet profiles;
    std::vector<Direction> dirs;
    bool disjoint = false;
    std::vector<PairCertificate> certificates;
    // Raised-cosine families carry exact theta expansions.
    ThetaPoly psi_poly, phi_poly, Phi_poly;

    std::size_t size() const { return dirs.size(); }
};

// Compact profiles: shifts placed greedily on the lattice (2 pi/(n_* sigma K))Z^3
// so that every pair of tube families is certified disjoint; throws
// Error("r_perp too large") otherwise. Raised-cosine profiles: zero shifts,
// no disjointness.
JetFamily build_family(const JetParams& params, const DirectionSet& set, const ProfileSet& profiles);

// Phases at (x, t): theta1 = n_* sigma (x.xi + mu t), (theta2, theta3) =
// n_* sigma ((x - alpha).A, (x - alpha).B), reduced to [-pi, pi).
Eigen::Vector3d phases(const JetFamily& f, std::size_t k, const Eigen::Vector3d& x, double t);

// Everything at one point with first and second derivatives in (x, t),
// computed from the definitions by forward-mode differentiation.
struct JetPoint {
    Dual2 psi, phi, Phi;
    DualVec grad_psi, W, Wc, V;
};

JetPoint evaluate_theta(const JetFamily& f, std::size_t k, const Eigen::Vector3d& theta);
JetPoint evaluate(const JetFamily& f, std::size_t k, const Eigen::Vector3d& x, double t);

enum class JetQuantity { W, Wc, V, PhiPsiSq };

// Spectral view of a jet quantity on the grid at time t (dt_order 0 or 1
// selects the time derivative). Raised-cosine families are transcribed
// exactly from their theta expansions; compact ones are sampled. Throws
// Error(under-resolution) naming the bandwidth when the grid cannot carry it.
VectorField jet_field(const JetFamily& f, std::size_t k, JetQuantity q, const Grid& g, double t,
                      int dt_order = 0);
VectorField jet_w(const JetFamily& f, std::size_t k, const Grid& g, double t);
VectorField jet_v(const JetFamily& f, std::size_t k, const Grid& g, double t);
VectorField jet_wc(const JetFamily& f, std::size_t k, const Grid& g, double t);
// W^(t) = -(1/mu) P_H P_{!=0} (phi^2 psi^2 xi).
VectorField jet_wt(const JetFamily& f, std::size_t k, const Grid& g, double t);

// Largest |k_i| of the spectral support of the quantity.
int jet_bandwidth(const JetFamily& f, std::size_t k, JetQuantity q);

// Mean over T^3 of a function of the phases, by quadrature on the theta
// torus (Gauss-Legendre on the supports for compact profiles, uniform for
// raised-cosine ones).
struct ThetaQuadrature {
    std::vector<double> t1, w1;
    std::vector<Eigen::Vector2d> t23;
    std::vector<double> w23;
};
ThetaQuadrature theta_quadrature(const JetFamily& f, int n1 = 0, int n_radial = 0, int n_angle = 0);

// Averaged L^p norms and identity residuals of one jet.
struct JetIdentityReport {
    std::size_t k = 0;
    double mean_WW_error = 0;     // max entry |mean W(x)W - xi(x)xi|
    double W_l2 = 0;              // averaged L^2 norm
    double W_mean = 0;            // |mean W|
    double div_ratio = 0;         // ||div(W + Wc)|| / ||grad W|| (sup over nodes)
    double transport_ratio = 0;   // ||div(W(x)W) - mu^-1 d_t(phi^2 psi^2 xi)|| / ||div(W(x)W)||
    double curlcurl_ratio = 0;    // ||W + Wc - curl curl V|| / ||W||
    double fubini_gap = 0;        // relative gap in the factorization of ||phi^2 psi^2||
};
JetIdentityReport check_identities(const JetFamily& f, std::size_t k, const ThetaQuadrature& quad);

// Grid check of support disjointness: number of grid points lying in the
// support of two or more Phi_xi.
int support_overlaps(const JetFamily& f, const Grid& g);

struct ScalingRow {
    std::string field;
    int N = 0, M = 0;
    double p = 0;
    double lambda = 0;
    double measured = 0;
};

struct ScalingFit {
    std::string field;
    int N = 0, M = 0;
    double p = 0;
    double predicted = 0;
    double fitted = 0;
    bool ok = false;
};

struct ExponentFit {
    std::vector<ScalingRow> rows;
    std::vector<ScalingFit> fits;
    std::vector<std::string> warnings;
    bool all_ok() const;
};

// Least-squares log-log fit of averaged norms of psi, phi, W, Wc, V with
// N, M <= 1 over the sweep. Needs at least three usable sweep points.
ExponentFit scaling_report(const ProfileSet& profiles, const DirectionSet& set,
                           const std::vector<double>& lambda_sweep, const std::vector<double>& p_list);
double predicted_exponent(const std::string& field, int N, int M, double p);
std::string scaling_csv(const ExponentFit& fit);
nlohmann::json to_json(const ExponentFit& fit);
nlohmann::json to_json(const JetFamily& f);

}  // namespace nsci
