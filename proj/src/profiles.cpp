#include "nsci/bump.hpp"
#include "nsci/errors.hpp"
#include "nsci/jets.hpp"
#include "quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

namespace nsci {

namespace {

constexpr double kPi = 3.14159265358979323846;

// G(s) with phi(y) = c_Phi G(|y|^2) = -c_Phi Laplacian F(|y|^2), and its
// first two derivatives in s.
std::array<double, 3> radial_phi(double s) {
    auto F = bump_radial<4>(s);
    return {-4.0 * (F[1] + s * F[2]), -4.0 * (2.0 * F[2] + s * F[3]),
            -4.0 * (3.0 * F[3] + s * F[4])};
}

double adaptive(const std::function<double(double)>& f, double a, double b, const char* what) {
    double err = 0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-13, &err);
    if (!(err <= 1e-11 * std::max(1.0, std::abs(v))))
        throw Error(err::quadrature, std::string("no convergence for ") + what);
    return v;
}

struct CompactSpectrum {
    double omega_psi = 0, omega_phi = 0;
};

// Last frequency on a scan where |transform| exceeds kSpectralTol of its peak.
double cutoff(const std::vector<double>& freq, const std::vector<double>& mag) {
    double peak = 0;
    for (double m : mag) peak = std::max(peak, m);
    double last = 0;
    for (std::size_t i = 0; i < mag.size(); ++i)
        if (mag[i] > kSpectralTol * peak) last = freq[i];
    return last;
}

const CompactSpectrum& compact_spectrum(double c_Phi, double c_psi) {
    static const CompactSpectrum spec = [&] {
        CompactSpectrum s;
        auto q = detail::gauss_panels(0.0, 1.0, 80);
        std::vector<double> E(q.x.size()), Fv(q.x.size()), Gv(q.x.size());
        for (std::size_t j = 0; j < q.x.size(); ++j) {
            E[j] = bump_line<1>(q.x[j])[1];
            Fv[j] = bump_radial<0>(q.x[j] * q.x[j])[0];
            Gv[j] = radial_phi(q.x[j] * q.x[j])[0];
        }
        std::vector<double> freq, mpsi, mPhi, mphi;
        for (double w = 0; w <= 2000.0; w += 2.0) {
            double a = 0, b = 0, c = 0;
            for (std::size_t j = 0; j < q.x.size(); ++j) {
                double r = q.x[j];
                a += q.w[j] * E[j] * std::sin(w * r);
                double J = boost::math::cyl_bessel_j(0, w * r);
                b += q.w[j] * Fv[j] * J * r;
                c += q.w[j] * Gv[j] * J * r;
            }
            freq.push_back(w);
            mpsi.push_back(std::abs(2.0 * c_psi * a));
            mPhi.push_back(std::abs(2.0 * kPi * c_Phi * b));
            mphi.push_back(std::abs(2.0 * kPi * c_Phi * c));
        }
        s.omega_psi = cutoff(freq, mpsi);
        s.omega_phi = std::max(cutoff(freq, mPhi), cutoff(freq, mphi));
        return s;
    }();
    return spec;
}

// b^(j)(theta) for b = 2^-d (1 + cos)^d = sum_m beta_|m| e^{i m theta}.
double raised(const std::vector<double>& beta, int j, double theta) {
    double s = (j == 0) ? beta[0] : 0.0;
    for (std::size_t m = 1; m < beta.size(); ++m)
        s += 2.0 * beta[m] * std::pow(double(m), j) * std::cos(m * theta + j * kPi / 2.0);
    return s;
}

}  // namespace

namespace detail {

GaussNodes gauss_panels(double a, double b, int panels) {
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& ab = GL::abscissa();
    const auto& wt = GL::weights();
    GaussNodes q;
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h, half = 0.5 * h;
        for (std::size_t i = 0; i < ab.size(); ++i) {
            q.x.push_back(mid - half * ab[i]);
            q.w.push_back(half * wt[i]);
            if (ab[i] != 0.0) {
                q.x.push_back(mid + half * ab[i]);
                q.w.push_back(half * wt[i]);
            }
        }
    }
    return q;
}

}  // namespace detail

ProfileSet make_profiles(ProfileKind kind, int degree) {
    ProfileSet p;
    p.kind = kind;
    p.degree = degree;
    if (kind == ProfileKind::RaisedCosine) {
        if (degree < 1) throw Error(err::config, "raised-cosine degree must be >= 1");
        const int d = degree;
        p.beta.resize(d + 1);
        for (int m = 0; m <= d; ++m)
            p.beta[m] = std::ldexp(std::tgamma(2.0 * d + 1) / (std::tgamma(d + m + 1.0) *
                                                                 std::tgamma(d - m + 1.0)),
                                   -2 * d);
        double s = 0;
        for (int m = 1; m <= d; ++m) s += 2.0 * m * m * p.beta[m] * p.beta[m];
        p.c_psi = 1.0 / std::sqrt(s);
        double t = 0;
        for (int a = -d; a <= d; ++a)
            for (int b = -d; b <= d; ++b) {
                double c = p.beta[std::abs(a)] * p.beta[std::abs(b)] * (a * a + b * b);
                t += c * c;
            }
        p.c_phi_rc = 1.0 / std::sqrt(t);
        // Trapezoidal means are exact for these trigonometric polynomials.
        const int n = 16 * (d + 1);
        double i1 = 0, i2 = 0, j1 = 0, j2 = 0;
        for (int a = 0; a < n; ++a) {
            double ta = 2 * kPi * a / n;
            double ps = -p.c_psi * raised(p.beta, 1, ta);
            i1 += ps / n;
            i2 += ps * ps / n;
            for (int b = 0; b < n; ++b) {
                double tb = 2 * kPi * b / n;
                double ph = -p.c_phi_rc * (raised(p.beta, 2, ta) * raised(p.beta, 0, tb) +
                                           raised(p.beta, 0, ta) * raised(p.beta, 2, tb));
                j1 += ph / (n * n);
                j2 += ph * ph / (n * n);
            }
        }
        p.psi_integral = 2 * kPi * i1;
        p.psi_l2_normalized = i2;
        p.phi_integral = 4 * kPi * kPi * j1;
        p.phi_l2_normalized = j2;
        return p;
    }

    auto G2 = [](double r) {
        double g = radial_phi(r * r)[0];
        return g * g * r;
    };
    auto E2 = [](double s) {
        double e = bump_line<1>(s)[1];
        return e * e;
    };
    p.c_Phi = std::sqrt(2.0 * kPi / adaptive(G2, 0.0, 1.0, "the phi normalization"));
    p.c_psi = std::sqrt(2.0 * kPi / adaptive(E2, -1.0, 1.0, "the psi normalization"));

    // Independent check with a different rule.
    boost::math::quadrature::tanh_sinh<double> ts;
    double cP = p.c_Phi, cp = p.c_psi;
    p.phi_l2_normalized = 2.0 * kPi * cP * cP * ts.integrate(G2, 0.0, 1.0) / (4 * kPi * kPi);
    p.psi_l2_normalized = cp * cp * ts.integrate(E2, -1.0, 1.0) / (2 * kPi);
    p.phi_integral = 2.0 * kPi * cP *
                     adaptive([](double r) { return radial_phi(r * r)[0] * r; }, 0.0, 1.0, "int phi");
    p.psi_integral = cp * adaptive([](double s) { return bump_line<1>(s)[1]; }, -1.0, 1.0, "int psi");

    const auto& spec = compact_spectrum(p.c_Phi, p.c_psi);
    p.omega_psi = spec.omega_psi;
    p.omega_phi = spec.omega_phi;
    return p;
}

std::array<double, 5> psi_bar(const ProfileSet& p, double r_par, double theta1) {
    std::array<double, 5> out{};
    if (p.kind == ProfileKind::RaisedCosine) {
        for (int j = 0; j < 5; ++j) out[j] = -p.c_psi * raised(p.beta, j + 1, theta1);
        return out;
    }
    double th = std::remainder(theta1, 2 * kPi);
    auto E = bump_line<5>(th / r_par);
    double scale = p.c_psi / std::sqrt(r_par);
    for (int j = 0; j < 5; ++j, scale /= r_par) out[j] = scale * E[j + 1];
    return out;
}

namespace {

// Radial function H(|z|^2) with derivatives h[0..3] in s: partials in z.
PlaneDerivs radial_derivs(const Eigen::Vector2d& z, const std::array<double, 4>& h, double c, double r) {
    PlaneDerivs d;
    Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    d.v = c * h[0];
    d.g = c / r * 2.0 * h[1] * z;
    d.h = c / (r * r) * (4.0 * h[2] * z * z.transpose() + 2.0 * h[1] * I);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int e = 0; e < 2; ++e)
                d.t[a](b, e) = c / (r * r * r) *
                               (8.0 * z(a) * z(b) * z(e) * h[3] +
                                4.0 * (I(a, b) * z(e) + I(b, e) * z(a) + I(a, e) * z(b)) * h[2]);
    return d;
}

Eigen::Vector2d wrap(const Eigen::Vector2d& y) {
    return {std::remainder(y(0), 2 * kPi), std::remainder(y(1), 2 * kPi)};
}

// Plane factor of the raised-cosine family: sum over (a,b) weights of
// b^(a+i)(y0) b^(b+j)(y1) style products.
PlaneDerivs rc_plane(const ProfileSet& p, const Eigen::Vector2d& y, double scale, bool laplace) {
    std::array<double, 6> b0{}, b1{};
    for (int j = 0; j < 6; ++j) {
        b0[j] = raised(p.beta, j, y(0));
        b1[j] = raised(p.beta, j, y(1));
    }
    // Partial of order (i, j) of the base function.
    auto base = [&](int i, int j) {
        if (laplace) return -(b0[i + 2] * b1[j] + b0[i] * b1[j + 2]);
        double v = b0[i] * b1[j];
        if (i == 0 && j == 0) v -= p.beta[0] * p.beta[0];
        return v;
    };
    PlaneDerivs d;
    d.v = scale * base(0, 0);
    d.g << scale * base(1, 0), scale * base(0, 1);
    d.h << scale * base(2, 0), scale * base(1, 1), scale * base(1, 1), scale * base(0, 2);
    d.t[0] << scale * base(3, 0), scale * base(2, 1), scale * base(2, 1), scale * base(1, 2);
    d.t[1] << scale * base(2, 1), scale * base(1, 2), scale * base(1, 2), scale * base(0, 3);
    return d;
}

}  // namespace

PlaneDerivs Phi_bar(const ProfileSet& p, double r_perp, const Eigen::Vector2d& y) {
    if (p.kind == ProfileKind::RaisedCosine)
        return rc_plane(p, y, p.c_phi_rc / (r_perp * r_perp), false);
    Eigen::Vector2d z = wrap(y) / r_perp;
    auto F = bump_radial<3>(z.squaredNorm());
    return radial_derivs(z, {F[0], F[1], F[2], F[3]}, p.c_Phi / r_perp, r_perp);
}

PlaneDerivs phi_bar(const ProfileSet& p, double r_perp, const Eigen::Vector2d& y) {
    if (p.kind == ProfileKind::RaisedCosine) return rc_plane(p, y, p.c_phi_rc, true);
    Eigen::Vector2d z = wrap(y) / r_perp;
    auto G = radial_phi(z.squaredNorm());
    PlaneDerivs d = radial_derivs(z, {G[0], G[1], G[2], 0.0}, p.c_Phi / r_perp, r_perp);
    d.t = {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
    return d;
}

}  // namespace nsci
