#include "nsci/jets.hpp"

#include "nsci/errors.hpp"
#include "quadrature.hpp"

#include <boost/integer/common_factor.hpp>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nsci {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kPlacementK = 8;

using Vec3ll = std::array<long long, 3>;

Vec3ll scaled_int(const RVec3& v, int n_star) {
    Vec3ll out{};
    for (int i = 0; i < 3; ++i) {
        Rational r = v[i] * Rational(n_star);
        if (r.denominator() != 1) throw Error(err::construction, "n_star does not clear a denominator");
        out[i] = r.numerator();
    }
    return out;
}

long long idot(const Vec3ll& a, const Vec3ll& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3ll icross(const Vec3ll& a, const Vec3ll& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

template <typename F>
void for_box(const std::array<int, 3>& d, F&& f) {
    std::size_t idx = 0;
    for (int a = -d[0]; a <= d[0]; ++a)
        for (int b = -d[1]; b <= d[1]; ++b)
            for (int c = -d[2]; c <= d[2]; ++c) f(a, b, c, idx++);
}

// Geometry of the axes of two tube families: offsets of family j relative
// to family i along m = xi_i x xi_j form the set offset + h Z.
struct PairGeometry {
    Eigen::Vector3d m_hat;
    long long g = 0;
    double spacing = 0;
};

PairGeometry pair_geometry(const Direction& a, const Direction& b, int n_star, int sigma) {
    Vec3ll xa = scaled_int(a.xi, n_star), xb = scaled_int(b.xi, n_star);
    Vec3ll m = icross(xa, xb);
    long long g = 0;
    for (const RVec3* v : {&a.A, &a.B, &b.A, &b.B})
        g = boost::integer::gcd(g, std::llabs(idot(scaled_int(*v, n_star), m)));
    for (int i = 0; i < 3; ++i)
        g = boost::integer::gcd(g, std::llabs(static_cast<long long>(n_star) * n_star * sigma * m[i]));
    Eigen::Vector3d md{double(m[0]), double(m[1]), double(m[2])};
    double nm = md.norm();
    if (nm == 0) throw Error(err::construction, "parallel directions in the set");
    PairGeometry pg;
    pg.m_hat = md / nm;
    pg.g = g;
    pg.spacing = 2 * kPi * double(g) / (double(n_star) * n_star * sigma * nm);
    return pg;
}

PairCertificate certify(std::size_t i, std::size_t j, const PairGeometry& pg,
                        const Eigen::Vector3d& ai, const Eigen::Vector3d& aj, const JetParams& p) {
    PairCertificate c;
    c.i = i;
    c.j = j;
    c.g = pg.g;
    c.spacing = pg.spacing;
    double off = std::fmod((aj - ai).dot(pg.m_hat), pg.spacing);
    if (off < 0) off += pg.spacing;
    c.offset = off;
    c.distance = std::min(off, pg.spacing - off);
    c.required = 2.0 * p.r_perp / p.phase();
    c.disjoint = c.distance >= c.required;
    return c;
}

// Theta expansions of the three components of a quantity (raised-cosine).
std::array<ThetaPoly, 3> quantity_polys(const JetFamily& f, std::size_t k, JetQuantity q) {
    const auto& d = f.dirs[k];
    const JetParams& p = f.params;
    std::array<ThetaPoly, 3> out;
    auto along = [&](const ThetaPoly& s, const Eigen::Vector3d& v) {
        for (int i = 0; i < 3; ++i) {
            out[i] = s;
            out[i] *= v(i);
        }
    };
    switch (q) {
        case JetQuantity::W:
            along(f.psi_poly * f.phi_poly, d.xi_d);
            break;
        case JetQuantity::V:
            along(f.psi_poly * f.Phi_poly, d.xi_d / (double(p.n_star) * p.n_star * p.lambda * p.lambda));
            break;
        case JetQuantity::PhiPsiSq: {
            ThetaPoly s = f.psi_poly * f.phi_poly;
            along(s * s, d.xi_d);
            break;
        }
        case JetQuantity::Wc: {
            ThetaPoly dpsi = f.psi_poly.derivative(0);
            ThetaPoly t2 = dpsi * f.Phi_poly.derivative(1);
            ThetaPoly t3 = dpsi * f.Phi_poly.derivative(2);
            const double r2 = p.r_perp * p.r_perp;
            for (int i = 0; i < 3; ++i) {
                ThetaPoly a = t2, b = t3;
                a *= r2 * d.A_d(i);
                b *= r2 * d.B_d(i);
                out[i] = a + b;
            }
            break;
        }
    }
    return out;
}

// Wavevector of the theta mode m: sigma (m1 n xi + m2 n A + m3 n B).
Vec3ll mode_wavevector(const Direction& d, const JetParams& p, int m1, int m2, int m3) {
    Vec3ll xi = scaled_int(d.xi, p.n_star), A = scaled_int(d.A, p.n_star), B = scaled_int(d.B, p.n_star);
    Vec3ll k{};
    for (int i = 0; i < 3; ++i) k[i] = p.sigma * (m1 * xi[i] + m2 * A[i] + m3 * B[i]);
    return k;
}

}  // namespace

ThetaPoly::ThetaPoly(std::array<int, 3> d) : deg(d) {
    c.assign(std::size_t(2 * d[0] + 1) * (2 * d[1] + 1) * (2 * d[2] + 1), cplx(0.0, 0.0));
}

cplx& ThetaPoly::at(int m1, int m2, int m3) {
    return c[(std::size_t(m1 + deg[0]) * (2 * deg[1] + 1) + (m2 + deg[1])) * (2 * deg[2] + 1) +
             (m3 + deg[2])];
}

cplx ThetaPoly::at(int m1, int m2, int m3) const {
    if (std::abs(m1) > deg[0] || std::abs(m2) > deg[1] || std::abs(m3) > deg[2]) return {0.0, 0.0};
    return c[(std::size_t(m1 + deg[0]) * (2 * deg[1] + 1) + (m2 + deg[1])) * (2 * deg[2] + 1) +
             (m3 + deg[2])];
}

ThetaPoly ThetaPoly::derivative(int axis) const {
    ThetaPoly out = *this;
    for_box(deg, [&](int a, int b, int e, std::size_t i) {
        int m = axis == 0 ? a : (axis == 1 ? b : e);
        out.c[i] *= cplx(0.0, double(m));
    });
    return out;
}

double ThetaPoly::eval(const Eigen::Vector3d& theta, const std::array<int, 3>& alpha) const {
    double s = 0;
    const int order = alpha[0] + alpha[1] + alpha[2];
    const cplx ip = std::pow(cplx(0.0, 1.0), order);
    for_box(deg, [&](int a, int b, int e, std::size_t i) {
        if (c[i] == cplx(0.0, 0.0)) return;
        double f = std::pow(double(a), alpha[0]) * std::pow(double(b), alpha[1]) *
                   std::pow(double(e), alpha[2]);
        double ph = a * theta(0) + b * theta(1) + e * theta(2);
        s += std::real(c[i] * ip * f * std::exp(cplx(0.0, ph)));
    });
    return s;
}

ThetaPoly& ThetaPoly::operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
}

ThetaPoly operator*(const ThetaPoly& a, const ThetaPoly& b) {
    ThetaPoly out({a.deg[0] + b.deg[0], a.deg[1] + b.deg[1], a.deg[2] + b.deg[2]});
    for_box(a.deg, [&](int a1, int a2, int a3, std::size_t i) {
        if (a.c[i] == cplx(0.0, 0.0)) return;
        for_box(b.deg, [&](int b1, int b2, int b3, std::size_t j) {
            out.at(a1 + b1, a2 + b2, a3 + b3) += a.c[i] * b.c[j];
        });
    });
    return out;
}

ThetaPoly operator+(const ThetaPoly& a, const ThetaPoly& b) {
    ThetaPoly out({std::max(a.deg[0], b.deg[0]), std::max(a.deg[1], b.deg[1]),
                   std::max(a.deg[2], b.deg[2])});
    for_box(a.deg, [&](int m1, int m2, int m3, std::size_t i) { out.at(m1, m2, m3) += a.c[i]; });
    for_box(b.deg, [&](int m1, int m2, int m3, std::size_t i) { out.at(m1, m2, m3) += b.c[i]; });
    return out;
}

JetParams jet_params(double lambda, int n_star) {
    if (!(lambda > 0) || !std::isfinite(lambda)) throw Error(err::config, "lambda must be positive");
    if (n_star < 1) throw Error(err::config, "n_star must be positive");
    JetParams j;
    j.lambda = lambda;
    j.n_star = n_star;
    j.r_perp_formula = std::pow(lambda, -6.0 / 7.0) * std::pow(2 * kPi, -1.0 / 7.0);
    j.sigma = std::max(2, static_cast<int>(std::lround(lambda * j.r_perp_formula)));
    j.r_perp = j.sigma / lambda;
    j.r_par = std::pow(lambda, -4.0 / 7.0);
    j.mu = std::pow(lambda, 9.0 / 7.0) * std::pow(2 * kPi, 1.0 / 7.0);
    if (!(j.r_perp < j.r_par && j.r_par < 1.0))
        throw Error(err::config, "jet scales out of order at lambda " + num(lambda) + ": r_perp " +
                                     num(j.r_perp) + ", r_par " + num(j.r_par));
    return j;
}

JetParams jet_params_for_sigma(int sigma, int n_star) {
    if (sigma < 2) throw Error(err::config, "sigma must be >= 2");
    JetParams j = jet_params(2 * kPi * std::pow(double(sigma), 7), n_star);
    if (j.sigma != sigma) throw Error(err::construction, "sigma snapping is not exact");
    return j;
}

JetFamily build_family(const JetParams& params, const DirectionSet& set, const ProfileSet& profiles) {
    if (params.n_star != set.n_star) throw Error(err::config, "n_star differs from the direction set");
    JetFamily f;
    f.params = params;
    f.profiles = profiles;
    f.dirs = set.directions;
    for (auto& d : f.dirs) d.alpha_shift.setZero();

    if (profiles.kind == ProfileKind::RaisedCosine) {
        const int d = profiles.degree;
        const auto& beta = profiles.beta;
        f.psi_poly = ThetaPoly({d, 0, 0});
        for (int m = -d; m <= d; ++m) f.psi_poly.at(m, 0, 0) = cplx(0.0, -m * beta[std::abs(m)] * profiles.c_psi);
        f.phi_poly = ThetaPoly({0, d, d});
        f.Phi_poly = ThetaPoly({0, d, d});
        const double r2 = params.r_perp * params.r_perp;
        for (int a = -d; a <= d; ++a)
            for (int b = -d; b <= d; ++b) {
                double bb = beta[std::abs(a)] * beta[std::abs(b)];
                f.phi_poly.at(0, a, b) = profiles.c_phi_rc * bb * (a * a + b * b);
                if (a != 0 || b != 0) f.Phi_poly.at(0, a, b) = profiles.c_phi_rc * bb / r2;
            }
        f.disjoint = false;
        return f;
    }

    const std::size_t m = f.dirs.size();
    std::vector<std::vector<PairGeometry>> geo(m, std::vector<PairGeometry>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            geo[i][j] = pair_geometry(f.dirs[i], f.dirs[j], params.n_star, params.sigma);

    // Candidate shifts on one period 2 pi / sigma of the tube lattice.
    const int per_axis = params.n_star * kPlacementK;
    const double step = 2 * kPi / (params.phase() * kPlacementK);
    for (std::size_t k = 1; k < m; ++k) {
        double best = -1;
        Eigen::Vector3d best_alpha = Eigen::Vector3d::Zero();
        for (int a = 0; a < per_axis; ++a)
            for (int b = 0; b < per_axis; ++b)
                for (int c = 0; c < per_axis; ++c) {
                    Eigen::Vector3d alpha = step * Eigen::Vector3d(a, b, c);
                    double score = INFINITY;
                    for (std::size_t j = 0; j < k && score > best; ++j) {
                        auto cert = certify(j, k, geo[j][k], f.dirs[j].alpha_shift, alpha, params);
                        score = std::min(score, cert.distance / cert.required);
                    }
                    if (score > best) {
                        best = score;
                        best_alpha = alpha;
                    }
                }
        f.dirs[k].alpha_shift = best_alpha;
    }
    f.disjoint = true;
    double worst = INFINITY;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            auto cert = certify(i, j, geo[i][j], f.dirs[i].alpha_shift, f.dirs[j].alpha_shift, params);
            worst = std::min(worst, cert.distance / cert.required);
            f.disjoint = f.disjoint && cert.disjoint;
            f.certificates.push_back(cert);
        }
    if (!f.disjoint)
        throw Error(err::r_perp_too_large, "no disjoint placement at r_perp " + num(params.r_perp) +
                                               " (best distance/required " + num(worst) + ")");
    return f;
}

Eigen::Vector3d phases(const JetFamily& f, std::size_t k, const Eigen::Vector3d& x, double t) {
    const auto& d = f.dirs[k];
    const double s = f.params.phase();
    Eigen::Vector3d y = x - d.alpha_shift;
    double tt = std::remainder(s * f.params.mu * t, 2 * kPi);
    return {std::remainder(s * x.dot(d.xi_d) + tt, 2 * kPi), std::remainder(s * y.dot(d.A_d), 2 * kPi),
            std::remainder(s * y.dot(d.B_d), 2 * kPi)};
}

JetPoint evaluate_theta(const JetFamily& f, std::size_t k, const Eigen::Vector3d& theta) {
    const auto& d = f.dirs[k];
    const JetParams& p = f.params;
    const double s = p.phase();
    Eigen::Vector4d J1, J2, J3;
    J1 << s * d.xi_d, s * p.mu;
    J2 << s * d.A_d, 0.0;
    J3 << s * d.B_d, 0.0;
    Dual2 th1 = Dual2::linear(theta(0), J1), th2 = Dual2::linear(theta(1), J2),
          th3 = Dual2::linear(theta(2), J3);

    JetPoint pt;
    auto ps = psi_bar(f.profiles, p.r_par, theta(0));
    pt.psi = compose(th1, ps[0], ps[1], ps[2]);
    Dual2 dpsi = compose(th1, ps[1], ps[2], ps[3]);
    for (int i = 0; i < 3; ++i) pt.grad_psi[i] = (s * d.xi_d(i)) * dpsi;

    Eigen::Vector2d y(theta(1), theta(2));
    PlaneDerivs P = Phi_bar(f.profiles, p.r_perp, y);
    PlaneDerivs Q = phi_bar(f.profiles, p.r_perp, y);
    pt.Phi = compose(th2, th3, P.v, P.g, P.h);
    pt.phi = compose(th2, th3, Q.v, Q.g, Q.h);
    Dual2 dPhi2 = compose(th2, th3, P.g(0), P.h.row(0).transpose(), P.t[0]);
    Dual2 dPhi3 = compose(th2, th3, P.g(1), P.h.row(1).transpose(), P.t[1]);
    DualVec grad_Phi, xi;
    for (int i = 0; i < 3; ++i) {
        grad_Phi[i] = s * (d.A_d(i) * dPhi2 + d.B_d(i) * dPhi3);
        xi[i] = Dual2(d.xi_d(i));
    }

    const double c = 1.0 / (double(p.n_star) * p.n_star * p.lambda * p.lambda);
    Dual2 pp = pt.psi * pt.phi;
    Dual2 pP = pt.psi * pt.Phi;
    for (int i = 0; i < 3; ++i) {
        pt.W[i] = d.xi_d(i) * pp;
        pt.V[i] = (c * d.xi_d(i)) * pP;
    }
    pt.Wc = scale(cross(pt.grad_psi, cross(grad_Phi, xi)), c);
    return pt;
}

JetPoint evaluate(const JetFamily& f, std::size_t k, const Eigen::Vector3d& x, double t) {
    return evaluate_theta(f, k, phases(f, k, x, t));
}

int jet_bandwidth(const JetFamily& f, std::size_t k, JetQuantity q) {
    const auto& d = f.dirs[k];
    const JetParams& p = f.params;
    if (f.profiles.kind == ProfileKind::RaisedCosine) {
        auto polys = quantity_polys(f, k, q);
        double peak = 0;
        for (const auto& P : polys)
            for (const auto& v : P.c) peak = std::max(peak, std::abs(v));
        long long bw = 0;
        for (const auto& P : polys)
            for_box(P.deg, [&](int a, int b, int e, std::size_t i) {
                if (std::abs(P.c[i]) <= 1e-14 * peak) return;
                Vec3ll kv = mode_wavevector(d, p, a, b, e);
                for (long long v : kv) bw = std::max(bw, std::llabs(v));
            });
        return static_cast<int>(bw);
    }
    const int mult = (q == JetQuantity::PhiPsiSq) ? 2 : 1;
    double m1 = mult * std::ceil(f.profiles.omega_psi / p.r_par);
    double kp = mult * std::ceil(f.profiles.omega_phi / p.r_perp);
    double bw = 0;
    for (int i = 0; i < 3; ++i)
        bw = std::max(bw, p.phase() * (m1 * std::abs(d.xi_d(i)) + kp * std::hypot(d.A_d(i), d.B_d(i))));
    if (bw > 1e9) return 1000000000;
    return static_cast<int>(std::ceil(bw - 1e-9));
}

VectorField jet_field(const JetFamily& f, std::size_t k, JetQuantity q, const Grid& g, double t,
                      int dt_order) {
    if (dt_order != 0 && dt_order != 1) throw Error(err::config, "dt_order must be 0 or 1");
    if (k >= f.size()) throw Error(err::config, "direction index out of range");
    const int bw = jet_bandwidth(f, k, q);
    if (bw > g.n / 2 - 1)
        throw Error(err::under_resolution, "jet bandwidth " + std::to_string(bw) + " exceeds " +
                                               std::to_string(g.n / 2 - 1) + " on n = " +
                                               std::to_string(g.n));
    const JetParams& p = f.params;
    const auto& d = f.dirs[k];
    VectorField out;
    out.grid = g;
    for (auto& c : out.c) c = Coeffs::Zero(static_cast<Eigen::Index>(g.spec_size()));

    if (f.profiles.kind == ProfileKind::RaisedCosine) {
        auto polys = quantity_polys(f, k, q);
        const double s = p.phase();
        const double tt = std::remainder(s * p.mu * t, 2 * kPi);
        for_box(polys[0].deg, [&](int a, int b, int e, std::size_t i) {
            Vec3ll kv = mode_wavevector(d, p, a, b, e);
            if (kv[2] < 0) return;
            const double ph = a * tt - s * (b * d.A_d + e * d.B_d).dot(d.alpha_shift);
            cplx factor = std::exp(cplx(0.0, ph));
            if (dt_order == 1) factor *= cplx(0.0, a * s * p.mu);
            auto wrap = [&](long long v) { return v >= 0 ? v : v + g.n; };
            std::size_t idx = (std::size_t(wrap(kv[0])) * g.n + std::size_t(wrap(kv[1]))) * g.nk() +
                              std::size_t(kv[2]);
            for (int c = 0; c < 3; ++c) out.c[c](Eigen::Index(idx)) += polys[c].c[i] * factor;
        });
        return out;
    }

    std::array<Samples, 3> vals;
    for (auto& v : vals) v = Samples::Zero(static_cast<Eigen::Index>(g.real_size()));
    for (int i0 = 0; i0 < g.n; ++i0)
        for (int i1 = 0; i1 < g.n; ++i1)
            for (int i2 = 0; i2 < g.n; ++i2) {
                JetPoint pt = evaluate(f, k, Eigen::Vector3d(g.x(i0), g.x(i1), g.x(i2)), t);
                std::size_t idx = g.index(i0, i1, i2);
                for (int c = 0; c < 3; ++c) {
                    Dual2 v;
                    switch (q) {
                        case JetQuantity::W: v = pt.W[c]; break;
                        case JetQuantity::Wc: v = pt.Wc[c]; break;
                        case JetQuantity::V: v = pt.V[c]; break;
                        case JetQuantity::PhiPsiSq:
                            v = d.xi_d(c) * (pt.psi * pt.psi * pt.phi * pt.phi);
                            break;
                    }
                    vals[c](Eigen::Index(idx)) = dt_order == 0 ? v.v : v.g(3);
                }
            }
    return from_samples<3>(g, vals);
}

VectorField jet_w(const JetFamily& f, std::size_t k, const Grid& g, double t) {
    return jet_field(f, k, JetQuantity::W, g, t);
}

VectorField jet_v(const JetFamily& f, std::size_t k, const Grid& g, double t) {
    return jet_field(f, k, JetQuantity::V, g, t);
}

VectorField jet_wc(const JetFamily& f, std::size_t k, const Grid& g, double t) {
    return jet_field(f, k, JetQuantity::Wc, g, t);
}

VectorField jet_wt(const JetFamily& f, std::size_t k, const Grid& g, double t) {
    VectorField s = jet_field(f, k, JetQuantity::PhiPsiSq, g, t);
    return (-1.0 / f.params.mu) * helmholtz(project_nonzero(s));
}

ThetaQuadrature theta_quadrature(const JetFamily& f, int n1, int n_radial, int n_angle) {
    ThetaQuadrature q;
    const JetParams& p = f.params;
    if (f.profiles.kind == ProfileKind::RaisedCosine) {
        const int d = f.profiles.degree;
        if (n1 <= 0) n1 = 8 * d + 8;
        if (n_angle <= 0) n_angle = 8 * d + 8;
        for (int a = 0; a < n1; ++a) {
            q.t1.push_back(2 * kPi * a / n1 - kPi);
            q.w1.push_back(1.0 / n1);
        }
        for (int a = 0; a < n_angle; ++a)
            for (int b = 0; b < n_angle; ++b) {
                q.t23.emplace_back(2 * kPi * a / n_angle - kPi, 2 * kPi * b / n_angle - kPi);
                q.w23.push_back(1.0 / (double(n_angle) * n_angle));
            }
        return q;
    }
    if (n1 <= 0) n1 = 6;
    if (n_radial <= 0) n_radial = 10;
    if (n_angle <= 0) n_angle = 8;
    // psi_bar is odd with a sign change at 0: split there.
    for (auto q1 : {detail::gauss_panels(-p.r_par, 0.0, n1), detail::gauss_panels(0.0, p.r_par, n1)})
        for (std::size_t i = 0; i < q1.x.size(); ++i) {
            q.t1.push_back(q1.x[i]);
            q.w1.push_back(q1.w[i] / (2 * kPi));
        }
    auto qr = detail::gauss_panels(0.0, p.r_perp, n_radial);
    for (std::size_t i = 0; i < qr.x.size(); ++i)
        for (int a = 0; a < n_angle; ++a) {
            double ang = 2 * kPi * (a + 0.5) / n_angle;
            q.t23.emplace_back(qr.x[i] * std::cos(ang), qr.x[i] * std::sin(ang));
            q.w23.push_back(qr.w[i] * qr.x[i] * (2 * kPi / n_angle) / (4 * kPi * kPi));
        }
    return q;
}

JetIdentityReport check_identities(const JetFamily& f, std::size_t k, const ThetaQuadrature& quad) {
    const auto& d = f.dirs[k];
    const double mu = f.params.mu;
    Eigen::Matrix3d WW = Eigen::Matrix3d::Zero();
    Eigen::Vector3d Wm = Eigen::Vector3d::Zero();
    double W2 = 0, div2 = 0, grad2 = 0, tr_num = 0, tr_den = 0, cc_num = 0;
    std::array<double, 2> joint{0, 0};
    for (std::size_t a = 0; a < quad.t1.size(); ++a)
        for (std::size_t b = 0; b < quad.t23.size(); ++b) {
            const double w = quad.w1[a] * quad.w23[b];
            JetPoint pt = evaluate_theta(f, k, Eigen::Vector3d(quad.t1[a], quad.t23[b](0), quad.t23[b](1)));
            Eigen::Vector3d Wv(pt.W[0].v, pt.W[1].v, pt.W[2].v);
            WW += w * Wv * Wv.transpose();
            Wm += w * Wv;
            W2 += w * Wv.squaredNorm();
            double dv = divergence(add(pt.W, pt.Wc));
            div2 += w * dv * dv;
            Dual2 q2 = pt.phi * pt.phi * pt.psi * pt.psi;
            double dt_q = q2.g(3);
            for (int i = 0; i < 3; ++i) {
                double dww = 0, cc = 0;
                for (int j = 0; j < 3; ++j) {
                    grad2 += w * pt.W[i].g(j) * pt.W[i].g(j);
                    dww += pt.W[i].g(j) * pt.W[j].v + pt.W[i].v * pt.W[j].g(j);
                    cc += pt.V[j].h(i, j) - pt.V[i].h(j, j);
                }
                double r = dww - d.xi_d(i) * dt_q / mu;
                tr_num += w * r * r;
                tr_den += w * dww * dww;
                double e = pt.W[i].v + pt.Wc[i].v - cc;
                cc_num += w * e * e;
            }
            joint[0] += w * std::abs(q2.v);
            joint[1] += w * q2.v * q2.v;
        }
    std::array<double, 2> sp{0, 0}, sf{0, 0};
    for (std::size_t a = 0; a < quad.t1.size(); ++a) {
        double v = psi_bar(f.profiles, f.params.r_par, quad.t1[a])[0];
        sp[0] += quad.w1[a] * v * v;
        sp[1] += quad.w1[a] * v * v * v * v;
    }
    for (std::size_t b = 0; b < quad.t23.size(); ++b) {
        double v = phi_bar(f.profiles, f.params.r_perp, quad.t23[b]).v;
        sf[0] += quad.w23[b] * v * v;
        sf[1] += quad.w23[b] * v * v * v * v;
    }

    JetIdentityReport r;
    r.k = k;
    r.mean_WW_error = (WW - d.xi_d * d.xi_d.transpose()).cwiseAbs().maxCoeff();
    r.W_l2 = std::sqrt(W2);
    r.W_mean = Wm.norm();
    r.div_ratio = std::sqrt(div2 / grad2);
    r.transport_ratio = std::sqrt(tr_num / tr_den);
    r.curlcurl_ratio = std::sqrt(cc_num / W2);
    for (int i = 0; i < 2; ++i) {
        double pw = i + 1.0;
        double lhs = std::pow(joint[i], 1.0 / pw), rhs = std::pow(sp[i] * sf[i], 1.0 / pw);
        r.fubini_gap = std::max(r.fubini_gap, std::abs(lhs - rhs) / rhs);
    }
    return r;
}

int support_overlaps(const JetFamily& f, const Grid& g) {
    int count = 0;
    const double s = f.params.phase();
    const bool compact = f.profiles.kind == ProfileKind::Compact;
    for (int i0 = 0; i0 < g.n; ++i0)
        for (int i1 = 0; i1 < g.n; ++i1)
            for (int i2 = 0; i2 < g.n; ++i2) {
                Eigen::Vector3d x(g.x(i0), g.x(i1), g.x(i2));
                int inside = 0;
                for (const auto& d : f.dirs) {
                    Eigen::Vector3d y = x - d.alpha_shift;
                    Eigen::Vector2d th(std::remainder(s * y.dot(d.A_d), 2 * kPi),
                                       std::remainder(s * y.dot(d.B_d), 2 * kPi));
                    if (compact && th.norm() >= f.params.r_perp) continue;
                    if (Phi_bar(f.profiles, f.params.r_perp, th).v != 0.0) ++inside;
                }
                if (inside >= 2) ++count;
            }
    return count;
}

bool ExponentFit::all_ok() const {
    for (const auto& f : fits)
        if (!f.ok) return false;
    return !fits.empty();
}

double predicted_exponent(const std::string& field, int N, int M, double p) {
    const double rp = -6.0 / 7.0, rl = -4.0 / 7.0;
    const double w = (2.0 / p - 1.0) * rp + (1.0 / p - 0.5) * rl + N + 2.0 * M;
    if (field == "W") return w;
    if (field == "Wc") return w + rp - rl;
    if (field == "V") return w - 2.0;
    if (field == "psi") return (1.0 / p - 0.5) * rl + N * (rp + 1.0 - rl) + 2.0 * M;
    if (field == "phi") {
        if (M != 0) throw Error(err::config, "phi does not depend on time");
        return (2.0 / p - 1.0) * rp + N;
    }
    throw Error(err::config, "unknown field " + field);
}

namespace {

// |d^N_x d^M_t f| for N, M <= 1 from a Dual2 (summed in squares).
double part_sq(const Dual2& f, int N, int M) {
    if (N == 0 && M == 0) return f.v * f.v;
    if (N == 0) return f.g(3) * f.g(3);
    if (M == 0) return f.g.head<3>().squaredNorm();
    return f.h.block<3, 1>(0, 3).squaredNorm();
}

}  // namespace

ExponentFit scaling_report(const ProfileSet& profiles, const DirectionSet& set,
                           const std::vector<double>& lambda_sweep, const std::vector<double>& p_list) {
    if (lambda_sweep.size() < 3) throw Error(err::precondition, "scaling needs at least three sweep points");
    for (double p : p_list)
        if (!(p >= 1)) throw Error(err::domain, "L^p exponent below 1");
    ExponentFit out;
    if (profiles.kind != ProfileKind::Compact)
        out.warnings.push_back("raised-cosine profiles do not concentrate; exponents are not expected to match");

    struct Key {
        std::string field;
        int N, M;
        double p;
    };
    std::vector<Key> keys;
    for (const char* fld : {"psi", "phi", "W", "Wc", "V"})
        for (int N = 0; N <= 1; ++N)
            for (int M = 0; M <= 1; ++M) {
                if (std::string(fld) == "phi" && M > 0) continue;
                for (double p : p_list) keys.push_back({fld, N, M, p});
            }

    std::vector<double> used;
    std::vector<std::vector<double>> measured(keys.size());
    for (double lambda : lambda_sweep) {
        JetFamily fam;
        try {
            fam = build_family(jet_params(lambda, set.n_star), set, profiles);
        } catch (const Error& e) {
            out.warnings.push_back("lambda " + num(lambda) + " skipped: " + e.what());
            continue;
        }
        ThetaQuadrature quad = theta_quadrature(fam, 6, 4, 32);
        std::vector<double> acc(keys.size(), 0.0);
        auto accumulate = [&](const JetPoint& pt, double w, const std::string& which) {
            for (std::size_t i = 0; i < keys.size(); ++i) {
                const Key& key = keys[i];
                const bool factor = key.field == "psi" || key.field == "phi";
                if (factor ? key.field != which : !which.empty()) continue;
                double sq = 0;
                if (key.field == "psi") sq = part_sq(pt.psi, key.N, key.M);
                else if (key.field == "phi") sq = part_sq(pt.phi, key.N, key.M);
                else {
                    const DualVec& v = key.field == "W" ? pt.W : (key.field == "Wc" ? pt.Wc : pt.V);
                    for (const auto& c : v) sq += part_sq(c, key.N, key.M);
                }
                acc[i] += w * std::pow(sq, key.p / 2.0);
            }
        };
        // psi and phi each depend on one factor of the theta torus only.
        for (std::size_t a = 0; a < quad.t1.size(); ++a)
            accumulate(evaluate_theta(fam, 0, Eigen::Vector3d(quad.t1[a], 0.0, 0.0)), quad.w1[a], "psi");
        for (std::size_t b = 0; b < quad.t23.size(); ++b)
            accumulate(evaluate_theta(fam, 0, Eigen::Vector3d(0.0, quad.t23[b](0), quad.t23[b](1))),
                       quad.w23[b], "phi");
        for (std::size_t a = 0; a < quad.t1.size(); ++a)
            for (std::size_t b = 0; b < quad.t23.size(); ++b)
                accumulate(evaluate_theta(fam, 0, Eigen::Vector3d(quad.t1[a], quad.t23[b](0), quad.t23[b](1))),
                           quad.w1[a] * quad.w23[b], "");
        used.push_back(lambda);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            double m = std::pow(acc[i], 1.0 / keys[i].p);
            measured[i].push_back(m);
            out.rows.push_back({keys[i].field, keys[i].N, keys[i].M, keys[i].p, lambda, m});
        }
    }
    if (used.size() < 2) throw Error(err::precondition, "degenerate fit: fewer than two usable sweep points");
    if (used.size() < 3) out.warnings.push_back("only " + std::to_string(used.size()) + " usable sweep points");

    for (std::size_t i = 0; i < keys.size(); ++i) {
        Eigen::MatrixXd X(used.size(), 2);
        Eigen::VectorXd y(used.size());
        for (std::size_t j = 0; j < used.size(); ++j) {
            X(j, 0) = 1.0;
            X(j, 1) = std::log(used[j]);
            y(j) = std::log(measured[i][j]);
        }
        Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
        ScalingFit fit;
        fit.field = keys[i].field;
        fit.N = keys[i].N;
        fit.M = keys[i].M;
        fit.p = keys[i].p;
        fit.predicted = predicted_exponent(fit.field, fit.N, fit.M, fit.p);
        fit.fitted = beta(1);
        fit.ok = std::abs(fit.predicted) < 1e-12 ? std::abs(fit.fitted) <= 0.02
                                                   : std::abs(fit.fitted - fit.predicted) <=
                                                         0.05 * std::abs(fit.predicted);
        out.fits.push_back(fit);
    }
    return out;
}

std::string scaling_csv(const ExponentFit& fit) {
    std::ostringstream os;
    os << "field,N,M,p,lambda,measured,predicted_exponent,fitted_exponent\n";
    char buf[256];
    for (const auto& r : fit.rows) {
        const ScalingFit* f = nullptr;
        for (const auto& c : fit.fits)
            if (c.field == r.field && c.N == r.N && c.M == r.M && c.p == r.p) f = &c;
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.field.c_str(), r.N, r.M,
                      r.p, r.lambda, r.measured, f ? f->predicted : NAN, f ? f->fitted : NAN);
        os << buf;
    }
    return os.str();
}

nlohmann::json to_json(const ExponentFit& fit) {
    nlohmann::json fits = nlohmann::json::array();
    for (const auto& f : fit.fits)
        fits.push_back({{"field", f.field},
                        {"N", f.N},
                        {"M", f.M},
                        {"p", f.p},
                        {"predicted_exponent", f.predicted},
                        {"fitted_exponent", f.fitted},
                        {"ok", f.ok}});
    return {{"fits", fits}, {"warnings", fit.warnings}, {"all_ok", fit.all_ok()}};
}

nlohmann::json to_json(const JetFamily& f) {
    const auto& p = f.params;
    nlohmann::json shifts = nlohmann::json::array();
    for (const auto& d : f.dirs) shifts.push_back({d.alpha_shift(0), d.alpha_shift(1), d.alpha_shift(2)});
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& c : f.certificates)
        certs.push_back({{"i", c.i},
                         {"j", c.j},
                         {"gcd", c.g},
                         {"spacing", c.spacing},
                         {"offset", c.offset},
                         {"distance", c.distance},
                         {"required", c.required},
                         {"disjoint", c.disjoint}});
    return {{"profiles", f.profiles.kind == ProfileKind::Compact ? "compact" : "raised-cosine"},
            {"degree", f.profiles.degree},
            {"lambda", p.lambda},
            {"sigma", p.sigma},
            {"n_star", p.n_star},
            {"r_perp", p.r_perp},
            {"r_perp_formula", p.r_perp_formula},
            {"r_par", p.r_par},
            {"mu", p.mu},
            {"disjoint", f.disjoint},
            {"shifts", shifts},
            {"certificates", certs}};
}

}  // namespace nsci
