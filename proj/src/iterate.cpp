#include "nsci/iterate.hpp"

#include "nsci/bump.hpp"
#include "nsci/errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace nsci {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Truncated Taylor series in tau with coefficients f^(k)/k!.
struct Taylor {
    std::array<double, 5> c{};
};

Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; i + j < 5; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

Taylor operator+(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int i = 0; i < 5; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
}

Taylor recip(const Taylor& a) {
    Taylor r;
    r.c[0] = 1.0 / a.c[0];
    for (int k = 1; k < 5; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += a.c[j] * r.c[k - j];
        r.c[k] = -s / a.c[0];
    }
    return r;
}

Taylor texp(const Taylor& g) {
    Taylor f;
    f.c[0] = std::exp(g.c[0]);
    for (int k = 1; k < 5; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += j * g.c[j] * f.c[k - j];
        f.c[k] = s / k;
    }
    return f;
}

// exp(-1/u) for u > 0, zero otherwise.
Taylor hfun(const Taylor& u) {
    if (u.c[0] <= 0) return Taylor{};
    Taylor m = recip(u);
    for (auto& v : m.c) v = -v;
    return texp(m);
}

template <int C>
Field<C> apply_multiplier(const ScalarField& m, Field<C> f) {
    for (auto& c : f.c) c *= m.c[0];
    return f;
}

SymTensorField traceless_outer(const VectorField& v) { return traceless_part(outer_self(v)); }

// Frobenius contraction R : S pointwise.
Samples contraction(const SymTensorField& R, const SymTensorField& S) {
    auto r = samples(R), s = samples(S);
    Samples acc = Samples::Zero(r[0].size());
    for (int a = 0; a < 6; ++a) acc += kSymWeight[a] * r[a] * s[a];
    return acc;
}

double z_coefficient(const LevelSchedule& s, const ParameterConfig& c) {
    return 4.0 * std::pow(s.lambda_q, c.zeta) * s.delta_1 / s.delta_q1;
}

template <int C>
bool is_zero(const Field<C>& f) {
    for (const auto& c : f.c)
        if ((c != cplx(0.0)).any()) return false;
    return true;
}

double ratio(double num, double den) { return den > 0 ? num / den : (num > 0 ? num : 0.0); }

// Fourth-order stencils for the derivative at position `offset` of five
// consecutive samples.
constexpr double kStencil[5][5] = {{-25, 48, -36, 16, -3},
                                   {-3, -10, 18, -6, 1},
                                   {1, -8, 0, 8, -1},
                                   {-1, 6, -18, 10, 3},
                                   {3, -16, 36, -48, 25}};

class ShearSource : public StateSource {
public:
    ShearSource(const Grid& g, const TimeGrid& tg) : g_(g), tg_(tg) {
        Samples s(static_cast<Eigen::Index>(g.real_size()));
        for (int i0 = 0; i0 < g.n; ++i0)
            for (int i1 = 0; i1 < g.n; ++i1)
                for (int i2 = 0; i2 < g.n; ++i2) s(Eigen::Index(g.index(i0, i1, i2))) = std::sin(g.x(i2));
        profile_ = to_spectral(g, s);
    }
    Snapshot at(int i) const override {
        Snapshot s = zero_snapshot(g_, tg_.at(i));
        const double e = std::exp(-s.t);
        s.v.c[0] = e * profile_;
        s.dv = VectorField(g_);
        s.dv->c[0] = -e * profile_;
        return s;
    }

private:
    Grid g_;
    TimeGrid tg_;
    Coeffs profile_;
};

class ZeroSource : public StateSource {
public:
    ZeroSource(const Grid& g, const TimeGrid& tg) : g_(g), tg_(tg) {}
    Snapshot at(int i) const override { return zero_snapshot(g_, tg_.at(i)); }

private:
    Grid g_;
    TimeGrid tg_;
};

class SampledSource : public StateSource {
public:
    explicit SampledSource(std::vector<Snapshot> s) : s_(std::move(s)) {}
    Snapshot at(int i) const override { return s_.at(static_cast<std::size_t>(i)); }

private:
    std::vector<Snapshot> s_;
};

// Output of a step: changed samples are stored, the others are the input.
class StepSource : public StateSource {
public:
    StepSource(std::shared_ptr<const StateSource> base, std::map<int, Snapshot> changed)
        : base_(std::move(base)), changed_(std::move(changed)) {}
    Snapshot at(int i) const override {
        auto it = changed_.find(i);
        return it != changed_.end() ? it->second : base_->at(i);
    }

private:
    std::shared_ptr<const StateSource> base_;
    std::map<int, Snapshot> changed_;
};

NSRState base_state(const ParameterConfig& config, const Grid& g, int nt, const DirectionSet& set,
                    double C0, int q) {
    if (nt < 5) throw Error(err::precondition, "at least 5 time samples are required");
    NSRState st;
    st.q = q;
    st.config = config;
    st.grid = g;
    st.times = make_time_grid(config, nt);
    st.schedule = level_schedule(config, q, set, C0);
    return st;
}

double sup_l2(const NSRState& st) {
    double m = 0;
    for (int i = 0; i < st.size(); ++i) m = std::max(m, l2_parseval(st.at(i).v));
    return m;
}

}  // namespace

Snapshot zero_snapshot(const Grid& g, double t) {
    Snapshot s;
    s.t = t;
    s.v = VectorField(g);
    s.p = ScalarField(g);
    s.R = SymTensorField(g);
    s.dv = VectorField(g);
    s.dR = SymTensorField(g);
    return s;
}

TimeGrid make_time_grid(const ParameterConfig& config, int nt) {
    if (nt < 5) throw Error(err::precondition, "at least 5 time samples are required");
    return TimeGrid{config.t0, 2.0 * config.s, nt};
}

template <int C>
Field<C> time_derivative(const std::vector<const Field<C>*>& window, int offset, double dt) {
    if (window.size() != 5 || offset < 0 || offset > 4)
        throw Error(err::precondition, "the time stencil needs five samples");
    Field<C> out(window[0]->grid);
    for (int j = 0; j < 5; ++j) {
        if (kStencil[offset][j] == 0.0) continue;
        for (int c = 0; c < C; ++c) out.c[c] += (kStencil[offset][j] / (12.0 * dt)) * window[j]->c[c];
    }
    return out;
}

template VectorField time_derivative<3>(const std::vector<const VectorField*>&, int, double);
template SymTensorField time_derivative<6>(const std::vector<const SymTensorField*>&, int, double);

Snapshot NSRState::at(int i) const {
    if (i < 0 || i >= size()) return zero_snapshot(grid, times.at(i));
    Snapshot s = source->at(i);
    if (s.dv && s.dR) return s;
    const int nt = size();
    const int first = std::clamp(i - 2, 0, nt - 5);
    std::vector<Snapshot> raw;
    for (int j = first; j < first + 5; ++j) raw.push_back(j == i ? s : source->at(j));
    if (!s.dv) {
        std::vector<const VectorField*> w;
        for (auto& r : raw) w.push_back(&r.v);
        s.dv = time_derivative<3>(w, i - first, times.dt());
    }
    if (!s.dR) {
        std::vector<const SymTensorField*> w;
        for (auto& r : raw) w.push_back(&r.R);
        s.dR = time_derivative<6>(w, i - first, times.dt());
    }
    return s;
}

LevelSchedule level_schedule(const ParameterConfig& config, int q, const DirectionSet& set, double C0) {
    GeometryConstants k{set.sup_gamma_bound, static_cast<int>(set.size()), C0};
    return schedule(config, q, &k);
}

NSRState shear_flow_state(const ParameterConfig& config, const Grid& g, int nt, const DirectionSet& set,
                          double C0) {
    NSRState st = base_state(config, g, nt, set, C0, 0);
    st.source = std::make_shared<ShearSource>(g, st.times);
    st.v0_l2 = sup_l2(st);
    return st;
}

NSRState zero_state(const ParameterConfig& config, const Grid& g, int nt, const DirectionSet& set,
                    double C0) {
    NSRState st = base_state(config, g, nt, set, C0, 0);
    st.source = std::make_shared<ZeroSource>(g, st.times);
    return st;
}

NSRState sampled_state(const ParameterConfig& config, const Grid& g, std::vector<Snapshot> samples,
                       const DirectionSet& set, int q, double C0) {
    NSRState st = base_state(config, g, static_cast<int>(samples.size()), set, C0, q);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto& s = samples[i];
        if (!(s.v.grid == g) || !(s.p.grid == g) || !(s.R.grid == g))
            throw Error(err::precondition, "sample " + std::to_string(i) + " is not on the n = " +
                                               std::to_string(g.n) + " grid");
        s.t = st.times.at(static_cast<int>(i));
    }
    st.source = std::make_shared<SampledSource>(std::move(samples));
    st.v0_l2 = sup_l2(st);
    return st;
}

EnergyProfile make_energy_profile(const NSRState& st, double slope_factor) {
    if (!(slope_factor > 1.0)) throw Error(err::config, "slope factor must exceed 1");
    EnergyProfile e;
    e.eps1 = st.schedule.eps1;
    if (!(e.eps1 > 0)) throw Error(err::config, "eps_1 must be positive");
    for (int i = 0; i < st.size(); ++i) {
        Snapshot s = st.at(i);
        e.t.push_back(s.t);
        e.kinetic.push_back(inner(s.v, s.v));
        e.dkinetic.push_back(2.0 * inner(s.v, *s.dv));
        e.slope_bound = std::max(e.slope_bound, std::abs(e.dkinetic.back()));
    }
    e.steepness = e.slope_bound > 0 ? 8.0 * slope_factor * e.slope_bound / e.eps1 : 1.0 / st.config.s;
    e.g_slope_t0 = e.eps1 * e.steepness / 8.0;
    for (std::size_t i = 0; i < e.t.size(); ++i) {
        double sg = 1.0 / (1.0 + std::exp(-e.steepness * (e.t[i] - st.config.t0)));
        e.g.push_back(0.5 * e.eps1 * (1.0 + sg));
        e.dg.push_back(0.5 * e.eps1 * e.steepness * sg * (1.0 - sg));
        e.e.push_back(e.kinetic[i] + e.g.back());
        e.de.push_back(e.dkinetic[i] + e.dg.back());
    }
    return e;
}

std::array<double, 5> Cutoff::derivs(double t) const {
    const double d = std::abs(t - center);
    const double sign = t >= center ? 1.0 : -1.0;
    const double width = support - plateau;
    std::array<double, 5> out{};
    if (d <= plateau) {
        out[0] = 1.0;
        return out;
    }
    if (d >= support) return out;
    Taylor u, v;
    u.c[0] = (support - d) / width;
    u.c[1] = -sign / width;
    v.c[0] = 1.0 - u.c[0];
    v.c[1] = -u.c[1];
    Taylor hu = hfun(u), hv = hfun(v);
    Taylor s = hu * recip(hu + hv);
    double fact = 1.0;
    for (int k = 0; k < 5; ++k) {
        if (k > 0) fact *= k;
        out[k] = fact * s.c[k];
    }
    return out;
}

CutoffPair make_cutoffs(const LevelSchedule& s, const ParameterConfig& config) {
    const double gap = s.s_q1 / 2.0;
    const double m = gap / 10.0;
    CutoffPair cp;
    cp.eta = {config.t0, s.S_q + m, s.S_q + gap - m};
    cp.eta_tilde = {config.t0, s.S_q + gap + m, s.S_q + 2.0 * gap - m};
    const int samples = 20001;
    const double lo = config.t0 - 2.0 * config.s, hi = config.t0 + 2.0 * config.s;
    for (int which = 0; which < 2; ++which) {
        const Cutoff& c = which == 0 ? cp.eta : cp.eta_tilde;
        std::array<double, 5> sup{};
        for (int j = 0; j < samples; ++j) {
            auto d = c.derivs(lo + (hi - lo) * j / (samples - 1));
            for (int k = 0; k < 5; ++k) sup[k] = std::max(sup[k], std::abs(d[k]));
        }
        for (int k = 0; k < 5; ++k) {
            CutoffBound b;
            b.name = which == 0 ? "eta" : "eta_tilde";
            b.order = k;
            b.measured = sup[k];
            b.scale = std::pow(2.0 / config.s, double(k) * s.q);
            b.implied_C = b.measured / b.scale;
            cp.bounds.push_back(b);
        }
    }
    return cp;
}

namespace {
double smoothstep(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep_prime(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
}  // namespace

double chi(double z) {
    if (z <= 1.0) return 1.0;
    if (z >= 2.0) return z;
    double S = smoothstep(z - 1.0);
    return (1.0 - S) + S * z;
}

double chi_prime(double z) {
    if (z <= 1.0) return 0.0;
    if (z >= 2.0) return 1.0;
    double u = z - 1.0;
    return smoothstep_prime(u) * (z - 1.0) + smoothstep(u);
}

ChiCheck check_chi(int samples) {
    ChiCheck c;
    c.worst_lower = c.worst_upper = c.min_chi = std::numeric_limits<double>::infinity();
    for (int j = 1; j < samples; ++j) {
        double z = 1.0 + double(j) / samples;
        c.worst_lower = std::min(c.worst_lower, 2.0 * chi(z) - z);
        c.worst_upper = std::min(c.worst_upper, 4.0 * z - 2.0 * chi(z));
    }
    for (int j = 0; j <= samples; ++j) c.min_chi = std::min(c.min_chi, chi(4.0 * j / samples));
    c.ok = c.worst_lower >= 0 && c.worst_upper >= 0 && c.min_chi >= 1.0;
    return c;
}

Mollifier make_mollifier(const Grid& g, const TimeGrid& times, double ell_space, double ell_time) {
    if (!(ell_space >= 2.0 * g.h()))
        throw Error(err::under_resolution, "space mollification length " + fmt(ell_space) +
                                               " is below two grid spacings (" + fmt(2.0 * g.h()) + ")");
    if (!(ell_time >= 2.0 * times.dt()))
        throw Error(err::under_resolution, "time mollification length " + fmt(ell_time) +
                                               " is below two time steps (" + fmt(2.0 * times.dt()) + ")");
    Mollifier m;
    m.ell_space = ell_space;
    m.ell_time = ell_time;
    const double dt = times.dt();
    m.J = static_cast<int>(std::ceil(ell_time / dt)) - 1;
    while ((m.J + 1) * dt < ell_time) ++m.J;
    double sum = 0;
    for (int j = -m.J; j <= m.J; ++j) {
        double x = j * dt / ell_time;
        double w = std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
        m.time_weights.push_back(w);
        sum += w;
    }
    for (auto& w : m.time_weights) w /= sum;

    // theta_ell(x) = c F(|x|^2 / ell^2); its transform at |k| is a radial
    // sine integral, tabulated per integer |k|^2.
    auto q = detail::gauss_panels(0.0, 1.0, 40);
    std::vector<double> F(q.x.size());
    double norm = 0;
    for (std::size_t j = 0; j < q.x.size(); ++j) {
        F[j] = bump_radial<0>(q.x[j] * q.x[j])[0] * q.x[j] * q.x[j];
        norm += q.w[j] * F[j];
    }
    std::map<long, double> table;
    auto hat = [&](long k2) {
        auto it = table.find(k2);
        if (it != table.end()) return it->second;
        double kappa = std::sqrt(double(k2)) * ell_space, s = 0;
        for (std::size_t j = 0; j < q.x.size(); ++j) {
            double a = kappa * q.x[j];
            s += q.w[j] * F[j] * (a == 0.0 ? 1.0 : std::sin(a) / a);
        }
        return table[k2] = s / norm;
    };
    m.multiplier = ScalarField(g);
    const int n = g.n, nk = g.nk();
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < nk; ++i2) {
                long k0 = i0 <= n / 2 ? i0 : i0 - n, k1 = i1 <= n / 2 ? i1 : i1 - n;
                long k2 = k0 * k0 + k1 * k1 + long(i2) * i2;
                m.multiplier.c[0](Eigen::Index((std::size_t(i0) * n + i1) * nk + i2)) = hat(k2);
            }
    return m;
}

Mollified mollify(const NSRState& st, int i, const Mollifier& m) {
    const Grid& g = st.grid;
    Mollified out;
    out.v_bar = VectorField(g);
    out.dv_bar = VectorField(g);
    out.p_bar = ScalarField(g);
    out.R_bar = SymTensorField(g);
    out.dR_bar = SymTensorField(g);
    SymTensorField vv(g);
    ScalarField v2(g);
    for (int j = -m.J; j <= m.J; ++j) {
        const double w = m.time_weights[std::size_t(j + m.J)];
        if (w == 0.0) continue;
        Snapshot s = st.at(i - j);
        out.v_bar += w * s.v;
        out.dv_bar += w * *s.dv;
        out.p_bar += w * s.p;
        out.R_bar += w * s.R;
        out.dR_bar += w * *s.dR;
        vv += w * traceless_outer(s.v);
        v2 += w * dot(s.v, s.v);
    }
    out.v_bar = apply_multiplier(m.multiplier, out.v_bar);
    out.dv_bar = apply_multiplier(m.multiplier, out.dv_bar);
    out.R_bar = apply_multiplier(m.multiplier, out.R_bar);
    out.dR_bar = apply_multiplier(m.multiplier, out.dR_bar);
    vv = apply_multiplier(m.multiplier, vv);
    v2 = apply_multiplier(m.multiplier, v2);
    out.p_bar = apply_multiplier(m.multiplier, out.p_bar) - (1.0 / 3.0) * (dot(out.v_bar, out.v_bar) - v2);
    out.R_com_bar = traceless_outer(out.v_bar) - vv;
    return out;
}

Glued glue(const Snapshot& s, const Mollified& m, const Cutoff& eta) {
    auto d = eta.derivs(s.t);
    Glued g;
    g.eta = d[0];
    g.deta = d[1];
    const Grid& grid = s.v.grid;
    if (g.eta == 0.0 && g.deta == 0.0) {
        g.v_tilde = s.v;
        g.dv_tilde = *s.dv;
        g.p_tilde = s.p;
        g.R_ell = g.dR_ell = g.R_com = g.R_loc = SymTensorField(grid);
        return g;
    }
    VectorField diff = m.v_bar - s.v;
    g.v_tilde = s.v + g.eta * diff;
    g.dv_tilde = *s.dv + g.deta * diff + g.eta * (m.dv_bar - *s.dv);
    const double mix = g.eta * (1.0 - g.eta);
    g.p_tilde = g.eta * m.p_bar + (1.0 - g.eta) * s.p;
    if (mix != 0.0) g.p_tilde += (mix / 3.0) * dot(diff, diff);
    g.R_ell = g.eta * m.R_bar;
    g.dR_ell = g.deta * m.R_bar + g.eta * m.dR_bar;
    g.R_com = g.eta * m.R_com_bar;
    g.R_loc = SymTensorField(grid);
    if (mix != 0.0) g.R_loc -= mix * traceless_outer(diff);
    if (g.deta != 0.0) g.R_loc += reynolds(g.deta * diff);
    return g;
}

void check_support_hypothesis(const NSRState& st) {
    std::vector<int> bad;
    for (int i = 0; i < st.size(); ++i) {
        Snapshot s = st.at(i);
        if (!st.schedule.I_q.contains(s.t) && !is_zero(s.R)) bad.push_back(i);
    }
    if (bad.empty()) return;
    std::ostringstream os;
    os << "R_q is nonzero outside I_q at time indices";
    for (int i : bad) os << ' ' << i;
    throw Error(err::support, os.str());
}

double chi_argument_scale(const NSRState& st) { return z_coefficient(st.schedule, st.config); }

RhoBar rho_bar_at(const EnergyProfile& e, int i, const Glued& g, const NSRState& st) {
    const Grid& grid = g.v_tilde.grid;
    const double cz = chi_argument_scale(st);
    Samples Rn = pointwise_norm(g.R_ell);
    Samples dRn = Samples::Zero(Rn.size());
    if (!is_zero(g.R_ell)) {
        Samples c = contraction(g.R_ell, g.dR_ell);
        for (Eigen::Index j = 0; j < Rn.size(); ++j) dRn(j) = Rn(j) > 0 ? c(j) / Rn(j) : 0.0;
    }
    Samples X(Rn.size()), dX(Rn.size());
    for (Eigen::Index j = 0; j < Rn.size(); ++j) {
        X(j) = chi(cz * Rn(j));
        dX(j) = chi_prime(cz * Rn(j)) * cz * dRn(j);
    }
    RhoBar r;
    r.chi_integral = integral_of_samples(grid, X);
    const double dchi = integral_of_samples(grid, dX);
    const std::size_t k = static_cast<std::size_t>(i);
    r.numerator = e.e.at(k) - inner(g.v_tilde, g.v_tilde) - st.schedule.delta_q2 / 2.0;
    const double dnum = e.de.at(k) - 2.0 * inner(g.v_tilde, g.dv_tilde);
    r.value = r.numerator / (3.0 * r.chi_integral);
    r.derivative = dnum / (3.0 * r.chi_integral) - r.numerator * dchi / (3.0 * r.chi_integral * r.chi_integral);
    return r;
}

AmplitudeField amplitudes(const Glued& g, const RhoBar& rb, double eta_tilde, double deta_tilde,
                          const DirectionSet& set, const NSRState& st, double t) {
    const Grid& grid = g.v_tilde.grid;
    const double cz = chi_argument_scale(st);
    AmplitudeField A;
    A.t = t;
    A.rho_bar = rb.value;
    A.drho_bar = rb.derivative;
    A.eta_tilde = eta_tilde;
    A.deta_tilde = deta_tilde;
    A.chi_integral = rb.chi_integral;

    auto R = samples(g.R_ell), dR = samples(g.dR_ell);
    Samples Rn = pointwise_norm(g.R_ell);
    Samples c = contraction(g.R_ell, g.dR_ell);
    const Eigen::Index N = Rn.size();
    Samples rho(N), drho(N);
    const double e2 = eta_tilde * eta_tilde, de2 = 2.0 * eta_tilde * deta_tilde;
    for (Eigen::Index j = 0; j < N; ++j) {
        double z = cz * Rn(j);
        double dz = Rn(j) > 0 ? cz * c(j) / Rn(j) : 0.0;
        double x = chi(z);
        rho(j) = e2 * rb.value * x;
        drho(j) = de2 * rb.value * x + e2 * rb.derivative * x + e2 * rb.value * chi_prime(z) * dz;
    }

    // c_xi on symmetric storage, and c_xi(Id).
    const std::size_t K = set.size();
    std::vector<std::array<double, 6>> cf(K);
    std::vector<double> cid(K);
    for (std::size_t k = 0; k < K; ++k) {
        const Eigen::Matrix3d& M = set.coordinate_forms[k];
        for (int a = 0; a < 6; ++a) {
            int i0 = kSymIndex[a][0], i1 = kSymIndex[a][1];
            cf[k][a] = i0 == i1 ? M(i0, i0) : M(i0, i1) + M(i1, i0);
        }
        cid[k] = M.trace();
    }

    std::vector<Samples> a(K, Samples(N)), da(K, Samples(N)), a2(K, Samples(N)), da2(K, Samples(N));
    double rho_max = 0;
    for (Eigen::Index j = 0; j < N; ++j) {
        rho_max = std::max(rho_max, rho(j));
        if (rho(j) > 0) {
            double q = Rn(j) / rho(j);
            A.quotient_max = std::max(A.quotient_max, q);
            if (q > 0.5) {
                std::size_t idx = static_cast<std::size_t>(j);
                int n = grid.n;
                int i2 = int(idx % n), i1 = int((idx / n) % n), i0 = int(idx / (std::size_t(n) * n));
                throw Error(err::domain, "|R_ell/rho| = " + fmt(q) + " > 1/2 at t = " + fmt(t) +
                                             ", grid point (" + std::to_string(i0) + ", " +
                                             std::to_string(i1) + ", " + std::to_string(i2) +
                                             "); margin " + fmt(0.5 - q));
            }
        } else if (Rn(j) > 0) {
            throw Error(err::domain, "R_ell is nonzero where rho vanishes at t = " + fmt(t));
        }
        for (std::size_t k = 0; k < K; ++k) {
            double cR = 0, cdR = 0;
            for (int s = 0; s < 6; ++s) {
                cR += cf[k][s] * R[s](j);
                cdR += cf[k][s] * dR[s](j);
            }
            double sq = rho(j) * cid[k] - cR;
            if (sq < 0) {
                if (sq < -1e-14 * std::max(rho(j), 1e-300))
                    throw Error(err::construction, "negative coordinate " + fmt(sq) + " at t = " + fmt(t));
                sq = 0;
            }
            double dsq = drho(j) * cid[k] - cdR;
            double v = std::sqrt(sq);
            a[k](j) = v;
            a2[k](j) = sq;
            da2[k](j) = dsq;
            da[k](j) = v > 0 ? dsq / (2.0 * v) : 0.0;
        }
    }

    // Pointwise check of rho Id - R_ell = sum a^2 xi (x) xi with the square roots.
    double worst = 0;
    for (Eigen::Index j = 0; j < N; ++j) {
        Eigen::Matrix3d S = rho(j) * Eigen::Matrix3d::Identity();
        for (int s = 0; s < 6; ++s) {
            int i0 = kSymIndex[s][0], i1 = kSymIndex[s][1];
            S(i0, i1) -= R[s](j);
            if (i0 != i1) S(i1, i0) -= R[s](j);
        }
        for (std::size_t k = 0; k < K; ++k) {
            const Eigen::Vector3d& xi = set.directions[k].xi_d;
            S -= a[k](j) * a[k](j) * xi * xi.transpose();
        }
        worst = std::max(worst, S.cwiseAbs().maxCoeff());
    }
    A.identity_error = rho_max > 0 ? worst / rho_max : worst;

    A.constant = true;
    for (std::size_t k = 0; k < K && A.constant; ++k)
        A.constant = a[k].maxCoeff() == a[k].minCoeff() && da2[k].maxCoeff() == da2[k].minCoeff();
    A.constant = A.constant && rho.maxCoeff() == rho.minCoeff() && drho.maxCoeff() == drho.minCoeff();
    auto make = [&](const Samples& s) {
        return A.constant ? constant_field<1>(grid, {s(0)}) : from_samples(grid, s);
    };
    A.rho = make(rho);
    A.drho = make(drho);
    for (std::size_t k = 0; k < K; ++k) {
        A.a.push_back(make(a[k]));
        A.da.push_back(make(da[k]));
        A.a2.push_back(make(a2[k]));
        A.da2.push_back(make(da2[k]));
    }
    return A;
}

JetSample jet_sample(const JetFamily& f, const Grid& g, double t) {
    JetSample J;
    for (std::size_t k = 0; k < f.size(); ++k) {
        J.V.push_back(jet_field(f, k, JetQuantity::V, g, t));
        J.dV.push_back(jet_field(f, k, JetQuantity::V, g, t, 1));
        J.W.push_back(jet_field(f, k, JetQuantity::W, g, t));
        J.Wc.push_back(jet_field(f, k, JetQuantity::Wc, g, t));
        J.Y.push_back(jet_field(f, k, JetQuantity::PhiPsiSq, g, t));
        J.dY.push_back(jet_field(f, k, JetQuantity::PhiPsiSq, g, t, 1));
    }
    return J;
}

namespace {

// Galerkin products: exact products truncated to the grid modes, with a
// shortcut for spatially constant amplitudes.
VectorField mul(const AmplitudeField& A, const ScalarField& a, const VectorField& v) {
    if (A.constant) return a.c[0](0).real() * v;
    return product(a, v);
}

ScalarField mul(const AmplitudeField& A, const ScalarField& a, const ScalarField& b) {
    if (A.constant) return a.c[0](0).real() * b;
    return product(a, b);
}

ScalarField along(const ScalarField& f, const Eigen::Vector3d& xi) {
    ScalarField s(f.grid);
    for (int c = 0; c < 3; ++c) s += xi(c) * partial(f, c);
    return s;
}

ScalarField project(const VectorField& v, const Eigen::Vector3d& xi) {
    ScalarField s(v.grid);
    for (int c = 0; c < 3; ++c) s.c[0] += xi(c) * v.c[c];
    return s;
}

}  // namespace

Perturbation perturbation(const AmplitudeField& A, const JetFamily& f, const JetSample& J) {
    const Grid& g = A.rho.grid;
    if (!A.constant) {
        int ba = 0;
        for (const auto& a : A.a) ba = std::max(ba, bandwidth(a, 1e-8));
        int bj = 0;
        for (std::size_t k = 0; k < f.size(); ++k) bj = std::max(bj, jet_bandwidth(f, k, JetQuantity::W));
        if (ba + bj > g.n / 2 - 1)
            throw Error(err::under_resolution, "amplitude bandwidth " + std::to_string(ba) +
                                                   " plus jet bandwidth " + std::to_string(bj) +
                                                   " exceeds " + std::to_string(g.n / 2 - 1));
    }
    Perturbation P;
    P.w_p = P.w_c = P.w_t = P.dw_pc = P.dw_t = VectorField(g);
    VectorField cc(g), raw_t(g), draw_t(g), dpot(g);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const ScalarField& a = A.a[k];
        P.w_p += mul(A, a, J.W[k]);
        P.w_c += mul(A, a, J.Wc[k]);
        if (!A.constant) {
            VectorField ga = grad(a);
            P.w_c += curl(cross(ga, J.V[k])) + cross(ga, curl(J.V[k]));
        }
        cc += mul(A, a, J.V[k]);
        dpot += mul(A, A.da[k], J.V[k]) + mul(A, a, J.dV[k]);
        raw_t += mul(A, A.a2[k], J.Y[k]);
        draw_t += mul(A, A.da2[k], J.Y[k]) + mul(A, A.a2[k], J.dY[k]);
    }
    const double mu = f.params.mu;
    cc = curl(curl(cc));
    P.dw_pc = curl(curl(dpot));
    P.w_t = (-1.0 / mu) * helmholtz(project_nonzero(raw_t));
    P.dw_t = (-1.0 / mu) * helmholtz(project_nonzero(draw_t));
    P.P = (1.0 / mu) * inv_laplacian(div(draw_t));
    P.w = P.w_p + P.w_c + P.w_t;
    const double wp = grid_max_abs(P.w_p);
    P.curlcurl_error = ratio(grid_max_abs(P.w_p + P.w_c - cc), wp);
    P.div_pc = ratio(grid_max_abs(div(P.w_p + P.w_c)), wp);
    P.div_t = ratio(grid_max_abs(div(P.w_t)), grid_max_abs(P.w_t));
    return P;
}

NewStress new_stress(const Glued& gl, const AmplitudeField& A, const Perturbation& W, const JetFamily& f,
                     const JetSample& J) {
    const Grid& g = gl.v_tilde.grid;
    const double mu = f.params.mu;
    NewStress out;
    StressBreakdown& S = out.parts;
    const VectorField& w = W.w;

    S.R_lin = reynolds(W.dw_pc) - reynolds(laplacian(w)) + 2.0 * traceless_part(sym_outer(gl.v_tilde, w));
    S.p_lin = (2.0 / 3.0) * dot(gl.v_tilde, w);

    SymTensorField wpwp = outer_self(W.w_p);
    SymTensorField corr = outer_self(w) - wpwp;
    S.R_cor = traceless_part(corr);
    S.p_cor = (1.0 / 3.0) * trace(corr);

    VectorField gvec(g);
    SymTensorField diag(g);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Eigen::Vector3d& xi = f.dirs[k].xi_d;
        ScalarField s = project(J.Y[k], xi);
        gvec += times_vector(mul(A, along(A.a2[k], xi), project_nonzero(s)), xi);
        gvec -= (1.0 / mu) * mul(A, A.da2[k], J.Y[k]);
        diag += scaled_tensor(mul(A, A.a2[k], s), xi * xi.transpose());
    }
    S.R_osc = reynolds(gvec);
    SymTensorField inter = wpwp - diag;
    S.R_int = traceless_part(inter);
    S.p_int = (1.0 / 3.0) * trace(inter);
    S.P = W.P;
    S.p_osc = A.rho + W.P;
    S.R_com = gl.R_com;
    S.R_loc = gl.R_loc;

    out.v_next = gl.v_tilde + w;
    out.dv_next = gl.dv_tilde + W.dw_pc + W.dw_t;
    out.p_next = project_nonzero(gl.p_tilde - S.p_lin - S.p_cor - S.p_osc - S.p_int);
    out.R_next = S.R_lin + S.R_cor + S.R_osc + S.R_com + S.R_loc + S.R_int;
    out.trace_ratio = ratio(grid_max_abs(trace(out.R_next)), grid_max_abs(out.R_next));
    if (out.trace_ratio > 1e-9)
        throw Error(err::assembly, "trace of R_next is " + fmt(out.trace_ratio) + " of its size");

    VectorField lhs = div_tensor(wpwp + gl.R_ell) + W.dw_t - grad(S.p_osc + S.p_int) -
                      div_tensor(S.R_osc + S.R_int);
    double scale = std::max({grid_max_abs(div_tensor(wpwp)), grid_max_abs(W.dw_t),
                             grid_max_abs(grad(S.p_osc)), grid_max_abs(div_tensor(S.R_osc))});
    out.oscillation_error = ratio(grid_max_abs(lhs), scale);
    return out;
}

ResidualResult residual_check(const NSRState& st) {
    const int nt = st.size();
    if (nt < 5) throw Error(err::precondition, "residual check needs at least 5 time samples");
    ResidualResult r;
    r.per_sample.assign(std::size_t(nt), std::numeric_limits<double>::quiet_NaN());
    std::vector<VectorField> res;
    double scale_inf = 0, scale_l2 = 0;
    for (int i = 2; i < nt - 2; ++i) {
        Snapshot s = st.at(i);
        std::array<VectorField, 5> terms{*s.dv, div_tensor(outer_self(s.v)), grad(s.p), -laplacian(s.v),
                                         -div_tensor(s.R)};
        VectorField sum(st.grid);
        for (const auto& t : terms) {
            sum += t;
            scale_inf = std::max(scale_inf, grid_max_abs(t));
            scale_l2 = std::max(scale_l2, l2_parseval(t));
        }
        res.push_back(std::move(sum));
    }
    r.scale = scale_inf;
    double l2 = 0;
    for (std::size_t j = 0; j < res.size(); ++j) {
        double v = ratio(grid_max_abs(res[j]), scale_inf);
        r.per_sample[j + 2] = v;
        r.residual_linf = std::max(r.residual_linf, v);
        l2 += ratio(l2_parseval(res[j]), scale_l2);
    }
    r.residual_l2 = l2 / double(res.size());
    return r;
}

bool DiagnosticsReport::hard_ok() const {
    for (const auto& e : entries)
        if ((e.kind == "identity" || e.kind == "support" || e.kind == "structure") && !e.pass) return false;
    return true;
}

const DiagnosticEntry* DiagnosticsReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

nlohmann::json to_json(const DiagnosticsReport& r) {
    nlohmann::json j;
    j["hard_ok"] = r.hard_ok();
    auto& list = j["entries"] = nlohmann::json::array();
    for (const auto& e : r.entries)
        list.push_back({{"name", e.name}, {"kind", e.kind}, {"measured", e.measured}, {"bound", e.bound},
                        {"pass", e.pass}, {"note", e.note}});
    j["info"] = r.info;
    return j;
}

std::string to_text(const DiagnosticsReport& r) {
    std::ostringstream os;
    char line[512];
    std::snprintf(line, sizeof line, "%-58s %-10s %14s %14s  %s\n", "check", "kind", "measured", "bound",
                  "result");
    os << line;
    for (const auto& e : r.entries) {
        std::snprintf(line, sizeof line, "%-58s %-10s %14.6e %14.6e  %s%s%s\n", e.name.c_str(),
                      e.kind.c_str(), e.measured, e.bound, e.pass ? "pass" : "FAIL",
                      e.note.empty() ? "" : "  ", e.note.c_str());
        os << line;
    }
    os << "hard checks: " << (r.hard_ok() ? "pass" : "FAIL") << '\n';
    return os.str();
}

std::string trace_csv(const DiagnosticsReport& r) {
    std::ostringstream os;
    os << "i,t,eta,eta_tilde,e,kinetic_q,kinetic_q1,rho_bar,w_l2,R_next_l1,residual\n";
    char line[512];
    for (const auto& t : r.trace) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      t.i, t.t, t.eta, t.eta_tilde, t.e, t.kinetic_q, t.kinetic_q1, t.rho_bar, t.w_l2,
                      t.R_next_l1, t.residual);
        os << line;
    }
    return os.str();
}

namespace {

struct Reporter {
    DiagnosticsReport& r;
    void le(const std::string& name, const std::string& kind, double measured, double bound,
            const std::string& note = "") {
        r.entries.push_back({name, kind, measured, bound, measured <= bound, note});
    }
    void ge(const std::string& name, const std::string& kind, double measured, double bound,
            const std::string& note = "") {
        r.entries.push_back({name, kind, measured, bound, measured >= bound, note});
    }
    void flag(const std::string& name, const std::string& kind, bool ok, const std::string& note = "") {
        r.entries.push_back({name, kind, ok ? 1.0 : 0.0, 1.0, ok, note});
    }
};

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        std::string msg = e.what();
        msg = msg.substr(std::min(msg.size(), e.kind().size() + 2));
        throw Error(e.kind(), std::string(stage) + ": " + msg);
    }
}

// C^1 in (x, t) from grid samples of the exact derivatives.
double c1_xt(const VectorField& v, const VectorField& dv) {
    double grad_max = 0;
    for (int a = 0; a < 3; ++a) grad_max = std::max(grad_max, grid_max_abs(grad(component(v, a))));
    const double v0 = grid_max_abs(v);
    return std::max(v0 + grad_max, v0 + grid_max_abs(dv));
}

std::string index_list(const std::vector<int>& v) {
    std::string s;
    for (int i : v) s += (s.empty() ? "" : " ") + std::to_string(i);
    return s.empty() ? "none" : s;
}

}  // namespace

StepResult step(const NSRState& st, const EnergyProfile& e, const DirectionSet& set, const ProfileSet& profiles,
                const StepOptions& opt) {
    const int nt = st.size();
    const Grid& g = st.grid;
    const LevelSchedule& sc = st.schedule;
    const ParameterConfig& cfg = st.config;
    if (static_cast<int>(e.t.size()) != nt) throw Error(err::precondition, "energy profile has the wrong length");

    StepResult result;
    DiagnosticsReport& rep = result.report;
    Reporter R{rep};

    staged("glue", [&] { check_support_hypothesis(st); });
    double div_in = 0;
    for (int i = 0; i < nt; ++i) {
        Snapshot s = st.at(i);
        div_in = std::max(div_in, ratio(grid_max_abs(div(s.v)), grid_max_abs(s.v)));
    }
    if (div_in > 1e-10) throw Error(err::precondition, "input velocity divergence " + fmt(div_in));
    ResidualResult res_in = staged("input", [&] { return residual_check(st); });
    if (res_in.residual_linf > opt.residual_tol)
        throw Error(err::precondition, "input: NSR residual " + fmt(res_in.residual_linf) + " exceeds " +
                                           fmt(opt.residual_tol));

    const CutoffPair cut = make_cutoffs(sc, cfg);
    const ChiCheck chk = check_chi();
    if (!chk.ok) throw Error(err::construction, "chi violates z <= 2 chi <= 4 z or chi >= 1");
    const double ell_s = opt.ell > 0 ? opt.ell : std::max(sc.ell, 2.0 * g.h());
    const double ell_t = opt.ell > 0 ? opt.ell : std::max(sc.ell, 2.0 * st.times.dt());
    const Mollifier moll = staged("mollify", [&] { return make_mollifier(g, st.times, ell_s, ell_t); });
    const JetFamily fam = staged("perturbation", [&] {
        return build_family(jet_params(sc.lambda_q1, set.n_star), set, profiles);
    });

    // rho_bar on the closed I_0, constant extension outside.
    const double tol_t = 1e-9 * st.times.dt();
    auto in_I0 = [&](double t) { return std::abs(t - cfg.t0) <= sc.I_0.half + tol_t; };
    auto glued_at = [&](int i, const Snapshot& s, std::optional<Mollified>* keep = nullptr) {
        auto d = cut.eta.derivs(s.t);
        if (d[0] == 0.0 && d[1] == 0.0) {
            Mollified none;
            return glue(s, none, cut.eta);
        }
        Mollified m = staged("mollify", [&] { return mollify(st, i, moll); });
        Glued gl = staged("glue", [&] { return glue(s, m, cut.eta); });
        if (keep) *keep = std::move(m);
        return gl;
    };
    auto checked_rho_bar = [&](int i, const Glued& gl) {
        RhoBar r = rho_bar_at(e, i, gl, st);
        if (!(r.numerator > 0))
            throw Error(err::precondition, "amplitudes: e - int |v_tilde|^2 - delta_{q+2}/2 = " +
                                               fmt(r.numerator) + " <= 0 at t = " + fmt(st.times.at(i)));
        return r;
    };
    // The end samples of I_0 fix the extension; interior ones are computed in the main pass.
    int first_I0 = -1, last_I0 = -1;
    for (int i = 0; i < nt; ++i)
        if (in_I0(st.times.at(i))) {
            if (first_I0 < 0) first_I0 = i;
            last_I0 = i;
        }
    if (first_I0 < 0) throw Error(err::precondition, "amplitudes: no time sample lies in I_0");
    std::map<int, RhoBar> rb;
    for (int i : {first_I0, last_I0}) rb[i] = checked_rho_bar(i, glued_at(i, st.at(i)));

    const double two_pi3 = std::pow(2.0 * kPi, 3);
    std::map<int, Snapshot> changed;
    std::vector<int> supp_vt, supp_w, supp_R, supp_dv;
    double div_vt = 0, ident = 0, quot = 0, cc = 0, dpc = 0, dt_ = 0, osc = 0, trace_r = 0, div_next = 0;
    double energy_bal = 0, chi_min = std::numeric_limits<double>::infinity(), chi_max = 0;
    double rho_l1 = 0, a_l2 = 0, moll_K = 0, rint = 0, p_mean = 0;
    double dir_measured = 0, dir_bound = 0;
    double g1_min = std::numeric_limits<double>::infinity(), g1_max = -std::numeric_limits<double>::infinity();
    double g2_max = 0, g3_max = 0;
    bool any_active = false, constant_amp = true;
    double rb_min = std::numeric_limits<double>::infinity(), rb_max = 0;

    double vq_l2 = 0, vq1_l2 = 0, Rq_l1 = 0, Rq1_l1 = 0, vq_c1 = 0, vq1_c1 = 0, diff_l2 = 0;
    double win_q_min = std::numeric_limits<double>::infinity(), win_q_max = -win_q_min;
    double win_q1_min = win_q_min, win_q1_max = win_q_max;

    for (int i = 0; i < nt; ++i) {
        Snapshot s = st.at(i);
        const double t = s.t;
        auto et = cut.eta_tilde.derivs(t);
        const double eta = cut.eta.value(t);
        TraceRow row;
        row.i = i;
        row.t = t;
        row.eta = eta;
        row.eta_tilde = et[0];
        row.e = e.e[std::size_t(i)];
        row.kinetic_q = inner(s.v, s.v);
        const double l2q = l2_parseval(s.v), l1R = lp_norm(s.R, 1.0), c1q = c1_xt(s.v, *s.dv);
        vq_l2 = std::max(vq_l2, l2q);
        Rq_l1 = std::max(Rq_l1, l1R);
        vq_c1 = std::max(vq_c1, c1q);
        if (in_I0(t)) {
            win_q_min = std::min(win_q_min, row.e - row.kinetic_q);
            win_q_max = std::max(win_q_max, row.e - row.kinetic_q);
        }

        const bool active = et[0] > 0 || et[1] != 0 || eta > 0;
        if (!active) {
            row.kinetic_q1 = row.kinetic_q;
            row.R_next_l1 = l1R;
            vq1_l2 = std::max(vq1_l2, l2q);
            Rq1_l1 = std::max(Rq1_l1, l1R);
            vq1_c1 = std::max(vq1_c1, c1q);
            if (in_I0(t)) {
                win_q1_min = std::min(win_q1_min, row.e - row.kinetic_q);
                win_q1_max = std::max(win_q1_max, row.e - row.kinetic_q);
            }
            rep.trace.push_back(row);
            continue;
        }
        any_active = true;

        std::optional<Mollified> mo;
        Glued gl = glued_at(i, s, &mo);
        if (mo && c1q > 0) moll_K = std::max(moll_K, l2_parseval(mo->v_bar - s.v) / (moll.ell_space * c1q));
        mo.reset();
        div_vt = std::max(div_vt, ratio(grid_max_abs(div(gl.v_tilde)), grid_max_abs(gl.v_tilde)));
        if (!is_zero(gl.v_tilde - s.v)) supp_vt.push_back(i);

        RhoBar r;
        if (in_I0(t)) {
            r = rb.count(i) ? rb.at(i) : checked_rho_bar(i, gl);
            rb_min = std::min(rb_min, r.value);
            rb_max = std::max(rb_max, r.value);
        } else {
            r = t < cfg.t0 ? rb.begin()->second : rb.rbegin()->second;
            r.derivative = 0.0;
        }
        row.rho_bar = r.value;
        AmplitudeField A = staged("amplitudes", [&] { return amplitudes(gl, r, et[0], et[1], set, st, t); });
        constant_amp = constant_amp && A.constant;
        ident = std::max(ident, A.identity_error);
        quot = std::max(quot, A.quotient_max);
        chi_min = std::min(chi_min, A.chi_integral);
        chi_max = std::max(chi_max, A.chi_integral);
        rho_l1 = std::max(rho_l1, lp_norm(A.rho, 1.0));
        for (const auto& a : A.a) a_l2 = std::max(a_l2, l2_parseval(a));

        JetSample J = staged("perturbation", [&] { return jet_sample(fam, g, t); });
        Perturbation W = staged("perturbation", [&] { return perturbation(A, fam, J); });
        cc = std::max(cc, W.curlcurl_error);
        dpc = std::max(dpc, W.div_pc);
        dt_ = std::max(dt_, W.div_t);
        if (!is_zero(W.w)) supp_w.push_back(i);

        NewStress N = staged("new_stress", [&] { return new_stress(gl, A, W, fam, J); });
        osc = std::max(osc, N.oscillation_error);
        trace_r = std::max(trace_r, N.trace_ratio);
        div_next = std::max(div_next, ratio(grid_max_abs(div(N.v_next)), grid_max_abs(N.v_next)));
        p_mean = std::max(p_mean, ratio(std::abs(N.p_next.c[0](0)), grid_max_abs(N.p_next)));
        rint = std::max(rint, grid_max_abs(N.parts.R_int));
        if (!is_zero(N.R_next)) supp_R.push_back(i);
        if (!is_zero(N.v_next - s.v)) supp_dv.push_back(i);

        // Energy bookkeeping with exact inner products.
        const double Kt = inner(gl.v_tilde, gl.v_tilde);
        const double Kp = inner(W.w_p, W.w_p);
        const VectorField ct = W.w_c + W.w_t;
        const double K1 = inner(N.v_next, N.v_next);
        const double G1 = row.e - (Kt + Kp);
        const double G2 = inner(ct, ct) + 2.0 * inner(gl.v_tilde, W.w);
        const double G3 = 2.0 * inner(W.w_p, ct);
        const double lhs = row.e - K1;
        energy_bal = std::max(energy_bal, std::abs(lhs - (G1 - G2 - G3)) /
                                              std::max({std::abs(row.e), Kt, Kp, std::abs(K1)}));
        const double rho_int = integral(A.rho);
        dir_measured = std::max(dir_measured, std::abs(K1 - row.kinetic_q - 3.0 * rho_int));
        dir_bound = std::max(dir_bound, std::abs(Kt - row.kinetic_q) + std::abs(Kp - 3.0 * rho_int) +
                                            std::abs(G2) + std::abs(G3));
        if (in_I0(t)) {
            g1_min = std::min(g1_min, G1);
            g1_max = std::max(g1_max, G1);
            g2_max = std::max(g2_max, std::abs(G2));
            g3_max = std::max(g3_max, std::abs(G3));
            win_q1_min = std::min(win_q1_min, lhs);
            win_q1_max = std::max(win_q1_max, lhs);
        }

        row.kinetic_q1 = K1;
        row.w_l2 = l2_parseval(W.w);
        row.R_next_l1 = lp_norm(N.R_next, 1.0);
        vq1_l2 = std::max(vq1_l2, l2_parseval(N.v_next));
        Rq1_l1 = std::max(Rq1_l1, row.R_next_l1);
        vq1_c1 = std::max(vq1_c1, c1_xt(N.v_next, N.dv_next));
        diff_l2 = std::max(diff_l2, l2_parseval(N.v_next - s.v));
        rep.trace.push_back(row);

        Snapshot out;
        out.t = t;
        out.v = std::move(N.v_next);
        out.dv = std::move(N.dv_next);
        out.p = std::move(N.p_next);
        out.R = std::move(N.R_next);
        changed.emplace(i, std::move(out));
    }

    NSRState next = st;
    next.q = st.q + 1;
    next.schedule = level_schedule(cfg, st.q + 1, set, opt.C0);
    next.source = std::make_shared<StepSource>(st.source, std::move(changed));
    ResidualResult res_out = residual_check(next);
    for (auto& row : rep.trace) row.residual = res_out.per_sample[std::size_t(row.i)];

    // Exact identities.
    R.le("input NSR residual (relative)", "identity", res_in.residual_linf, opt.residual_tol);
    R.le("output NSR residual (relative)", "identity", res_out.residual_linf, opt.residual_tol,
         "L2 mean " + fmt(res_out.residual_l2));
    R.le("div v_tilde / |v_tilde|", "identity", div_vt, 1e-10);
    R.le("rho Id - R_ell - sum a^2 xi(x)xi (relative)", "identity", ident, 1e-9);
    R.le("w_p + w_c - sum curl curl(a V) (relative)", "identity", cc, 1e-8);
    R.le("div(w_p + w_c) / |w_p|", "identity", dpc, 1e-9);
    R.le("div w_t / |w_t|", "identity", dt_, 1e-9);
    R.le("oscillation identity (relative)", "identity", osc, 1e-7,
         "interaction stress sup " + fmt(rint));
    R.le("trace R_next / |R_next|", "identity", trace_r, 1e-9);
    R.flag("R_next symmetric", "structure", true, "stored as six independent components");
    R.le("div v_next / |v_next|", "identity", div_next, 1e-9);
    R.le("mean p_next / |p_next|", "identity", p_mean, 1e-12);
    R.le("energy decomposition balance (relative)", "identity", energy_bal, 1e-8);
    R.flag("chi: z <= 2 chi(z) <= 4z on (1,2), chi >= 1", "structure", chk.ok);
    R.flag("step ran at least one active sample", "structure", any_active);

    // Supports on the time grid.
    auto inside = [&](const std::vector<int>& idx, const Interval& I) {
        for (int i : idx)
            if (!I.contains(st.times.at(i))) return false;
        return true;
    };
    R.flag("Supp_T(v_tilde - v_q) in Itilde_q", "support", inside(supp_vt, sc.Itilde_q),
           "samples " + index_list(supp_vt));
    R.flag("Supp_T(w_q+1) in I_q+1", "support", inside(supp_w, sc.I_q1), "samples " + index_list(supp_w));
    R.flag("Supp_T(R_q+1) in I_q+1", "support", inside(supp_R, sc.I_q1), "samples " + index_list(supp_R));
    R.flag("Supp_T(v_q+1 - v_q) in I_q+1", "support", inside(supp_dv, sc.I_q1),
           "samples " + index_list(supp_dv));
    R.flag("Supp_T(R_q) in I_q", "support", true, "checked before the step");

    // Inductive estimates at q and q+1.
    const LevelSchedule& sn = next.schedule;
    const double pi4 = 4.0 * kPi;
    R.le("|v_q|_L2 <= 2|v_0|_L2 - eps/(4pi) delta_q^1/2", "inductive", vq_l2,
         2.0 * st.v0_l2 - cfg.eps / pi4 * std::sqrt(sc.delta_q));
    R.le("|R_q|_L1 <= lambda_q^-3zeta delta_q+1", "inductive", Rq_l1,
         std::pow(sc.lambda_q, -3.0 * cfg.zeta) * sc.delta_q1);
    R.le("|v_q|_C1 <= lambda_q^4", "inductive", vq_c1, std::pow(sc.lambda_q, 4));
    R.ge("e - int|v_q|^2 >= delta_q+1/(delta_1 lambda_q^zeta/2) on I_0", "inductive", win_q_min,
         sc.delta_q1 / (sc.delta_1 * std::pow(sc.lambda_q, cfg.zeta / 2.0)));
    R.le("e - int|v_q|^2 <= delta_q+1 eps_1/delta_1 on I_0", "inductive", win_q_max,
         sc.delta_q1 * sc.eps1 / sc.delta_1);
    R.le("|v_q+1|_L2 <= 2|v_0|_L2 - eps/(4pi) delta_q+1^1/2", "inductive", vq1_l2,
         2.0 * st.v0_l2 - cfg.eps / pi4 * std::sqrt(sn.delta_q));
    R.le("|R_q+1|_L1 <= lambda_q+1^-3zeta delta_q+2", "inductive", Rq1_l1,
         std::pow(sn.lambda_q, -3.0 * cfg.zeta) * sn.delta_q1);
    R.le("|v_q+1|_C1 <= lambda_q+1^4", "inductive", vq1_c1, std::pow(sn.lambda_q, 4));
    R.le("|v_q+1 - v_q|_L2 <= eps/(delta_1^1/2 4pi) delta_q+1^1/2", "inductive", diff_l2,
         cfg.eps / (std::sqrt(sc.delta_1) * pi4) * std::sqrt(sc.delta_q1));
    R.ge("e - int|v_q+1|^2 >= delta_q+2/lambda_q+1^zeta/2 on I_0", "inductive", win_q1_min,
         sc.delta_q2 / std::pow(sc.lambda_q1, cfg.zeta / 2.0));
    R.ge("e - int|v_q+1|^2 >= delta_q+2/lambda_q+1^zeta/4 on I_0", "inductive", win_q1_min,
         sc.delta_q2 / std::pow(sc.lambda_q1, cfg.zeta / 4.0));
    R.le("e - int|v_q+1|^2 <= delta_q+2 eps_1/delta_1 on I_0", "inductive", win_q1_max,
         sc.delta_q2 * sc.eps1 / sc.delta_1);

    // Estimates inside the step.
    R.ge("rho_bar >= delta_q+1/(delta_1 lambda_q^zeta) on I_0", "lemma", rb_min,
         sc.delta_q1 / (sc.delta_1 * std::pow(sc.lambda_q, cfg.zeta)));
    R.le("rho_bar <= eps_1 delta_q+1/delta_1 on I_0", "lemma", rb_max, sc.eps1 * sc.delta_q1 / sc.delta_1);
    R.le("|R_ell/rho| <= 1/2", "lemma", quot, 0.5);
    R.ge("int chi >= (2pi)^3", "lemma", any_active ? chi_min : two_pi3, two_pi3);
    R.le("int chi <= 2 (2pi)^3", "lemma", chi_max, 2.0 * two_pi3);
    R.le("|rho|_L1 <= 16 pi^3 eps_1 delta_q+1/delta_1", "lemma", rho_l1,
         16.0 * std::pow(kPi, 3) * sc.eps1 * sc.delta_q1 / sc.delta_1);
    R.le("|a_xi|_L2 <= delta_q+1^1/2 eps/(2 C0 |Lambda| 4pi delta_1^1/2)", "lemma", a_l2,
         std::sqrt(sc.delta_q1) * cfg.eps / (2.0 * opt.C0 * double(set.size()) * pi4 * std::sqrt(sc.delta_1)));
    R.ge("e - (int|v_tilde|^2 + int|w_p|^2) >= delta_q+2/lambda_q+1^zeta/4 on I_0", "lemma", g1_min,
         sc.delta_q2 / std::pow(sc.lambda_q1, cfg.zeta / 4.0));
    R.le("e - (int|v_tilde|^2 + int|w_p|^2) <= 2 delta_q+2/3 on I_0", "lemma", g1_max, 2.0 * sc.delta_q2 / 3.0);
    R.le("|int|w_c+w_t|^2 + 2 int v_tilde.w| <= delta_q+2/lambda_q+1^zeta/3", "lemma", g2_max,
         sc.delta_q2 / std::pow(sc.lambda_q1, cfg.zeta / 3.0));
    R.le("|2 int w_p.(w_c+w_t)| <= delta_q+2/lambda_q+1^zeta/3", "lemma", g3_max,
         sc.delta_q2 / std::pow(sc.lambda_q1, cfg.zeta / 3.0));
    R.le("|int|v_q+1|^2 - int|v_q|^2 - 3 int rho| <= sum of cross terms", "lemma", dir_measured, dir_bound);
    R.le("g'(t0) > sup |d/dt int|v|^2|", "lemma", e.slope_bound, e.g_slope_t0);

    nlohmann::json info;
    info["schedule"] = to_json(sc);
    info["next_schedule"] = to_json(sn);
    info["family"] = to_json(fam);
    info["ell_space"] = ell_s;
    info["ell_time"] = ell_t;
    info["ell_schedule"] = sc.ell;
    info["mollification_K"] = moll_K;
    info["amplitudes_constant"] = constant_amp;
    info["grid_n"] = g.n;
    info["nt"] = nt;
    info["energy"] = {{"eps1", e.eps1}, {"slope_bound", e.slope_bound}, {"steepness", e.steepness},
                      {"g_slope_t0", e.g_slope_t0}};
    auto& cb = info["cutoff_bounds"] = nlohmann::json::array();
    for (const auto& b : cut.bounds)
        cb.push_back({{"name", b.name}, {"order", b.order}, {"measured", b.measured}, {"scale", b.scale},
                      {"implied_C", b.implied_C}});
    rep.info = std::move(info);

    result.next = std::move(next);
    return result;
}

}  // namespace nsci
