#include "nsci/appendix.hpp"

#include "fft.hpp"
#include "nsci/errors.hpp"

#include <cmath>
#include <numbers>

namespace nsci {

namespace {

using detail::waves;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kVolume = kTwoPi * kTwoPi * kTwoPi;

double factorial(int n) { return std::tgamma(n + 1.0); }

// Samples of d^beta f on the grid of f.
Samples partial_samples(const ScalarField& f, const std::array<int, 3>& beta) {
    const auto& w = waves(f.grid.n);
    Coeffs c = f.c[0];
    for (int ax = 0; ax < 3; ++ax)
        for (int r = 0; r < beta[ax]; ++r) c *= cplx(0.0, 1.0) * w.k[ax];
    return to_real(f.grid, c);
}

double averaged_lp(const Samples& s, double p) { return std::pow(s.abs().pow(p).mean(), 1.0 / p); }

// Smallest grid at least as fine as g whose modes hold bandwidth b.
Grid grid_for(const Grid& g, int b) {
    int n = g.n;
    while (n / 2 - 1 < b) n *= 2;
    return Grid{n};
}

double sup_derivatives(const ScalarField& f, int j) {
    ScalarField r = resample(f, refined_grid(f.grid));
    double m = 0;
    for (int b0 = 0; b0 <= j; ++b0)
        for (int b1 = 0; b1 <= j - b0; ++b1)
            m = std::max(m, partial_samples(r, {b0, b1, j - b0 - b1}).abs().maxCoeff());
    return m;
}

}  // namespace

double grad_power_norm(const ScalarField& f, int j, double p) {
    if (j < 0) throw Error(err::domain, "derivative order must be >= 0");
    ScalarField r = resample(f, refined_grid(f.grid));
    Samples acc = Samples::Zero(static_cast<Eigen::Index>(r.grid.real_size()));
    for (int b0 = 0; b0 <= j; ++b0)
        for (int b1 = 0; b1 <= j - b0; ++b1) {
            int b2 = j - b0 - b1;
            double mult = factorial(j) / (factorial(b0) * factorial(b1) * factorial(b2));
            acc += mult * partial_samples(r, {b0, b1, b2}).square();
        }
    return averaged_lp(acc.sqrt(), p);
}

DecorrelationResult decorrelation_check(const ScalarField& f, const ScalarField& g, int sigma, double p,
                                        double freq_bound, int N, double C0) {
    if (sigma < 1) throw Error(err::domain, "sigma must be >= 1");
    if (p != 1.0 && p != 2.0) throw Error(err::domain, "p must be 1 or 2");
    if (f.grid.n > g.grid.n) throw Error(err::grid_mismatch, "f must not be finer than g");
    const auto& w = waves(g.grid.n);
    const double peak = g.c[0].abs().maxCoeff();
    for (Eigen::Index i = 0; i < g.c[0].size(); ++i) {
        if (std::abs(g.c[0](i)) <= 1e-13 * peak) continue;
        for (int ax = 0; ax < 3; ++ax)
            if (std::lround(w.k[ax](i)) % sigma != 0)
                throw Error(err::precondition, "g is not (T/" + std::to_string(sigma) + ")^3-periodic");
    }

    DecorrelationResult r;
    r.C0 = C0;
    const double q = kTwoPi * std::sqrt(3.0) * freq_bound / sigma;
    const bool h1 = q <= 1.0 / 3.0;
    const bool h2 = std::pow(freq_bound, 4) * std::pow(q, N) <= 1.0;
    r.hypothesis_ok = h1 && h2;
    r.hypothesis_detail = "2 pi sqrt(3) zeta / sigma = " + std::to_string(q) + (h1 ? " <= 1/3" : " > 1/3") +
                          "; zeta^4 (2 pi sqrt(3) zeta / sigma)^N = " +
                          std::to_string(std::pow(freq_bound, 4) * std::pow(q, N)) + (h2 ? " <= 1" : " > 1");
    for (int j = 0; j <= N + 4; ++j)
        r.C_f = std::max(r.C_f, grad_power_norm(f, j, p) / std::pow(freq_bound, j));

    Grid pg = grid_for(g.grid, bandwidth(f) + bandwidth(g));
    Samples fs = to_real(pg, resample(f.grid, f.c[0], pg));
    Samples gs = to_real(pg, resample(g.grid, g.c[0], pg));
    r.lhs = averaged_lp(fs * gs, p);
    r.g_norm = averaged_lp(gs, p);
    r.ratio = r.lhs / (r.C_f * r.g_norm);
    r.bound_ok = r.ratio <= C0;
    return r;
}

MeanSmallnessResult mean_smallness_check(const ScalarField& f, const ScalarField& g, int sigma, double K) {
    if (sigma < 1) throw Error(err::domain, "sigma must be >= 1");
    const double sup = linf_norm(g);
    if (std::abs(g.c[0](0).real()) > 1e-12 * std::max(sup, 1e-300))
        throw Error(err::nonzero_mean, "g must have zero mean");
    MeanSmallnessResult r;
    Grid pg = grid_for(g.grid.n >= f.grid.n ? g.grid : f.grid, bandwidth(f) + bandwidth(g));
    ScalarField fp = resample(f, pg), gp = resample(g, pg);
    r.lhs = std::abs(inner(fp, gp));
    const double grad_sup = pointwise_norm(resample(grad(f), refined_grid(f.grid))).maxCoeff();
    r.rhs = grad_sup * kVolume * to_real(pg, gp.c[0]).abs().mean() / sigma;
    r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
    r.flagged = r.lhs > K * r.rhs;
    return r;
}

InvGradResult inv_grad_product_check(const ScalarField& a, const ScalarField& f, double kappa, double p,
                                     int L) {
    if (!(kappa >= 1)) throw Error(err::domain, "kappa must be >= 1");
    if (!(p > 1.0 && p <= 2.0)) throw Error(err::domain, "p must lie in (1, 2]");
    if (L < 3) throw Error(err::domain, "L must be >= 3");
    InvGradResult r;
    r.lambda = std::max(1, bandwidth(a));
    if (r.lambda > kappa) throw Error(err::hypothesis, "frequency of a exceeds kappa");

    const Grid pg = grid_for(f.grid.n >= a.grid.n ? f.grid : a.grid, bandwidth(a) + bandwidth(f));
    ScalarField fh = resample(f, pg);
    const auto& w = waves(pg.n);
    for (Eigen::Index i = 0; i < fh.c[0].size(); ++i)
        if (std::sqrt(w.k2(i)) < kappa) fh.c[0](i) = 0.0;
    Samples prod = to_real(pg, resample(a, pg).c[0]) * to_real(pg, fh.c[0]);
    Coeffs pc = to_spectral(pg, prod);
    r.mean_product = kVolume * pc(0).real();
    const double scale = std::sqrt(prod.square().mean());
    if (std::abs(pc(0)) > 1e-10 * std::max(scale, 1e-300))
        throw Error(err::hypothesis, "int a P_{>=kappa} f is not zero");
    for (Eigen::Index i = 0; i < pc.size(); ++i) pc(i) *= w.k2(i) > 0 ? 1.0 / std::sqrt(w.k2(i)) : 0.0;
    r.lhs = averaged_lp(to_real(pg, pc), p);

    for (int j = 0; j <= L; ++j) r.C_a = std::max(r.C_a, sup_derivatives(a, j) / std::pow(r.lambda, j));
    const double f_norm = averaged_lp(to_real(f.grid, f.c[0]), p);
    r.rhs = r.C_a * (1.0 + std::pow(r.lambda, L) / std::pow(kappa, L - 2)) * f_norm / kappa;
    r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
    return r;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(err::precondition, "degenerate fit");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

nlohmann::json to_json(const DecorrelationResult& r) {
    return {{"lhs", r.lhs},         {"g_norm", r.g_norm},       {"C_f", r.C_f},
            {"ratio", r.ratio},     {"C0", r.C0},               {"bound_ok", r.bound_ok},
            {"hypothesis_ok", r.hypothesis_ok}, {"hypothesis", r.hypothesis_detail}};
}

nlohmann::json to_json(const MeanSmallnessResult& r) {
    return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}, {"flagged", r.flagged}};
}

nlohmann::json to_json(const InvGradResult& r) {
    return {{"lhs", r.lhs},     {"rhs", r.rhs},       {"ratio", r.ratio},
            {"C_a", r.C_a},     {"lambda", r.lambda}, {"mean_product", r.mean_product}};
}

}  // namespace nsci
