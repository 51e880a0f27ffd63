#include "nsci/params.hpp"

#include "nsci/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cfloat>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace nsci {

namespace {

using boost::multiprecision::cpp_rational;

constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;
const long double kLogMax = std::log(static_cast<long double>(DBL_MAX));

long double log_lambda(const ParameterConfig& c, int q) {
    long double bq = std::pow(static_cast<long double>(c.b), q);
    return std::log(kTwoPi) + bq * std::log(static_cast<long double>(c.a));
}

bool is_multiple(double a, int n) {
    if (a < 1 || a != std::floor(a) || a > 9.0e15) return false;
    return std::fmod(a, static_cast<double>(n)) == 0.0;
}

ConstraintRecord less(std::string name, double lhs, double rhs, bool structural = false) {
    return {std::move(name), lhs, rhs, lhs < rhs, rhs - lhs, structural};
}

ConstraintRecord less_eq(std::string name, double lhs, double rhs, bool structural = false) {
    return {std::move(name), lhs, rhs, lhs <= rhs, rhs - lhs, structural};
}

ConstraintRecord flag(std::string name, bool ok) {
    return {std::move(name), ok ? 1.0 : 0.0, 1.0, ok, ok ? 0.0 : -1.0, true};
}

// Exact endpoint arithmetic: doubles are rationals, so the nesting of the
// intervals can be decided without rounding.
bool nesting_exact(double s_in, double t0_in, double T_in, int q) {
    cpp_rational s(s_in), t0(t0_in), T(T_in), half(1, 2);
    cpp_rational Sq = 0, term = s * half;
    for (int i = 0; i <= q; ++i) {
        Sq += term;
        term *= s * half;
    }
    cpp_rational sq1 = term;  // s_{q+1}
    cpp_rational St = Sq + sq1 * half;
    cpp_rational Sq1 = Sq + sq1;
    bool ok = Sq < St && St < Sq1 && Sq1 <= 2 * s;
    ok = ok && (t0 - 2 * s) > 0 && (t0 + 2 * s) < T;
    return ok;
}

}  // namespace

void validate(const ParameterConfig& c, bool require_multiple) {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw Error(err::config, what);
    };
    need(c.n_star > 0, "n_star must be positive");
    need(c.a > 1, "a must exceed 1");
    if (require_multiple)
        need(is_multiple(c.a, c.n_star), "a must be an integer multiple of n_star");
    need(c.b > 1, "b must exceed 1");
    need(c.beta > 0 && c.alpha > 0 && c.zeta > 0, "exponents must be positive");
    need(c.s > 0 && c.T > 0, "s and T must be positive");
    need(c.eps > 0, "eps must be positive");
    need(c.t0 - 2 * c.s > 0 && c.t0 + 2 * c.s < c.T, "B_2s(t0) must lie inside (0, T)");
    need(c.ll_ratio >= 1, "ll_ratio must be at least 1");
}

double epsilon_one(double eps, const GeometryConstants& k) {
    if (!(k.sup_gamma > 0) || k.cardinality <= 0 || !(k.C0 > 0))
        throw Error(err::invalid_constant, "geometry constants must be positive");
    if (eps < 0) throw Error(err::invalid_constant, "eps must be nonnegative");
    double two_pi = 2.0 * std::numbers::pi;
    double d = k.sup_gamma * k.cardinality * k.C0 * 4.0 * two_pi * two_pi * two_pi;
    double r = eps / d;
    return r * r;
}

LevelSchedule schedule(const ParameterConfig& c, int q, const GeometryConstants* k) {
    validate(c, false);
    if (q < 0) throw Error(err::config, "level must be nonnegative");
    LevelSchedule s;
    s.q = q;
    s.log_lambda_q = log_lambda(c, q);
    s.log_lambda_q1 = log_lambda(c, q + 1);
    s.log_lambda_q2 = log_lambda(c, q + 2);
    if (!std::isfinite(static_cast<double>(s.log_lambda_q1)) || s.log_lambda_q1 >= kLogMax) {
        int last = -1;
        while (last + 2 < 64 && log_lambda(c, last + 2) < kLogMax) ++last;
        std::ostringstream os;
        os << "lambda_" << q + 1 << " exceeds double range; largest representable level is " << last;
        throw Error(err::schedule_overflow, os.str());
    }
    s.lambda_q = static_cast<double>(std::exp(s.log_lambda_q));
    s.lambda_q1 = static_cast<double>(std::exp(s.log_lambda_q1));
    auto delta = [&](long double loglam) {
        return static_cast<double>(std::exp(-2.0L * c.beta * loglam));
    };
    s.delta_1 = delta(log_lambda(c, 1));
    s.delta_q = delta(s.log_lambda_q);
    s.delta_q1 = delta(s.log_lambda_q1);
    s.delta_q2 = delta(s.log_lambda_q2);

    const long double l1 = s.log_lambda_q1;
    const long double log2pi = std::log(kTwoPi);
    s.r_perp = static_cast<double>(std::exp(-6.0L / 7.0L * l1 - log2pi / 7.0L));
    s.r_par = static_cast<double>(std::exp(-4.0L / 7.0L * l1));
    s.mu = static_cast<double>(std::exp(9.0L / 7.0L * l1 + log2pi / 7.0L));
    s.ell = static_cast<double>(std::exp(-1.5L * c.alpha * l1 - 2.0L * s.log_lambda_q));

    double h = c.s / 2.0;
    s.s_q = std::pow(h, q + 1);
    s.s_q1 = std::pow(h, q + 2);
    double Sq = 0, term = h;
    for (int i = 0; i <= q; ++i) {
        Sq += term;
        term *= h;
    }
    s.S_q = Sq;
    s.I_q = {c.t0, Sq};
    s.Itilde_q = {c.t0, Sq + s.s_q1 / 2.0};
    s.I_q1 = {c.t0, Sq + s.s_q1};
    s.I_0 = {c.t0, h};
    s.window = {c.t0, 2.0 * c.s};
    if (k) s.eps1 = epsilon_one(c.eps, *k);
    s.p_int = 32.0 / (32.0 - 7.0 * c.alpha);
    return s;
}

const ConstraintRecord* ConstraintReport::find(const std::string& name) const {
    for (const auto& r : records)
        if (r.name == name) return &r;
    return nullptr;
}

bool ConstraintReport::structural_ok() const {
    for (const auto& r : records)
        if (r.structural && !r.satisfied) return false;
    return true;
}

bool ConstraintReport::all_ok() const {
    for (const auto& r : records)
        if (!r.satisfied) return false;
    return true;
}

ConstraintReport check_constraints(const ParameterConfig& c, int q_max) {
    ConstraintReport rep;
    auto& R = rep.records;
    R.push_back(less("1 < a", 1.0, c.a, true));
    R.push_back(flag("a multiple of n_star", is_multiple(c.a, c.n_star)));
    R.push_back(less("1 < b", 1.0, c.b, true));
    R.push_back(less("0 < beta", 0.0, c.beta, true));
    R.push_back(less("0 < alpha", 0.0, c.alpha, true));
    R.push_back(less("0 < zeta", 0.0, c.zeta, true));
    R.push_back(less("0 < s", 0.0, c.s, true));
    R.push_back(less("0 < eps", 0.0, c.eps, true));
    R.push_back(less("0 < t0 - 2s", 0.0, c.t0 - 2 * c.s, true));
    R.push_back(less("t0 + 2s < T", c.t0 + 2 * c.s, c.T, true));

    R.push_back(less("alpha < 1/(7*74)", c.alpha, 1.0 / (7.0 * 74.0)));
    R.push_back(less("alpha < 1/40", c.alpha, 1.0 / 40.0));
    R.push_back(less("4 < alpha*b", 4.0, c.alpha * c.b));
    R.push_back(less("2*beta*b + 3*zeta < 1/14", 2 * c.beta * c.b + 3 * c.zeta, 1.0 / 14.0));
    R.push_back(less("2*beta*b < 1/14", 2 * c.beta * c.b, 1.0 / 14.0));
    R.push_back(less("2*beta + zeta/b < alpha", 2 * c.beta + c.zeta / c.b, c.alpha));
    R.push_back(less("4*zeta + 2*beta*b < alpha", 4 * c.zeta + 2 * c.beta * c.b, c.alpha));
    R.push_back(less("2*beta*b + 3*zeta < alpha", 2 * c.beta * c.b + 3 * c.zeta, c.alpha));
    if (c.a > 0 && c.beta > 0 && c.b > 0)
        R.push_back(less("a^(-beta*b) < 1/2", std::pow(c.a, -c.beta * c.b), 0.5));

    double p_int = 32.0 / (32.0 - 7.0 * c.alpha);
    R.push_back(flag("1 < p_int <= 2", p_int > 1.0 && p_int <= 2.0));

    bool valid = true;
    try {
        validate(c, false);
    } catch (const Error&) {
        valid = false;
    }
    if (!valid) return rep;

    for (int q = 0; q <= q_max; ++q) {
        std::string tag = "[q=" + std::to_string(q) + "] ";
        R.push_back(flag(tag + "I_q in Itilde_q in I_q+1 in B_2s(t0) (exact)",
                         nesting_exact(c.s, c.t0, c.T, q)));
        long double lq = log_lambda(c, q), lq1 = log_lambda(c, q + 1);
        long double lell = -1.5L * c.alpha * lq1 - 2.0L * lq;
        // Sandwich conditions are compared in natural-log units so that
        // astronomically large lambdas do not overflow.
        R.push_back(less(tag + "log ell < log(1/lambda_q)", static_cast<double>(lell),
                         static_cast<double>(-lq)));
        R.push_back(less(tag + "log(1/lambda_q+1) < log ell", static_cast<double>(-lq1),
                         static_cast<double>(lell)));
        R.push_back(less_eq(tag + "log(ell*lambda_q^4) <= log(lambda_q+1^-alpha)",
                            static_cast<double>(lell + 4 * lq),
                            static_cast<double>(-c.alpha * lq1)));
        R.push_back(less_eq(tag + "log(1/ell) <= log(lambda_q+1^(2 alpha))",
                            static_cast<double>(-lell), static_cast<double>(2 * c.alpha * lq1)));
        double sq1 = std::pow(c.s / 2.0, q + 2);
        R.push_back(less_eq(tag + "log(1/s_q+1) <= log(lambda_q/ll_ratio)",
                            std::log(1.0 / sq1),
                            static_cast<double>(lq) - std::log(c.ll_ratio)));
    }
    auto series = delta_series(c, q_max + 50);
    R.push_back(less_eq("sum delta_q+1^(1/2) <= a^(-beta b)/(1-a^(-beta b))", series.partial_sum,
                        series.bound));
    return rep;
}

SeriesCheck delta_series(const ParameterConfig& c, int q_max) {
    SeriesCheck out;
    long double sum = 0;
    for (int q = 0; q <= q_max; ++q) {
        long double l = log_lambda(c, q + 1);
        if (!std::isfinite(static_cast<double>(l))) break;
        long double term = std::exp(-c.beta * l);
        sum += term;
        if (term < 1e-30L) break;
    }
    double r = std::pow(c.a, -c.beta * c.b);
    out.partial_sum = static_cast<double>(sum);
    out.bound = r < 1 ? r / (1 - r) : INFINITY;
    return out;
}

nlohmann::json to_json(const ConstraintReport& report) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : report.records) {
        arr.push_back({{"name", r.name},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs},
                       {"satisfied", r.satisfied},
                       {"margin", r.margin},
                       {"kind", r.structural ? "structural" : "asymptotic"}});
    }
    return {{"records", arr},
            {"structural_ok", report.structural_ok()},
            {"all_ok", report.all_ok()}};
}

std::string to_text(const ConstraintReport& report) {
    std::size_t w = 10;
    for (const auto& r : report.records) w = std::max(w, r.name.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w)) << "constraint" << "  " << std::setw(14)
       << "lhs" << std::setw(14) << "rhs" << std::setw(14) << "margin" << std::setw(11) << "kind"
       << "status\n";
    os << std::string(w + 2 + 14 * 3 + 11 + 6, '-') << "\n";
    for (const auto& r : report.records) {
        os << std::left << std::setw(static_cast<int>(w)) << r.name << "  " << std::setprecision(6)
           << std::setw(14) << r.lhs << std::setw(14) << r.rhs << std::setw(14) << r.margin
           << std::setw(11) << (r.structural ? "structural" : "asymptotic")
           << (r.satisfied ? "ok" : (r.structural ? "FAIL" : "warn")) << "\n";
    }
    return os.str();
}

nlohmann::json to_json(const LevelSchedule& s) {
    auto iv = [](const Interval& i) { return nlohmann::json::array({i.lo(), i.hi()}); };
    return {{"q", s.q},
            {"lambda_q", s.lambda_q},
            {"lambda_q1", s.lambda_q1},
            {"delta_q", s.delta_q},
            {"delta_q1", s.delta_q1},
            {"delta_q2", s.delta_q2},
            {"r_perp", s.r_perp},
            {"r_par", s.r_par},
            {"mu", s.mu},
            {"ell", s.ell},
            {"s_q", s.s_q},
            {"S_q", s.S_q},
            {"I_q", iv(s.I_q)},
            {"Itilde_q", iv(s.Itilde_q)},
            {"I_q1", iv(s.I_q1)},
            {"eps1", s.eps1},
            {"p_int", s.p_int}};
}

}  // namespace nsci
