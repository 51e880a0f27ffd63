#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace nsci {

// Scalar parameters of the scheme. Defaults are a desk-scale preset (identity
// mode), not values taken from the analysis, which leaves b, beta, zeta free.
struct ParameterConfig {
    double a = 5.0;        // base, positive integer multiple of n_star
    double b = 2.0;        // exponent ratio > 1
    double beta = 0.1;     // amplitude exponent
    double alpha = 1e-3;   // mollification exponent
    double zeta = 1e-3;    // energy-gap exponent
    double s = 0.2;        // half-interval length
    double t0 = 0.5;       // center time
    double eps = 1e4;      // target closeness
    double T = 1.0;        // horizon
    double ll_ratio = 10.0;  // numeric meaning of "much smaller than"
    int n_star = 5;
};

// Throws Error(config) when a structural requirement fails (positivity, the
// time window inside (0, T), and optionally a being a multiple of n_star).
// schedule() only evaluates formulas and skips the multiplicity requirement.
void validate(const ParameterConfig& config, bool require_multiple = true);

struct Interval {
    double center = 0.0;
    double half = 0.0;
    double lo() const { return center - half; }
    double hi() const { return center + half; }
    bool contains(double t) const { return t > lo() && t < hi(); }
    bool contains_closed(double t) const { return t >= lo() && t <= hi(); }
};

struct GeometryConstants {
    double sup_gamma = 1.0;
    int cardinality = 6;
    double C0 = 1.0;
};

struct LevelSchedule {
    int q = 0;
    double lambda_q = 0, lambda_q1 = 0;
    long double log_lambda_q = 0, log_lambda_q1 = 0, log_lambda_q2 = 0;
    double delta_1 = 0, delta_q = 0, delta_q1 = 0, delta_q2 = 0;
    double r_perp = 0, r_par = 0, mu = 0;
    double ell = 0;
    double s_q = 0, s_q1 = 0, S_q = 0;
    Interval I_q, I_q1, Itilde_q, I_0, window;
    double eps1 = 0;  // zero unless geometry constants were supplied
    double p_int = 0;
};

LevelSchedule schedule(const ParameterConfig& config, int q,
                       const GeometryConstants* constants = nullptr);

double epsilon_one(double eps, const GeometryConstants& constants);

struct ConstraintRecord {
    std::string name;
    double lhs = 0, rhs = 0;
    bool satisfied = false;
    double margin = 0;      // rhs - lhs, oriented so that positive means satisfied
    bool structural = false;  // structural records are hard; the rest are asymptotic margins
};

struct ConstraintReport {
    std::vector<ConstraintRecord> records;
    const ConstraintRecord* find(const std::string& name) const;
    bool structural_ok() const;
    bool all_ok() const;
};

ConstraintReport check_constraints(const ParameterConfig& config, int q_max);

nlohmann::json to_json(const ConstraintReport& report);
std::string to_text(const ConstraintReport& report);
nlohmann::json to_json(const LevelSchedule& s);

// Partial sums of delta_{q+1}^{1/2} for q = 0..q_max and the geometric bound
// a^{-beta b}/(1 - a^{-beta b}).
struct SeriesCheck {
    double partial_sum = 0;
    double bound = 0;
};
SeriesCheck delta_series(const ParameterConfig& config, int q_max);

}  // namespace nsci
