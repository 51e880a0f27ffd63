#pragma once

#include "nsci/field.hpp"
#include "nsci/geometry.hpp"
#include "nsci/jets.hpp"
#include "nsci/params.hpp"

#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nsci {

// One time sample of a Navier-Stokes-Reynolds triple. dv and dR carry the
// time derivatives when the source knows them analytically.
struct Snapshot {
    double t = 0;
    VectorField v;
    ScalarField p;
    SymTensorField R;
    std::optional<VectorField> dv;
    std::optional<SymTensorField> dR;
};

Snapshot zero_snapshot(const Grid& g, double t);

// Uniform samples t_i = t0 - 2s + i dt, i = 0..nt-1, covering the closed window.
struct TimeGrid {
    double t0 = 0.5;
    double half = 0.4;  // 2s
    int nt = 33;
    double dt() const { return 2.0 * half / (nt - 1); }
    double at(int i) const { return t0 - half + i * dt(); }
};

TimeGrid make_time_grid(const ParameterConfig& config, int nt);

class StateSource {
public:
    virtual ~StateSource() = default;
    virtual Snapshot at(int i) const = 0;
};

struct NSRState {
    int q = 0;
    ParameterConfig config;
    Grid grid;
    TimeGrid times;
    LevelSchedule schedule;
    std::shared_ptr<const StateSource> source;
    double v0_l2 = 0;  // sup over the window of ||v_0||_{L^2}

    int size() const { return times.nt; }
    // Zero snapshot outside [0, nt): the state is extended by zero.
    Snapshot at(int i) const;
};

// Schedule with eps_1 from the measured geometry constants and C0.
LevelSchedule level_schedule(const ParameterConfig& config, int q, const DirectionSet& set, double C0);

// Exact solution v = (sin(x3) e^{-t}, 0, 0), p = 0, R = 0 with analytic d_t.
NSRState shear_flow_state(const ParameterConfig& config, const Grid& g, int nt, const DirectionSet& set,
                          double C0 = 2.0);
NSRState zero_state(const ParameterConfig& config, const Grid& g, int nt, const DirectionSet& set,
                    double C0 = 2.0);
// Samples on the time grid; missing derivatives come from 4th-order
// differences (one-sided at the ends). Throws Error(precondition) on a
// wrong sample count or grid.
NSRState sampled_state(const ParameterConfig& config, const Grid& g, std::vector<Snapshot> samples,
                       const DirectionSet& set, int q = 0, double C0 = 2.0);

// Fourth-order time derivative of sample i from its neighbours.
template <int C>
Field<C> time_derivative(const std::vector<const Field<C>*>& window, int offset, double dt);

struct EnergyProfile {
    std::vector<double> t, e, de, g, dg, kinetic, dkinetic;
    double eps1 = 0;
    double slope_bound = 0;  // sup |d/dt int |v|^2| over the window
    double steepness = 0;    // logistic rate k of g
    double g_slope_t0 = 0;   // g'(t0) = eps1 k / 8
};

// e(t) = int |v|^2 + g(t), g logistic from eps1/2 to eps1 centred at t0 with
// g'(t0) = slope_factor * sup |d/dt int |v|^2| (any positive slope if that is 0).
EnergyProfile make_energy_profile(const NSRState& state, double slope_factor = 2.0);

// C-infinity cutoff: 1 on |t - center| <= plateau, 0 on |t - center| >= support.
struct Cutoff {
    double center = 0, plateau = 0, support = 0;
    // Derivatives of order 0..4 at t.
    std::array<double, 5> derivs(double t) const;
    double value(double t) const { return derivs(t)[0]; }
    double slope(double t) const { return derivs(t)[1]; }
};

struct CutoffBound {
    std::string name;
    int order = 0;
    double measured = 0;     // sup |d^N/dt^N|
    double scale = 0;        // (2/s)^{N q}
    double implied_C = 0;    // measured / scale
};

struct CutoffPair {
    Cutoff eta, eta_tilde;
    std::vector<CutoffBound> bounds;
};

// eta = 1 on closed I_q, supp eta inside open Itilde_q; eta_tilde = 1 on closed
// Itilde_q, supp inside open I_{q+1}. The transitions keep a margin of 1/10 of
// the gap on both sides.
CutoffPair make_cutoffs(const LevelSchedule& s, const ParameterConfig& config);

// chi = 1 on [0, 1], z on [2, inf), quintic smoothstep blend on (1, 2).
double chi(double z);
double chi_prime(double z);
struct ChiCheck {
    bool ok = false;
    double worst_lower = 0;  // min of 2 chi(z) - z on (1, 2)
    double worst_upper = 0;  // min of 4 z - 2 chi(z) on (1, 2)
    double min_chi = 0;
};
ChiCheck check_chi(int samples = 100000);

struct Mollifier {
    double ell_space = 0, ell_time = 0;
    std::vector<double> time_weights;  // offsets -J..J, normalized
    int J = 0;
    ScalarField multiplier;  // real spectral multiplier of theta_ell
};

// Throws Error(under-resolution) when ell_space < 2 h or ell_time < 2 dt.
Mollifier make_mollifier(const Grid& g, const TimeGrid& times, double ell_space, double ell_time);

struct Mollified {
    VectorField v_bar, dv_bar;
    ScalarField p_bar;
    SymTensorField R_bar, dR_bar, R_com_bar;
};

Mollified mollify(const NSRState& state, int i, const Mollifier& m);

struct Glued {
    double eta = 0, deta = 0;
    VectorField v_tilde, dv_tilde;
    ScalarField p_tilde;
    SymTensorField R_ell, dR_ell, R_com, R_loc;
};

Glued glue(const Snapshot& s, const Mollified& m, const Cutoff& eta);

// Indices of samples where R_q is nonzero outside I_q; throws
// Error(support-hypothesis) listing them.
void check_support_hypothesis(const NSRState& state);

struct RhoBar {
    double value = 0, derivative = 0;
    double chi_integral = 0;
    double numerator = 0;  // e - int |v_tilde|^2 - delta_{q+2}/2
};

// rho_bar at one sample from the glued fields; z = |R_ell| 4 lambda_q^zeta delta_1 / delta_{q+1}.
RhoBar rho_bar_at(const EnergyProfile& e, int i, const Glued& g, const NSRState& state);

// Coefficient of |R_ell| in the argument of chi.
double chi_argument_scale(const NSRState& state);

struct AmplitudeField {
    double t = 0;
    double rho_bar = 0, drho_bar = 0, eta_tilde = 0, deta_tilde = 0;
    double chi_integral = 0;
    double quotient_max = 0;    // max |R_ell| / rho where rho > 0
    double identity_error = 0;  // max |rho Id - R_ell - sum a^2 xi(x)xi| / max rho
    bool constant = false;      // amplitudes constant in space
    ScalarField rho, drho;
    std::vector<ScalarField> a, da, a2, da2;
};

// Throws Error(domain) with the location when |R_ell/rho| > 1/2 somewhere.
AmplitudeField amplitudes(const Glued& g, const RhoBar& rb, double eta_tilde, double deta_tilde,
                          const DirectionSet& set, const NSRState& state, double t);

// Jet fields of one sample: V, d_t V, W, W^(c), Y = phi^2 psi^2 xi, d_t Y.
struct JetSample {
    std::vector<VectorField> V, dV, W, Wc, Y, dY;
};
JetSample jet_sample(const JetFamily& f, const Grid& g, double t);

struct Perturbation {
    VectorField w_p, w_c, w_t, w;
    VectorField dw_pc, dw_t;  // d_t (w_p + w_c), d_t w_t
    ScalarField P;            // gradient part split off from w_t
    double curlcurl_error = 0;  // |w_p + w_c - sum curl curl(a V)| / |w_p|
    double div_pc = 0;          // |div(w_p + w_c)| / |w_p|
    double div_t = 0;           // |div w_t| / |w_t|
};

// Throws Error(under-resolution) when a perturbation exceeds the grid modes.
Perturbation perturbation(const AmplitudeField& amp, const JetFamily& f, const JetSample& jets);

struct StressBreakdown {
    SymTensorField R_lin, R_cor, R_osc, R_com, R_loc, R_int;
    ScalarField p_lin, p_cor, p_osc, p_int, P;
};

struct NewStress {
    StressBreakdown parts;
    VectorField v_next, dv_next;
    ScalarField p_next;
    SymTensorField R_next;
    double trace_ratio = 0;        // |tr R_next| / |R_next|
    double oscillation_error = 0;  // relative defect of the oscillation identity
};

// Throws Error(assembly) when the trace of R_next exceeds 1e-9 relative.
NewStress new_stress(const Glued& g, const AmplitudeField& amp, const Perturbation& w, const JetFamily& f,
                     const JetSample& jets);

struct ResidualResult {
    double residual_linf = 0;  // worst relative sup norm over interior samples
    double residual_l2 = 0;    // mean relative L^2 norm
    double scale = 0;          // largest term norm used as reference
    std::vector<double> per_sample;  // relative sup norm, NaN outside the interior
};

// d_t v + div(v(x)v) + grad p - Laplacian v - div R at the samples 2..nt-3,
// relative to the largest of the term norms (|div(v(x)v)| alone vanishes for
// shear flows). Uses dv when present, else 4th-order differences. Throws
// Error(precondition) below 5 samples.
ResidualResult residual_check(const NSRState& state);

struct DiagnosticEntry {
    std::string name;
    std::string kind;  // identity | support | structure | inductive | lemma | info
    double measured = 0;
    double bound = 0;
    bool pass = false;
    std::string note;
};

struct TraceRow {
    int i = 0;
    double t = 0, eta = 0, eta_tilde = 0, e = 0, kinetic_q = 0, kinetic_q1 = 0, rho_bar = 0;
    double w_l2 = 0, R_next_l1 = 0, residual = 0;
};

struct DiagnosticsReport {
    std::vector<DiagnosticEntry> entries;
    std::vector<TraceRow> trace;
    nlohmann::json info;
    // Identity, support and structure entries only; inductive margins never count.
    bool hard_ok() const;
    const DiagnosticEntry* find(const std::string& name) const;
};

nlohmann::json to_json(const DiagnosticsReport& r);
std::string to_text(const DiagnosticsReport& r);
std::string trace_csv(const DiagnosticsReport& r);

struct StepOptions {
    ProfileKind profile = ProfileKind::RaisedCosine;
    int degree = 1;
    double C0 = 2.0;
    double ell = 0;  // 0 selects max(scheduled ell, 2 h) in space and max(scheduled ell, 2 dt) in time
    double residual_tol = 1e-6;
};

struct StepResult {
    NSRState next;
    DiagnosticsReport report;
};

// Chains mollify, glue, amplitudes, perturbation and new_stress over the time
// samples. Precondition failures throw Error naming the stage; failed
// inductive bounds are report entries.
StepResult step(const NSRState& state, const EnergyProfile& e, const DirectionSet& set,
                const ProfileSet& profiles, const StepOptions& options = {});

}  // namespace nsci
