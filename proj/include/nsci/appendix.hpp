#pragma once

#include "nsci/field.hpp"

#include <json.hpp>
#include <string>
#include <vector>

namespace nsci {

// Numerical checks of the product and averaging lemmas used by the
// estimates. Norms here are averaged over the torus: ||1||_{L^p} = 1.

// Averaged L^p norm of |grad^j f| (Frobenius over all ordered index tuples).
double grad_power_norm(const ScalarField& f, int j, double p);

struct DecorrelationResult {
    double lhs = 0;       // ||f g||_p
    double g_norm = 0;    // ||g||_p
    double C_f = 0;       // max_{j <= N+4} ||grad^j f||_p / freq_bound^j
    double ratio = 0;     // lhs / (C_f g_norm)
    double C0 = 0;
    bool bound_ok = false;
    // 2 pi sqrt(3) freq_bound / sigma <= 1/3 and freq_bound^4 (2 pi sqrt(3) freq_bound / sigma)^N <= 1
    bool hypothesis_ok = false;
    std::string hypothesis_detail;
};

// g must carry only wavevectors with every component divisible by sigma
// (Error(precondition) otherwise). f may live on a coarser grid.
DecorrelationResult decorrelation_check(const ScalarField& f, const ScalarField& g, int sigma, double p,
                                        double freq_bound, int N = 1, double C0 = 2.0);

struct MeanSmallnessResult {
    double lhs = 0;   // |int g f|
    double rhs = 0;   // ||grad f||_{C^0} ||g||_{L^1} / sigma (unaveraged integrals)
    double ratio = 0;
    bool flagged = false;  // lhs > K rhs
};

// Throws Error(nonzero-mean) when g does not have zero mean.
MeanSmallnessResult mean_smallness_check(const ScalarField& f, const ScalarField& g, int sigma, double K = 1.0);

struct InvGradResult {
    double lhs = 0;      // || |grad|^-1 (a P_{>=kappa} f) ||_p
    double rhs = 0;      // C_a (1 + lambda^L / kappa^(L-2)) ||f||_p / kappa
    double ratio = 0;
    double C_a = 0;
    double lambda = 0;   // frequency of a
    double mean_product = 0;
};

// Throws Error(hypothesis) when int a P_{>=kappa} f is not zero.
InvGradResult inv_grad_product_check(const ScalarField& a, const ScalarField& f, double kappa, double p,
                                     int L = 4);

// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json to_json(const DecorrelationResult& r);
nlohmann::json to_json(const MeanSmallnessResult& r);
nlohmann::json to_json(const InvGradResult& r);

}  // namespace nsci
