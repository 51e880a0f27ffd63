#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace nsci {

// Verification suites shared by the command-line driver and the acceptance
// runner. Each check is a measured value against a pinned bound; soft checks
// are reported but never decide the suite result.
struct SuiteCheck {
    std::string name;
    double measured = 0;
    double bound = 0;
    bool pass = false;
    bool hard = true;
    std::string note;
};

struct SuiteReport {
    std::string suite;
    std::vector<SuiteCheck> checks;
    nlohmann::json info = nlohmann::json::object();
    bool pass() const;
};

struct SuiteOptions {
    unsigned long long seed = 20240601;
    double tolerance_scale = 1.0;  // multiplies every identity tolerance
    int n = 0;                     // grid override, 0 keeps the suite default
};

// 100 random band-limited vector fields at n = 64: Leray projection,
// div of the inverse divergence, trace of its output.
SuiteReport field_suite(const SuiteOptions& o, int count = 100);
// Reconstruction on random matrices in the ball of the given radius and
// gamma(Id) = 1/sqrt(2).
SuiteReport geometry_suite(const SuiteOptions& o, double radius, int samples = 10000);
// Jet identities at n = 128 for sigma in the list: compact profiles by
// quadrature in the phase variables, raised-cosine profiles on the grid.
SuiteReport jets_suite(const SuiteOptions& o, const std::vector<int>& sigmas = {4, 8});
// Decorrelation on 20 (f, g_sigma) pairs and the sigma^-1 rate of the mean
// smallness bound, plus the inverse-gradient product bound as a soft check.
SuiteReport appendix_suite(const SuiteOptions& o);
// Fitted exponents of the jet norms over lambda = 2 pi sigma^7.
SuiteReport scaling_suite(const SuiteOptions& o, const std::vector<double>& lambdas);

// field | geometry | jets | appendix; throws Error(usage) otherwise. The
// geometry suite runs on the certified default radius.
SuiteReport run_suite(const std::string& name, const SuiteOptions& o);

nlohmann::json to_json(const SuiteReport& r);
std::string to_text(const SuiteReport& r);

}  // namespace nsci
