#pragma once

#include "nsci/iterate.hpp"
#include "nsci/params.hpp"

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace nsci {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Everything a driver run needs. Plain-text files use sections:
//
//   [params]     a b beta alpha zeta s t0 eps T ll_ratio n_star
//   [grid]       n nt
//   [scenario]   name = shear-flow | zero | from-file, path = DIR
//   [energy]     slope_factor
//   [sweep]      lambda = 64, 128, 256   or   sigma = 4, 6, 8 (lambda = 2 pi sigma^7)
//   [step]       profile = raised-cosine | compact, degree, C0, ell
//   [tolerances] residual, scale
//   [output]     dir, snapshots = none | center | changed | all
//   [run]        seed, q_max
//
// JSON files carry the same sections as nested objects.
struct RunConfig {
    ParameterConfig params;
    int n = 64;
    bool n_given = false;  // grid.n appeared in the file
    int nt = 33;
    std::string scenario = "shear-flow";
    std::filesystem::path scenario_path;
    std::optional<double> slope_factor;  // set iff the energy block is present
    std::vector<double> sweep_lambdas;
    ProfileKind profile = ProfileKind::RaisedCosine;
    int degree = 1;
    double C0 = 2.0;
    double ell = 0;
    double residual_tol = 1e-6;
    double tolerance_scale = 1.0;
    std::filesystem::path out_dir = "out";
    std::string snapshots = "center";
    unsigned long long seed = 20240601;
    int q_max = 3;
};

// Throws Error(config) on syntax errors, unknown keys, bad values, missing
// referenced files or non-positive tolerances.
RunConfig parse_run_config(const std::string& text, bool json, const std::filesystem::path& base = ".");
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical JSON of the resolved configuration (sorted keys).
nlohmann::json to_json(const RunConfig& c);

// Initial state of the configured scenario.
NSRState make_scenario(const RunConfig& c, const DirectionSet& set);

}  // namespace nsci
