// Batch driver: check-params, verify, step, scaling.
#include "nsci/config.hpp"
#include "nsci/errors.hpp"
#include "nsci/geometry.hpp"
#include "nsci/io.hpp"
#include "nsci/iterate.hpp"
#include "nsci/jets.hpp"
#include "nsci/manifest.hpp"
#include "nsci/params.hpp"
#include "nsci/suites.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace nsci;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kHardFailure = 1;
constexpr int kBadInput = 2;
constexpr int kRuntime = 3;

struct Flags {
    std::string config;
    std::string out;
    long long seed = -1;
    std::vector<std::string> suites;
    double tolerance_scale = 0;
    bool verify_manifest = false;
};

struct Output {
    fs::path dir;
    std::vector<fs::path> files;
    std::vector<ManifestCheck> checks;

    void text(const std::string& name, const std::string& body) {
        write_text(dir / name, body);
        files.push_back(dir / name);
    }
    void json(const std::string& name, const nlohmann::json& j) { text(name, j.dump(2) + "\n"); }
};

void add_common(CLI::App* cmd, Flags& f, bool suites) {
    cmd->add_option("--config", f.config, "run configuration (key-value sections or JSON)");
    cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
    cmd->add_option("--seed", f.seed, "seed (overrides run.seed)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tolerance-scale", f.tolerance_scale, "multiplies identity tolerances")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--verify-manifest", f.verify_manifest,
                  "re-run and compare every output checksum with the existing manifest");
    if (suites) cmd->add_option("--suite", f.suites, "field|geometry|jets|appendix (repeatable, comma list)")
                    ->delimiter(',');
}

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (!f.out.empty()) c.out_dir = f.out;
    if (f.seed >= 0) c.seed = static_cast<unsigned long long>(f.seed);
    if (f.tolerance_scale > 0) c.tolerance_scale = f.tolerance_scale;
    return c;
}

int cmd_check_params(const RunConfig& c, Output& out) {
    validate(c.params, true);
    const ConstraintReport rep = check_constraints(c.params, c.q_max);
    out.json("constraints.json", to_json(rep));
    out.text("constraints.txt", to_text(rep));
    const DirectionSet set = build_direction_set();
    nlohmann::json sched = nlohmann::json::array();
    for (int q = 0; q <= c.q_max; ++q) sched.push_back(to_json(level_schedule(c.params, q, set, c.C0)));
    out.json("schedule.json", sched);
    for (const auto& r : rep.records) {
        out.checks.push_back({r.name, r.satisfied});
        if (!r.satisfied && !r.structural) std::cerr << "warning: margin " << r.name << " = " << r.margin << "\n";
    }
    std::cout << to_text(rep);
    return rep.structural_ok() ? kOk : kHardFailure;
}

int cmd_verify(const RunConfig& c, const std::vector<std::string>& suites, Output& out) {
    SuiteOptions o;
    o.seed = c.seed;
    o.tolerance_scale = c.tolerance_scale;
    if (c.n_given) o.n = c.n;
    bool ok = true;
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& name : suites) {
        const SuiteReport r = run_suite(name, o);
        out.json("verify_" + name + ".json", to_json(r));
        out.text("verify_" + name + ".txt", to_text(r));
        std::cout << to_text(r);
        for (const auto& x : r.checks)
            if (x.hard) out.checks.push_back({name + ": " + x.name, x.pass});
        summary[name] = r.pass();
        ok = ok && r.pass();
    }
    out.json("verify.json", {{"suites", summary}, {"pass", ok}});
    return ok ? kOk : kHardFailure;
}

int cmd_step(const RunConfig& c, Output& out) {
    if (!c.slope_factor) throw Error(err::config, "step needs an [energy] block");
    const DirectionSet set = build_direction_set();
    const NSRState state = make_scenario(c, set);
    const EnergyProfile e = make_energy_profile(state, *c.slope_factor);
    StepOptions opt;
    opt.profile = c.profile;
    opt.degree = c.degree;
    opt.C0 = c.C0;
    opt.ell = c.ell;
    opt.residual_tol = c.residual_tol;
    const StepResult res = step(state, e, set, make_profiles(c.profile, c.degree), opt);
    const DiagnosticsReport& rep = res.report;
    out.json("report.json", to_json(rep));
    out.text("report.txt", to_text(rep));
    out.text("trace.csv", trace_csv(rep));

    const NSRState& next = res.next;
    const int center = next.size() / 2;
    auto snapshot = [&](int i) {
        Snapshot s = next.at(i);
        char name[32];
        for (auto [tag, raw] : {std::pair{'v', to_raw(s.v, i, s.t)}, std::pair{'p', to_raw(s.p, i, s.t)},
                                std::pair{'R', to_raw(s.R, i, s.t)}}) {
            std::snprintf(name, sizeof name, "state_next/%c_%04d.nsf", tag, i);
            write_raw(out.dir / name, raw);
            out.files.push_back(out.dir / name);
        }
    };
    if (c.snapshots == "all") {
        for (int i = 0; i < next.size(); ++i) snapshot(i);
    } else if (c.snapshots == "changed") {
        for (const auto& row : rep.trace)
            if (row.eta_tilde > 0 || row.eta > 0) snapshot(row.i);
    } else if (c.snapshots == "center") {
        snapshot(center);
    }
    out.text("v_next_center_slice.csv", slice_csv(next.at(center).v, 0, 0));

    int warnings = 0;
    for (const auto& x : rep.entries) {
        out.checks.push_back({x.name, x.pass});
        const bool hard = x.kind == "identity" || x.kind == "support" || x.kind == "structure";
        if (!x.pass && !hard) {
            ++warnings;
            std::cerr << "warning: " << x.kind << " margin fails: " << x.name << " (" << x.measured << " vs "
                      << x.bound << ")\n";
        }
    }
    std::cout << to_text(rep);
    if (warnings) std::cout << warnings << " asymptotic margins fail at this scale (reported, not fatal)\n";
    return rep.hard_ok() ? kOk : kHardFailure;
}

int cmd_scaling(const RunConfig& c, Output& out) {
    if (c.sweep_lambdas.size() < 3)
        throw Error(err::usage, "scaling needs at least 3 sweep points, got " + std::to_string(c.sweep_lambdas.size()));
    const ExponentFit fit =
        scaling_report(make_profiles(ProfileKind::Compact), build_direction_set(), c.sweep_lambdas, {1.0, 2.0});
    out.text("scaling.csv", scaling_csv(fit));
    out.json("scaling.json", to_json(fit));
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : fit.fits) {
        out.checks.push_back({f.field + " N=" + std::to_string(f.N) + " M=" + std::to_string(f.M) +
                                  " p=" + std::to_string(int(f.p)),
                              f.ok});
        if (!f.ok)
            std::cerr << "warning: exponent of " << f.field << " N=" << f.N << " M=" << f.M << " p=" << f.p
                      << " fitted " << f.fitted << ", predicted " << f.predicted << "\n";
    }
    std::cout << scaling_csv(fit);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical companion for the convex integration step of the Navier-Stokes-Reynolds system"};
    app.require_subcommand(1);
    Flags flags;
    auto* check = app.add_subcommand("check-params", "certify the parameter inequalities");
    auto* verify = app.add_subcommand("verify", "run invariant suites");
    auto* stepc = app.add_subcommand("step", "one convex integration step");
    auto* scaling = app.add_subcommand("scaling", "fit jet norm exponents over a lambda sweep");
    add_common(check, flags, false);
    add_common(verify, flags, true);
    add_common(stepc, flags, false);
    add_common(scaling, flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const RunConfig c = resolve(flags);
        if (command == "verify" && flags.suites.empty()) throw Error(err::usage, "verify needs at least one --suite");

        Output out;
        out.dir = c.out_dir;
        nlohmann::json previous;
        if (flags.verify_manifest) {
            std::ifstream is(out.dir / "manifest.json");
            if (!is) throw Error(err::usage, "no manifest in " + out.dir.string());
            try {
                previous = nlohmann::json::parse(is);
            } catch (const nlohmann::json::exception& e) {
                throw Error(err::config, std::string("unreadable manifest: ") + e.what());
            }
        }
        ManifestDiff on_disk;
        if (flags.verify_manifest) on_disk = verify_manifest(out.dir, previous);
        fs::create_directories(out.dir);
        const std::string started = utc_now();

        int code = kOk;
        if (command == "check-params") code = cmd_check_params(c, out);
        if (command == "verify") code = cmd_verify(c, flags.suites, out);
        if (command == "step") code = cmd_step(c, out);
        if (command == "scaling") code = cmd_scaling(c, out);

        nlohmann::json cfg = to_json(c);
        cfg["command"] = command;
        if (command == "verify") cfg["suites"] = flags.suites;
        const nlohmann::json manifest = make_manifest(out.dir, cfg, command, out.files, out.checks, started);
        write_text(out.dir / "manifest.json", manifest.dump(2) + "\n");

        if (flags.verify_manifest) {
            // Files as found before the re-run, then as regenerated by it.
            for (const auto& m : on_disk.mismatched) std::cerr << "manifest mismatch before re-run: " << m << "\n";
            for (const auto& m : on_disk.missing) std::cerr << "manifest file missing before re-run: " << m << "\n";
            const ManifestDiff d = verify_manifest(out.dir, previous);
            for (const auto& m : d.mismatched) std::cerr << "manifest mismatch after re-run: " << m << "\n";
            for (const auto& m : d.missing) std::cerr << "manifest file not regenerated: " << m << "\n";
            if (!d.ok() || !on_disk.ok()) return kHardFailure;
            std::cout << "manifest verified: " << previous.at("files").size() << " files match\n";
        }
        return code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.kind() == err::config || e.kind() == err::usage) ? kBadInput : kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}
