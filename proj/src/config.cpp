#include "nsci/config.hpp"

#include "nsci/errors.hpp"
#include "nsci/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace nsci {

namespace {

using Section = std::map<std::string, std::string>;
using Sections = std::map<std::string, Section>;

const std::map<std::string, std::set<std::string>> kKeys = {
    {"params", {"a", "b", "beta", "alpha", "zeta", "s", "t0", "eps", "T", "ll_ratio", "n_star"}},
    {"grid", {"n", "nt"}},
    {"scenario", {"name", "path"}},
    {"energy", {"slope_factor"}},
    {"sweep", {"lambda", "sigma"}},
    {"step", {"profile", "degree", "C0", "ell"}},
    {"tolerances", {"residual", "scale"}},
    {"output", {"dir", "snapshots"}},
    {"run", {"seed", "q_max"}},
};

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + scalar_text(x);
        return s;
    }
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    throw Error(err::config, "unsupported value " + v.dump());
}

Sections read_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(err::config, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(err::config, "top level must be an object");
    Sections out;
    for (const auto& [name, sec] : j.items()) {
        if (!sec.is_object()) throw Error(err::config, "section '" + name + "' must be an object");
        for (const auto& [k, v] : sec.items()) out[name][k] = scalar_text(v);
    }
    return out;
}

Sections read_ini(const std::string& text) {
    boost::property_tree::ptree pt;
    std::istringstream is(text);
    try {
        boost::property_tree::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(err::config, "malformed config line " + std::to_string(e.line()) + ": " + e.message());
    }
    Sections out;
    for (const auto& [name, sec] : pt) {
        if (sec.empty() && !sec.data().empty())
            throw Error(err::config, "key '" + name + "' outside a section");
        for (const auto& [k, v] : sec) out[name][k] = v.data();
    }
    return out;
}

double to_double(const std::string& sec, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(err::config, sec + "." + key + ": not a number: '" + v + "'");
    }
}

long long to_int(const std::string& sec, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(err::config, sec + "." + key + ": not an integer: '" + v + "'");
    }
}

std::vector<double> to_list(const std::string& sec, const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(to_double(sec, key, item.substr(b, e - b + 1)));
    }
    return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, bool json, const std::filesystem::path& base) {
    const Sections secs = json ? read_json(text) : read_ini(text);
    for (const auto& [name, sec] : secs) {
        auto it = kKeys.find(name);
        if (it == kKeys.end()) throw Error(err::config, "unknown section [" + name + "]");
        for (const auto& [k, v] : sec)
            if (!it->second.count(k)) throw Error(err::config, "unknown key " + name + "." + k);
    }
    RunConfig c;
    auto get = [&](const std::string& s, const std::string& k) -> const std::string* {
        auto it = secs.find(s);
        if (it == secs.end()) return nullptr;
        auto jt = it->second.find(k);
        return jt == it->second.end() ? nullptr : &jt->second;
    };
    auto num = [&](const std::string& s, const std::string& k, double& dst) {
        if (auto v = get(s, k)) dst = to_double(s, k, *v);
    };
    auto integer = [&](const std::string& s, const std::string& k, auto& dst) {
        if (auto v = get(s, k)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(to_int(s, k, *v));
    };

    ParameterConfig& p = c.params;
    num("params", "a", p.a);
    num("params", "b", p.b);
    num("params", "beta", p.beta);
    num("params", "alpha", p.alpha);
    num("params", "zeta", p.zeta);
    num("params", "s", p.s);
    num("params", "t0", p.t0);
    num("params", "eps", p.eps);
    num("params", "T", p.T);
    num("params", "ll_ratio", p.ll_ratio);
    integer("params", "n_star", p.n_star);
    integer("grid", "n", c.n);
    c.n_given = get("grid", "n") != nullptr;
    integer("grid", "nt", c.nt);
    if (auto v = get("scenario", "name")) c.scenario = *v;
    if (auto v = get("scenario", "path")) c.scenario_path = base / *v;
    if (secs.count("energy")) {
        double f = 2.0;
        num("energy", "slope_factor", f);
        c.slope_factor = f;
    }
    if (auto v = get("sweep", "lambda")) c.sweep_lambdas = to_list("sweep", "lambda", *v);
    if (auto v = get("sweep", "sigma")) {
        if (get("sweep", "lambda")) throw Error(err::config, "sweep: give lambda or sigma, not both");
        for (double s : to_list("sweep", "sigma", *v)) c.sweep_lambdas.push_back(2.0 * std::numbers::pi * std::pow(s, 7));
    }
    if (auto v = get("step", "profile")) {
        if (*v == "raised-cosine")
            c.profile = ProfileKind::RaisedCosine;
        else if (*v == "compact")
            c.profile = ProfileKind::Compact;
        else
            throw Error(err::config, "step.profile must be raised-cosine or compact");
    }
    integer("step", "degree", c.degree);
    num("step", "C0", c.C0);
    num("step", "ell", c.ell);
    num("tolerances", "residual", c.residual_tol);
    num("tolerances", "scale", c.tolerance_scale);
    if (auto v = get("output", "dir")) c.out_dir = *v;
    if (auto v = get("output", "snapshots")) c.snapshots = *v;
    if (auto v = get("run", "seed")) {
        long long s = to_int("run", "seed", *v);
        if (s < 0) throw Error(err::config, "run.seed must be >= 0");
        c.seed = static_cast<unsigned long long>(s);
    }
    integer("run", "q_max", c.q_max);

    validate(p, false);
    make_grid(c.n);
    if (c.nt < 5) throw Error(err::config, "grid.nt must be >= 5");
    if (c.scenario != "shear-flow" && c.scenario != "zero" && c.scenario != "from-file")
        throw Error(err::config, "scenario.name must be shear-flow, zero or from-file");
    if (c.scenario == "from-file") {
        if (c.scenario_path.empty()) throw Error(err::config, "scenario.path is required for from-file");
        if (!std::filesystem::is_directory(c.scenario_path))
            throw Error(err::config, "scenario.path does not exist: " + c.scenario_path.string());
    }
    if (c.slope_factor && !(*c.slope_factor > 1.0)) throw Error(err::config, "energy.slope_factor must exceed 1");
    if (!(c.residual_tol > 0) || !(c.tolerance_scale > 0)) throw Error(err::config, "tolerances must be positive");
    if (c.degree < 1) throw Error(err::config, "step.degree must be >= 1");
    if (!(c.C0 > 0) || c.ell < 0) throw Error(err::config, "step.C0 must be positive and step.ell >= 0");
    if (c.q_max < 0) throw Error(err::config, "run.q_max must be >= 0");
    for (double l : c.sweep_lambdas)
        if (!(l > 0)) throw Error(err::config, "sweep values must be positive");
    if (c.snapshots != "none" && c.snapshots != "center" && c.snapshots != "changed" && c.snapshots != "all")
        throw Error(err::config, "output.snapshots must be none, center, changed or all");
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(err::config, "cannot read config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    const bool json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
    return parse_run_config(text, json, path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
    const ParameterConfig& p = c.params;
    nlohmann::json j;
    j["params"] = {{"a", p.a},         {"b", p.b},   {"beta", p.beta},         {"alpha", p.alpha},
                   {"zeta", p.zeta},   {"s", p.s},   {"t0", p.t0},             {"eps", p.eps},
                   {"T", p.T},         {"ll_ratio", p.ll_ratio}, {"n_star", p.n_star}};
    j["grid"] = {{"n", c.n}, {"nt", c.nt}};
    j["scenario"] = {{"name", c.scenario}, {"path", c.scenario_path.generic_string()}};
    j["energy"] = c.slope_factor ? nlohmann::json{{"slope_factor", *c.slope_factor}} : nlohmann::json(nullptr);
    j["sweep"] = {{"lambda", c.sweep_lambdas}};
    j["step"] = {{"profile", c.profile == ProfileKind::Compact ? "compact" : "raised-cosine"},
                 {"degree", c.degree},
                 {"C0", c.C0},
                 {"ell", c.ell}};
    j["tolerances"] = {{"residual", c.residual_tol}, {"scale", c.tolerance_scale}};
    j["output"] = {{"snapshots", c.snapshots}};
    j["run"] = {{"seed", c.seed}, {"q_max", c.q_max}};
    return j;
}

NSRState make_scenario(const RunConfig& c, const DirectionSet& set) {
    const Grid g = make_grid(c.n);
    if (c.scenario == "shear-flow") return shear_flow_state(c.params, g, c.nt, set, c.C0);
    if (c.scenario == "zero") return zero_state(c.params, g, c.nt, set, c.C0);
    const TimeGrid times = make_time_grid(c.params, c.nt);
    return sampled_state(c.params, g, read_samples(c.scenario_path, g, times), set, 0, c.C0);
}

}  // namespace nsci
