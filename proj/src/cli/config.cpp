#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "solitonlab/cli.hpp"

namespace solitonlab::cli {

using nlohmann::json;

namespace {

// Typed access to one JSON object; rejects keys outside `allowed`.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw validation_error(path_ + " must be an object");
        for (const auto& [k, v] : j_.items())
            if (!allowed.count(k)) throw validation_error("unknown key '" + where(k) + "'");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    double number(const std::string& k, double def) const { return has(k) ? number(k) : def; }
    double number(const std::string& k) const {
        const auto& v = at(k);
        if (!v.is_number()) throw validation_error(where(k) + " must be a number");
        double x = v.get<double>();
        if (!std::isfinite(x)) throw validation_error(where(k) + " must be finite");
        return x;
    }
    std::optional<double> maybe_number(const std::string& k) const {
        return has(k) ? std::optional<double>(number(k)) : std::nullopt;
    }
    int integer(const std::string& k, int def) const {
        if (!has(k)) return def;
        const auto& v = at(k);
        if (!v.is_number_integer()) throw validation_error(where(k) + " must be an integer");
        return v.get<int>();
    }
    bool boolean(const std::string& k, bool def) const {
        if (!has(k)) return def;
        const auto& v = at(k);
        if (!v.is_boolean()) throw validation_error(where(k) + " must be a boolean");
        return v.get<bool>();
    }
    std::string string(const std::string& k, const std::string& def) const {
        if (!has(k)) return def;
        const auto& v = at(k);
        if (!v.is_string()) throw validation_error(where(k) + " must be a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& k) const {
        const auto& v = at(k);
        if (!v.is_array()) throw validation_error(where(k) + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw validation_error(where(k) + " must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    Section sub(const std::string& k, std::set<std::string> allowed) const {
        return Section(at(k), where(k), std::move(allowed));
    }
    const json& at(const std::string& k) const { return j_.at(k); }
    std::string where(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

private:
    const json& j_;
    std::string path_;
};

Point read_point(const std::vector<double>& v, int N, const std::string& what) {
    if (v.empty() || v.size() > 3 || static_cast<int>(v.size()) > N)
        throw validation_error(what + " needs between 1 and N coordinates");
    Point p{0, 0, 0};
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i];
    return p;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw validation_error(msg);
}

}  // namespace

const char* run_kind_name(RunKind k) {
    switch (k) {
        case RunKind::limit_ground: return "limit_ground";
        case RunKind::coupled_ground: return "coupled_ground";
        case RunKind::thresholds: return "thresholds";
        case RunKind::sweep: return "sweep";
        case RunKind::pohozaev: return "pohozaev";
        case RunKind::verify: return "verify";
    }
    return "";
}

std::optional<RunKind> parse_run_kind(const std::string& name) {
    for (auto k : {RunKind::limit_ground, RunKind::coupled_ground, RunKind::thresholds, RunKind::sweep,
                   RunKind::pohozaev, RunKind::verify})
        if (name == run_kind_name(k)) return k;
    return std::nullopt;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_config(const std::string& text, RunKind kind) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("config is not valid JSON: ") + e.what());
    }
    Section top(j, "", {"kind", "params", "potential", "grid", "epsilons", "init", "penalty", "tolerances", "limit",
                        "thresholds", "pohozaev", "output", "seed"});
    ExperimentConfig c;
    c.kind = kind;
    if (top.has("kind")) {
        auto k = parse_run_kind(top.string("kind", ""));
        require(k.has_value(), "unknown run kind '" + top.string("kind", "") + "'");
        require(*k == kind, "config kind '" + top.string("kind", "") + "' does not match subcommand '" +
                                run_kind_name(kind) + "'");
    }

    require(top.has("params"), "missing required section 'params'");
    {
        auto s = top.sub("params", {"N", "p", "beta"});
        c.pp.N = s.integer("N", 1);
        c.pp.p = s.number("p", 2.0);
        c.pp.beta = s.number("beta", 0.0);
        require(c.pp.N >= 1 && c.pp.N <= 3, "params.N must be 1, 2 or 3");
        require(c.pp.p > 1, "params.p must exceed 1");
        require(2 * c.pp.p < c.pp.critical_exponent(), "params.p must be subcritical (2p < 2N/(N-2))");
    }

    if (top.has("potential")) {
        auto s = top.sub("potential", {"preset", "params"});
        c.preset = s.string("preset", "");
        require(!c.preset.empty(), "potential.preset is required");
        if (s.has("params")) {
            const auto& pj = s.at("params");
            require(pj.is_object(), "potential.params must be an object");
            for (const auto& [k, v] : pj.items()) {
                require(v.is_number(), "potential.params." + k + " must be a number");
                c.preset_params[k] = v.get<double>();
            }
        }
    }

    if (top.has("grid")) {
        auto s = top.sub("grid", {"L", "points_per_eps", "radial", "limit_h"});
        c.L = s.number("L", c.L);
        c.points_per_eps = s.number("points_per_eps", c.points_per_eps);
        c.radial = s.boolean("radial", c.radial);
        c.limit_h = s.number("limit_h", c.limit_h);
        require(c.L > 0, "grid.L must be positive");
        require(c.points_per_eps >= 8, "grid.points_per_eps must be at least 8");
        require(c.limit_h > 0 && c.limit_h <= 0.1, "grid.limit_h must lie in (0, 0.1]");
    }

    if (top.has("epsilons")) {
        c.epsilons = top.numbers("epsilons");
        for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
            require(c.epsilons[i] > 0, "epsilons must be positive");
            require(i == 0 || c.epsilons[i] < c.epsilons[i - 1], "epsilons must be strictly decreasing");
        }
    }

    if (top.has("init")) {
        auto s = top.sub("init", {"kind", "z", "t", "s"});
        c.init = s.string("kind", c.init);
        require(c.init == "ground_bump" || c.init == "synchronized_pair",
                "init.kind must be 'ground_bump' or 'synchronized_pair'");
        if (s.has("z")) c.z = read_point(s.numbers("z"), c.pp.N, "init.z");
        c.t = s.maybe_number("t");
        c.s = s.maybe_number("s");
        require(c.t.has_value() == c.s.has_value(), "init.t and init.s must be given together");
        require(!c.t || (*c.t > 0 && *c.s > 0), "init.t and init.s must be positive");
        require(!c.t || c.init == "synchronized_pair", "init.t and init.s apply to synchronized_pair only");
    }

    if (top.has("penalty")) {
        auto s = top.sub("penalty", {"delta_exp", "kappa", "barrier"});
        c.delta_exp = s.maybe_number("delta_exp");
        c.kappa = s.maybe_number("kappa");
        if (s.has("barrier")) {
            auto b = s.sub("barrier", {"kind", "exponent", "nu", "r", "R", "C_bar", "mu", "lin_delta"});
            const std::string k = b.string("kind", "power");
            require(k == "power" || k == "cosh", "penalty.barrier.kind must be 'power' or 'cosh'");
            c.barrier_kind = k == "power" ? BarrierKind::power : BarrierKind::cosh;
            c.barrier.exponent = b.number("exponent", c.barrier.exponent);
            c.barrier.nu = b.number("nu", c.barrier.nu);
            c.barrier.r = b.number("r", c.barrier.r);
            c.barrier.R = b.number("R", c.barrier.R);
            c.barrier.C_bar = b.number("C_bar", c.barrier.C_bar);
            c.barrier.mu = b.number("mu", c.barrier.mu);
            c.barrier.lin_delta = b.number("lin_delta", c.barrier.lin_delta);
            require(c.barrier.nu >= 0 && c.barrier.r >= 0 && c.barrier.C_bar >= 0 && c.barrier.mu >= 0,
                    "penalty.barrier overrides must be nonnegative (0 selects the default)");
        }
    }

    if (top.has("tolerances")) {
        auto s = top.sub("tolerances", {"newton", "limit", "max_iter", "window_slack", "threshold_kappa"});
        c.newton_tol = s.number("newton", c.newton_tol);
        c.limit_tol = s.number("limit", c.limit_tol);
        c.max_iter = s.integer("max_iter", c.max_iter);
        c.window_slack = s.number("window_slack", c.window_slack);
        c.threshold_kappa = s.number("threshold_kappa", c.threshold_kappa);
        require(c.newton_tol > 0 && c.limit_tol > 0, "tolerances must be positive");
        require(c.max_iter >= 1, "tolerances.max_iter must be at least 1");
        require(c.window_slack >= 0 && c.threshold_kappa >= 0, "slack and kappa must be nonnegative");
    }

    if (top.has("limit")) {
        auto s = top.sub("limit", {"alpha1", "alpha2"});
        c.alpha1 = s.number("alpha1", c.alpha1);
        c.alpha2 = s.number("alpha2", c.alpha2);
        require(c.alpha1 > 0 && c.alpha2 > 0, "limit.alpha1 and limit.alpha2 must be positive");
    }

    if (top.has("thresholds")) {
        auto s = top.sub("thresholds", {"m1", "m2", "alpha_beta", "beta_ground", "samples_per_axis"});
        c.m1 = s.maybe_number("m1");
        c.m2 = s.maybe_number("m2");
        c.beta_ground = s.boolean("beta_ground", c.beta_ground);
        c.samples_per_axis = s.integer("samples_per_axis", c.samples_per_axis);
        require(c.samples_per_axis >= 3, "thresholds.samples_per_axis must be at least 3");
        if (s.has("alpha_beta")) {
            const auto& ab = s.at("alpha_beta");
            require(ab.is_array(), "thresholds.alpha_beta must be an array of [alpha, beta] pairs");
            for (const auto& e : ab) {
                require(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(),
                        "thresholds.alpha_beta must be an array of [alpha, beta] pairs");
                c.alpha_beta.emplace_back(e[0].get<double>(), e[1].get<double>());
            }
        }
    }

    if (top.has("pohozaev")) {
        auto s = top.sub("pohozaev", {"delta", "axis"});
        c.pohozaev_delta = s.maybe_number("delta");
        if (s.has("axis")) c.pohozaev_axis = s.integer("axis", 0);
        require(!c.pohozaev_delta || *c.pohozaev_delta > 0, "pohozaev.delta must be positive");
        require(!c.pohozaev_axis || (*c.pohozaev_axis >= 0 && *c.pohozaev_axis < c.pp.N),
                "pohozaev.axis must lie in [0, N)");
    }

    if (top.has("output")) c.out_dir = top.string("output", "");
    if (top.has("seed")) {
        const auto& v = top.at("seed");
        require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
                "seed must be a nonnegative integer");
        c.seed = v.get<std::uint64_t>();
    }

    // Run-kind requirements, all checked before any computation.
    const bool semiclassical = kind == RunKind::sweep || kind == RunKind::pohozaev || kind == RunKind::verify;
    if (semiclassical) {
        require(!c.preset.empty(), std::string(run_kind_name(kind)) + " runs need a potential preset");
        require(!c.epsilons.empty(), std::string(run_kind_name(kind)) + " runs need a nonempty epsilons list");
    }
    if (kind == RunKind::pohozaev) require(!c.radial, "pohozaev runs need a box grid (grid.radial = false)");
    if (kind == RunKind::thresholds)
        require(!c.preset.empty() || (c.m1 && c.m2), "thresholds runs need a potential preset or thresholds.m1/m2");
    if (c.m1 || c.m2) {
        require(c.m1 && c.m2, "thresholds.m1 and thresholds.m2 must be given together");
        require(*c.m1 > 0 && *c.m2 >= *c.m1, "thresholds need 0 < m1 <= m2");
    }

    json canon = j;
    canon.erase("output");
    canon["kind"] = run_kind_name(kind);
    canon["seed"] = c.seed;
    c.canonical = canon.dump();
    c.hash = fnv1a_hex(c.canonical);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, RunKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), kind);
}

}  // namespace solitonlab::cli
