#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solitonlab/semiclassical.hpp"

namespace solitonlab::cli {

enum class RunKind { limit_ground, coupled_ground, thresholds, sweep, pohozaev, verify };

const char* run_kind_name(RunKind k);
std::optional<RunKind> parse_run_kind(const std::string& name);

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_solver = 3;

struct ExperimentConfig {
    RunKind kind = RunKind::limit_ground;
    ProblemParams pp;

    std::string preset;  // empty: no potential (limit and threshold runs may omit it)
    std::map<std::string, double> preset_params;

    double L = 5.0;
    double points_per_eps = 25.0;
    bool radial = false;
    double limit_h = 0.01;

    std::vector<double> epsilons;

    std::string init = "ground_bump";
    Point z{0, 0, 0};
    std::optional<double> t, s;

    std::optional<double> delta_exp, kappa;
    BarrierParams barrier;
    BarrierKind barrier_kind = BarrierKind::power;

    double newton_tol = 1e-8;
    double limit_tol = 1e-8;
    int max_iter = 100;
    double window_slack = 0.05;
    double threshold_kappa = 0.05;

    double alpha1 = 1.0, alpha2 = 1.0;

    std::optional<double> m1, m2;
    std::vector<std::pair<double, double>> alpha_beta;
    bool beta_ground = false;
    int samples_per_axis = 9;

    std::optional<double> pohozaev_delta;
    std::optional<int> pohozaev_axis;  // all axes when unset

    std::filesystem::path out_dir = "solitonlab_out";
    std::uint64_t seed = 0;

    std::string canonical;  // normalized JSON text the hash is taken over
    std::string hash;       // 16 hex digits
};

// Parses and validates a JSON config for `kind`; unknown keys, wrong types and
// out-of-range values raise validation_error. No computation happens here.
ExperimentConfig parse_config(const std::string& text, RunKind kind);
ExperimentConfig load_config(const std::filesystem::path& path, RunKind kind);

// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

struct RunOverrides {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

// Worker count from SOLITONLAB_THREADS (default 1, capped by the hardware).
int thread_budget();

// Runs a subcommand end to end: config, compute, CSVs, manifest. Returns the
// exit status (0 ok, 2 validation, 3 solver).
int run(RunKind kind, const std::filesystem::path& config_path, const RunOverrides& ov);

// Renders SVG figures from the CSVs in `dir`; returns 2 when none are present.
int plot(const std::filesystem::path& dir, const std::optional<std::filesystem::path>& out = std::nullopt);

// Preset listing (text or JSON), optionally filtered by a substring of the name.
std::string presets_listing(const std::string& filter, bool json);

}  // namespace solitonlab::cli
