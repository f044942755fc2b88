#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <Eigen/Core>
#include <json.hpp>

#include "solitonlab/cli.hpp"

namespace solitonlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}
std::string num(int v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

struct Table {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != header.size()) throw std::logic_error("CSV row width mismatch in " + file);
        rows.push_back(std::move(row));
    }
    void write(const fs::path& dir) const {
        std::ofstream out(dir / file, std::ios::binary);
        if (!out) throw validation_error("cannot write " + (dir / file).string());
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
            out << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
    }
};

Table energies_table() {
    return {"energies.csv",
            {"config_hash", "run", "N", "p", "beta", "alpha1", "alpha2", "epsilon", "start", "energy",
             "energy_over_epsN", "sup_u1", "sup_u2", "residual", "iterations", "standard"},
            {}};
}

Table thresholds_table() {
    return {"thresholds.csv",
            {"config_hash", "N", "p", "beta", "m1", "m2", "omega", "C10", "beta_omega_p", "beta_tilde", "theta",
             "cstar", "beta_ground", "l_tilde", "l_hat"},
            {}};
}

std::vector<std::string> point_header(const std::string& name) {
    return {name + "_0", name + "_1", name + "_2"};
}

Table concentration_table() {
    Table t{"concentration.csv",
            {"config_hash", "epsilon", "iterations", "residual", "energy_over_epsN", "peak1", "peak2", "peak_sum"},
            {}};
    for (const char* n : {"x1_peak", "x2_peak", "x_sum_peak", "x_omega"})
        for (auto& h : point_header(n)) t.header.push_back(h);
    for (const char* h : {"dist_scaled", "dist_to_M", "tie", "standard", "window_lower", "window_upper", "window_pass"})
        t.header.push_back(h);
    return t;
}

Table decay_table() {
    return {"decay.csv",
            {"config_hash", "epsilon", "model", "c", "rate", "exponent", "amplitude", "r2", "samples", "r_in",
             "r_out"},
            {}};
}

Table pohozaev_table() {
    Table t{"pohozaev.csv", {"config_hash", "epsilon", "axis", "delta"}, {}};
    for (auto& h : point_header("center")) t.header.push_back(h);
    for (const char* h : {"flux", "grad_sq", "potential", "nonlinear", "surface", "volume", "residual",
                          "max_surface_term", "relative_residual"})
        t.header.push_back(h);
    return t;
}

Table verify_table() {
    return {"verify.csv",
            {"config_hash", "epsilon", "checked", "violations1", "violations2", "violations_sum", "min_margin",
             "vacuous", "pass", "barrier_kind", "barrier_status", "barrier_checked", "barrier_violations",
             "barrier_min_residual", "barrier_below_penalty"},
            {}};
}

const char* model_name(DecayModel m) {
    switch (m) {
        case DecayModel::exponential: return "exponential";
        case DecayModel::power_law: return "power_law";
        case DecayModel::fast_product: return "fast_product";
    }
    return "";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Context {
    ExperimentConfig cfg;
    LimitSolver solver;
    std::vector<Table> tables;
    json notes = json::array();
    json timings = json::object();
    int threads = 1;

    Table& table(const std::string& file) {
        for (auto& t : tables)
            if (t.file == file) return t;
        throw std::logic_error("no table " + file);
    }
};

void run_limit_ground(Context& cx) {
    const auto& c = cx.cfg;
    const double bp = std::max(c.pp.beta, 0.0);
    ScalarField U = cx.solver.ground(c.pp, c.alpha1, bp);
    cx.table("energies.csv")
        .add({c.hash, "limit_ground", num(c.pp.N), num(c.pp.p), num(c.pp.beta), num(c.alpha1), "", "", "",
              num(energy_scalar(U, c.alpha1, bp, c.pp.p)), "", num(U.sup_norm()), "",
              num(scalar_residual(U, c.alpha1, bp, c.pp.p)), "", "0"});
}

void run_coupled_ground(Context& cx) {
    const auto& c = cx.cfg;
    auto res = cx.solver.coupled(LimitParams(c.pp, c.alpha1, c.alpha2));
    for (const auto& cand : res.candidates) {
        const bool standard = cand.w.u1.sup_norm() < 1e-3 || cand.w.u2.sup_norm() < 1e-3;
        cx.table("energies.csv")
            .add({c.hash, "coupled_ground", num(c.pp.N), num(c.pp.p), num(c.pp.beta), num(c.alpha1), num(c.alpha2),
                  "", cand.start, num(cand.energy), "", num(cand.w.u1.sup_norm()), num(cand.w.u2.sup_norm()),
                  num(cand.residual), "", flag(standard)});
    }
    for (const auto& f : res.failed_starts) cx.notes.push_back("coupled start did not converge: " + f);
}

std::vector<std::pair<double, double>> potential_samples(const PotentialSpec& pot, int per_axis) {
    std::vector<std::pair<double, double>> out;
    const int N = pot.N;
    const int lim1 = N >= 2 ? per_axis : 1, lim2 = N >= 3 ? per_axis : 1;
    for (int a = 0; a < per_axis; ++a)
        for (int b = 0; b < lim1; ++b)
            for (int d = 0; d < lim2; ++d) {
                int idx[3] = {a, b, d};
                Point x = pot.center;
                for (int k = 0; k < N; ++k)
                    x[k] += pot.lambda_radius * (2.0 * idx[k] / (per_axis - 1) - 1) * 0.999;
                if (pot.in_lambda(x)) out.emplace_back(pot.V1(x), pot.V2(x));
            }
    return out;
}

void run_thresholds(Context& cx, const std::optional<PotentialSpec>& pot) {
    const auto& c = cx.cfg;
    const double m1 = c.m1 ? *c.m1 : pot->m1, m2 = c.m2 ? *c.m2 : pot->m2;
    std::vector<std::pair<double, double>> samples;
    if (c.beta_ground) {
        if (!pot) throw validation_error("thresholds.beta_ground needs a potential preset");
        samples = potential_samples(*pot, c.samples_per_axis);
    }
    ThresholdReport r = threshold_report(m1, m2, c.pp, cx.solver, c.alpha_beta, samples);
    cx.table("thresholds.csv")
        .add({c.hash, num(c.pp.N), num(c.pp.p), num(c.pp.beta), num(m1), num(m2), num(m1 / m2), num(r.C10),
              num(r.beta_omega_p), num(r.beta_tilde), num(r.theta), num(r.cstar), num(r.beta_ground),
              num(r.l_tilde), num(r.l_hat)});
    for (const auto& [ab, v] : r.c_alpha_beta)
        cx.table("energies.csv")
            .add({c.hash, "scaled_ground", num(c.pp.N), num(c.pp.p), num(ab.second), num(ab.first), "", "", "",
                  num(v), "", "", "", "", "", "0"});
    for (const auto& n : r.notes) cx.notes.push_back(n);
}

PenaltySpec penalty_for(const ExperimentConfig& c, const PotentialSpec& pot, double eps) {
    PenaltySpec ps = PenaltySpec::make(c.pp, pot, eps);
    if (c.delta_exp) ps.delta_exp = *c.delta_exp;
    if (c.kappa) ps.kappa = *c.kappa;
    ps.barrier = c.barrier;
    return ps;
}

// Checks everything a semiclassical run needs before any solve starts.
void precheck_semiclassical(const ExperimentConfig& c, const PotentialSpec& pot) {
    PenaltySpec ps = penalty_for(c, pot, c.epsilons.front());
    ps.validate(c.pp);
    build_penalty(ps, pot);
    if (c.radial) {
        if (norm(pot.center) > 0) throw validation_error("radial grids need the potential centered at the origin");
        if (norm(c.z) > 0) throw validation_error("radial grids need init.z at the origin");
        if (c.L < pot.u_radius) throw validation_error("grid.L does not cover U");
    } else {
        for (int k = 0; k < c.pp.N; ++k)
            if (std::abs(pot.center[k]) + pot.u_radius > c.L) throw validation_error("grid.L does not cover U");
    }
    if (!pot.in_lambda(c.z)) throw validation_error("init.z must lie in Lambda");
    if (c.init == "synchronized_pair") {
        if (!(c.pp.p >= 2)) throw validation_error("synchronized_pair runs need 2p >= 4");
        const double bound = higher_energy_beta_bound(pot, c.pp, c.threshold_kappa);
        if (!(c.pp.beta > 0 && c.pp.beta < bound))
            throw validation_error("synchronized_pair runs need 0 < beta < " + num(bound));
    }
    if (c.kind == RunKind::pohozaev) {
        const double delta = c.pohozaev_delta.value_or(pot.lambda_radius / 4);
        const double h_max = c.epsilons.front() / c.points_per_eps;
        if (delta < 4 * h_max) throw validation_error("pohozaev.delta must be at least 4h at every epsilon level");
        if (delta >= c.L) throw validation_error("pohozaev.delta must stay inside the grid");
    }
}

struct SweepOutcome {
    SweepResult result;
    bool failed = false;
};

SweepOutcome run_semiclassical(Context& cx, const PotentialSpec& pot) {
    const auto& c = cx.cfg;
    SweepConfig sc;
    sc.pot = pot;
    sc.pp = c.pp;
    sc.epsilons = c.epsilons;
    sc.penalty = penalty_for(c, pot, c.epsilons.front());
    if (c.init == "ground_bump")
        sc.init = GroundBump{c.z};
    else
        sc.init = SynchronizedPair{c.z, c.t, c.s};
    sc.L = c.L;
    sc.points_per_eps = c.points_per_eps;
    sc.radial = c.radial;
    sc.opt.tol = c.newton_tol;
    sc.opt.max_iter = c.max_iter;
    sc.opt.limit = cx.solver;
    sc.opt.threshold_kappa = c.threshold_kappa;
    sc.fit_decay = c.kind == RunKind::sweep;
    sc.threads = std::min<int>(cx.threads, static_cast<int>(c.epsilons.size()));

    auto t0 = std::chrono::steady_clock::now();
    WindowThresholds th = c.init == "ground_bump" ? ground_energy_window(pot, c.z, c.pp, cx.solver)
                                                  : higher_energy_window(pot, c.pp, cx.solver);
    cx.timings["window_s"] = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    SweepOutcome out;
    out.result = epsilon_sweep(sc);
    cx.timings["solves_s"] = seconds_since(t0);
    out.failed = !out.result.complete;

    t0 = std::chrono::steady_clock::now();
    for (const auto& lv : out.result.levels) {
        const auto& run = lv.run;
        const auto& r = lv.report;
        const double eps = run.epsilon;
        const PenaltySpec ps = penalty_for(c, pot, eps);
        const WindowReport wr = energy_window_check(run, th, c.window_slack);
        if (!wr.pass) cx.notes.push_back("energy window check failed at epsilon " + num(eps));
        if (run.standard && c.init == "synchronized_pair")
            cx.notes.push_back("higher-energy run at epsilon " + num(eps) + " is standard (a component vanished)");
        if (r.tie) cx.notes.push_back("peak tie at epsilon " + num(eps) + "; smallest grid index kept");

        cx.table("energies.csv")
            .add({c.hash, "penalized", num(c.pp.N), num(c.pp.p), num(c.pp.beta), num(pot.m1), num(pot.m2), num(eps),
                  run.init_kind, num(run.energy), num(run.energy_over_epsN), num(run.w.u1.sup_norm()),
                  num(run.w.u2.sup_norm()), num(run.residual), num(run.iterations), flag(run.standard)});

        std::vector<std::string> row{c.hash,        num(eps),     num(run.iterations), num(run.residual),
                                     num(r.energy_over_epsN), num(r.peak1), num(r.peak2), num(r.peak_sum)};
        for (const Point* p : {&r.x1_peak, &r.x2_peak, &r.x_sum_peak, &r.x_omega})
            for (int k = 0; k < 3; ++k) row.push_back(num((*p)[k]));
        for (auto s : {num(r.dist_scaled), num(r.dist_to_M), flag(r.tie), flag(r.standard), num(wr.lower),
                       num(wr.upper), flag(wr.pass)})
            row.push_back(s);
        cx.table("concentration.csv").add(std::move(row));

        if (c.kind == RunKind::sweep) {
            if (r.decay) {
                const auto& d = *r.decay;
                cx.table("decay.csv")
                    .add({c.hash, num(eps), model_name(d.model), num(d.c), num(d.rate), num(d.exponent),
                          num(d.amplitude), num(d.r2), num(d.samples), num(d.r_in), num(d.r_out)});
            } else {
                cx.notes.push_back("decay fit unavailable at epsilon " + num(eps));
            }
        }

        if (c.kind == RunKind::pohozaev) {
            const double delta = c.pohozaev_delta.value_or(pot.lambda_radius / 4);
            for (int k = 0; k < c.pp.N; ++k) {
                if (c.pohozaev_axis && *c.pohozaev_axis != k) continue;
                const PohozaevReport pz = pohozaev_residual(run.w, pot, ps, c.pp, r.x_omega, delta, k);
                const double rel = pz.max_surface_term > 0 ? std::abs(pz.residual) / pz.max_surface_term : 0.0;
                std::vector<std::string> prow{c.hash, num(eps), num(k), num(delta)};
                for (int d = 0; d < 3; ++d) prow.push_back(num(pz.center[d]));
                for (double v : {pz.flux, pz.grad_sq, pz.potential, pz.nonlinear, pz.surface, pz.volume, pz.residual,
                                 pz.max_surface_term, rel})
                    prow.push_back(num(v));
                cx.table("pohozaev.csv").add(std::move(prow));
            }
        }

        if (c.kind == RunKind::verify) {
            const VerifyReport v = verify_original(run.w, pot, ps, c.pp);
            std::string status = "ok", checked, viol, minres, below;
            try {
                const BarrierReport b = barrier_supersolution(run.w.grid(), pot, ps, c.pp, r, c.barrier_kind);
                checked = num(b.checked);
                viol = num(b.violations);
                minres = num(b.min_residual);
                below = flag(b.below_penalty);
            } catch (const domain_error& e) {
                status = "not_constructed";
                cx.notes.push_back("barrier at epsilon " + num(eps) + ": " + e.what());
            }
            cx.table("verify.csv")
                .add({c.hash, num(eps), num(v.checked), num(v.violations1), num(v.violations2), num(v.violations_sum),
                      num(v.min_margin), flag(v.vacuous), flag(v.pass),
                      c.barrier_kind == BarrierKind::power ? "power" : "cosh", status, checked, viol, minres, below});
        }
    }
    cx.timings["diagnostics_s"] = seconds_since(t0);
    if (!out.result.levels.empty()) {
        cx.notes.push_back(std::string("dist_to_M strictly decreasing: ") +
                           (out.result.dist_to_M_decreasing ? "yes" : "no"));
        cx.notes.push_back("dist_scaled max/min ratio: " + num(out.result.dist_scaled_ratio));
    }
    return out;
}

std::vector<Table> tables_for(RunKind k) {
    switch (k) {
        case RunKind::limit_ground:
        case RunKind::coupled_ground: return {energies_table()};
        case RunKind::thresholds: return {thresholds_table(), energies_table()};
        case RunKind::sweep: return {energies_table(), concentration_table(), decay_table()};
        case RunKind::pohozaev: return {energies_table(), concentration_table(), pohozaev_table()};
        case RunKind::verify: return {energies_table(), concentration_table(), verify_table()};
    }
    return {};
}

json error_entry(const std::string& type, const std::string& msg) { return json{{"type", type}, {"message", msg}}; }

}  // namespace

int thread_budget() {
    int n = 1;
    if (const char* env = std::getenv("SOLITONLAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) n = static_cast<int>(v);
    }
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::min(n, hw);
}

int run(RunKind kind, const fs::path& config_path, const RunOverrides& ov) {
    const auto t_start = std::chrono::steady_clock::now();
    json manifest;
    manifest["subcommand"] = run_kind_name(kind);
    manifest["config_path"] = config_path.string();
    manifest["versions"] = {{"solitonlab", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"compiler", __VERSION__},
                            {"cplusplus", __cplusplus}};
    json errors = json::array();
    int code = exit_ok;
    fs::path out_dir = ov.out_dir.value_or("solitonlab_out");
    Context cx;
    cx.threads = std::max(1, ov.threads);
    bool write_tables = false;

    try {
        cx.cfg = load_config(config_path, kind);
        if (!ov.out_dir) out_dir = cx.cfg.out_dir;
        if (ov.seed && *ov.seed != cx.cfg.seed) {
            json canon = json::parse(cx.cfg.canonical);
            canon["seed"] = *ov.seed;
            cx.cfg.seed = *ov.seed;
            cx.cfg.canonical = canon.dump();
            cx.cfg.hash = fnv1a_hex(cx.cfg.canonical);
        }
        manifest["config_hash"] = cx.cfg.hash;
        manifest["seed"] = cx.cfg.seed;
        manifest["config"] = json::parse(cx.cfg.canonical);
        manifest["threads"] = cx.threads;
        cx.solver.h = cx.cfg.limit_h;
        cx.solver.tol = cx.cfg.limit_tol;

        std::optional<PotentialSpec> pot;
        if (!cx.cfg.preset.empty()) pot = make_potential(cx.cfg.preset, cx.cfg.pp.N, cx.cfg.preset_params);
        if (pot && !pot->well_condition)
            cx.notes.push_back("sampled well condition inf_Lambda(V1+V2) < inf_(U minus Lambda)(V1+V2) does not hold");
        const bool semiclassical = kind == RunKind::sweep || kind == RunKind::pohozaev || kind == RunKind::verify;
        if (semiclassical) precheck_semiclassical(cx.cfg, *pot);
        cx.tables = tables_for(kind);
        fs::create_directories(out_dir);
        write_tables = true;

        switch (kind) {
            case RunKind::limit_ground: run_limit_ground(cx); break;
            case RunKind::coupled_ground: run_coupled_ground(cx); break;
            case RunKind::thresholds: run_thresholds(cx, pot); break;
            default: {
                SweepOutcome so = run_semiclassical(cx, *pot);
                if (so.failed) {
                    code = so.result.solver_failure ? exit_solver : exit_validation;
                    errors.push_back(error_entry(so.result.solver_failure ? "solver_error" : "validation_error",
                                                 so.result.error));
                }
            }
        }
    } catch (const validation_error& e) {
        code = exit_validation;
        write_tables = false;
        errors.push_back(error_entry("validation_error", e.what()));
    } catch (const domain_error& e) {
        code = exit_validation;
        write_tables = false;
        errors.push_back(error_entry("domain_error", e.what()));
    } catch (const solver_error& e) {
        code = exit_solver;
        json err = error_entry("solver_error", e.what());
        err["residual"] = e.residual;
        errors.push_back(err);
    } catch (const consistency_error& e) {
        code = exit_solver;
        errors.push_back(error_entry("consistency_error", e.what()));
    } catch (const std::exception& e) {
        code = exit_solver;
        errors.push_back(error_entry("internal_error", e.what()));
    }

    json outputs = json::array();
    try {
        fs::create_directories(out_dir);
        if (write_tables)
            for (const auto& t : cx.tables) {
                t.write(out_dir);
                outputs.push_back(t.file);
            }
    } catch (const std::exception& e) {
        code = exit_validation;
        errors.push_back(error_entry("io_error", e.what()));
    }

    manifest["status"] = code == exit_ok ? "ok" : code == exit_validation ? "validation_error" : "solver_error";
    manifest["exit_code"] = code;
    manifest["errors"] = errors;
    manifest["notes"] = cx.notes;
    manifest["outputs"] = outputs;
    cx.timings["total_s"] = seconds_since(t_start);
    manifest["wall_times"] = cx.timings;
    std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
    if (mf) mf << manifest.dump(2) << '\n';
    for (const auto& e : errors) std::fprintf(stderr, "error: %s\n", e["message"].get<std::string>().c_str());
    return code;
}

std::string presets_listing(const std::string& filter, bool as_json) {
    json arr = json::array();
    std::string text;
    for (const auto& p : preset_catalog()) {
        if (!filter.empty() && p.name.find(filter) == std::string::npos) continue;
        json params = json::object();
        for (const auto& [k, v] : p.defaults) params[k] = v;
        arr.push_back({{"name", p.name}, {"description", p.description}, {"params", params}});
        text += p.name + "\n  " + p.description + "\n  params:";
        for (const auto& [k, v] : p.defaults) text += " " + k + "=" + num(v);
        text += "\n";
    }
    return as_json ? arr.dump(2) + "\n" : text;
}

}  // namespace solitonlab::cli
