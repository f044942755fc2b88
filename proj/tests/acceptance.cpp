#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "solitonlab/semiclassical.hpp"

using namespace solitonlab;

namespace {

// Pinned tolerances, one block per criterion.
constexpr double kOracleEnergyTol = 1e-4;
constexpr double kOracleSupTol = 1e-3;
constexpr double kOracleSeconds = 1.0;
constexpr double kScalingRelTol = 1e-3;
constexpr double kScalingSeconds = 120.0;
constexpr double kMonotoneStep = 1e-6;
constexpr double kStrictGap = 1e-3;
constexpr double kStrictSup = 1e-2;
constexpr double kTightRelTol = 1e-3;
constexpr double kTightUnitTol = 1e-6;
constexpr double kWindowTol = 1e-6;
constexpr int kWindowKMax = 5;
constexpr int kWindowSteps = 1000;
constexpr int kSuiteSize = 50;
constexpr double kHardyTheta = 0.225;
constexpr double kScaledDistFactor = 2.0;
constexpr double kSweepSeconds = 600.0;
constexpr double kPohozaevRel = 1e-6;
constexpr double kVolumeRelTol = 0.05;
constexpr double kWindowSlack = 0.05;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

void guarded(int id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1. Closed-form cubic soliton on the line.
void closed_form_oracle() {
    const auto t0 = Clock::now();
    ProblemParams pp(1, 2, 0);
    auto U = solve_scalar_ground(pp, 1.0, 0.0, default_limit_grid(1, 1.0));
    const double C = energy_scalar(U, 1.0, 0.0, 2.0);
    const double sup = U.sup_norm();
    const double secs = seconds_since(t0);
    const bool pass = std::abs(C - 4.0 / 3) <= kOracleEnergyTol && std::abs(sup - std::sqrt(2.0)) <= kOracleSupTol &&
                      secs < kOracleSeconds;
    report(1, pass, fmt("C10=%.8f (|err| %.2e <= %.0e), sup=%.6f (|err| %.2e <= %.0e), %.3fs < %.0fs", C,
                        std::abs(C - 4.0 / 3), kOracleEnergyTol, sup, std::abs(sup - std::sqrt(2.0)), kOracleSupTol,
                        secs, kOracleSeconds));
}

// 2. Directly solved C_{alpha,beta} against the scaling law.
void scaling_law() {
    const auto t0 = Clock::now();
    double worst = 0;
    std::string where;
    int solved = 0;
    for (int N : {1, 3})
        for (double p : {2.0, 2.5}) {
            ProblemParams pp(N, p, 0);
            const double C10 = numeric_C10(N, p);
            for (double a : {0.5, 1.0, 2.0, 4.0})
                for (double b : {0.0, 0.5, 1.0}) {
                    // Same fixed spacing as the reference C10 solve, for every alpha.
                    auto U = solve_scalar_ground(pp, a, b, default_limit_grid(N, a, N == 1 ? 0.01 : 0.004));
                    const double e = rel(energy_scalar(U, a, b, p), C_ab(a, b, C10, pp));
                    ++solved;
                    if (e > worst) {
                        worst = e;
                        where = fmt("N=%d p=%.1f alpha=%.1f beta=%.1f", N, p, a, b);
                    }
                }
        }
    const double secs = seconds_since(t0);
    report(2, worst <= kScalingRelTol && secs < kScalingSeconds,
           fmt("%d solves, worst rel err %.2e <= %.0e at %s, %.1fs < %.0fs", solved, worst, kScalingRelTol,
               where.c_str(), secs, kScalingSeconds));
}

// 3. Coupled ground energy increases along alpha1.
void monotonicity() {
    ProblemParams pp(1, 2, 2.0);
    std::vector<double> e;
    for (double a1 : {1.0, 1.5, 2.0}) e.push_back(coupled_ground_energy(LimitParams(pp, a1, 1.0), default_limit_grid(1, 1.0)));
    const double s1 = e[1] - e[0], s2 = e[2] - e[1];
    report(3, s1 > kMonotoneStep && s2 > kMonotoneStep,
           fmt("p=2 beta=2 alpha2=1: J = %.6f, %.6f, %.6f; steps %.3e, %.3e > %.0e", e[0], e[1], e[2], s1, s2,
               kMonotoneStep));
}

// 4. Sublinear coupling strictly lowers the ground level with both components alive.
void strict_below_scalar() {
    ProblemParams pp(1, 1.5, 0.1);
    const double a = 4.0;
    auto grid = default_limit_grid(1, a, 0.005);
    auto w = solve_coupled_ground(LimitParams(pp, a, a), grid);
    const double J = energy_coupled(w, LimitParams(pp, a, a)).total;
    const double scalar = energy_scalar(solve_scalar_ground(ProblemParams(1, 1.5, 0), a, 0.0, grid), a, 0.0, 1.5);
    const double s1 = w.u1.sup_norm(), s2 = w.u2.sup_norm();
    report(4, J < scalar - kStrictGap && s1 > kStrictSup && s2 > kStrictSup,
           fmt("alpha1=alpha2=%.0f: J=%.6f, min C_(alpha,0)=%.6f, gap %.3e > %.0e; sups %.4f, %.4f > %.0e", a, J,
               scalar, scalar - J, kStrictGap, s1, s2, kStrictSup));
}

// 5. The synchronized pair attains the lower bound.
void synchronized_tightness() {
    ProblemParams pp(1, 2, 0.5);
    LimitParams lp(pp, 1.0, 1.0);
    auto all = solve_coupled_ground_all(lp, default_limit_grid(1, 1.0));
    const CoupledCandidate* sync = nullptr;
    for (const auto& c : all.candidates)
        if (c.start == "synchronized") sync = &c;
    if (!sync) {
        report(5, false, "no synchronized candidate converged");
        return;
    }
    const double C10 = numeric_C10(1, 2);
    auto lb = lower_bound_check(sync->w, lp, C10);
    const double target = 2 * C_ab(1.0, 0.5, C10, pp);
    const double e = rel(lb.J, target);
    const double dt = std::max(std::abs(lb.t_beta - 1), std::abs(lb.s_beta - 1));
    report(5, e <= kTightRelTol && dt <= kTightUnitTol,
           fmt("J=%.6f vs 2C_(1,0.5)=%.6f (rel %.2e <= %.0e); maximizer (%.8f, %.8f), |.-1| %.1e <= %.0e", lb.J,
               target, e, kTightRelTol, lb.t_beta, lb.s_beta, dt, kTightUnitTol));
}

// 6. Energy window for equal potentials and the separation scan.
void separation_window() {
    ProblemParams pp(1, 2, 0.5);
    const double C10 = 4.0 / 3;
    const double lo_closed = 4.0 / 3, hi_closed = 16.0 / 9;
    const double lo = C_ab(1.0, 0.0, C10, pp);
    const double hi = cstar_closed_form(1.0, 0.5, C10, pp);
    const double theta = theta_of_beta(1, 1, 0.5, pp);
    auto scan = separation_scan(1, 1, 0.5, theta, kWindowKMax, kWindowSteps, hi, C10, pp);
    const bool pass = std::abs(lo - lo_closed) <= kWindowTol && std::abs(hi - hi_closed) <= kWindowTol && scan.pass;
    report(6, pass,
           fmt("endpoints [%.9f, %.9f] vs [4/3, 16/9] (tol %.0e); scan k<=%d, %d steps, theta=%.6f: %s, "
               "scan window [%.6f, %.6f], boundary hits %d",
               lo, hi, kWindowTol, kWindowKMax, kWindowSteps, theta, scan.pass ? "separated" : "overlap",
               scan.window_lo, scan.window_hi, scan.boundary_hits));
}

// 7. Penalty domination over a fixed test suite, both penalty cases.
std::vector<ScalarField> bump_suite(const GridPtr& g, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> C(lo, hi), W(0.15, 1.5);
    const double L = hi + 2;
    std::vector<ScalarField> out;
    while (static_cast<int>(out.size()) < kSuiteSize) {
        const double c = C(rng), w = W(rng);
        out.push_back(sample(g, [=](const Point& x) {
            const double t = (x[0] - c) / w;
            const double taper = 1 - std::pow(x[0] / L, 2);
            return taper > 0 ? std::exp(-t * t) * taper : 0.0;
        }));
    }
    return out;
}

void penalty_domination() {
    std::string detail;
    bool pass = true;
    for (int cs : {1, 2}) {
        const int N = cs == 1 ? 1 : 3;
        auto pot = cs == 1 ? make_potential("double-well", 1) : make_potential("compact-support", 3);
        ProblemParams pp = cs == 1 ? ProblemParams(1, 2, 2) : ProblemParams(3, 2.5, 2);
        auto g = cs == 1 ? make_grid(BoxGrid(1, 6.0, 2401)) : make_grid(RadialGrid(3, 6.0, 1201));
        auto suite = bump_suite(g, cs == 1 ? -4.0 : 0.2, 4.0, 2024 + cs);
        std::vector<double> maxima;
        for (double eps : {0.1, 0.05, 0.02}) {
            auto ps = PenaltySpec::make(pp, pot, eps);
            if (cs == 1) ps.delta_exp = 3;
            double m = 0;
            for (const auto& phi : suite) m = std::max(m, domination_check(phi, pot, ps));
            maxima.push_back(m);
        }
        const bool dec = maxima[1] < maxima[0] && maxima[2] < maxima[1];
        pass = pass && dec;
        detail += fmt("case %d (N=%d): max tau %.3e, %.3e, %.3e %s; ", cs, N, maxima[0], maxima[1], maxima[2],
                      dec ? "decreasing" : "NOT decreasing");
    }
    report(7, pass, detail + fmt("%d functions, eps 0.1/0.05/0.02", kSuiteSize));
}

// 8. Hardy quotient positivity in three dimensions.
void hardy_positivity() {
    auto g = make_grid(RadialGrid(3, 12.0, 1201));
    std::mt19937_64 rng(225);
    std::uniform_real_distribution<double> C(0.3, 8.0), W(0.1, 3.0);
    double worst = INFINITY;
    int n = 0;
    while (n < kSuiteSize) {
        const double c = C(rng), w = W(rng);
        if (c - w < 0.05) continue;
        auto u = sample(g, [=](const Point& x) {
            const double t = (x[0] - c) / w;
            return std::abs(t) < 1 ? std::pow(1 - t * t, 3) : 0.0;
        });
        worst = std::min(worst, hardy_quotient(u, kHardyTheta));
        ++n;
    }
    report(8, worst >= 0, fmt("theta=%.3f = 0.9 (N-2)^2/4, %d bumps, min quotient %.4e >= 0", kHardyTheta, n, worst));
}

// 9 and 10. Concentration sweep on the double well, then the original system at the smallest levels.
SweepConfig double_well_sweep() {
    SweepConfig c;
    c.pot = make_potential("double-well", 1);
    c.pp = ProblemParams(1, 2, 2.0);
    c.penalty = PenaltySpec::make(c.pp, c.pot, 0.4);
    c.penalty.delta_exp = 3;
    c.penalty.barrier.R = 2;
    c.epsilons = {0.4, 0.2, 0.1};
    c.init = GroundBump{};
    return c;
}

SweepConfig compact_support_sweep() {
    SweepConfig c;
    c.pot = make_potential("compact-support", 3);
    c.pp = ProblemParams(3, 2.5, 2.0);
    c.penalty = PenaltySpec::make(c.pp, c.pot, 0.2);
    c.penalty.barrier.R = 2;
    c.epsilons = {0.2, 0.1};
    c.radial = true;
    c.L = 3.0;
    c.fit_decay = false;
    return c;
}

std::string verify_levels(const SweepConfig& cfg, const SweepResult& res, bool& pass) {
    std::string out;
    const std::size_t n = res.levels.size();
    if (!res.complete || n < 2) {
        pass = false;
        return "sweep incomplete: " + res.error;
    }
    for (std::size_t i = n - 2; i < n; ++i) {
        PenaltySpec ps = cfg.penalty;
        ps.epsilon = res.levels[i].run.epsilon;
        auto v = verify_original(res.levels[i].run.w, cfg.pot, ps, cfg.pp);
        pass = pass && v.pass && v.violations_sum == 0;
        out += fmt("eps=%.2f violations %d/%d/%d margin %.2e; ", ps.epsilon, v.violations1, v.violations2,
                   v.violations_sum, v.min_margin);
    }
    return out;
}

const SweepResult& double_well_result(double* seconds = nullptr) {
    static double secs = 0;
    static const SweepResult res = [] {
        const auto t0 = Clock::now();
        auto r = epsilon_sweep(double_well_sweep());
        secs = seconds_since(t0);
        return r;
    }();
    if (seconds) *seconds = secs;
    return res;
}

void concentration() {
    const auto cfg = double_well_sweep();
    double secs = 0;
    const auto& res = double_well_result(&secs);
    std::string d = fmt("beta=%.1f > beta_omega_p=%.1f; ", cfg.pp.beta, beta_omega_p(cfg.pot.omega, 2, 1));
    for (const auto& l : res.levels)
        d += fmt("eps=%.2f dist=%.4f scaled=%.4f; ", l.run.epsilon, l.report.dist_to_M, l.report.dist_scaled);
    const bool ratio_ok = res.dist_scaled_ratio < kScaledDistFactor;
    d += fmt("decreasing=%s, scaled ratio %.2f < %.0f: %s, %.2fs < %.0fs", res.dist_to_M_decreasing ? "yes" : "no",
             res.dist_scaled_ratio, kScaledDistFactor, ratio_ok ? "yes" : "no", secs, kSweepSeconds);
    report(9, res.complete && res.levels.size() == 3 && res.dist_to_M_decreasing && ratio_ok && secs < kSweepSeconds,
           d);
}

void back_to_original() {
    bool pass = true;
    std::string d = "case 1 (double well, N=1): " + verify_levels(double_well_sweep(), double_well_result(), pass);
    auto cfg2 = compact_support_sweep();
    d += "case 2 (compact support, N=3 radial): " + verify_levels(cfg2, epsilon_sweep(cfg2), pass);
    report(10, pass, d);
}

// 11. Local Pohozaev identity: constant potentials, then a linear slope.
void pohozaev() {
    const double eps = 0.2, delta = 0.6, a = 0.1;
    auto pot = make_potential("constant", 1);
    ProblemParams pp(1, 2, 0.5);
    auto ps = PenaltySpec::make(pp, pot, eps);
    ps.delta_exp = 3;
    auto g = semiclassical_grid(1, 5, eps, 25);
    auto run = solve_penalized(g, pot, ps, pp, SynchronizedPair{});
    auto flat = pohozaev_residual(run.w, pot, ps, pp, {0, 0, 0}, delta, 0);
    const bool flat_ok = std::abs(flat.residual) <= kPohozaevRel * flat.max_surface_term;

    PotentialSpec sloped = pot;
    sloped.V1 = [a](const Point& x) { return 1 + a * x[0]; };
    sloped.V2 = sloped.V1;
    auto tilt = pohozaev_residual(run.w, sloped, ps, pp, {0, 0, 0}, delta, 0);
    auto inside = sample(g, [&](const Point& x) { return std::abs(x[0]) < delta ? 1.0 : 0.0; });
    const double quad = a * integrate(*g, run.w.u1.values.cwiseAbs2().cwiseProduct(inside.values)) / eps;
    // Synchronized profile sqrt(2/(1 + beta)) sech(x/eps) integrated over the ball.
    const double closed = a * (2.0 / (1 + pp.beta)) * 2 * eps * std::tanh(delta / eps) / eps;
    const double e = rel(tilt.volume, quad), ec = rel(tilt.volume, closed);
    report(11, flat_ok && e <= kVolumeRelTol && ec <= kVolumeRelTol,
           fmt("constant: |residual| %.2e <= %.0e * %.3e; slope a=%.1f: volume %.6f vs a int u1^2 quadrature %.6f "
               "(rel %.2e) and closed form %.6f (rel %.2e), tol %.2f",
               std::abs(flat.residual), kPohozaevRel, flat.max_surface_term, a, tilt.volume, quad, e, closed, ec,
               kVolumeRelTol));
}

// 12. Higher-energy synchronized run inside the energy window.
void energy_window() {
    const double eps = 0.1;
    auto pot = make_potential("double-well", 1, {{"skew2", 0.4}});
    ProblemParams pp(1, 2, 0.5);
    auto ps = PenaltySpec::make(pp, pot, eps);
    ps.delta_exp = 3;
    auto run = solve_penalized(semiclassical_grid(1, 5, eps, 25), pot, ps, pp, SynchronizedPair{});
    const double lo = 4.0 / 3 * (1 - kWindowSlack), hi = 16.0 / 9 * (1 + kWindowSlack);
    const double v = run.energy_over_epsN;
    report(12, v >= lo && v <= hi,
           fmt("omega=%.3f: J/eps^N=%.6f in [%.6f, %.6f] (residual %.1e)", pot.omega, v, lo, hi, run.residual));
}

}  // namespace

int main() {
    guarded(1, closed_form_oracle);
    guarded(2, scaling_law);
    guarded(3, monotonicity);
    guarded(4, strict_below_scalar);
    guarded(5, synchronized_tightness);
    guarded(6, separation_window);
    guarded(7, penalty_domination);
    guarded(8, hardy_positivity);
    guarded(9, concentration);
    guarded(10, back_to_original);
    guarded(11, pohozaev);
    guarded(12, energy_window);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
