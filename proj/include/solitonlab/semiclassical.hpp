#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "solitonlab/penalty.hpp"
#include "solitonlab/thresholds.hpp"

namespace solitonlab {

// Start from the limit coupled ground at (V1(z), V2(z)), placed at z and
// rescaled by epsilon.
struct GroundBump {
    Point z{0, 0, 0};
};

// Start from (t U_{m1,beta}, s U_{m2,beta}) placed at z; (t, s) defaults to
// the maximizer of the Nehari map used for C*.
struct SynchronizedPair {
    Point z{0, 0, 0};
    std::optional<double> t, s;
};

using InitSpec = std::variant<GroundBump, SynchronizedPair>;

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 100;
    LimitSolver limit;
    double threshold_kappa = 0.05;  // margin in the coupling bound of higher-energy runs
};

struct PenalizedRun {
    FieldPair w;
    double epsilon = 0;
    double energy = 0;
    double energy_over_epsN = 0;
    double residual = 0;
    int iterations = 0;
    bool standard = false;  // a component below 1e-3
    std::string init_kind;
    Point z{0, 0, 0};
};

// Grid for a semiclassical solve: box [-L, L]^N, or a radial grid of radius L,
// with `points_per_eps` nodes per epsilon and a node at the origin.
GridPtr semiclassical_grid(int N, double L, double epsilon, double points_per_eps, bool radial = false);

PenalizedRun solve_penalized(const GridPtr& grid, const PotentialSpec& pot, const PenaltySpec& ps,
                             const ProblemParams& pp, const InitSpec& init, const SolveOptions& opt = {});

// Coupling bound for higher-energy runs: min(beta_{omega,p}, beta_tilde)/(1 + kappa).
double higher_energy_beta_bound(const PotentialSpec& pot, const ProblemParams& pp, double kappa = 0.05);

enum class DecayModel { exponential, power_law, fast_product };

struct DecayFit {
    DecayModel model = DecayModel::exponential;
    double c = 0;          // rate in the scaled variable
    double rate = 0;       // physical rate c / eps^{1 - sigma} (exponential), c / eps (fast)
    double exponent = 0;   // 1 - sigma, or the power-law exponent
    double amplitude = 0;  // log-amplitude of the fit
    double r2 = 0;
    int samples = 0;
    double r_in = 0, r_out = 0;
};

struct ConcentrationReport {
    double epsilon = 1;
    Point x1_peak{}, x2_peak{}, x_sum_peak{}, x_omega{};
    double peak1 = 0, peak2 = 0, peak_sum = 0;
    double dist_scaled = 0;
    double dist_to_M = 0;
    double energy_over_epsN = 0;
    bool tie = false;
    bool standard = false;
    std::optional<DecayFit> decay;
};

// Argmaxes of u1, u2 and u1 + u2 with quadratic sub-grid refinement. Ties go
// to the smallest grid index and are flagged.
ConcentrationReport find_peaks(const FieldPair& w, double epsilon = 1.0, double floor = 1e-3);

ConcentrationReport concentration_report(const PenalizedRun& run, const PotentialSpec& pot);

struct WindowThresholds {
    bool higher = true;  // higher-energy window, else ground bound
    double lower = 0;
    double upper = 0;
};

struct WindowReport {
    double value = 0, lower = 0, upper = 0, slack = 0;
    double margin_lower = 0, margin_upper = 0;
    bool pass = false;
};

// [C_{m1,beta} + C_{m2,beta}, C*] for higher-energy runs.
WindowThresholds higher_energy_window(const PotentialSpec& pot, const ProblemParams& pp, const LimitSolver& solver);
// Upper bound C_{V1(z),V2(z),beta} for ground runs started at z.
WindowThresholds ground_energy_window(const PotentialSpec& pot, const Point& z, const ProblemParams& pp,
                                      const LimitSolver& solver);

WindowReport energy_window_check(const PenalizedRun& run, const WindowThresholds& th, double slack = 0.05);

// Least-squares fit of log(u1 + u2) on the annulus 4 eps <= |x - x_omega| <= r_out_scaled eps,
// restricted to nodes where the penalty cutoff is inactive.
DecayFit decay_fit(const FieldPair& w, const ConcentrationReport& rep, const PotentialSpec& pot,
                   const PenaltySpec& ps, const ProblemParams& pp, double r_out_scaled = 10.0);

enum class BarrierKind { power, cosh };

struct BarrierReport {
    ScalarField U;
    double C_tilde = 0, C_bar = 0, nu = 0, r = 0, R = 0, mu = 0;
    double plateau = 0;        // constant value on Lambda outside B_r
    int checked = 0;           // nodes where the differential inequality was tested
    int violations = 0;
    double min_residual = 0;   // smallest normalized residual
    bool below_penalty = false;  // U^{2p-2} < P on the sampled complement of Lambda
    double max_penalty_ratio = 0;
};

// Supersolution of -eps^2 Delta U + (1 - delta) V_min U - P U >= 0 off
// B_{R eps}(x_omega) with U >= C_tilde inside. Throws domain_error when the
// inequality fails at more than 0.1% of the tested nodes.
BarrierReport barrier_supersolution(const GridPtr& grid, const PotentialSpec& pot, const PenaltySpec& ps,
                                    const ProblemParams& pp, const ConcentrationReport& rep,
                                    BarrierKind kind = BarrierKind::power, double tol = 1e-8);

struct VerifyReport {
    int checked = 0;
    int violations1 = 0, violations2 = 0, violations_sum = 0;
    std::vector<Point> locations;  // first violating nodes
    double min_margin = 0;         // min over Lambda^c of P - (u1 + u2)^{2p-2}
    bool vacuous = false;
    bool pass = false;
};

VerifyReport verify_original(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps,
                             const ProblemParams& pp);

struct PohozaevReport {
    int axis = 0;
    double delta = 0;
    Point center{};
    double flux = 0, grad_sq = 0, potential = 0, nonlinear = 0;
    double surface = 0, volume = 0, residual = 0;
    double max_surface_term = 0;
};

// Local identity on B_delta(center) along `axis`, each term divided by eps^N:
// surface = -eps^2 int du/dnu du/dx_k + eps^2/2 int |grad u|^2 nu_k
//           + 1/2 int V u^2 nu_k - int F nu_k (summed over components),
// volume = 1/2 int_B sum_i u_i^2 dV_i/dx_k. Box grids only.
PohozaevReport pohozaev_residual(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps,
                                 const ProblemParams& pp, const Point& center, double delta, int axis);

struct SweepConfig {
    PotentialSpec pot;
    ProblemParams pp;
    std::vector<double> epsilons;
    PenaltySpec penalty;  // epsilon is overwritten per level
    InitSpec init = GroundBump{};
    double L = 5.0;
    double points_per_eps = 25.0;
    bool radial = false;
    SolveOptions opt;
    bool fit_decay = true;
    int threads = 1;
};

struct SweepLevel {
    PenalizedRun run;
    ConcentrationReport report;
};

struct SweepResult {
    std::vector<SweepLevel> levels;  // in epsilon order, up to the first failure
    bool complete = false;
    std::string error;
    bool solver_failure = false;
    bool dist_to_M_decreasing = false;
    double dist_scaled_ratio = 0;  // max/min over levels
    double energy_spread = 0;      // (max - min)/mean of J/eps^N
};

SweepResult epsilon_sweep(const SweepConfig& cfg);

}  // namespace solitonlab
