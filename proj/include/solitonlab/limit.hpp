#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solitonlab/core.hpp"

namespace solitonlab {

struct LimitParams {
    ProblemParams params;
    double alpha1 = 1.0;
    double alpha2 = 1.0;

    LimitParams() = default;
    LimitParams(ProblemParams pp, double a1, double a2);
};

struct NehariReport {
    double X1 = 0, X2 = 0;  // ||u_i||^2_{alpha_i}
    double Y1 = 0, Y2 = 0;  // |u_i|_{2p}^{2p}
    double Z = 0;           // |u1 u2|_p^p
    double t = 1, s = 1;
};

struct EnergyBreakdown {
    double quad1 = 0, quad2 = 0;
    double self1 = 0, self2 = 0;
    double cross = 0;
    double total = 0;
};

NehariReport nehari_data(const FieldPair& w, const LimitParams& lp);

double energy_scalar(const ScalarField& u, double alpha, double beta_plus, double p);
EnergyBreakdown energy_coupled(const FieldPair& w, const LimitParams& lp);

// G(t, s) = J((t u1, s u2)) expressed through the Nehari data.
double nehari_energy(const NehariReport& rep, double p, double beta, double t, double s);

double nehari_scale_scalar(const ScalarField& u, double alpha, double beta_plus, double p);

// Positive roots (t, s) of the 2x2 Nehari system. For p = 2 the system is
// linear in (t^2, s^2); for p > 2 a one-variable zero function in the ratio
// s/t is bracketed and bisected; for 1 < p < 2 damped Newton is started from
// a 9 x 9 logarithmic mesh. Roots are returned sorted by t + s.
std::vector<std::pair<double, double>> nehari_roots(const NehariReport& rep, double p, double beta);

// Selects one root: the one nearest to `hint` if given, otherwise the root
// with smallest t + s.
std::pair<double, double> solve_nehari_2x2(const NehariReport& rep, double p, double beta,
                                           std::optional<std::pair<double, double>> hint = std::nullopt);

// Residual sup-norm of -Delta u + alpha u - (1 + beta_plus) u^{2p-1} over
// interior nodes.
double scalar_residual(const ScalarField& u, double alpha, double beta_plus, double p);
// Residual sup-norm of the limit system over interior nodes (both equations).
double coupled_residual(const FieldPair& w, const LimitParams& lp);

RadialGrid default_limit_grid(int N, double alpha_min, double h = 0.02);

ScalarField solve_scalar_ground(const ProblemParams& pp, double alpha, double beta_plus,
                                const RadialGrid& grid, double tol = 1e-8);

// Exact rescaling of the beta = 0 ground to the (1 + beta_plus) equation.
ScalarField rescale_ground(const ScalarField& U0, double beta_plus, double p);

struct LowerBoundReport {
    int bound_case = 0;  // 1: p >= 2 and 0 < beta < 1; 2: beta <= 0
    double J = 0;
    double bound = 0;
    double margin = 0;
    bool pass = false;
    double t_beta = 0, s_beta = 0;
    bool maximizer_is_unit = false;
};

// C10 is the numeric C_{1,0} for the same (N, p); the bound uses the scaling law.
LowerBoundReport lower_bound_check(const FieldPair& w, const LimitParams& lp, double C10,
                                   double floor = 1e-3, double unit_tol = 1e-6);

struct CoupledCandidate {
    std::string start;
    FieldPair w;
    double energy = 0;
    double residual = 0;
};

struct CoupledGroundResult {
    std::vector<CoupledCandidate> candidates;  // converged critical points, by increasing energy
    std::vector<std::string> failed_starts;
    const CoupledCandidate& best() const { return candidates.front(); }
};

CoupledGroundResult solve_coupled_ground_all(const LimitParams& lp, const RadialGrid& grid, double tol = 1e-8);
FieldPair solve_coupled_ground(const LimitParams& lp, const RadialGrid& grid, double tol = 1e-8);

// Lowest-energy coupled critical point energy (convenience for threshold probes).
double coupled_ground_energy(const LimitParams& lp, const RadialGrid& grid, double tol = 1e-8);

// Numeric C_{1,0} for (N, p), solved once per process and cached.
double numeric_C10(int N, double p);

}  // namespace solitonlab
