#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "solitonlab/limit.hpp"

namespace solitonlab {

// Numerical settings for every limit-problem solve issued by this module.
struct LimitSolver {
    double h = 0.01;    // radial spacing at unit alpha
    double tol = 1e-8;  // residual sup-norm

    RadialGrid grid_for(int N, double alpha_min, double alpha_max) const;
    ScalarField ground(const ProblemParams& pp, double alpha, double beta_plus) const;
    CoupledGroundResult coupled(const LimitParams& lp) const;
};

struct ScaledEnergy {
    double value = 0;
    bool nonpositive_exponent = false;  // p/(p-1) - N/2 <= 0
};

ScaledEnergy scaled_ground_energy(double alpha, double beta, double C10, const ProblemParams& pp);
// Convenience: value only.
double C_ab(double alpha, double beta, double C10, const ProblemParams& pp);

double beta_omega_p(double omega, double p, int N);

struct LevelSplit {
    double ratio = 0;  // (C_{m1,0} + C_{m2,0}) / C_{m1,0}
    int l_tilde = 0;
    double l_hat = 0;
    double target = 0;  // l_tilde - 1 if l_hat == 0, else l_tilde
};
LevelSplit level_split(double m1, double m2, const ProblemParams& pp);

double beta_tilde(double m1, double m2, const ProblemParams& pp);
double theta_of_beta(double m1, double m2, double beta, const ProblemParams& pp);

struct CstarResult {
    double value = 0;
    double t = 0, s = 0;  // maximizer
    double lower = 0;     // C_{m1,beta} + C_{m2,beta}
    double upper = 0;     // C_{m1,0} + C_{m2,0}
};

// Closed form for m1 = m2 and 0 <= beta < 1, p >= 2.
double cstar_closed_form(double m, double beta, double C10, const ProblemParams& pp);
CstarResult cstar(double m1, double m2, double beta, const ProblemParams& pp, const LimitSolver& solver);

struct SeparationBand {
    int k = 0;
    double lo = 0, hi = 0;  // attainable sums for k terms
    bool overlaps = false;  // meets the open window
    bool boundary_hit = false;
};

struct SeparationReport {
    double window_lo = 0, window_hi = 0;
    std::vector<SeparationBand> bands;
    double closest_below = 0;  // largest attainable sum <= window_lo
    double closest_above = 0;  // smallest attainable sum >= window_hi
    int boundary_hits = 0;
    bool pass = false;
};

// window = [C_{m1,beta} + C_{m2,beta}, cstar_value]; sums of k values
// C_{m1+delta_i,0}, delta_i in [0, theta]. Window endpoints are excluded;
// touching sums are counted as boundary hits.
SeparationReport separation_scan(double m1, double m2, double beta, double theta, int k_max, int grid_steps,
                                 double cstar_value, double C10, const ProblemParams& pp);

struct BetaGroundReport {
    double estimate = 0;
    double lo = 0, hi = 0;
    int probes = 0;
};

// samples: (V1(z), V2(z)) over a z-grid in Lambda.
BetaGroundReport beta_ground_estimate(const std::vector<std::pair<double, double>>& samples, const ProblemParams& pp,
                                      const LimitSolver& solver, double width = 0.02);

struct ThresholdReport {
    double C10 = 0;
    std::map<std::pair<double, double>, double> c_alpha_beta;
    double beta_omega_p = 0;
    double beta_tilde = 0;
    double theta = 0;
    double cstar = 0;
    double beta_ground = 0;
    int l_tilde = 0;
    double l_hat = 0;
    std::vector<std::string> notes;
};

// All thresholds for (m1, m2) at pp.beta. Quantities outside their domain are
// NaN with a note; beta_ground needs at least 9 samples (else NaN).
ThresholdReport threshold_report(double m1, double m2, const ProblemParams& pp, const LimitSolver& solver,
                                 const std::vector<std::pair<double, double>>& alpha_beta = {},
                                 const std::vector<std::pair<double, double>>& ground_samples = {});

}  // namespace solitonlab
