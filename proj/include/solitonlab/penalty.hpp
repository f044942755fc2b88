#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "solitonlab/core.hpp"

namespace solitonlab {

enum class DecayClass { inverse_power, fast_or_compact };

using PointFn = std::function<double(const Point&)>;

double distance(const Point& a, const Point& b);
double norm(const Point& x);

// Two potentials with concentric balls Lambda (radius lambda_radius) inside U
// (radius u_radius) around `center`. m1, m2 are sampled infima over Lambda.
struct PotentialSpec {
    std::string preset;
    int N = 1;
    PointFn V1, V2;
    Point center{0, 0, 0};
    double lambda_radius = 1.0;
    double u_radius = 2.0;
    double m1 = 0, m2 = 0;
    double omega = 1;
    DecayClass decay_class = DecayClass::inverse_power;
    double sigma = 0;  // tail exponent 2*sigma for inverse_power, 0 <= sigma <= 1
    std::vector<Point> M_set;
    // Sampled check of inf_Lambda (V1 + V2) < inf_{U \ Lambda} (V1 + V2).
    bool well_condition = false;

    double vmin(const Point& x) const { return std::min(V1(x), V2(x)); }
    bool in_lambda(const Point& x) const { return distance(x, center) < lambda_radius; }
    bool in_u(const Point& x) const { return distance(x, center) < u_radius; }

    // Samples m1, m2, omega, well_condition and validates the invariants.
    void finalize();
};

struct PresetInfo {
    std::string name;
    std::string description;
    std::map<std::string, double> defaults;
};

const std::vector<PresetInfo>& preset_catalog();

// Builds a named preset; unknown names or parameter keys are rejected.
PotentialSpec make_potential(const std::string& preset, int N, const std::map<std::string, double>& params = {});

enum class PenaltyCase { slow_decay = 1, fast_decay = 2 };

struct BarrierParams {
    double exponent = 3.0;  // power of (r - |x - x_omega|) in the barrier core
    double nu = 0;          // 0 selects the default from the linear-term balance
    double r = 0;           // 0 selects dist(x_omega, boundary of Lambda) / 3
    double R = 4.0;         // core radius in units of epsilon
    double C_bar = 0;       // 0 selects the smallest admissible value
    double mu = 0;          // 0 selects the case default
    double lin_delta = 0.1; // delta of the linearized inequality
};

struct PenaltySpec {
    double epsilon = 0.1;
    PenaltyCase kind = PenaltyCase::slow_decay;
    double sigma = 0;
    double kappa = 0.1;
    double delta_exp = 3.0;
    double varrho = 0;
    BarrierParams barrier;

    // Case defaults from (N, p) and the potential's decay class.
    static PenaltySpec make(const ProblemParams& pp, const PotentialSpec& pot, double epsilon);
    void validate(const ProblemParams& pp) const;
};

// P_eps: zero on Lambda, power law in |x| off Lambda.
class Penalty {
public:
    Penalty(PenaltySpec ps, const PotentialSpec& pot, int N);

    double operator()(const Point& x) const;
    bool in_lambda(const Point& x) const { return distance(x, center_) < lambda_radius_; }
    // sup over far-field samples |x| in [r_far, 4 r_far] of P|x|^{(2+kappa)sigma}
    // (slow case) or eps^{-2} P |x|^2 (fast case).
    double decay_sup(double r_far) const;
    const PenaltySpec& spec() const { return ps_; }

private:
    PenaltySpec ps_;
    Point center_;
    double lambda_radius_;
    int N_;
};

Penalty build_penalty(const PenaltySpec& ps, const PotentialSpec& pot);

// Penalized nonlinearities; P is the penalty value at the point and
// in_lambda the indicator of Lambda there.
double g_eps(double s, double P, bool in_lambda, double p);
double g_tilde(double s, double P, bool in_lambda, double p);
double G_eps(double s, double P, bool in_lambda, double p);
double G_tilde(double s, double P, bool in_lambda, double p);
// s-derivatives, used by the Newton Jacobian.
double dg_eps(double s, double P, bool in_lambda, double p);
double dg_tilde(double s, double P, bool in_lambda, double p);

// Per-node potential and penalty data for a grid.
struct NodeData {
    Vec V1, V2, P;
    std::vector<char> lambda;
};

NodeData node_data(const Grid& g, const PotentialSpec& pot, const Penalty& P);

// Throws validation_error when the grid does not cover U.
void check_covers(const Grid& g, const PotentialSpec& pot);

double penalized_energy(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps, const ProblemParams& pp);
double penalized_energy(const FieldPair& w, const NodeData& nd, double epsilon, const ProblemParams& pp);

FieldPair penalized_residual(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps,
                             const ProblemParams& pp);
FieldPair penalized_residual(const FieldPair& w, const NodeData& nd, double epsilon, const ProblemParams& pp);

// Analytic Jacobian of the stacked residual (boundary rows are identity).
SpMat penalized_jacobian(const FieldPair& w, const NodeData& nd, double epsilon, const ProblemParams& pp);

// (int |grad u|^2 - theta int u^2/|x|^2) / int u^2 for u vanishing on an
// origin ball of radius exclusion (default 2h).
double hardy_quotient(const ScalarField& u, double theta, double exclusion = -1);

// int P phi^2 / (int eps^2 |grad phi|^2 + V_min phi^2).
double domination_check(const ScalarField& phi, const PotentialSpec& pot, const PenaltySpec& ps);

}  // namespace solitonlab
