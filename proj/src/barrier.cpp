#include <algorithm>
#include <cmath>

#include "solitonlab/semiclassical.hpp"

namespace solitonlab {

namespace {

double smoothstep_down(double t) {
    if (t <= 0) return 1.0;
    if (t >= 1) return 0.0;
    return 1.0 - t * t * t * (10 - 15 * t + 6 * t * t);
}

// Outer profile: constant `inner` on Lambda, `tail(x)` outside U, blended
// across U \ Lambda in the distance to the center of Lambda.
struct OuterProfile {
    const PotentialSpec* pot;
    double inner;
    std::function<double(const Point&)> tail;

    double operator()(const Point& x) const {
        double t = (distance(x, pot->center) - pot->lambda_radius) / (pot->u_radius - pot->lambda_radius);
        double s = smoothstep_down(t);
        if (s >= 1) return inner;
        return s * inner + (1 - s) * tail(x);
    }
};

}  // namespace

BarrierReport barrier_supersolution(const GridPtr& grid, const PotentialSpec& pot, const PenaltySpec& ps,
                                    const ProblemParams& pp, const ConcentrationReport& rep, BarrierKind kind,
                                    double tol) {
    ps.validate(pp);
    check_covers(*grid, pot);
    const auto& g = *grid;
    const auto& bp = ps.barrier;
    const double eps = ps.epsilon;
    const Point c = rep.x_omega;
    const double to_edge = pot.lambda_radius - distance(c, pot.center);
    if (!(to_edge > 0)) throw domain_error("barrier needs x_omega inside Lambda");

    BarrierReport br;
    br.r = bp.r > 0 ? bp.r : to_edge / 3;
    br.R = bp.R;
    br.C_tilde = rep.peak1 + rep.peak2;
    if (!(br.R * eps < br.r)) throw domain_error("barrier core ball B_{R eps} must lie inside B_r; decrease epsilon or R");
    if (!(br.r < to_edge)) throw domain_error("barrier radius r must stay inside Lambda");

    const double b = bp.exponent, dl = bp.lin_delta, m1 = pot.m1;
    const double d = norm(pot.center) + pot.lambda_radius;  // max over Lambda of |x|
    const bool slow = ps.kind == PenaltyCase::slow_decay;

    OuterProfile w{&pot, 1.0, {}};
    if (slow) {
        br.mu = bp.mu > 0 ? bp.mu : (2 * ps.sigma + 2 * ps.kappa) / (2 * pp.p - 2);
        const double mu = br.mu;
        w.inner = 1.0 / d;
        w.tail = [mu](const Point& x) { return std::pow(norm(x), -mu); };
    } else {
        br.mu = bp.mu > 0 ? bp.mu : pp.N - 2.0;
        const double mu = br.mu, rho = ps.varrho;
        const double cc = 0.5 * std::pow(pot.u_radius - norm(pot.center), rho);
        w.inner = 1.0;
        w.tail = [mu, rho, cc](const Point& x) {
            double r = norm(x);
            return std::pow(r, -mu) * (1 - cc * std::pow(r, -rho));
        };
    }

    std::function<double(const Point&)> U;
    if (kind == BarrierKind::power) {
        const double A = slow ? eps * eps : std::pow(eps, 3.0 / (2 * pp.p - 2));
        const double eta = slow ? eps : A;
        br.nu = bp.nu > 0 ? bp.nu : (1 - dl) * m1 * eta * eta / (eps * eps * b * (b - 1) * std::pow(br.r, b - 2));
        const double core_min = 1 + br.nu * std::pow(br.r - br.R * eps, b) / (eta * eta);
        br.C_bar = bp.C_bar > 0 ? bp.C_bar : br.C_tilde / (A * w.inner * core_min);
        br.plateau = A * br.C_bar * w.inner;
        const double nu = br.nu, Cb = br.C_bar, r = br.r;
        U = [=](const Point& x) {
            double rho = distance(x, c);
            double pn = rho < r ? 1 + nu * std::pow(r - rho, b) / (eta * eta) : 1.0;
            return A * Cb * pn * w(x);
        };
    } else {
        const double k = std::sqrt((1 - dl) * m1);
        const double K = std::cosh(k * (br.r / eps - br.R));
        br.C_bar = br.C_tilde;
        br.plateau = br.C_tilde / K;
        const double Ct = br.C_tilde, r = br.r, inner = w.inner;
        U = [=](const Point& x) {
            double rho = distance(x, c);
            if (rho < r) return Ct * std::cosh(k * (r - rho) / eps) / K;
            return Ct * w(x) / (inner * K);
        };
    }

    br.U = sample(grid, U);
    const NodeData nd = node_data(g, pot, build_penalty(ps, pot));
    const Vec KU = g.neg_laplacian() * br.U.values;
    br.min_residual = INFINITY;
    br.max_penalty_ratio = 0;
    const double q = 2 * pp.p - 2;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const Point x = g.position(i);
        const double u = br.U.values[ii];
        if (!nd.lambda[i] && nd.P[ii] > 0) br.max_penalty_ratio = std::max(br.max_penalty_ratio, std::pow(u, q) / nd.P[ii]);
        if (g.is_boundary(i)) continue;
        if (distance(x, c) < br.R * eps) {
            ++br.checked;
            if (u < br.C_tilde * (1 - tol)) ++br.violations;
            continue;
        }
        const double vmin = std::min(nd.V1[ii], nd.V2[ii]);
        const double a = eps * eps * KU[ii], bb = (1 - dl) * vmin * u, pc = nd.P[ii] * u;
        const double scale = std::abs(a) + std::abs(bb) + std::abs(pc);
        const double res = scale > 0 ? (a + bb - pc) / scale : 0.0;
        ++br.checked;
        br.min_residual = std::min(br.min_residual, res);
        if (res < -tol) ++br.violations;
    }
    br.below_penalty = br.max_penalty_ratio < 1;
    if (br.violations > 0.001 * br.checked)
        throw domain_error("barrier inequality violated at " + std::to_string(br.violations) + " of " +
                           std::to_string(br.checked) + " nodes");
    return br;
}

}  // namespace solitonlab
