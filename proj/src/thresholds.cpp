#include "solitonlab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace solitonlab {

namespace {

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b);
    if (!(fa * fb <= 0)) throw domain_error("root not bracketed");
    while (b - a > tol * (1 + std::abs(a))) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if ((fm <= 0) == (fa <= 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

RadialGrid LimitSolver::grid_for(int N, double alpha_min, double alpha_max) const {
    double hh = h / std::sqrt(std::max(1.0, alpha_max));
    return default_limit_grid(N, alpha_min, hh);
}

ScalarField LimitSolver::ground(const ProblemParams& pp, double alpha, double beta_plus) const {
    return solve_scalar_ground(pp, alpha, beta_plus, grid_for(pp.N, alpha, alpha), tol);
}

CoupledGroundResult LimitSolver::coupled(const LimitParams& lp) const {
    return solve_coupled_ground_all(
        lp, grid_for(lp.params.N, std::min(lp.alpha1, lp.alpha2), std::max(lp.alpha1, lp.alpha2)), tol);
}

ScaledEnergy scaled_ground_energy(double alpha, double beta, double C10, const ProblemParams& pp) {
    if (!(alpha > 0)) throw validation_error("scaled_ground_energy needs alpha > 0");
    if (!(beta > -1)) throw validation_error("scaled_ground_energy needs beta > -1");
    if (!(C10 > 0)) throw validation_error("scaled_ground_energy needs C10 > 0");
    ScaledEnergy e;
    double ex = pp.scaling_exponent();
    e.nonpositive_exponent = ex <= 0;
    e.value = std::pow(alpha, ex) * std::pow(1 + beta, -1.0 / (pp.p - 1)) * C10;
    return e;
}

double C_ab(double alpha, double beta, double C10, const ProblemParams& pp) {
    return scaled_ground_energy(alpha, beta, C10, pp).value;
}

double beta_omega_p(double omega, double p, int N) {
    if (!(omega > 0 && omega <= 1)) throw validation_error("beta_omega_p needs 0 < omega <= 1");
    if (!(p > 1)) throw validation_error("beta_omega_p needs p > 1");
    return std::pow(1 + std::pow(omega, p / (p - 1) - N / 2.0), p - 1) - 1;
}

LevelSplit level_split(double m1, double m2, const ProblemParams& pp) {
    if (!(m1 > 0 && m2 >= m1)) throw validation_error("level split needs 0 < m1 <= m2");
    LevelSplit s;
    s.ratio = 1 + std::pow(m2 / m1, pp.scaling_exponent());
    double fl = std::floor(s.ratio);
    double frac = s.ratio - fl;
    if (frac > 1 - 1e-12) {
        fl += 1;
        frac = 0;
    }
    if (frac < 1e-12) frac = 0;
    s.l_tilde = static_cast<int>(fl);
    s.l_hat = frac;
    s.target = frac == 0 ? s.l_tilde - 1 : s.l_tilde;
    return s;
}

double beta_tilde(double m1, double m2, const ProblemParams& pp) {
    if (!(m1 > 0 && m2 >= m1)) throw validation_error("beta_tilde needs 0 < m1 <= m2");
    if (m1 == m2) return 1.0;
    if (!(pp.scaling_exponent() > 0)) throw domain_error("beta_tilde needs p/(p-1) - N/2 > 0");
    auto sp = level_split(m1, m2, pp);
    // (C_{m1,b} + C_{m2,b}) / C_{m1,0} = ratio (1 + b)^{-1/(p-1)} decreases in b.
    auto g = [&](double b) { return sp.ratio * std::pow(1 + b, -1.0 / (pp.p - 1)) - sp.target; };
    double hi = 1.0;
    while (g(hi) > 0 && hi < 1e12) hi *= 2;
    if (g(hi) > 0) throw domain_error("beta_tilde: target level not bracketed");
    if (g(0.0) < 0) throw domain_error("beta_tilde: target level above the decoupled ratio");
    return bisect(g, 0.0, hi, 1e-13);
}

double theta_of_beta(double m1, double m2, double beta, const ProblemParams& pp) {
    double bt = beta_tilde(m1, m2, pp);
    if (!(beta > 0 && beta < bt)) throw domain_error("theta_of_beta needs 0 < beta < beta_tilde");
    const double e = pp.scaling_exponent();
    if (m1 == m2) return (std::pow(2.0 / std::pow(1 + beta, 1.0 / (pp.p - 1)), 1.0 / e) - 1) * m1;
    auto sp = level_split(m1, m2, pp);
    // (C_{m1,beta} + C_{m2,beta}) / C_{m1+theta,0}, scaled by C_{m1,0}.
    double lhs_num = sp.ratio * std::pow(1 + beta, -1.0 / (pp.p - 1));
    auto g = [&](double th) { return lhs_num / std::pow((m1 + th) / m1, e) - sp.target; };
    double hi = m1;
    while (g(hi) > 0 && hi < 1e12) hi *= 2;
    return bisect(g, 0.0, hi, 1e-13);
}

double cstar_closed_form(double m, double beta, double C10, const ProblemParams& pp) {
    return 2.0 * std::pow(1 + beta, -1.0 / (pp.p - 1)) * C_ab(m, 0.0, C10, pp);
}

CstarResult cstar(double m1, double m2, double beta, const ProblemParams& pp, const LimitSolver& solver) {
    if (!(m1 > 0 && m2 > 0)) throw validation_error("cstar needs m1, m2 > 0");
    if (!(beta >= 0)) throw validation_error("cstar needs beta >= 0");
    const double p = pp.p;
    auto grid = solver.grid_for(pp.N, std::min(m1, m2), std::max(m1, m2));
    ProblemParams q(pp.N, p, beta);
    ScalarField U1 = solve_scalar_ground(q, m1, beta, grid, solver.tol);
    ScalarField U2 = solve_scalar_ground(q, m2, beta, grid, solver.tol);
    if (U1.grid->size() != U2.grid->size()) {
        // Domain doubling may differ between the two solves; put both on the larger grid.
        const auto& big = U1.grid->size() > U2.grid->size() ? U1.grid : U2.grid;
        auto rs = [&](const ScalarField& f) {
            Vec v(static_cast<Eigen::Index>(big->size()));
            for (std::size_t i = 0; i < big->size(); ++i)
                v[static_cast<Eigen::Index>(i)] = interpolate_radial(f, big->position(i)[0]);
            return ScalarField(big, v);
        };
        U1 = rs(U1);
        U2 = rs(U2);
    }
    ScalarField U2s(U1.grid, U2.values);
    LimitParams lp(q, m1, m2);
    auto rep = nehari_data(FieldPair(U1, U2s), lp);

    auto G = [&](double t, double s) { return nehari_energy(rep, p, beta, t, s); };
    CstarResult out;
    double best = -1e300, bt = 1, bs = 1;
    const int M = 61;
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            double t = std::pow(10.0, -2.0 + 4.0 * i / (M - 1));
            double s = std::pow(10.0, -2.0 + 4.0 * j / (M - 1));
            double v = G(t, s);
            if (v > best) {
                best = v;
                bt = t;
                bs = s;
            }
        }
    }
    // Local ascent: interior maxima are Nehari roots; keep the best one.
    try {
        for (const auto& [t, s] : nehari_roots(rep, p, beta)) {
            double v = G(t, s);
            if (v > best) {
                best = v;
                bt = t;
                bs = s;
            }
        }
    } catch (const std::exception&) {
    }
    // Coordinate refinement for maxima approached along an axis.
    for (int pass = 0; pass < 60; ++pass) {
        double step = 0.1 * std::pow(0.7, pass);
        for (int d = 0; d < 4; ++d) {
            double t = bt * std::exp(d == 0 ? step : d == 1 ? -step : 0.0);
            double s = bs * std::exp(d == 2 ? step : d == 3 ? -step : 0.0);
            double v = G(t, s);
            if (v > best) {
                best = v;
                bt = t;
                bs = s;
            }
        }
    }
    out.value = best;
    out.t = bt;
    out.s = bs;
    double C10 = numeric_C10(pp.N, p);
    out.lower = C_ab(m1, beta, C10, pp) + C_ab(m2, beta, C10, pp);
    out.upper = C_ab(m1, 0.0, C10, pp) + C_ab(m2, 0.0, C10, pp);
    if (out.value < out.lower * (1 - 1e-3) || out.value > out.upper * (1 + 1e-3))
        throw consistency_error("cstar violates the sandwich C_{m1,b}+C_{m2,b} <= C* < C_{m1,0}+C_{m2,0}");
    return out;
}

SeparationReport separation_scan(double m1, double m2, double beta, double theta, int k_max, int grid_steps,
                                 double cstar_value, double C10, const ProblemParams& pp) {
    if (k_max < 1) throw validation_error("separation_scan needs k_max >= 1");
    if (grid_steps < 100) throw validation_error("separation_scan needs grid_steps >= 100");
    if (!(theta >= 0)) throw validation_error("separation_scan needs theta >= 0");
    SeparationReport r;
    r.window_lo = C_ab(m1, beta, C10, pp) + C_ab(m2, beta, C10, pp);
    r.window_hi = cstar_value;
    const double lo = r.window_lo, hi = r.window_hi;
    const double eps = 1e-9 * std::max(std::abs(lo), std::abs(hi));
    r.closest_below = -1e300;
    r.closest_above = 1e300;
    bool any_overlap = false;
    auto consider = [&](double v) {
        if (v <= lo + eps) r.closest_below = std::max(r.closest_below, v);
        if (v >= hi - eps) r.closest_above = std::min(r.closest_above, v);
    };
    for (int k = 1; k <= k_max; ++k) {
        SeparationBand b;
        b.k = k;
        b.lo = k * C_ab(m1, 0.0, C10, pp);
        b.hi = k * C_ab(m1 + theta, 0.0, C10, pp);
        // Interior points of the band against the open window.
        b.overlaps = (b.lo < hi - eps) && (b.hi > lo + eps) && (hi - lo > 2 * eps);
        // A degenerate window still excludes sums strictly inside a band that covers it.
        if (hi - lo <= 2 * eps && b.lo < lo - eps && b.hi > hi + eps) b.overlaps = true;
        b.boundary_hit = std::abs(b.lo - lo) <= eps || std::abs(b.lo - hi) <= eps || std::abs(b.hi - lo) <= eps ||
                         std::abs(b.hi - hi) <= eps;
        // Explicit enumeration of the delta grid (equal deltas sweep the band).
        for (int j = 0; j <= grid_steps; ++j) {
            double d = theta * j / grid_steps;
            double v = k * C_ab(m1 + d, 0.0, C10, pp);
            if (v > lo + eps && v < hi - eps) b.overlaps = true;
            consider(v);
        }
        if (b.boundary_hit) ++r.boundary_hits;
        any_overlap = any_overlap || b.overlaps;
        r.bands.push_back(b);
    }
    r.pass = !any_overlap;
    return r;
}

BetaGroundReport beta_ground_estimate(const std::vector<std::pair<double, double>>& samples, const ProblemParams& pp,
                                      const LimitSolver& solver, double width) {
    if (samples.size() < 9) throw validation_error("beta_ground_estimate needs at least 9 z-samples");
    BetaGroundReport r;
    // Reference: the smallest semitrivial energy over the samples, from the same solves.
    auto probe = [&](double beta) {
        ++r.probes;
        double best = 1e300, semi = 1e300;
        for (const auto& [a1, a2] : samples) {
            LimitParams lp(ProblemParams(pp.N, pp.p, beta), a1, a2);
            auto res = solver.coupled(lp);
            best = std::min(best, res.best().energy);
            for (const auto& c : res.candidates)
                if (c.start.rfind("semitrivial", 0) == 0) semi = std::min(semi, c.energy);
        }
        // True while the minimum is still the semitrivial level.
        return best >= semi - 1e-10 * std::abs(semi);
    };
    double lo = 0.0, hi = 1.0;
    while (probe(hi)) {
        lo = hi;
        hi *= 2;
        if (hi > 1024) throw solver_error("beta_ground_estimate: no upper bracket below 1024", 0.0);
    }
    while (hi - lo > width) {
        double m = 0.5 * (lo + hi);
        if (probe(m))
            lo = m;
        else
            hi = m;
    }
    r.lo = lo;
    r.hi = hi;
    r.estimate = 0.5 * (lo + hi);
    return r;
}

ThresholdReport threshold_report(double m1, double m2, const ProblemParams& pp, const LimitSolver& solver,
                                 const std::vector<std::pair<double, double>>& alpha_beta,
                                 const std::vector<std::pair<double, double>>& ground_samples) {
    if (!(m1 > 0 && m2 >= m1)) throw validation_error("thresholds need 0 < m1 <= m2");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ThresholdReport r;
    r.C10 = numeric_C10(pp.N, pp.p);
    for (const auto& [a, b] : alpha_beta) r.c_alpha_beta[{a, b}] = C_ab(a, b, r.C10, pp);
    r.beta_omega_p = beta_omega_p(m1 / m2, pp.p, pp.N);
    const LevelSplit ls = level_split(m1, m2, pp);
    r.l_tilde = ls.l_tilde;
    r.l_hat = ls.l_hat;
    auto guarded = [&](const char* name, auto&& f) {
        try {
            return f();
        } catch (const domain_error& e) {
            r.notes.push_back(std::string(name) + ": " + e.what());
            return nan;
        }
    };
    r.beta_tilde = guarded("beta_tilde", [&] { return beta_tilde(m1, m2, pp); });
    r.theta = guarded("theta", [&] { return theta_of_beta(m1, m2, pp.beta, pp); });
    if (pp.beta >= 0)
        r.cstar = cstar(m1, m2, pp.beta, pp, solver).value;
    else {
        r.cstar = nan;
        r.notes.push_back("cstar: needs beta >= 0");
    }
    if (ground_samples.size() >= 9)
        r.beta_ground = beta_ground_estimate(ground_samples, pp, solver).estimate;
    else {
        r.beta_ground = nan;
        r.notes.push_back("beta_ground: fewer than 9 potential samples");
    }
    return r;
}

}  // namespace solitonlab
