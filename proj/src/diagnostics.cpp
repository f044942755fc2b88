#include <algorithm>
#include <cmath>

#include "solitonlab/semiclassical.hpp"

namespace solitonlab {

namespace {

struct Peak {
    Point x{};
    double value = 0;
    bool tie = false;
};

Peak locate(const Grid& g, const Vec& f) {
    Peak pk;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < f.size(); ++i)
        if (f[i] > f[best]) best = i;
    pk.value = f[best];
    const std::size_t b = static_cast<std::size_t>(best);
    pk.x = g.position(b);
    const auto mi = g.multi_index(b);
    const double h = g.spacing();

    for (int k = 0; k < g.dim(); ++k) {
        const int last = g.is_radial() ? g.radial().n - 1 : g.box().n_per_axis - 1;
        if (mi[k] == 0 && g.is_radial()) continue;  // even profile: the peak sits at the origin
        if (mi[k] == 0 || mi[k] == last) continue;
        auto nb = mi;
        nb[k] = mi[k] - 1;
        double fm = f[static_cast<Eigen::Index>(g.index(nb[0], nb[1], nb[2]))];
        nb[k] = mi[k] + 1;
        double fp = f[static_cast<Eigen::Index>(g.index(nb[0], nb[1], nb[2]))];
        double den = fm - 2 * pk.value + fp;
        if (den < 0) pk.x[k] += std::clamp(0.5 * (fm - fp) / den, -0.5, 0.5) * h;
    }

    const double thr = pk.value - 1e-9 * std::abs(pk.value);
    const Point xb = g.position(b);
    for (Eigen::Index i = 0; i < f.size(); ++i)
        if (i != best && f[i] >= thr && distance(g.position(static_cast<std::size_t>(i)), xb) > 2 * h) {
            pk.tie = true;
            break;
        }
    return pk;
}

Point mean3(const Point& a, const Point& b, const Point& c) {
    return {(a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3, (a[2] + b[2] + c[2]) / 3};
}

}  // namespace

ConcentrationReport find_peaks(const FieldPair& w, double epsilon, double floor) {
    const auto& g = *w.grid();
    ConcentrationReport r;
    r.epsilon = epsilon;
    Vec sum = w.u1.values + w.u2.values;
    Peak ps = locate(g, sum);
    if (!(ps.value >= floor)) throw domain_error("degenerate field: maximum below the floor");
    Peak p1 = locate(g, w.u1.values), p2 = locate(g, w.u2.values);
    r.x_sum_peak = ps.x;
    r.peak_sum = ps.value;
    r.peak1 = p1.value;
    r.peak2 = p2.value;
    r.standard = p1.value < floor || p2.value < floor;
    // A vanishing component has no meaningful argmax; use the sum's.
    r.x1_peak = p1.value < floor ? ps.x : p1.x;
    r.x2_peak = p2.value < floor ? ps.x : p2.x;
    r.tie = ps.tie || (p1.value >= floor && p1.tie) || (p2.value >= floor && p2.tie);
    r.x_omega = mean3(r.x1_peak, r.x2_peak, r.x_sum_peak);
    r.dist_scaled = distance(r.x1_peak, r.x2_peak) / epsilon;
    return r;
}

ConcentrationReport concentration_report(const PenalizedRun& run, const PotentialSpec& pot) {
    ConcentrationReport r = find_peaks(run.w, run.epsilon);
    r.energy_over_epsN = run.energy_over_epsN;
    r.dist_to_M = INFINITY;
    for (const auto& m : pot.M_set) r.dist_to_M = std::min(r.dist_to_M, distance(r.x_sum_peak, m));
    if (pot.M_set.empty()) r.dist_to_M = 0;
    return r;
}

WindowThresholds higher_energy_window(const PotentialSpec& pot, const ProblemParams& pp, const LimitSolver& solver) {
    WindowThresholds th;
    th.higher = true;
    const double C10 = numeric_C10(pp.N, pp.p);
    th.lower = C_ab(pot.m1, pp.beta, C10, pp) + C_ab(pot.m2, pp.beta, C10, pp);
    th.upper = cstar(pot.m1, pot.m2, pp.beta, pp, solver).value;
    return th;
}

WindowThresholds ground_energy_window(const PotentialSpec& pot, const Point& z, const ProblemParams& pp,
                                      const LimitSolver& solver) {
    WindowThresholds th;
    th.higher = false;
    th.lower = 0;
    th.upper = solver.coupled(LimitParams(pp, pot.V1(z), pot.V2(z))).best().energy;
    return th;
}

WindowReport energy_window_check(const PenalizedRun& run, const WindowThresholds& th, double slack) {
    WindowReport r;
    r.value = run.energy_over_epsN;
    r.lower = th.lower;
    r.upper = th.upper;
    r.slack = slack;
    r.margin_lower = r.value - th.lower * (1 - slack);
    r.margin_upper = th.upper * (1 + slack) - r.value;
    r.pass = r.margin_upper >= 0 && (!th.higher || r.margin_lower >= 0);
    return r;
}

DecayFit decay_fit(const FieldPair& w, const ConcentrationReport& rep, const PotentialSpec& pot,
                   const PenaltySpec& ps, const ProblemParams& pp, double r_out_scaled) {
    const auto& g = *w.grid();
    const double eps = ps.epsilon;
    DecayFit fit;
    if (pot.decay_class == DecayClass::fast_or_compact)
        fit.model = DecayModel::fast_product;
    else
        fit.model = ps.sigma >= 1 ? DecayModel::power_law : DecayModel::exponential;

    // Stay away from the Dirichlet layer.
    double wall = g.is_radial() ? g.radial().r_max : INFINITY;
    if (!g.is_radial())
        for (int k = 0; k < g.dim(); ++k)
            wall = std::min(wall, g.box().L - std::abs(rep.x_omega[k]));
    fit.r_in = 4 * eps;
    fit.r_out = std::min(r_out_scaled * eps, 0.8 * wall);

    const Penalty P = build_penalty(ps, pot);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < g.size(); ++i) {
        Point x = g.position(i);
        double rho = distance(x, rep.x_omega);
        if (rho < fit.r_in || rho > fit.r_out) continue;
        double v = w.u1.values[static_cast<Eigen::Index>(i)] + w.u2.values[static_cast<Eigen::Index>(i)];
        if (!(v > 1e-12)) continue;
        if (!pot.in_lambda(x) && std::pow(v, 2 * pp.p - 2) > P(x)) continue;
        double X = 0, Y = std::log(v);
        switch (fit.model) {
            case DecayModel::exponential: X = std::pow(rho / eps, 1 - ps.sigma); break;
            case DecayModel::power_law: X = std::log(rho); break;
            case DecayModel::fast_product:
                X = rho / (eps * (1 + rho));
                Y += std::log(1 + std::pow(norm(x), pp.N - 2));
                break;
        }
        xs.push_back(X);
        ys.push_back(Y);
    }
    fit.samples = static_cast<int>(xs.size());
    if (fit.samples < 20) throw domain_error("decay fit needs at least 20 annulus samples above 1e-12");

    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0) || !(syy > 0)) throw domain_error("decay fit has no dynamic range");
    const double slope = sxy / sxx;
    fit.amplitude = my - slope * mx;
    fit.r2 = sxy * sxy / (sxx * syy);
    switch (fit.model) {
        case DecayModel::exponential:
            fit.c = -slope;
            fit.exponent = 1 - ps.sigma;
            fit.rate = fit.c / std::pow(eps, 1 - ps.sigma);
            break;
        case DecayModel::power_law:
            fit.exponent = -slope;
            fit.c = fit.exponent;
            fit.rate = fit.exponent;
            break;
        case DecayModel::fast_product:
            fit.c = -slope;
            fit.exponent = 1;
            fit.rate = fit.c / eps;
            break;
    }
    return fit;
}

VerifyReport verify_original(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps,
                             const ProblemParams& pp) {
    const auto& g = *w.grid();
    const Penalty P = build_penalty(ps, pot);
    const double q = 2 * pp.p - 2;
    VerifyReport r;
    r.min_margin = INFINITY;
    bool any_mass = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        Point x = g.position(i);
        if (pot.in_lambda(x)) continue;
        ++r.checked;
        const double a = std::max(0.0, w.u1.values[static_cast<Eigen::Index>(i)]);
        const double b = std::max(0.0, w.u2.values[static_cast<Eigen::Index>(i)]);
        any_mass = any_mass || a > 0 || b > 0;
        const double Px = P(x);
        bool bad = false;
        if (std::pow(a, q) > Px) {
            ++r.violations1;
            bad = true;
        }
        if (std::pow(b, q) > Px) {
            ++r.violations2;
            bad = true;
        }
        const double m = Px - std::pow(a + b, q);
        if (m < 0) {
            ++r.violations_sum;
            bad = true;
        }
        r.min_margin = std::min(r.min_margin, m);
        if (bad && r.locations.size() < 20) r.locations.push_back(x);
    }
    r.vacuous = !any_mass;
    r.pass = r.violations1 == 0 && r.violations2 == 0 && r.violations_sum == 0;
    return r;
}

}  // namespace solitonlab
