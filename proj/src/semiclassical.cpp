#include "solitonlab/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include <Eigen/SparseLU>

namespace solitonlab {

GridPtr semiclassical_grid(int N, double L, double epsilon, double points_per_eps, bool radial) {
    if (!(epsilon > 0 && L > 0 && points_per_eps >= 8))
        throw validation_error("semiclassical grid needs eps > 0, L > 0 and at least 8 points per eps");
    const double h = epsilon / points_per_eps;
    const int half = static_cast<int>(std::ceil(L / h - 1e-9));
    if (radial) return make_grid(RadialGrid(N, half * h, half + 1));
    return make_grid(BoxGrid(N, half * h, 2 * half + 1));
}

double higher_energy_beta_bound(const PotentialSpec& pot, const ProblemParams& pp, double kappa) {
    double bwp = beta_omega_p(pot.omega, pp.p, pp.N);
    double bt = beta_tilde(pot.m1, pot.m2, pp);
    return std::min(bwp, bt) / (1 + kappa);
}

namespace {

double weighted_norm(const Grid& g, const Vec& r1, const Vec& r2) {
    const auto& W = g.weights();
    return std::sqrt((W.array() * (r1.array().square() + r2.array().square())).sum());
}

ScalarField place(const GridPtr& grid, const ScalarField& profile, const Point& z, double epsilon, double scale) {
    return sample(grid, [&](const Point& x) { return scale * interpolate_radial(profile, distance(x, z) / epsilon); });
}

FieldPair initial_pair(const GridPtr& grid, const PotentialSpec& pot, const PenaltySpec& ps, const ProblemParams& pp,
                       const InitSpec& init, const SolveOptions& opt, std::string& kind, Point& z) {
    const int N = pp.N;
    if (const auto* gb = std::get_if<GroundBump>(&init)) {
        kind = "ground_bump";
        z = gb->z;
        const double a1 = pot.V1(z), a2 = pot.V2(z);
        LimitParams lp(pp, a1, a2);
        FieldPair W = solve_coupled_ground(lp, opt.limit.grid_for(N, std::min(a1, a2), std::max(a1, a2)), opt.limit.tol);
        return FieldPair(place(grid, W.u1, z, ps.epsilon, 1.0), place(grid, W.u2, z, ps.epsilon, 1.0));
    }
    const auto& sp = std::get<SynchronizedPair>(init);
    kind = "synchronized_pair";
    z = sp.z;
    if (!(pp.p >= 2)) throw validation_error("higher-energy runs need 2p >= 4");
    if (N > 3) throw validation_error("higher-energy runs need N <= 3");
    const double bound = higher_energy_beta_bound(pot, pp, opt.threshold_kappa);
    if (!(pp.beta > 0 && pp.beta < bound))
        throw validation_error("higher-energy runs need 0 < beta < " + std::to_string(bound));
    double t, s;
    if (sp.t && sp.s) {
        t = *sp.t;
        s = *sp.s;
    } else {
        auto cs = cstar(pot.m1, pot.m2, pp.beta, pp, opt.limit);
        t = cs.t;
        s = cs.s;
    }
    const double bp = std::max(pp.beta, 0.0);
    ScalarField U1 = opt.limit.ground(pp, pot.m1, bp);
    ScalarField U2 = opt.limit.ground(pp, pot.m2, bp);
    return FieldPair(place(grid, U1, z, ps.epsilon, t), place(grid, U2, z, ps.epsilon, s));
}

}  // namespace

PenalizedRun solve_penalized(const GridPtr& grid, const PotentialSpec& pot, const PenaltySpec& ps,
                             const ProblemParams& pp, const InitSpec& init, const SolveOptions& opt) {
    ps.validate(pp);
    check_covers(*grid, pot);
    if (grid->spacing() > ps.epsilon / 8 * (1 + 1e-12))
        throw validation_error("grid must resolve epsilon with at least 8 points (h <= eps/8)");
    Point z = std::visit([](const auto& i) { return i.z; }, init);
    if (!pot.in_lambda(z)) throw validation_error("initial concentration point must lie in Lambda");
    if (grid->is_radial() && norm(z) > 0) throw validation_error("radial grids need the bump at the origin");

    const auto& g = *grid;
    const NodeData nd = node_data(g, pot, build_penalty(ps, pot));
    PenalizedRun run;
    run.epsilon = ps.epsilon;
    FieldPair w = initial_pair(grid, pot, ps, pp, init, opt, run.init_kind, run.z);

    const int n = static_cast<int>(g.size());
    auto residual = [&](const FieldPair& f) { return penalized_residual(f, nd, ps.epsilon, pp); };
    FieldPair r = residual(w);
    double sup = std::max(r.u1.sup_norm(), r.u2.sup_norm());
    double nrm = weighted_norm(g, r.u1.values, r.u2.values);
    int it = 0;
    for (; it < opt.max_iter && sup > opt.tol; ++it) {
        SpMat J = penalized_jacobian(w, nd, ps.epsilon, pp);
        Eigen::SparseLU<SpMat> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw solver_error("penalized Newton: singular Jacobian", sup);
        Vec rhs(2 * n);
        rhs << r.u1.values, r.u2.values;
        Vec d = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !d.allFinite()) throw solver_error("penalized Newton: linear solve failed", sup);
        double lam = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            FieldPair trial(ScalarField(grid, w.u1.values - lam * d.head(n)), ScalarField(grid, w.u2.values - lam * d.tail(n)));
            FieldPair rt = residual(trial);
            double tn = weighted_norm(g, rt.u1.values, rt.u2.values);
            if (tn < nrm * (1 - 1e-4 * lam) || (tn <= nrm && lam < 1e-6)) {
                w = std::move(trial);
                r = std::move(rt);
                nrm = tn;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        sup = std::max(r.u1.sup_norm(), r.u2.sup_norm());
        if (!accepted) break;
    }
    run.residual = sup;
    run.iterations = it;
    if (!(sup <= opt.tol)) throw solver_error("penalized Newton did not converge", sup);

    const double top = std::max(w.u1.sup_norm(), w.u2.sup_norm());
    if (top < 1e-3) throw solver_error("penalized Newton collapsed to the trivial solution", sup);
    const double lo = std::min(w.u1.values.minCoeff(), w.u2.values.minCoeff());
    if (lo < -1e-8 * std::max(1.0, top)) throw solver_error("penalized solution has negative values", sup);

    Eigen::Index imax;
    (w.u1.values + w.u2.values).maxCoeff(&imax);
    auto mi = g.multi_index(static_cast<std::size_t>(imax));
    const int last = g.is_radial() ? g.radial().n - 1 : g.box().n_per_axis - 1;
    for (int k = 0; k < g.dim(); ++k) {
        bool near = g.is_radial() ? (k == 0 && mi[0] >= last - 4) : (mi[k] <= 4 || mi[k] >= last - 4);
        if (near) throw solver_error("peak migrated to the grid boundary", sup);
    }

    run.w = std::move(w);
    run.energy = penalized_energy(run.w, nd, ps.epsilon, pp);
    run.energy_over_epsN = run.energy / std::pow(ps.epsilon, pp.N);
    run.standard = run.w.u1.sup_norm() < 1e-3 || run.w.u2.sup_norm() < 1e-3;
    return run;
}

SweepResult epsilon_sweep(const SweepConfig& cfg) {
    if (cfg.epsilons.empty()) throw validation_error("epsilon sweep needs at least one epsilon");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        if (!(cfg.epsilons[i] > 0)) throw validation_error("epsilons must be positive");
        if (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))
            throw validation_error("epsilon list must be strictly decreasing");
    }

    struct Outcome {
        std::optional<SweepLevel> level;
        std::string error;
        bool solver = false;
    };
    auto one = [&](double eps) {
        Outcome o;
        try {
            PenaltySpec ps = cfg.penalty;
            ps.epsilon = eps;
            GridPtr grid = semiclassical_grid(cfg.pp.N, cfg.L, eps, cfg.points_per_eps, cfg.radial);
            SweepLevel lv;
            lv.run = solve_penalized(grid, cfg.pot, ps, cfg.pp, cfg.init, cfg.opt);
            lv.report = concentration_report(lv.run, cfg.pot);
            if (cfg.fit_decay) {
                try {
                    lv.report.decay = decay_fit(lv.run.w, lv.report, cfg.pot, ps, cfg.pp);
                } catch (const domain_error&) {
                }
            }
            o.level = std::move(lv);
        } catch (const solver_error& e) {
            o.error = e.what();
            o.solver = true;
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        return o;
    };

    const std::size_t L = cfg.epsilons.size();
    std::vector<Outcome> out(L);
    const std::size_t workers = static_cast<std::size_t>(std::max(1, cfg.threads));
    for (std::size_t start = 0; start < L; start += workers) {
        std::vector<std::future<Outcome>> fut;
        for (std::size_t i = start; i < std::min(L, start + workers); ++i)
            fut.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, one, cfg.epsilons[i]));
        for (std::size_t i = 0; i < fut.size(); ++i) out[start + i] = fut[i].get();
    }

    SweepResult res;
    res.complete = true;
    for (auto& o : out) {
        if (!o.level) {
            res.complete = false;
            res.error = o.error;
            res.solver_failure = o.solver;
            break;
        }
        res.levels.push_back(std::move(*o.level));
    }
    if (!res.levels.empty()) {
        res.dist_to_M_decreasing = true;
        double dmin = 1e300, dmax = 0, emin = 1e300, emax = -1e300, esum = 0;
        for (std::size_t i = 0; i < res.levels.size(); ++i) {
            const auto& r = res.levels[i].report;
            if (i > 0 && !(r.dist_to_M < res.levels[i - 1].report.dist_to_M)) res.dist_to_M_decreasing = false;
            dmin = std::min(dmin, r.dist_scaled);
            dmax = std::max(dmax, r.dist_scaled);
            emin = std::min(emin, r.energy_over_epsN);
            emax = std::max(emax, r.energy_over_epsN);
            esum += r.energy_over_epsN;
        }
        res.dist_scaled_ratio = dmin > 0 ? dmax / dmin : (dmax > 0 ? INFINITY : 1.0);
        res.energy_spread = (emax - emin) / (esum / static_cast<double>(res.levels.size()));
    }
    return res;
}

}  // namespace solitonlab
