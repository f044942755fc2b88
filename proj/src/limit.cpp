#include "solitonlab/limit.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace solitonlab {

LimitParams::LimitParams(ProblemParams pp, double a1, double a2) : params(pp), alpha1(a1), alpha2(a2) {
    if (!(alpha1 > 0) || !(alpha2 > 0)) throw validation_error("limit system needs alpha1, alpha2 > 0");
}

namespace {

Vec pos_pow(const Vec& u, double q) { return u.cwiseMax(0.0).array().pow(q).matrix(); }

void zero_boundary(const Grid& g, Vec& v) {
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.is_boundary(i)) v[static_cast<Eigen::Index>(i)] = 0.0;
}

double interior_sup(const Grid& g, const Vec& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g.is_boundary(i)) m = std::max(m, std::abs(v[static_cast<Eigen::Index>(i)]));
    return m;
}

// Block operator diag(blocks) + K-terms, with identity rows on the Dirichlet layer.
// diag_self[c] adds a diagonal, coupling[c] adds off-diagonal block entries.
SpMat assemble(const Grid& g, int ncomp, const std::vector<double>& kscale,
               const std::vector<Vec>& diag_self, const std::vector<std::pair<std::pair<int, int>, Vec>>& off) {
    const int n = static_cast<int>(g.size());
    const SpMat& K = g.neg_laplacian();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(K.nonZeros() * ncomp + 2 * n * ncomp));
    for (int c = 0; c < ncomp; ++c) {
        for (int k = 0; k < K.outerSize(); ++k) {
            for (SpMat::InnerIterator it(K, k); it; ++it) {
                int row = static_cast<int>(it.row());
                if (g.is_boundary(static_cast<std::size_t>(row))) continue;
                t.emplace_back(c * n + row, c * n + static_cast<int>(it.col()), kscale[c] * it.value());
            }
        }
        for (int i = 0; i < n; ++i) {
            if (g.is_boundary(static_cast<std::size_t>(i)))
                t.emplace_back(c * n + i, c * n + i, 1.0);
            else
                t.emplace_back(c * n + i, c * n + i, diag_self[c][i]);
        }
    }
    for (const auto& [blk, v] : off) {
        for (int i = 0; i < n; ++i) {
            if (g.is_boundary(static_cast<std::size_t>(i)) || v[i] == 0.0) continue;
            t.emplace_back(blk.first * n + i, blk.second * n + i, v[i]);
        }
    }
    SpMat A(ncomp * n, ncomp * n);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

struct PairState {
    Vec u1, u2;
    bool on1 = true, on2 = true;
    double gamma = 1.0;  // self-interaction coefficient (1 + beta_plus for scalar solves)
};

// Nonlinearities of the limit system with positive parts.
void pair_nonlin(const PairState& s, double p, double beta, Vec& f1, Vec& f2) {
    Vec a1 = s.u1.cwiseMax(0.0), a2 = s.u2.cwiseMax(0.0);
    f1 = s.gamma * a1.array().pow(2 * p - 1).matrix();
    f2 = s.gamma * a2.array().pow(2 * p - 1).matrix();
    if (beta != 0.0) {
        Vec a1p = a1.array().pow(p).matrix(), a2p = a2.array().pow(p).matrix();
        f1 += beta * a1.array().pow(p - 1).cwiseProduct(a2p.array()).matrix();
        f2 += beta * a2.array().pow(p - 1).cwiseProduct(a1p.array()).matrix();
    }
}

double pair_residual(const Grid& g, const PairState& s, const LimitParams& lp, Vec* r1 = nullptr, Vec* r2 = nullptr) {
    Vec f1, f2;
    pair_nonlin(s, lp.params.p, lp.params.beta, f1, f2);
    Vec q1 = g.neg_laplacian() * s.u1 + lp.alpha1 * s.u1 - f1;
    Vec q2 = g.neg_laplacian() * s.u2 + lp.alpha2 * s.u2 - f2;
    zero_boundary(g, q1);
    zero_boundary(g, q2);
    if (!s.on1) q1.setZero();
    if (!s.on2) q2.setZero();
    double m = std::max(q1.cwiseAbs().maxCoeff(), q2.cwiseAbs().maxCoeff());
    if (r1) *r1 = std::move(q1);
    if (r2) *r2 = std::move(q2);
    return m;
}

NehariReport data_of(const Grid& g, const PairState& s, const LimitParams& lp) {
    const double p = lp.params.p;
    NehariReport r;
    r.X1 = g.dirichlet_integral(s.u1) + lp.alpha1 * integrate(g, s.u1.cwiseAbs2());
    r.X2 = g.dirichlet_integral(s.u2) + lp.alpha2 * integrate(g, s.u2.cwiseAbs2());
    r.Y1 = s.gamma * integrate(g, s.u1.cwiseAbs().array().pow(2 * p).matrix());
    r.Y2 = s.gamma * integrate(g, s.u2.cwiseAbs().array().pow(2 * p).matrix());
    r.Z = integrate(g, s.u1.cwiseProduct(s.u2).cwiseAbs().array().pow(p).matrix());
    return r;
}

double pair_energy(const Grid& g, const PairState& s, const LimitParams& lp) {
    auto r = data_of(g, s, lp);
    return nehari_energy(r, lp.params.p, lp.params.beta, 1.0, 1.0);
}

// Projects onto the Nehari set of the active components. Returns false if no
// positive scaling exists.
// The first projection of a start may select the smallest-(t + s) root; later
// projections follow the root nearest to the identity scaling.
bool project(const Grid& g, PairState& s, const LimitParams& lp, bool smallest = false) {
    const double p = lp.params.p, beta = lp.params.beta;
    auto r = data_of(g, s, lp);
    if (s.on1 && s.on2) {
        try {
            std::optional<std::pair<double, double>> hint;
            if (!smallest) hint = std::make_pair(1.0, 1.0);
            auto [t, q] = solve_nehari_2x2(r, p, beta, hint);
            s.u1 *= t;
            s.u2 *= q;
            return true;
        } catch (const std::exception&) {
            double den = r.Y1 + r.Y2 + 2 * beta * r.Z;
            if (!(den > 0)) return false;
            double t = std::pow((r.X1 + r.X2) / den, 1.0 / (2 * p - 2));
            s.u1 *= t;
            s.u2 *= t;
            return true;
        }
    }
    if (s.on1) {
        if (!(r.Y1 > 0)) return false;
        s.u1 *= std::pow(r.X1 / r.Y1, 1.0 / (2 * p - 2));
    }
    if (s.on2) {
        if (!(r.Y2 > 0)) return false;
        s.u2 *= std::pow(r.X2 / r.Y2, 1.0 / (2 * p - 2));
    }
    return true;
}

// Newton with residual line search on the active components.
bool pair_newton(const Grid& g, PairState& s, const LimitParams& lp, double tol, int max_it, double& res) {
    const double p = lp.params.p, beta = lp.params.beta;
    const int n = static_cast<int>(g.size());
    res = pair_residual(g, s, lp);
    for (int it = 0; it < max_it && res > tol; ++it) {
        Vec r1, r2;
        pair_residual(g, s, lp, &r1, &r2);
        Vec a1 = s.u1.cwiseMax(0.0), a2 = s.u2.cwiseMax(0.0);
        double fl1 = 1e-12 * std::max(1e-300, a1.maxCoeff());
        double fl2 = 1e-12 * std::max(1e-300, a2.maxCoeff());
        Vec b1 = a1.cwiseMax(fl1), b2 = a2.cwiseMax(fl2);
        Vec d11 = Vec::Constant(n, lp.alpha1) - s.gamma * (2 * p - 1) * a1.array().pow(2 * p - 2).matrix();
        Vec d22 = Vec::Constant(n, lp.alpha2) - s.gamma * (2 * p - 1) * a2.array().pow(2 * p - 2).matrix();
        Vec c12 = Vec::Zero(n), c21 = Vec::Zero(n);
        if (beta != 0.0) {
            d11 -= beta * (p - 1) * (b1.array().pow(p - 2) * a2.array().pow(p)).matrix();
            d22 -= beta * (p - 1) * (b2.array().pow(p - 2) * a1.array().pow(p)).matrix();
            c12 = -beta * p * (a1.array().pow(p - 1) * a2.array().pow(p - 1)).matrix();
            c21 = c12;
        }
        Vec delta;
        if (s.on1 && s.on2) {
            SpMat J = assemble(g, 2, {1.0, 1.0}, {d11, d22}, {{{0, 1}, c12}, {{1, 0}, c21}});
            Eigen::SparseLU<SpMat> lu(J);
            if (lu.info() != Eigen::Success) return false;
            Vec rhs(2 * n);
            rhs << r1, r2;
            delta = lu.solve(rhs);
        } else {
            const Vec& d = s.on1 ? d11 : d22;
            SpMat J = assemble(g, 1, {1.0}, {d}, {});
            Eigen::SparseLU<SpMat> lu(J);
            if (lu.info() != Eigen::Success) return false;
            Vec sol = lu.solve(s.on1 ? r1 : r2);
            delta = Vec::Zero(2 * n);
            (s.on1 ? delta.head(n) : delta.tail(n)) = sol;
        }
        if (!delta.allFinite()) return false;
        double lam = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 30; ++ls) {
            PairState trial = s;
            if (s.on1) trial.u1 -= lam * delta.head(n);
            if (s.on2) trial.u2 -= lam * delta.tail(n);
            double rt = pair_residual(g, trial, lp);
            if (std::isfinite(rt) && rt < (1 - 1e-4 * lam) * res) {
                s = std::move(trial);
                res = rt;
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        if (!ok) return res <= tol;
    }
    return res <= tol;
}

// Semi-implicit projected gradient flow followed by Newton polish.
bool pair_solve(const Grid& g, PairState& s, const LimitParams& lp, double tol, int max_iter, double& res,
                bool smallest_first = false) {
    const int n = static_cast<int>(g.size());
    const double p = lp.params.p, beta = lp.params.beta;
    zero_boundary(g, s.u1);
    zero_boundary(g, s.u2);
    if (!s.on1) s.u1.setZero();
    if (!s.on2) s.u2.setZero();
    if (!project(g, s, lp, smallest_first)) return false;

    double dt = 0.1 * std::min(1.0, 1.0 / std::max(lp.alpha1, lp.alpha2));
    auto factor = [&](double a, double step) {
        SpMat A = assemble(g, 1, {step}, {Vec::Constant(n, 1.0 + step * a)}, {});
        auto lu = std::make_unique<Eigen::SparseLU<SpMat>>();
        lu->compute(A);
        return lu;
    };
    auto lu1 = factor(lp.alpha1, dt);
    auto lu2 = factor(lp.alpha2, dt);
    double E = pair_energy(g, s, lp);
    double switch_tol = 1e-3;
    int it = 0;
    res = pair_residual(g, s, lp);
    while (it < max_iter) {
        if (res < switch_tol * (1.0 + std::max(s.u1.maxCoeff(), s.u2.maxCoeff()))) {
            PairState trial = s;
            double r = 0;
            if (pair_newton(g, trial, lp, tol, 60, r)) {
                s = std::move(trial);
                res = r;
                return true;
            }
            switch_tol *= 0.1;
            if (switch_tol < 1e-9) break;
        }
        Vec f1, f2;
        pair_nonlin(s, p, beta, f1, f2);
        PairState next = s;
        if (s.on1) {
            Vec rhs = s.u1 + dt * f1;
            zero_boundary(g, rhs);
            next.u1 = lu1->solve(rhs);
        }
        if (s.on2) {
            Vec rhs = s.u2 + dt * f2;
            zero_boundary(g, rhs);
            next.u2 = lu2->solve(rhs);
        }
        ++it;
        if (!project(g, next, lp)) return false;
        double En = pair_energy(g, next, lp);
        if (!std::isfinite(En)) return false;
        if (En > E + 1e-13 * std::abs(E) && dt > 1e-6) {
            dt *= 0.5;
            lu1 = factor(lp.alpha1, dt);
            lu2 = factor(lp.alpha2, dt);
            continue;
        }
        s = std::move(next);
        E = En;
        if (it % 5 == 0) res = pair_residual(g, s, lp);
    }
    PairState trial = s;
    double r = 0;
    if (pair_newton(g, trial, lp, tol, 100, r)) {
        s = std::move(trial);
        res = r;
        return true;
    }
    res = pair_residual(g, s, lp);
    return false;
}

// Doubles the radial domain at fixed spacing.
RadialGrid doubled(const RadialGrid& g) { return RadialGrid(g.N, 2 * g.r_max, 2 * (g.n - 1) + 1); }

bool tail_small(const Grid& g, const Vec& u) {
    const auto& rg = g.radial();
    int start = static_cast<int>(0.95 * (rg.n - 1));
    double m = 0.0;
    for (int i = start; i < rg.n; ++i) m = std::max(m, std::abs(u[i]));
    return m < 1e-8;
}

// Resamples a radial profile on another radial grid.
Vec resample(const ScalarField& f, const Grid& g) {
    Vec v(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) v[static_cast<Eigen::Index>(i)] = interpolate_radial(f, g.position(i)[0]);
    return v;
}

Vec soliton_guess(const Grid& g, double alpha, double beta_plus, double p) {
    double amp = std::pow(p * alpha / (1 + beta_plus), 1.0 / (2 * p - 2));
    double k = (p - 1) * std::sqrt(alpha);
    Vec v(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r = g.position(i)[0];
        v[static_cast<Eigen::Index>(i)] = amp * std::pow(1.0 / std::cosh(k * r), 1.0 / (p - 1));
    }
    zero_boundary(g, v);
    return v;
}

}  // namespace

NehariReport nehari_data(const FieldPair& w, const LimitParams& lp) {
    PairState s{w.u1.values, w.u2.values};
    return data_of(*w.grid(), s, lp);
}

double energy_scalar(const ScalarField& u, double alpha, double beta_plus, double p) {
    if (!(alpha > 0)) throw validation_error("energy_scalar needs alpha > 0");
    if (!(beta_plus >= 0)) throw validation_error("energy_scalar needs beta_plus >= 0");
    return 0.5 * norm_h1_alpha(u, alpha) - (1 + beta_plus) * lp_power(u, 2 * p) / (2 * p);
}

EnergyBreakdown energy_coupled(const FieldPair& w, const LimitParams& lp) {
    if (w.u1.grid != w.u2.grid) throw validation_error("energy_coupled: mismatched grids");
    const double p = lp.params.p;
    EnergyBreakdown e;
    e.quad1 = 0.5 * norm_h1_alpha(w.u1, lp.alpha1);
    e.quad2 = 0.5 * norm_h1_alpha(w.u2, lp.alpha2);
    e.self1 = -lp_power(w.u1, 2 * p) / (2 * p);
    e.self2 = -lp_power(w.u2, 2 * p) / (2 * p);
    Vec prod = w.u1.values.cwiseProduct(w.u2.values).cwiseAbs().array().pow(p).matrix();
    e.cross = -lp.params.beta * integrate(*w.grid(), prod) / p;
    e.total = e.quad1 + e.quad2 + e.self1 + e.self2 + e.cross;
    return e;
}

double nehari_scale_scalar(const ScalarField& u, double alpha, double beta_plus, double p) {
    double Y = lp_power(u, 2 * p);
    if (!(Y > 0)) throw validation_error("nehari_scale_scalar: |u|_{2p} = 0");
    return std::pow(norm_h1_alpha(u, alpha) / ((1 + beta_plus) * Y), 1.0 / (2 * p - 2));
}

double scalar_residual(const ScalarField& u, double alpha, double beta_plus, double p) {
    const Grid& g = *u.grid;
    Vec r = g.neg_laplacian() * u.values + alpha * u.values -
            (1 + beta_plus) * pos_pow(u.values, 2 * p - 1);
    return interior_sup(g, r);
}

double coupled_residual(const FieldPair& w, const LimitParams& lp) {
    PairState s{w.u1.values, w.u2.values};
    return pair_residual(*w.grid(), s, lp);
}

RadialGrid default_limit_grid(int N, double alpha_min, double h) {
    double r_max = std::max(16.0, 26.0 / std::sqrt(alpha_min));
    int n = static_cast<int>(std::ceil(r_max / h)) + 1;
    return RadialGrid(N, (n - 1) * h, n);
}

ScalarField solve_scalar_ground(const ProblemParams& pp, double alpha, double beta_plus, const RadialGrid& grid0,
                                double tol) {
    if (!(alpha > 0)) throw validation_error("solve_scalar_ground needs alpha > 0");
    if (!(beta_plus >= 0)) throw validation_error("solve_scalar_ground needs beta_plus >= 0");
    if (grid0.N != pp.N) throw validation_error("grid dimension differs from problem dimension");
    // The scalar equation is the limit system with one component switched off
    // and the self-interaction scaled by (1 + beta_plus).
    LimitParams lp(ProblemParams(pp.N, pp.p, 0.0), alpha, alpha);
    RadialGrid grid = grid0;
    double last_res = 0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        auto g = make_grid(grid);
        PairState s{soliton_guess(*g, alpha, beta_plus, pp.p), Vec::Zero(static_cast<Eigen::Index>(g->size())), true,
                    false, 1.0 + beta_plus};
        double res = 0;
        bool ok = pair_solve(*g, s, lp, tol, 50000, res);
        last_res = res;
        if (!ok) throw solver_error("scalar ground state did not converge", last_res);
        if (!tail_small(*g, s.u1)) {
            grid = doubled(grid);
            continue;
        }
        return ScalarField(g, s.u1.cwiseMax(0.0));
    }
    throw solver_error("scalar ground state does not decay below 1e-8 within the domain", last_res);
}

ScalarField rescale_ground(const ScalarField& U0, double beta_plus, double p) {
    Vec v = U0.values * std::pow(1 + beta_plus, -1.0 / (2 * p - 2));
    return ScalarField(U0.grid, std::move(v));
}

LowerBoundReport lower_bound_check(const FieldPair& w, const LimitParams& lp, double C10, double floor,
                                   double unit_tol) {
    if (w.u1.sup_norm() < floor || w.u2.sup_norm() < floor)
        throw domain_error("lower bound applies to nonstandard pairs only (a component is below the floor)");
    const auto& pp = lp.params;
    LowerBoundReport rep;
    auto C = [&](double a, double b) {
        return std::pow(a, pp.scaling_exponent()) * std::pow(1 + b, -1.0 / (pp.p - 1)) * C10;
    };
    if (pp.p >= 2 && pp.beta > 0 && pp.beta < 1) {
        rep.bound_case = 1;
        rep.bound = C(lp.alpha1, pp.beta) + C(lp.alpha2, pp.beta);
    } else if (pp.beta <= 0) {
        rep.bound_case = 2;
        rep.bound = C(lp.alpha1, 0) + C(lp.alpha2, 0);
    } else {
        throw domain_error("lower bound needs p >= 2 with 0 < beta < 1, or beta <= 0");
    }
    rep.J = energy_coupled(w, lp).total;
    rep.margin = rep.J - rep.bound;
    rep.pass = rep.margin >= -1e-3 * std::abs(rep.bound);
    auto data = nehari_data(w, lp);
    auto ts = solve_nehari_2x2(data, pp.p, pp.beta);
    rep.t_beta = ts.first;
    rep.s_beta = ts.second;
    rep.maximizer_is_unit = std::abs(ts.first - 1) <= unit_tol && std::abs(ts.second - 1) <= unit_tol;
    return rep;
}

CoupledGroundResult solve_coupled_ground_all(const LimitParams& lp, const RadialGrid& grid, double tol) {
    if (grid.N != lp.params.N) throw validation_error("grid dimension differs from problem dimension");
    const double p = lp.params.p, beta = lp.params.beta;
    const double bp = std::max(beta, 0.0);
    auto g = make_grid(grid);
    const ProblemParams pp = lp.params;

    ScalarField U1 = solve_scalar_ground(pp, lp.alpha1, 0.0, grid, tol);
    ScalarField U2 = solve_scalar_ground(pp, lp.alpha2, 0.0, grid, tol);
    Vec v1 = resample(U1, *g), v2 = resample(U2, *g);
    Vec z = Vec::Zero(v1.size());
    double cb = std::pow(1 + bp, -1.0 / (2 * p - 2));

    struct Start {
        std::string name;
        PairState s;
        bool smallest_first = false;
    };
    std::vector<Start> starts = {
        {"synchronized", {cb * v1, cb * v2, true, true}},
        {"semitrivial_1", {v1, z, true, false}},
        {"semitrivial_2", {z, v2, false, true}},
        {"perturbed_1", {v1, 0.1 * v2, true, true}, true},
        {"perturbed_2", {0.1 * v1, v2, true, true}, true},
    };

    CoupledGroundResult out;
    for (auto& st : starts) {
        double res = 0;
        bool ok = false;
        try {
            ok = pair_solve(*g, st.s, lp, tol, 50000, res, st.smallest_first);
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok) {
            out.failed_starts.push_back(st.name);
            continue;
        }
        // Reject sign-changing limits; tiny negative round-off is clipped.
        double m1 = st.s.u1.maxCoeff(), m2 = st.s.u2.maxCoeff();
        if (st.s.u1.minCoeff() < -1e-6 * std::max(1.0, m1) || st.s.u2.minCoeff() < -1e-6 * std::max(1.0, m2)) {
            out.failed_starts.push_back(st.name);
            continue;
        }
        if (st.s.on1 && st.s.on2 && (m1 <= 0 || m2 <= 0)) {
            out.failed_starts.push_back(st.name);
            continue;
        }
        FieldPair w(ScalarField(g, st.s.u1.cwiseMax(0.0)), ScalarField(g, st.s.u2.cwiseMax(0.0)));
        CoupledCandidate c{st.name, w, energy_coupled(w, lp).total, res};
        out.candidates.push_back(std::move(c));
    }
    if (out.candidates.empty()) throw solver_error("coupled ground state: no start converged", 0.0);
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const auto& a, const auto& b) { return a.energy < b.energy; });
    return out;
}

FieldPair solve_coupled_ground(const LimitParams& lp, const RadialGrid& grid, double tol) {
    return solve_coupled_ground_all(lp, grid, tol).best().w;
}

double coupled_ground_energy(const LimitParams& lp, const RadialGrid& grid, double tol) {
    return solve_coupled_ground_all(lp, grid, tol).best().energy;
}

double numeric_C10(int N, double p) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({N, p});
        if (it != cache.end()) return it->second;
    }
    ProblemParams pp(N, p, 0.0);
    auto grid = default_limit_grid(N, 1.0, N == 1 ? 0.01 : 0.004);
    ScalarField U = solve_scalar_ground(pp, 1.0, 0.0, grid);
    double c = energy_scalar(U, 1.0, 0.0, p);
    std::lock_guard<std::mutex> lock(mu);
    cache[{N, p}] = c;
    return c;
}

}  // namespace solitonlab
