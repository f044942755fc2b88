#include "solitonlab/penalty.hpp"

#include <cmath>
#include <vector>

namespace solitonlab {

PenaltySpec PenaltySpec::make(const ProblemParams& pp, const PotentialSpec& pot, double epsilon) {
    PenaltySpec s;
    s.epsilon = epsilon;
    s.delta_exp = 0.75 * (4 * pp.p - 4);
    if (pot.decay_class == DecayClass::inverse_power) {
        s.kind = PenaltyCase::slow_decay;
        s.sigma = pot.sigma;
    } else {
        s.kind = PenaltyCase::fast_decay;
        s.varrho = ((2 * pp.p - 2) * (pp.N - 2) - 2) / 4.0;
    }
    return s;
}

void PenaltySpec::validate(const ProblemParams& pp) const {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) throw validation_error("epsilon must be positive");
    if (!(kappa > 0)) throw validation_error("kappa must be positive");
    if (!(barrier.exponent > 2)) throw validation_error("barrier exponent must exceed 2");
    if (!(barrier.lin_delta > 0 && barrier.lin_delta < 1)) throw validation_error("barrier delta must lie in (0, 1)");
    if (!(barrier.R > 0)) throw validation_error("barrier core radius R must be positive");
    if (kind == PenaltyCase::slow_decay) {
        if (!(sigma >= 0 && sigma <= 1)) throw validation_error("slow-decay penalty needs 0 <= sigma <= 1");
        if (!(delta_exp > 0 && delta_exp < 4 * pp.p - 4))
            throw validation_error("slow-decay penalty needs delta in (0, 4p - 4)");
    } else {
        if (pp.N < 3) throw validation_error("fast-decay penalty needs N >= 3");
        if (!(2 * pp.p - 2 > 2.0 / (pp.N - 2))) throw validation_error("fast-decay penalty needs 2p - 2 > 2/(N - 2)");
        double expect = ((2 * pp.p - 2) * (pp.N - 2) - 2) / 4.0;
        if (!(varrho > 0) || std::abs(varrho - expect) > 1e-12 * (1 + expect))
            throw validation_error("varrho must equal ((2p - 2)(N - 2) - 2)/4 > 0");
    }
}

Penalty::Penalty(PenaltySpec ps, const PotentialSpec& pot, int N)
    : ps_(ps), center_(pot.center), lambda_radius_(pot.lambda_radius), N_(N) {
    if (!in_lambda(Point{0, 0, 0}))
        throw validation_error("penalty is a power of |x|; the origin must lie in Lambda");
}

double Penalty::operator()(const Point& x) const {
    if (in_lambda(x)) return 0.0;
    double r = norm(x);
    if (ps_.kind == PenaltyCase::slow_decay)
        return std::pow(ps_.epsilon, ps_.delta_exp) * std::pow(r, -(2 + ps_.kappa) * ps_.sigma);
    return std::pow(ps_.epsilon, 2.5) * std::pow(r, -(2 + 2 * ps_.varrho));
}

double Penalty::decay_sup(double r_far) const {
    double best = 0;
    for (int k = 0; k <= 200; ++k) {
        double r = r_far * (1 + 3.0 * k / 200);
        Point x{r, 0, 0};
        double P = (*this)(x);
        double v = ps_.kind == PenaltyCase::slow_decay ? P * std::pow(r, (2 + ps_.kappa) * ps_.sigma)
                                                       : P * r * r / (ps_.epsilon * ps_.epsilon);
        best = std::max(best, v);
    }
    return best;
}

Penalty build_penalty(const PenaltySpec& ps, const PotentialSpec& pot) { return Penalty(ps, pot, pot.N); }

double g_eps(double s, double P, bool in_lambda, double p) {
    if (s <= 0) return 0.0;
    double pw = std::pow(s, 2 * p - 1);
    return in_lambda ? pw : std::min(pw, P * s);
}

double g_tilde(double s, double P, bool in_lambda, double p) {
    if (s <= 0) return 0.0;
    double pw = std::pow(s, p - 1);
    return in_lambda ? pw : std::min(pw, std::sqrt(P / p));
}

double G_eps(double s, double P, bool in_lambda, double p) {
    if (s <= 0) return 0.0;
    if (in_lambda) return std::pow(s, 2 * p) / (2 * p);
    if (P <= 0) return 0.0;
    double sw = std::pow(P, 1.0 / (2 * p - 2));
    if (s <= sw) return std::pow(s, 2 * p) / (2 * p);
    return std::pow(sw, 2 * p) / (2 * p) + 0.5 * P * (s * s - sw * sw);
}

double G_tilde(double s, double P, bool in_lambda, double p) {
    if (s <= 0) return 0.0;
    if (in_lambda) return std::pow(s, p) / p;
    if (P <= 0) return 0.0;
    double cap = std::sqrt(P / p);
    double sw = std::pow(cap, 1.0 / (p - 1));
    if (s <= sw) return std::pow(s, p) / p;
    return std::pow(sw, p) / p + cap * (s - sw);
}

double dg_eps(double s, double P, bool in_lambda, double p) {
    if (s <= 0) return 0.0;
    double d = (2 * p - 1) * std::pow(s, 2 * p - 2);
    if (in_lambda) return d;
    return std::pow(s, 2 * p - 2) <= P ? d : P;
}

double dg_tilde(double s, double P, bool in_lambda, double p) {
    if (s <= 0) return 0.0;
    double d = (p - 1) * std::pow(s, p - 2);
    if (in_lambda) return d;
    return std::pow(s, p - 1) <= std::sqrt(P / p) ? d : 0.0;
}

NodeData node_data(const Grid& g, const PotentialSpec& pot, const Penalty& P) {
    const auto n = static_cast<Eigen::Index>(g.size());
    NodeData nd;
    nd.V1.resize(n);
    nd.V2.resize(n);
    nd.P.resize(n);
    nd.lambda.resize(g.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        Point x = g.position(static_cast<std::size_t>(i));
        nd.V1[i] = pot.V1(x);
        nd.V2[i] = pot.V2(x);
        nd.lambda[static_cast<std::size_t>(i)] = pot.in_lambda(x) ? 1 : 0;
        nd.P[i] = nd.lambda[static_cast<std::size_t>(i)] ? 0.0 : P(x);
    }
    return nd;
}

void check_covers(const Grid& g, const PotentialSpec& pot) {
    if (g.dim() != pot.N) throw validation_error("grid and potential dimensions differ");
    if (g.is_radial()) {
        if (norm(pot.center) > 0) throw validation_error("radial grids need Lambda and U centered at the origin");
        if (pot.u_radius > g.radial().r_max) throw validation_error("grid does not cover U");
        return;
    }
    for (int d = 0; d < pot.N; ++d)
        if (std::abs(pot.center[d]) + pot.u_radius > g.box().L) throw validation_error("grid does not cover U");
}

namespace {

NodeData data_for(const Grid& g, const PotentialSpec& pot, const PenaltySpec& ps, const ProblemParams& pp) {
    ps.validate(pp);
    check_covers(g, pot);
    return node_data(g, pot, build_penalty(ps, pot));
}

}  // namespace

double penalized_energy(const FieldPair& w, const NodeData& nd, double epsilon, const ProblemParams& pp) {
    const auto& g = *w.grid();
    const auto& W = g.weights();
    const double p = pp.p, beta = pp.beta;
    double e = 0.5 * epsilon * epsilon * (g.dirichlet_integral(w.u1.values) + g.dirichlet_integral(w.u2.values));
    for (Eigen::Index i = 0; i < W.size(); ++i) {
        const bool L = nd.lambda[static_cast<std::size_t>(i)];
        const double a = w.u1.values[i], b = w.u2.values[i], P = nd.P[i];
        double loc = 0.5 * (nd.V1[i] * a * a + nd.V2[i] * b * b) - G_eps(a, P, L, p) - G_eps(b, P, L, p) -
                     p * beta * G_tilde(a, P, L, p) * G_tilde(b, P, L, p);
        e += W[i] * loc;
    }
    return e;
}

double penalized_energy(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps, const ProblemParams& pp) {
    return penalized_energy(w, data_for(*w.grid(), pot, ps, pp), ps.epsilon, pp);
}

FieldPair penalized_residual(const FieldPair& w, const NodeData& nd, double epsilon, const ProblemParams& pp) {
    const auto& g = *w.grid();
    const double e2 = epsilon * epsilon, p = pp.p, beta = pp.beta;
    Vec k1 = g.neg_laplacian() * w.u1.values;
    Vec k2 = g.neg_laplacian() * w.u2.values;
    Vec r1 = Vec::Zero(k1.size()), r2 = Vec::Zero(k2.size());
    for (Eigen::Index i = 0; i < k1.size(); ++i) {
        if (g.is_boundary(static_cast<std::size_t>(i))) continue;
        const bool L = nd.lambda[static_cast<std::size_t>(i)];
        const double a = w.u1.values[i], b = w.u2.values[i], P = nd.P[i];
        r1[i] = e2 * k1[i] + nd.V1[i] * a - g_eps(a, P, L, p) - p * beta * g_tilde(a, P, L, p) * G_tilde(b, P, L, p);
        r2[i] = e2 * k2[i] + nd.V2[i] * b - g_eps(b, P, L, p) - p * beta * g_tilde(b, P, L, p) * G_tilde(a, P, L, p);
    }
    return FieldPair(ScalarField(w.grid(), std::move(r1)), ScalarField(w.grid(), std::move(r2)));
}

FieldPair penalized_residual(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps,
                             const ProblemParams& pp) {
    return penalized_residual(w, data_for(*w.grid(), pot, ps, pp), ps.epsilon, pp);
}

SpMat penalized_jacobian(const FieldPair& w, const NodeData& nd, double epsilon, const ProblemParams& pp) {
    const auto& g = *w.grid();
    const auto& K = g.neg_laplacian();
    const int n = static_cast<int>(g.size());
    const double e2 = epsilon * epsilon, p = pp.p, beta = pp.beta;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(2 * K.nonZeros() + 4 * n));
    for (int blk = 0; blk < 2; ++blk) {
        const int off = blk * n;
        for (int col = 0; col < K.outerSize(); ++col)
            for (SpMat::InnerIterator it(K, col); it; ++it) {
                if (g.is_boundary(static_cast<std::size_t>(it.row()))) continue;
                t.emplace_back(off + static_cast<int>(it.row()), off + static_cast<int>(it.col()), e2 * it.value());
            }
    }
    for (int i = 0; i < n; ++i) {
        if (g.is_boundary(static_cast<std::size_t>(i))) {
            t.emplace_back(i, i, 1.0);
            t.emplace_back(n + i, n + i, 1.0);
            continue;
        }
        const bool L = nd.lambda[static_cast<std::size_t>(i)];
        const double a = w.u1.values[i], b = w.u2.values[i], P = nd.P[i];
        // For p < 2 the derivative of s^{p-1} blows up at 0; floor it.
        auto dgt = [&](double s) { return dg_tilde(std::max(s, 1e-12), P, L, p) * (s > 0 ? 1.0 : 0.0); };
        t.emplace_back(i, i, nd.V1[i] - dg_eps(a, P, L, p) - p * beta * dgt(a) * G_tilde(b, P, L, p));
        t.emplace_back(i, n + i, -p * beta * g_tilde(a, P, L, p) * g_tilde(b, P, L, p));
        t.emplace_back(n + i, n + i, nd.V2[i] - dg_eps(b, P, L, p) - p * beta * dgt(b) * G_tilde(a, P, L, p));
        t.emplace_back(n + i, i, -p * beta * g_tilde(b, P, L, p) * g_tilde(a, P, L, p));
    }
    SpMat J(2 * n, 2 * n);
    J.setFromTriplets(t.begin(), t.end());
    return J;
}

double hardy_quotient(const ScalarField& u, double theta, double exclusion) {
    const auto& g = *u.grid;
    if (g.dim() < 3) throw validation_error("Hardy quotient needs N >= 3");
    if (exclusion < 0) exclusion = 2 * g.spacing();
    const double sup = u.sup_norm();
    if (!(sup > 0)) throw validation_error("Hardy quotient of the zero field");
    double num = g.dirichlet_integral(u.values), den = 0, hardy = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double v = u.values[static_cast<Eigen::Index>(i)];
        double r = norm(g.position(i));
        if (r < exclusion) {
            if (std::abs(v) > 1e-14 * sup) throw validation_error("Hardy quotient needs u = 0 near the origin");
            continue;
        }
        double wv = g.weights()[static_cast<Eigen::Index>(i)] * v * v;
        den += wv;
        hardy += wv / (r * r);
    }
    return (num - theta * hardy) / den;
}

double domination_check(const ScalarField& phi, const PotentialSpec& pot, const PenaltySpec& ps) {
    const auto& g = *phi.grid;
    check_covers(g, pot);
    Penalty P = build_penalty(ps, pot);
    double num = 0, den = ps.epsilon * ps.epsilon * g.dirichlet_integral(phi.values);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Point x = g.position(i);
        double v = phi.values[static_cast<Eigen::Index>(i)];
        double w = g.weights()[static_cast<Eigen::Index>(i)];
        num += w * P(x) * v * v;
        den += w * pot.vmin(x) * v * v;
    }
    if (!(den > 0)) throw validation_error("domination ratio has a zero denominator");
    return num / den;
}

}  // namespace solitonlab
