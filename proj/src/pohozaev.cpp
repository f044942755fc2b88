#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "solitonlab/semiclassical.hpp"

namespace solitonlab {

namespace {

// Central-difference derivative along axis k (one-sided on the box faces).
Vec axis_derivative(const Grid& g, const Vec& f, int k) {
    const int n = g.box().n_per_axis;
    const double h = g.spacing();
    Vec d(f.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto mi = g.multi_index(i);
        auto at = [&](int j) {
            auto m = mi;
            m[k] = j;
            return f[static_cast<Eigen::Index>(g.index(m[0], m[1], m[2]))];
        };
        const int j = mi[k];
        double v;
        if (j == 0)
            v = (at(1) - at(0)) / h;
        else if (j == n - 1)
            v = (at(n - 1) - at(n - 2)) / h;
        else
            v = (at(j + 1) - at(j - 1)) / (2 * h);
        d[static_cast<Eigen::Index>(i)] = v;
    }
    return d;
}

// Multilinear interpolation of a node field at x.
double interp(const Grid& g, const Vec& f, const Point& x) {
    const auto& b = g.box();
    const int N = g.dim();
    int base[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int k = 0; k < N; ++k) {
        double s = (x[k] + b.L) / b.h;
        int j = static_cast<int>(std::floor(s));
        j = std::clamp(j, 0, b.n_per_axis - 2);
        base[k] = j;
        frac[k] = s - j;
    }
    double acc = 0;
    const int corners = 1 << N;
    for (int c = 0; c < corners; ++c) {
        double wgt = 1;
        int m[3] = {0, 0, 0};
        for (int k = 0; k < N; ++k) {
            int bit = (c >> k) & 1;
            m[k] = base[k] + bit;
            wgt *= bit ? frac[k] : 1 - frac[k];
        }
        if (wgt != 0) acc += wgt * f[static_cast<Eigen::Index>(g.index(m[0], m[1], m[2]))];
    }
    return acc;
}

// Nodes and weights of the G-point Gauss-Legendre rule on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int G) {
    std::vector<double> xs(G), ws(G);
    auto legendre = [G](double z, double& dp) {
        double p0 = 1, p1 = z;
        for (int k = 2; k <= G; ++k) {
            double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = G * (z * p1 - p0) / (z * z - 1);
        return p1;
    };
    for (int i = 0; i < G; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (G + 0.5)), dp = 0;
        for (int it = 0; it < 100; ++it) {
            double dz = legendre(z, dp) / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        legendre(z, dp);
        xs[i] = z;
        ws[i] = 2 / ((1 - z * z) * dp * dp);
    }
    return {xs, ws};
}

struct SurfaceNode {
    Point x;
    Point nu;
    double w;
};

std::vector<SurfaceNode> sphere_rule(int N, const Point& c, double r) {
    std::vector<SurfaceNode> out;
    if (N == 1) {
        out.push_back({{c[0] + r, 0, 0}, {1, 0, 0}, 1.0});
        out.push_back({{c[0] - r, 0, 0}, {-1, 0, 0}, 1.0});
    } else if (N == 2) {
        const int M = 512;
        for (int j = 0; j < M; ++j) {
            double th = 2 * std::numbers::pi * j / M;
            Point nu{std::cos(th), std::sin(th), 0};
            out.push_back({{c[0] + r * nu[0], c[1] + r * nu[1], 0}, nu, 2 * std::numbers::pi * r / M});
        }
    } else {
        // Gauss-Legendre in cos(theta) times the trapezoid rule in phi.
        const int G = 48, M = 96;
        auto [xg, wg] = gauss_legendre(G);
        for (int i = 0; i < G; ++i) {
            double ct = xg[i], st = std::sqrt(1 - ct * ct);
            for (int j = 0; j < M; ++j) {
                double ph = 2 * std::numbers::pi * j / M;
                Point nu{st * std::cos(ph), st * std::sin(ph), ct};
                out.push_back({{c[0] + r * nu[0], c[1] + r * nu[1], c[2] + r * nu[2]},
                               nu,
                               r * r * wg[i] * 2 * std::numbers::pi / M});
            }
        }
    }
    return out;
}

// Fraction of the cell around node x lying inside the ball, by sub-sampling.
double cell_fraction(int N, const Point& x, double h, const Point& c, double r) {
    const double reach = 0.5 * h * std::sqrt(static_cast<double>(N));
    const double dist = distance(x, c);
    if (dist + reach <= r) return 1.0;
    if (dist - reach >= r) return 0.0;
    if (N == 1) {
        double lo = std::max(x[0] - 0.5 * h, c[0] - r), hi = std::min(x[0] + 0.5 * h, c[0] + r);
        return std::max(0.0, hi - lo) / h;
    }
    const int S = 8;
    int inside = 0, total = 0;
    int lim1 = N >= 2 ? S : 1, lim2 = N >= 3 ? S : 1;
    for (int a = 0; a < S; ++a)
        for (int bb = 0; bb < lim1; ++bb)
            for (int cc = 0; cc < lim2; ++cc) {
                Point y = x;
                y[0] += ((a + 0.5) / S - 0.5) * h;
                if (N >= 2) y[1] += ((bb + 0.5) / S - 0.5) * h;
                if (N >= 3) y[2] += ((cc + 0.5) / S - 0.5) * h;
                inside += distance(y, c) < r;
                ++total;
            }
    return static_cast<double>(inside) / total;
}

}  // namespace

PohozaevReport pohozaev_residual(const FieldPair& w, const PotentialSpec& pot, const PenaltySpec& ps,
                                 const ProblemParams& pp, const Point& center, double delta, int axis) {
    const auto& g = *w.grid();
    if (g.is_radial()) throw validation_error("Pohozaev residuals need a box grid");
    const int N = g.dim();
    if (axis < 0 || axis >= N) throw validation_error("Pohozaev axis out of range");
    if (!(delta >= 4 * g.spacing())) throw validation_error("Pohozaev ball radius must be at least 4h");
    for (int k = 0; k < N; ++k)
        if (std::abs(center[k]) + delta > g.box().L - 2 * g.spacing())
            throw validation_error("Pohozaev ball must lie inside the grid");

    const double eps = ps.epsilon, e2 = eps * eps, p = pp.p, beta = pp.beta;
    const Penalty P = build_penalty(ps, pot);
    const Vec* u[2] = {&w.u1.values, &w.u2.values};
    std::array<std::array<Vec, 3>, 2> grad;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < N; ++k) grad[i][k] = axis_derivative(g, *u[i], k);

    PohozaevReport r;
    r.axis = axis;
    r.delta = delta;
    r.center = center;
    double abs_flux = 0, abs_grad = 0, abs_pot = 0, abs_nl = 0;
    for (const auto& sn : sphere_rule(N, center, delta)) {
        const double nk = sn.nu[axis];
        double flux = 0, gsq = 0, vu2 = 0;
        double val[2];
        for (int i = 0; i < 2; ++i) {
            double dn = 0, dk = 0, g2 = 0;
            for (int k = 0; k < N; ++k) {
                double gk = interp(g, grad[i][k], sn.x);
                dn += gk * sn.nu[k];
                g2 += gk * gk;
                if (k == axis) dk = gk;
            }
            val[i] = interp(g, *u[i], sn.x);
            flux += dn * dk;
            gsq += g2;
            vu2 += (i == 0 ? pot.V1(sn.x) : pot.V2(sn.x)) * val[i] * val[i];
        }
        const bool L = pot.in_lambda(sn.x);
        const double Px = P(sn.x);
        const double F = G_eps(val[0], Px, L, p) + G_eps(val[1], Px, L, p) +
                         p * beta * G_tilde(val[0], Px, L, p) * G_tilde(val[1], Px, L, p);
        r.flux += -e2 * flux * sn.w;
        r.grad_sq += 0.5 * e2 * gsq * nk * sn.w;
        r.potential += 0.5 * vu2 * nk * sn.w;
        r.nonlinear += -F * nk * sn.w;
        abs_flux += e2 * std::abs(flux) * sn.w;
        abs_grad += 0.5 * e2 * gsq * std::abs(nk) * sn.w;
        abs_pot += 0.5 * vu2 * std::abs(nk) * sn.w;
        abs_nl += F * std::abs(nk) * sn.w;
    }

    const double h = g.spacing();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        const double f = cell_fraction(N, x, h, center, delta);
        if (f == 0) continue;
        Point xp = x, xm = x;
        const double hd = 1e-5 * (1 + std::abs(x[axis]));
        xp[axis] += hd;
        xm[axis] -= hd;
        const double dV1 = (pot.V1(xp) - pot.V1(xm)) / (2 * hd);
        const double dV2 = (pot.V2(xp) - pot.V2(xm)) / (2 * hd);
        const auto ii = static_cast<Eigen::Index>(i);
        const double a = w.u1.values[ii], b = w.u2.values[ii];
        r.volume += 0.5 * f * std::pow(h, N) * (dV1 * a * a + dV2 * b * b);
    }

    const double sc = std::pow(eps, N);
    r.flux /= sc;
    r.grad_sq /= sc;
    r.potential /= sc;
    r.nonlinear /= sc;
    r.volume /= sc;
    r.surface = r.flux + r.grad_sq + r.potential + r.nonlinear;
    r.residual = r.surface - r.volume;
    r.max_surface_term = std::max({abs_flux, abs_grad, abs_pot, abs_nl}) / sc;
    return r;
}

}  // namespace solitonlab
