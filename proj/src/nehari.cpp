#include <algorithm>
#include <cmath>
#include <limits>

#include "solitonlab/limit.hpp"

namespace solitonlab {

namespace {

// Relative residuals of the two Nehari equations (divided by t^2, s^2).
std::pair<double, double> nehari_res(const NehariReport& r, double p, double beta, double t, double s) {
    double e1 = std::pow(t, 2 * p - 2) * r.Y1 + beta * std::pow(t, p - 2) * std::pow(s, p) * r.Z - r.X1;
    double e2 = std::pow(s, 2 * p - 2) * r.Y2 + beta * std::pow(t, p) * std::pow(s, p - 2) * r.Z - r.X2;
    return {e1 / r.X1, e2 / r.X2};
}

bool accept(const NehariReport& r, double p, double beta, double t, double s) {
    if (!(t > 0) || !(s > 0) || !std::isfinite(t) || !std::isfinite(s)) return false;
    auto [a, b] = nehari_res(r, p, beta, t, s);
    return std::abs(a) <= 1e-10 && std::abs(b) <= 1e-10;
}

// Newton polish in log variables; returns false if it diverges.
bool polish(const NehariReport& r, double p, double beta, double& t, double& s, int iters = 60) {
    double a = std::log(t), b = std::log(s);
    auto F = [&](double aa, double bb) { return nehari_res(r, p, beta, std::exp(aa), std::exp(bb)); };
    for (int k = 0; k < iters; ++k) {
        auto [f1, f2] = F(a, b);
        double nrm = std::hypot(f1, f2);
        if (nrm < 1e-14) break;
        double tt = std::exp(a), ss = std::exp(b);
        // Analytic Jacobian of the relative residuals w.r.t. (log t, log s).
        double j11 = ((2 * p - 2) * std::pow(tt, 2 * p - 2) * r.Y1 +
                      (p - 2) * beta * std::pow(tt, p - 2) * std::pow(ss, p) * r.Z) / r.X1;
        double j12 = p * beta * std::pow(tt, p - 2) * std::pow(ss, p) * r.Z / r.X1;
        double j21 = p * beta * std::pow(tt, p) * std::pow(ss, p - 2) * r.Z / r.X2;
        double j22 = ((2 * p - 2) * std::pow(ss, 2 * p - 2) * r.Y2 +
                      (p - 2) * beta * std::pow(tt, p) * std::pow(ss, p - 2) * r.Z) / r.X2;
        double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) return false;
        double da = -(j22 * f1 - j12 * f2) / det;
        double db = -(-j21 * f1 + j11 * f2) / det;
        double lam = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 40; ++ls) {
            double step = std::max(std::abs(lam * da), std::abs(lam * db));
            double sc = step > 2.0 ? 2.0 / step : 1.0;
            auto [g1, g2] = F(a + sc * lam * da, b + sc * lam * db);
            if (std::isfinite(g1) && std::isfinite(g2) && std::hypot(g1, g2) < nrm) {
                a += sc * lam * da;
                b += sc * lam * db;
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        if (!ok) break;
        if (std::abs(a) > 200 || std::abs(b) > 200) return false;
    }
    t = std::exp(a);
    s = std::exp(b);
    return accept(r, p, beta, t, s);
}

void add_root(std::vector<std::pair<double, double>>& roots, double t, double s) {
    for (const auto& [a, b] : roots)
        if (std::abs(a - t) <= 1e-7 * (1 + a) && std::abs(b - s) <= 1e-7 * (1 + b)) return;
    roots.emplace_back(t, s);
}

void validate_report(const NehariReport& r) {
    if (!(r.X1 > 0 && r.X2 > 0 && r.Y1 > 0 && r.Y2 > 0))
        throw validation_error("Nehari system needs X_i, Y_i > 0");
    if (!(r.Z >= 0)) throw validation_error("Nehari system needs Z >= 0");
}

}  // namespace

double nehari_energy(const NehariReport& r, double p, double beta, double t, double s) {
    return 0.5 * t * t * r.X1 + 0.5 * s * s * r.X2 - std::pow(t, 2 * p) * r.Y1 / (2 * p) -
           std::pow(s, 2 * p) * r.Y2 / (2 * p) - beta * std::pow(t * s, p) * r.Z / p;
}

std::vector<std::pair<double, double>> nehari_roots(const NehariReport& r, double p, double beta) {
    validate_report(r);
    std::vector<std::pair<double, double>> roots;

    if (beta == 0.0 || r.Z == 0.0) {
        roots.emplace_back(std::pow(r.X1 / r.Y1, 1.0 / (2 * p - 2)), std::pow(r.X2 / r.Y2, 1.0 / (2 * p - 2)));
        return roots;
    }

    if (p == 2.0) {
        double det = r.Y1 * r.Y2 - beta * beta * r.Z * r.Z;
        if (std::abs(det) <= 1e-14 * r.Y1 * r.Y2)
            throw domain_error("degenerate Nehari system: Y1*Y2 - beta^2 Z^2 = 0");
        double a = (r.X1 * r.Y2 - beta * r.Z * r.X2) / det;
        double b = (r.Y1 * r.X2 - beta * r.Z * r.X1) / det;
        if (a > 0 && b > 0) roots.emplace_back(std::sqrt(a), std::sqrt(b));
        return roots;
    }

    if (p > 2.0) {
        // With x = s/t the ratio of the two equations gives
        // phi(x) = X1 (x^{2p-2} Y2 + beta Z x^{p-2}) - X2 (Y1 + beta Z x^p) = 0,
        // then t^{2p-2} = X1 / (Y1 + beta Z x^p).
        auto phi = [&](double lx) {
            double x = std::exp(lx);
            double d1 = r.Y1 + beta * r.Z * std::pow(x, p);
            double d2 = std::pow(x, 2 * p - 2) * r.Y2 + beta * r.Z * std::pow(x, p - 2);
            if (d1 <= 0 || d2 <= 0) return std::numeric_limits<double>::quiet_NaN();
            return r.X1 * d2 - r.X2 * d1;
        };
        const int M = 4000;
        const double lo = -40.0, hi = 40.0;
        double prev_x = lo, prev = phi(lo);
        for (int k = 1; k <= M; ++k) {
            double lx = lo + (hi - lo) * k / M;
            double v = phi(lx);
            if (std::isfinite(prev) && std::isfinite(v) && ((prev < 0) != (v < 0))) {
                double a = prev_x, b = lx, fa = prev;
                for (int it = 0; it < 200 && b - a > 1e-15 * (1 + std::abs(a)); ++it) {
                    double m = 0.5 * (a + b);
                    double fm = phi(m);
                    if ((fm < 0) == (fa < 0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                double x = std::exp(0.5 * (a + b));
                double t = std::pow(r.X1 / (r.Y1 + beta * r.Z * std::pow(x, p)), 1.0 / (2 * p - 2));
                double s = x * t;
                polish(r, p, beta, t, s, 10);
                if (accept(r, p, beta, t, s)) add_root(roots, t, s);
            }
            prev_x = lx;
            prev = v;
        }
    } else {
        // 1 < p < 2: multi-start damped Newton around the decoupled scales.
        double t0 = std::pow(r.X1 / r.Y1, 1.0 / (2 * p - 2));
        double s0 = std::pow(r.X2 / r.Y2, 1.0 / (2 * p - 2));
        for (int i = 0; i < 9; ++i) {
            for (int j = 0; j < 9; ++j) {
                double t = t0 * std::pow(10.0, -2.0 + 0.5 * i);
                double s = s0 * std::pow(10.0, -2.0 + 0.5 * j);
                if (polish(r, p, beta, t, s)) add_root(roots, t, s);
            }
        }
    }
    std::sort(roots.begin(), roots.end(),
              [](const auto& a, const auto& b) { return a.first + a.second < b.first + b.second; });
    return roots;
}

std::pair<double, double> solve_nehari_2x2(const NehariReport& rep, double p, double beta,
                                           std::optional<std::pair<double, double>> hint) {
    auto roots = nehari_roots(rep, p, beta);
    if (roots.empty()) throw solver_error("Nehari system has no positive root", 0.0);
    if (!hint) return roots.front();
    auto best = roots.front();
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) {
        double d = std::hypot(std::log(r.first / hint->first), std::log(r.second / hint->second));
        if (d < bd) {
            bd = d;
            best = r;
        }
    }
    return best;
}

}  // namespace solitonlab
