#include <cmath>
#include <limits>

#include "solitonlab/penalty.hpp"

namespace solitonlab {

double distance(const Point& a, const Point& b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

double norm(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

namespace {

// Visits the lattice {c + k*step}, k in [-K, K]^N.
template <class F>
void for_lattice(int N, const Point& c, double half_width, int K, F&& visit) {
    const double step = half_width / K;
    int kk[3] = {0, 0, 0};
    const int lim1 = N >= 2 ? K : 0, lim2 = N >= 3 ? K : 0;
    for (kk[2] = -lim2; kk[2] <= lim2; ++kk[2])
        for (kk[1] = -lim1; kk[1] <= lim1; ++kk[1])
            for (kk[0] = -K; kk[0] <= K; ++kk[0]) {
                Point x = c;
                for (int d = 0; d < N; ++d) x[d] += kk[d] * step;
                visit(x);
            }
}

// Quintic smoothstep: 1 for t <= 0, 0 for t >= 1, C^2 in between.
double smooth_cutoff(double t) {
    if (t <= 0) return 1.0;
    if (t >= 1) return 0.0;
    return 1.0 - t * t * t * (10 - 15 * t + 6 * t * t);
}

double get(const std::map<std::string, double>& m, const std::string& k) { return m.at(k); }

}  // namespace

void PotentialSpec::finalize() {
    if (N < 1 || N > 3) throw validation_error("potential dimension must be 1, 2 or 3");
    if (!V1 || !V2) throw validation_error("potential evaluators missing");
    if (!(lambda_radius > 0) || !(u_radius > lambda_radius))
        throw validation_error("need 0 < lambda_radius < u_radius (Lambda compactly inside U)");
    if (decay_class == DecayClass::inverse_power && !(sigma >= 0 && sigma <= 1))
        throw validation_error("inverse-power decay needs 0 <= sigma <= 1");

    const int K = N == 1 ? 200 : N == 2 ? 40 : 16;
    double inf1 = std::numeric_limits<double>::infinity(), inf2 = inf1, inf_sum_l = inf1, inf_sum_shell = inf1;
    double vmin_all = inf1;
    auto visit_lambda = [&](const Point& x) {
        if (!in_lambda(x)) return;
        double a = V1(x), b = V2(x);
        inf1 = std::min(inf1, a);
        inf2 = std::min(inf2, b);
        inf_sum_l = std::min(inf_sum_l, a + b);
    };
    for_lattice(N, center, lambda_radius, K, visit_lambda);
    visit_lambda(center);
    for (const auto& z : M_set) visit_lambda(z);
    for_lattice(N, center, u_radius, K, [&](const Point& x) {
        if (in_lambda(x) || !in_u(x)) return;
        inf_sum_shell = std::min(inf_sum_shell, V1(x) + V2(x));
    });
    for_lattice(N, center, 4 * u_radius, K, [&](const Point& x) { vmin_all = std::min(vmin_all, vmin(x)); });

    if (!std::isfinite(inf1) || !std::isfinite(inf2)) throw validation_error("potential not finite on Lambda");
    if (vmin_all < 0) throw validation_error("potentials must be nonnegative");
    if (!(inf1 > 0)) throw validation_error("need m1 = inf_Lambda V1 > 0");
    if (inf1 > inf2 * (1 + 1e-12)) throw validation_error("need m1 <= m2; swap the two components");
    m1 = inf1;
    m2 = inf2;
    omega = m1 / m2;
    well_condition = inf_sum_l < inf_sum_shell;
    for (const auto& z : M_set)
        if (!in_lambda(z)) throw validation_error("minimum set must lie in Lambda");
}

const std::vector<PresetInfo>& preset_catalog() {
    static const std::vector<PresetInfo> cat = {
        {"constant", "V1 = m1, V2 = m2 everywhere",
         {{"m1", 1.0}, {"m2", 1.0}, {"z0", 0.0}, {"lambda_radius", 1.0}, {"u_radius", 2.0}}},
        {"double-well",
         "two quadratic wells: a skewed well of depth m_i at z0 and a shallower well at z1 along the first axis",
         {{"m1", 1.0},
          {"m2", 1.0},
          {"z0", 0.0},
          {"z1", 3.0},
          {"curv", 0.5},
          {"skew1", 0.4},
          {"skew2", -0.2},
          {"curv_far", 1.0},
          {"depth_far", 0.5},
          {"lambda_radius", 1.0},
          {"u_radius", 1.5}}},
        {"inverse-power", "V_i = m_i (1 + a q)/(1 + q)^(1 + sigma), q = |x - z0|^2; tail |x|^(-2 sigma)",
         {{"m1", 1.0},
          {"m2", 1.0},
          {"z0", 0.0},
          {"a", 4.0},
          {"sigma", 0.5},
          {"lambda_radius", 0.8},
          {"u_radius", 1.2}}},
        {"compact-support", "V_i = (m_i + a |x - z0|^2) times a smooth cutoff between r_in and r_out",
         {{"m1", 1.0},
          {"m2", 1.0},
          {"z0", 0.0},
          {"a", 0.5},
          {"r_in", 1.5},
          {"r_out", 2.5},
          {"lambda_radius", 1.0},
          {"u_radius", 1.4}}},
    };
    return cat;
}

PotentialSpec make_potential(const std::string& preset, int N, const std::map<std::string, double>& params) {
    const PresetInfo* info = nullptr;
    for (const auto& c : preset_catalog())
        if (c.name == preset) info = &c;
    if (!info) throw validation_error("unknown potential preset '" + preset + "'");
    auto prm = info->defaults;
    for (const auto& [k, v] : params) {
        if (!prm.count(k)) throw validation_error("unknown parameter '" + k + "' for preset '" + preset + "'");
        if (!std::isfinite(v)) throw validation_error("parameter '" + k + "' must be finite");
        prm[k] = v;
    }

    PotentialSpec s;
    s.preset = preset;
    s.N = N;
    const double m1 = get(prm, "m1"), m2 = get(prm, "m2");
    const Point z0{get(prm, "z0"), 0, 0};
    s.center = z0;
    s.lambda_radius = get(prm, "lambda_radius");
    s.u_radius = get(prm, "u_radius");
    s.M_set = {z0};
    if (!(m1 > 0 && m2 > 0)) throw validation_error("well depths m1, m2 must be positive");

    if (preset == "constant") {
        s.V1 = [m1](const Point&) { return m1; };
        s.V2 = [m2](const Point&) { return m2; };
        s.decay_class = DecayClass::inverse_power;
        s.sigma = 0;
    } else if (preset == "double-well") {
        const double curv = get(prm, "curv"), cf = get(prm, "curv_far"), depth = get(prm, "depth_far");
        const double z1 = get(prm, "z1");
        const double sk1 = get(prm, "skew1"), sk2 = get(prm, "skew2");
        if (!(curv > 0 && cf > 0 && depth > 0)) throw validation_error("double-well needs positive curvatures and depth");
        if (std::abs(sk1) >= 1 || std::abs(sk2) >= 1) throw validation_error("double-well skews must lie in (-1, 1)");
        auto make = [=](double m, double sk) {
            return [=](const Point& x) {
                double y0 = x[0] - z0[0];
                double near = curv * (1 + (y0 >= 0 ? sk : -sk)) * y0 * y0 + curv * (x[1] * x[1] + x[2] * x[2]);
                double far = cf * ((x[0] - z1) * (x[0] - z1) + x[1] * x[1] + x[2] * x[2]);
                return std::min(m + near, m + depth + far);
            };
        };
        s.V1 = make(m1, sk1);
        s.V2 = make(m2, sk2);
        s.decay_class = DecayClass::inverse_power;
        s.sigma = 0;
    } else if (preset == "inverse-power") {
        const double a = get(prm, "a"), sig = get(prm, "sigma");
        if (!(sig >= 0 && sig <= 1)) throw validation_error("inverse-power needs 0 <= sigma <= 1");
        if (!(a > 1 + sig)) throw validation_error("inverse-power needs a > 1 + sigma for a minimum at z0");
        auto make = [=](double m) {
            return [=](const Point& x) {
                double q = distance(x, z0);
                q *= q;
                return m * (1 + a * q) / std::pow(1 + q, 1 + sig);
            };
        };
        s.V1 = make(m1);
        s.V2 = make(m2);
        s.decay_class = DecayClass::inverse_power;
        s.sigma = sig;
    } else {
        const double a = get(prm, "a"), rin = get(prm, "r_in"), rout = get(prm, "r_out");
        if (!(a >= 0 && rin > 0 && rout > rin)) throw validation_error("compact-support needs a >= 0, 0 < r_in < r_out");
        if (!(s.u_radius <= rin)) throw validation_error("compact-support needs U inside the plateau (u_radius <= r_in)");
        auto make = [=](double m) {
            return [=](const Point& x) {
                double r = distance(x, z0);
                return (m + a * r * r) * smooth_cutoff((r - rin) / (rout - rin));
            };
        };
        s.V1 = make(m1);
        s.V2 = make(m2);
        s.decay_class = DecayClass::fast_or_compact;
    }
    s.finalize();
    return s;
}

}  // namespace solitonlab
