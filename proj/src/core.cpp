#include "solitonlab/core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace solitonlab {

ProblemParams::ProblemParams(int N_, double p_, double beta_) : N(N_), p(p_), beta(beta_) {
    if (N < 1) throw validation_error("dimension N must be >= 1");
    if (!std::isfinite(p) || !std::isfinite(beta)) throw validation_error("p and beta must be finite");
    if (!(2.0 * p > 2.0)) throw validation_error("exponent 2p must exceed 2");
    if (N >= 3 && !(2.0 * p < critical_exponent()))
        throw validation_error("exponent 2p must be below the critical Sobolev exponent 2N/(N-2)");
}

double ProblemParams::critical_exponent() const {
    if (N <= 2) return std::numeric_limits<double>::infinity();
    return 2.0 * N / (N - 2.0);
}

double ProblemParams::scaling_exponent() const { return p / (p - 1.0) - N / 2.0; }

RadialGrid::RadialGrid(int N_, double r_max_, int n_) : N(N_), r_max(r_max_), n(n_) {
    if (N < 1) throw validation_error("radial grid dimension must be >= 1");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw validation_error("radial grid needs r_max > 0");
    if (n < 16) throw validation_error("radial grid needs at least 16 samples");
    h = r_max / (n - 1);
}

BoxGrid::BoxGrid(int N_, double L_, int n_) : N(N_), L(L_), n_per_axis(n_) {
    if (N < 1 || N > 3) throw validation_error("box grids support 1 <= N <= 3");
    if (!(L > 0.0) || !std::isfinite(L)) throw validation_error("box grid needs L > 0");
    if (n_per_axis < 5) throw validation_error("box grid needs at least 5 points per axis");
    double total = std::pow(static_cast<double>(n_per_axis), N);
    if (total > 5.0e7) throw validation_error("box grid too large");
    h = 2.0 * L / (n_per_axis - 1);
}

std::size_t BoxGrid::size() const {
    std::size_t s = 1;
    for (int k = 0; k < N; ++k) s *= static_cast<std::size_t>(n_per_axis);
    return s;
}

double unit_sphere_area(int N) {
    return 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
}

Grid::Grid(RadialGrid g) : spec_(g), dim_(g.N), h_(g.h) { build_radial(); }
Grid::Grid(BoxGrid g) : spec_(g), dim_(g.N), h_(g.h) { build_box(); }

GridPtr make_grid(RadialGrid g) { return std::make_shared<const Grid>(g); }
GridPtr make_grid(BoxGrid g) { return std::make_shared<const Grid>(g); }

void Grid::build_radial() {
    const auto& g = radial();
    const int n = g.n;
    const int N = g.N;
    const double h = g.h;
    const double om = unit_sphere_area(N);
    auto ball = [&](double r) { return om * std::pow(r, N) / N; };
    auto area = [&](double r) { return om * std::pow(r, N - 1); };

    weights_.resize(n);
    weights_[0] = ball(0.5 * h);
    for (int i = 1; i < n - 1; ++i) weights_[i] = ball(g.r(i) + 0.5 * h) - ball(g.r(i) - 0.5 * h);
    weights_[n - 1] = ball(g.r_max) - ball(g.r_max - 0.5 * h);

    boundary_.assign(n, 0);
    boundary_[n - 1] = 1;

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        double vol = (i == n - 1) ? ball(g.r(i) + 0.5 * h) - ball(g.r(i) - 0.5 * h) : weights_[i];
        double ap = area(g.r(i) + 0.5 * h) / (h * vol);
        double am = (i == 0) ? 0.0 : area(g.r(i) - 0.5 * h) / (h * vol);
        t.emplace_back(i, i, ap + am);
        if (i + 1 < n) t.emplace_back(i, i + 1, -ap);
        if (i > 0) t.emplace_back(i, i - 1, -am);
    }
    neg_lap_.resize(n, n);
    neg_lap_.setFromTriplets(t.begin(), t.end());

    for (int i = 0; i + 1 < n; ++i) {
        edges_.emplace_back(i, i + 1);
        edge_weights_.push_back(area(g.r(i) + 0.5 * h) * h);
    }
}

void Grid::build_box() {
    const auto& g = box();
    const int n = g.n_per_axis;
    const int N = g.N;
    const double h = g.h;
    const std::size_t total = g.size();

    weights_.resize(static_cast<Eigen::Index>(total));
    boundary_.assign(total, 0);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(total * (1 + 2 * N));
    const double ih2 = 1.0 / (h * h);
    const double hN = std::pow(h, N);
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto mi = multi_index(idx);
        double w = 1.0;
        bool bnd = false;
        for (int k = 0; k < N; ++k) {
            bool edge = (mi[k] == 0 || mi[k] == n - 1);
            w *= edge ? 0.5 * h : h;
            bnd = bnd || edge;
        }
        weights_[static_cast<Eigen::Index>(idx)] = w;
        boundary_[idx] = bnd ? 1 : 0;
        t.emplace_back(static_cast<int>(idx), static_cast<int>(idx), 2.0 * N * ih2);
        for (int k = 0; k < N; ++k) {
            for (int s : {-1, 1}) {
                auto nb = mi;
                nb[k] += s;
                if (nb[k] < 0 || nb[k] >= n) continue;
                t.emplace_back(static_cast<int>(idx), static_cast<int>(index(nb[0], nb[1], nb[2])), -ih2);
                if (s == 1) {
                    edges_.emplace_back(static_cast<int>(idx), static_cast<int>(index(nb[0], nb[1], nb[2])));
                    edge_weights_.push_back(hN);
                }
            }
        }
    }
    neg_lap_.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    neg_lap_.setFromTriplets(t.begin(), t.end());
}

Point Grid::position(std::size_t i) const {
    if (is_radial()) return {radial().r(static_cast<int>(i)), 0.0, 0.0};
    auto mi = multi_index(i);
    Point x{0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) x[k] = box().coord(mi[k]);
    return x;
}

std::size_t Grid::index(int i0, int i1, int i2) const {
    if (is_radial()) return static_cast<std::size_t>(i0);
    const std::size_t n = static_cast<std::size_t>(box().n_per_axis);
    std::size_t idx = static_cast<std::size_t>(i0);
    if (dim_ >= 2) idx += n * static_cast<std::size_t>(i1);
    if (dim_ >= 3) idx += n * n * static_cast<std::size_t>(i2);
    return idx;
}

std::array<int, 3> Grid::multi_index(std::size_t idx) const {
    if (is_radial()) return {static_cast<int>(idx), 0, 0};
    const std::size_t n = static_cast<std::size_t>(box().n_per_axis);
    std::array<int, 3> mi{0, 0, 0};
    for (int k = 0; k < dim_; ++k) {
        mi[k] = static_cast<int>(idx % n);
        idx /= n;
    }
    return mi;
}

double Grid::dirichlet_integral(const Vec& f) const {
    double s = 0.0;
    const double ih2 = 1.0 / (h_ * h_);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        double d = f[edges_[e].second] - f[edges_[e].first];
        s += edge_weights_[e] * d * d * ih2;
    }
    return s;
}

double Grid::extent() const {
    if (is_radial()) return radial().r_max;
    return box().L;
}

ScalarField::ScalarField(GridPtr g, Vec v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw validation_error("field without grid");
    if (static_cast<std::size_t>(values.size()) != grid->size())
        throw validation_error("field size does not match grid size");
    if (!values.allFinite()) throw validation_error("field contains non-finite values");
}

ScalarField ScalarField::zeros(GridPtr g) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(g->size()));
    return ScalarField(std::move(g), std::move(v));
}

double ScalarField::sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }

FieldPair::FieldPair(ScalarField a, ScalarField b) : u1(std::move(a)), u2(std::move(b)) {
    if (u1.grid != u2.grid) throw validation_error("field pair components must share one grid");
}

static void require_laplacian_grid(const Grid& g) {
    if (g.is_radial() ? g.radial().n < 5 : g.box().n_per_axis < 5)
        throw validation_error("grid too small for the Laplacian (n < 5)");
}

ScalarField laplacian(const ScalarField& f) {
    require_laplacian_grid(*f.grid);
    Vec lap = -(f.grid->neg_laplacian() * f.values);
    return ScalarField(f.grid, std::move(lap));
}

double integrate(const Grid& g, const Vec& f) { return g.weights().dot(f); }
double integrate(const ScalarField& f) { return integrate(*f.grid, f.values); }

double dirichlet_integral(const ScalarField& f) { return f.grid->dirichlet_integral(f.values); }

double norm_h1_alpha(const ScalarField& f, double alpha) {
    if (!(alpha > 0.0)) throw validation_error("norm_h1_alpha needs alpha > 0");
    return dirichlet_integral(f) + alpha * integrate(*f.grid, f.values.cwiseAbs2());
}

double norm_h1_alpha_ibp(const ScalarField& f, double alpha) {
    if (!(alpha > 0.0)) throw validation_error("norm_h1_alpha needs alpha > 0");
    const auto& g = *f.grid;
    Vec kf = g.neg_laplacian() * f.values;
    double s = 0.0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        if (g.is_boundary(static_cast<std::size_t>(i))) continue;
        s += g.weights()[i] * f.values[i] * kf[i];
    }
    return s + alpha * integrate(g, f.values.cwiseAbs2());
}

double lp_power(const ScalarField& f, double q) {
    if (!(q > 1.0)) throw validation_error("lp_power needs q > 1");
    return integrate(*f.grid, f.values.cwiseAbs().array().pow(q).matrix());
}

double interpolate_radial(const ScalarField& f, double rho) {
    const auto& g = f.grid->radial();
    rho = std::abs(rho);
    if (rho >= g.r_max) return 0.0;
    double s = rho / g.h;
    int i = static_cast<int>(s);
    if (i >= g.n - 1) return f.values[g.n - 1];
    double a = s - i;
    return (1.0 - a) * f.values[i] + a * f.values[i + 1];
}

}  // namespace solitonlab
