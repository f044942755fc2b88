#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "solitonlab/errors.hpp"

namespace solitonlab {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Point = std::array<double, 3>;

struct ProblemParams {
    int N = 1;
    double p = 2.0;
    double beta = 0.0;

    ProblemParams() = default;
    ProblemParams(int N, double p, double beta);

    // 2N/(N-2) for N >= 3, +inf otherwise.
    double critical_exponent() const;
    // p/(p-1) - N/2, the exponent of alpha in the ground energy scaling.
    double scaling_exponent() const;
};

// Uniform samples r_i = i*h on [0, r_max]; the last sample carries the
// homogeneous Dirichlet condition.
struct RadialGrid {
    int N = 1;
    double r_max = 0.0;
    int n = 0;
    double h = 0.0;

    RadialGrid(int N, double r_max, int n);
    double r(int i) const { return h * i; }
};

// Tensor grid on [-L, L]^N, n points per axis including the Dirichlet
// boundary layer. Index is x-fastest.
struct BoxGrid {
    int N = 1;
    double L = 0.0;
    int n_per_axis = 0;
    double h = 0.0;

    BoxGrid(int N, double L, int n_per_axis);
    std::size_t size() const;
    double coord(int j) const { return -L + h * j; }
};

// Area of the unit sphere in R^N (2 for N = 1, 2*pi for N = 2, 4*pi for N = 3).
double unit_sphere_area(int N);

class Grid {
public:
    explicit Grid(RadialGrid g);
    explicit Grid(BoxGrid g);

    bool is_radial() const { return std::holds_alternative<RadialGrid>(spec_); }
    const RadialGrid& radial() const { return std::get<RadialGrid>(spec_); }
    const BoxGrid& box() const { return std::get<BoxGrid>(spec_); }

    int dim() const { return dim_; }
    double spacing() const { return h_; }
    std::size_t size() const { return weights_.size(); }

    // Quadrature weights; sum_i w_i f_i approximates the integral over R^N
    // (radial grids integrate the full space, e.g. both half-lines for N = 1).
    const Vec& weights() const { return weights_; }
    // Matrix K with K f = -Delta f at every node (zero extension beyond the grid).
    const SpMat& neg_laplacian() const { return neg_lap_; }
    const std::vector<char>& boundary_mask() const { return boundary_; }
    bool is_boundary(std::size_t i) const { return boundary_[i] != 0; }

    // Node position; radial nodes are reported as (r, 0, 0).
    Point position(std::size_t i) const;
    // Node index for box multi-index (unused axes ignored).
    std::size_t index(int i0, int i1 = 0, int i2 = 0) const;
    std::array<int, 3> multi_index(std::size_t idx) const;

    // Sum over grid edges of w_e (f_b - f_a)^2 / h^2, i.e. the gradient form
    // of the Dirichlet integral.
    double dirichlet_integral(const Vec& f) const;

    // Bounding extent of the grid in physical space (max |x| reachable).
    double extent() const;

private:
    void build_radial();
    void build_box();

    std::variant<RadialGrid, BoxGrid> spec_;
    int dim_ = 1;
    double h_ = 0.0;
    Vec weights_;
    SpMat neg_lap_;
    std::vector<char> boundary_;
    // Edge list for the gradient form: (a, b, weight).
    std::vector<std::pair<int, int>> edges_;
    std::vector<double> edge_weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(RadialGrid g);
GridPtr make_grid(BoxGrid g);

struct ScalarField {
    GridPtr grid;
    Vec values;

    ScalarField() = default;
    ScalarField(GridPtr g, Vec v);
    static ScalarField zeros(GridPtr g);

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    double sup_norm() const;
};

struct FieldPair {
    ScalarField u1;
    ScalarField u2;

    FieldPair() = default;
    FieldPair(ScalarField a, ScalarField b);
    const GridPtr& grid() const { return u1.grid; }
};

// Builds a field by evaluating f at every node position.
template <class F>
ScalarField sample(const GridPtr& g, F&& f) {
    Vec v(static_cast<Eigen::Index>(g->size()));
    for (std::size_t i = 0; i < g->size(); ++i) v[static_cast<Eigen::Index>(i)] = f(g->position(i));
    return ScalarField(g, std::move(v));
}

ScalarField laplacian(const ScalarField& f);
double integrate(const ScalarField& f);
double integrate(const Grid& g, const Vec& f);

// ||f||^2_alpha = int |grad f|^2 + alpha f^2 via the gradient (edge) form.
double norm_h1_alpha(const ScalarField& f, double alpha);
// Same quadratic form through -int f Delta f; agrees with the gradient form
// when f vanishes on the Dirichlet layer.
double norm_h1_alpha_ibp(const ScalarField& f, double alpha);
// int |grad f|^2 in gradient form.
double dirichlet_integral(const ScalarField& f);

double lp_power(const ScalarField& f, double q);

// Linear interpolation of a radial profile at radius rho (0 beyond r_max).
double interpolate_radial(const ScalarField& f, double rho);

}  // namespace solitonlab
