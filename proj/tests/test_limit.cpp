#include <cmath>
#include <random>

#include <doctest.h>

#include "solitonlab/limit.hpp"
#include "solitonlab/thresholds.hpp"

using namespace solitonlab;

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

GridPtr line_grid() { return make_grid(RadialGrid(1, 30.0, 3001)); }

ScalarField cubic_soliton(const GridPtr& g) {
    return sample(g, [](const Point& x) { return std::sqrt(2.0) * sech(x[0]); });
}

NehariReport data(double X1, double X2, double Y1, double Y2, double Z) {
    NehariReport r;
    r.X1 = X1, r.X2 = X2, r.Y1 = Y1, r.Y2 = Y2, r.Z = Z;
    return r;
}

// Both Nehari residuals relative to the quadratic part.
double nehari_defect(const NehariReport& r, double p, double beta, double t, double s) {
    const double c = beta * std::pow(t, p) * std::pow(s, p) * r.Z;
    const double e1 = std::abs(t * t * r.X1 - std::pow(t, 2 * p) * r.Y1 - c) / (t * t * r.X1);
    const double e2 = std::abs(s * s * r.X2 - std::pow(s, 2 * p) * r.Y2 - c) / (s * s * r.X2);
    return std::max(e1, e2);
}

}  // namespace

TEST_CASE("limit parameters require positive alphas") {
    CHECK_THROWS_AS(LimitParams(ProblemParams(1, 2, 0), 0.0, 1.0), validation_error);
    CHECK_THROWS_AS(LimitParams(ProblemParams(1, 2, 0), 1.0, -1.0), validation_error);
}

TEST_CASE("scalar energy of the cubic soliton") {
    auto g = line_grid();
    auto U = cubic_soliton(g);
    CHECK(energy_scalar(ScalarField::zeros(g), 1.0, 0.0, 2.0) == 0.0);
    CHECK(energy_scalar(U, 1.0, 0.0, 2.0) == doctest::Approx(4.0 / 3).epsilon(1e-4));
    CHECK(std::abs(energy_scalar(U, 1.0, 1.0, 2.0)) < 1e-4);
}

TEST_CASE("coupled energy breakdown") {
    auto g = line_grid();
    auto U = cubic_soliton(g);
    const double quartic = lp_power(U, 4.0);

    auto b0 = energy_coupled(FieldPair(U, U), LimitParams(ProblemParams(1, 2, 0), 1, 1));
    CHECK(b0.total == doctest::Approx(8.0 / 3).epsilon(1e-3));
    CHECK(b0.cross == 0.0);

    auto b = energy_coupled(FieldPair(U, U), LimitParams(ProblemParams(1, 2, 0.5), 1, 1));
    CHECK(b.total == doctest::Approx(4.0 / 3).epsilon(1e-3));
    CHECK(b.cross == doctest::Approx(-0.5 * quartic / 2));
    CHECK(std::abs(b.total - (b.quad1 + b.quad2 + b.self1 + b.self2 + b.cross)) < 1e-12);

    auto semi = energy_coupled(FieldPair(U, ScalarField::zeros(g)), LimitParams(ProblemParams(1, 2, 0.7), 1, 3));
    CHECK(semi.cross == 0.0);
    CHECK(semi.total == doctest::Approx(4.0 / 3).epsilon(1e-4));

    auto g2 = line_grid();
    CHECK_THROWS_AS(energy_coupled(FieldPair(U, ScalarField::zeros(g2)), LimitParams(ProblemParams(1, 2, 0), 1, 1)),
                    validation_error);
}

TEST_CASE("coupled energy is symmetric under swapping the components") {
    auto g = line_grid();
    auto a = sample(g, [](const Point& x) { return 1.2 * std::exp(-x[0] * x[0]); });
    auto b = sample(g, [](const Point& x) { return 0.7 * sech(0.5 * x[0]); });
    for (double beta : {-0.5, 0.0, 0.8}) {
        ProblemParams pp(1, 2.5, beta);
        const double e1 = energy_coupled(FieldPair(a, b), LimitParams(pp, 1.0, 2.5)).total;
        const double e2 = energy_coupled(FieldPair(b, a), LimitParams(pp, 2.5, 1.0)).total;
        CHECK(e1 == doctest::Approx(e2).epsilon(1e-13));
    }
}

TEST_CASE("scalar ground states") {
    SUBCASE("cubic, unit alpha") {
        auto U = solve_scalar_ground(ProblemParams(1, 2, 0), 1.0, 0.0, default_limit_grid(1, 1.0));
        CHECK(U.sup_norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
        CHECK(energy_scalar(U, 1.0, 0.0, 2.0) == doctest::Approx(4.0 / 3).epsilon(1e-4));
        CHECK(scalar_residual(U, 1.0, 0.0, 2.0) <= 1e-8);
        CHECK(nehari_scale_scalar(U, 1.0, 0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-8));
        for (std::size_t i = 0; i + 1 < U.size(); ++i) CHECK(U.values[static_cast<Eigen::Index>(i)] > 0);
    }
    SUBCASE("enhanced nonlinearity") {
        auto U = solve_scalar_ground(ProblemParams(1, 2, 0), 1.0, 1.0, default_limit_grid(1, 1.0));
        CHECK(energy_scalar(U, 1.0, 1.0, 2.0) == doctest::Approx(2.0 / 3).epsilon(1e-4));
    }
    SUBCASE("alpha = 4") {
        auto U = solve_scalar_ground(ProblemParams(1, 2, 0), 4.0, 0.0, default_limit_grid(1, 4.0));
        CHECK(energy_scalar(U, 4.0, 0.0, 2.0) == doctest::Approx(32.0 / 3).epsilon(1e-3));
    }
    SUBCASE("rescaling agrees with a direct solve") {
        ProblemParams pp(2, 2.5, 0);
        auto grid = default_limit_grid(2, 1.0);
        auto U0 = solve_scalar_ground(pp, 1.0, 0.0, grid);
        auto direct = solve_scalar_ground(pp, 1.0, 0.6, grid);
        auto scaled = rescale_ground(U0, 0.6, 2.5);
        CHECK((direct.values - scaled.values).lpNorm<Eigen::Infinity>() < 1e-6);
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(solve_scalar_ground(ProblemParams(1, 2, 0), -1.0, 0.0, default_limit_grid(1, 1.0)),
                        validation_error);
        CHECK_THROWS_AS(solve_scalar_ground(ProblemParams(1, 2, 0), 1.0, -0.5, default_limit_grid(1, 1.0)),
                        validation_error);
    }
}

TEST_CASE("Nehari scaling of a single field") {
    auto g = line_grid();
    auto U = cubic_soliton(g);
    ScalarField twice(g, 2.0 * U.values);
    CHECK(nehari_scale_scalar(twice, 1.0, 0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(nehari_scale_scalar(U, 2.0, 0.0, 2.0) > nehari_scale_scalar(U, 1.0, 0.0, 2.0));
    CHECK_THROWS_AS(nehari_scale_scalar(ScalarField::zeros(g), 1.0, 0.0, 2.0), validation_error);

    // The returned scale maximizes t -> J(tu).
    auto bump = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    const double ts = nehari_scale_scalar(bump, 1.0, 0.3, 2.5);
    auto J = [&](double t) { return energy_scalar(ScalarField(g, t * bump.values), 1.0, 0.3, 2.5); };
    for (double f : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0}) CHECK(J(ts) >= J(f * ts));
}

TEST_CASE("Nehari 2x2 system") {
    SUBCASE("decoupled") {
        for (double p : {1.5, 2.0, 3.0}) {
            auto r = data(2.0, 3.0, 0.5, 4.0, 1.0);
            auto [t, s] = solve_nehari_2x2(r, p, 0.0);
            CHECK(t == doctest::Approx(std::pow(2.0 / 0.5, 1 / (2 * p - 2))).epsilon(1e-9));
            CHECK(s == doctest::Approx(std::pow(3.0 / 4.0, 1 / (2 * p - 2))).epsilon(1e-9));
        }
    }
    SUBCASE("cubic example") {
        auto [t, s] = solve_nehari_2x2(data(1, 1, 2, 2, 1), 2.0, 0.5);
        CHECK(t == doctest::Approx(std::sqrt(0.4)).epsilon(1e-10));
        CHECK(s == doctest::Approx(std::sqrt(0.4)).epsilon(1e-10));
    }
    SUBCASE("symmetric data always has a root") {
        for (double p : {2.0, 2.5, 3.5})
            for (double beta : {0.1, 0.5, 0.9}) {
                auto roots = nehari_roots(data(1.3, 1.3, 0.8, 0.8, 0.5), p, beta);
                REQUIRE(roots.size() == 1);
                CHECK(roots[0].first == doctest::Approx(roots[0].second).epsilon(1e-10));
            }
    }
    SUBCASE("degenerate cubic system") {
        CHECK_THROWS(solve_nehari_2x2(data(1, 1, 1, 1, 2), 2.0, 0.5));
    }
    SUBCASE("roots satisfy both equations") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> U(0.2, 3.0), B(0.0, 0.95);
        for (double p : {1.4, 2.0, 2.5, 3.5}) {
            for (int k = 0; k < 20; ++k) {
                const double Y1 = U(rng), Y2 = U(rng);
                const double Z = std::sqrt(Y1 * Y2) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                auto r = data(U(rng), U(rng), Y1, Y2, Z);
                const double beta = B(rng);
                auto roots = nehari_roots(r, p, beta);
                // Arbitrary data need not admit a positive root; for p >= 2 and beta < 1 it is unique if it does.
                if (p >= 2) CHECK(roots.size() <= 1);
                for (auto [t, s] : roots) {
                    CHECK(t > 0);
                    CHECK(s > 0);
                    CHECK(nehari_defect(r, p, beta, t, s) <= 1e-10);
                }
            }
        }
    }
}

TEST_CASE("Nehari data respects Hoelder") {
    auto g = line_grid();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> A(0.1, 2.0), C(-3.0, 3.0);
    for (int k = 0; k < 25; ++k) {
        const double a1 = A(rng), a2 = A(rng), c1 = C(rng), c2 = C(rng), s1 = A(rng), s2 = A(rng);
        auto u1 = sample(g, [&](const Point& x) { return a1 * std::exp(-s1 * (x[0] - c1) * (x[0] - c1)); });
        auto u2 = sample(g, [&](const Point& x) { return a2 * sech(s2 * (x[0] - c2)); });
        for (double p : {1.5, 2.0, 3.0}) {
            auto r = nehari_data(FieldPair(u1, u2), LimitParams(ProblemParams(1, p, 0.5), 1, 2));
            CHECK(r.Z * r.Z <= r.Y1 * r.Y2 * (1 + 1e-12));
            CHECK(r.X1 >= 0);
            CHECK(r.Y2 >= 0);
        }
    }
}

TEST_CASE("coupled ground states") {
    SUBCASE("weak cubic coupling selects the semitrivial state of the smaller alpha") {
        LimitParams lp(ProblemParams(1, 2, 0.5), 1.0, 1.5);
        auto res = solve_coupled_ground_all(lp, default_limit_grid(1, 1.0));
        const auto& best = res.best();
        CHECK(best.energy == doctest::Approx(numeric_C10(1, 2)).epsilon(1e-3));
        CHECK(best.w.u2.sup_norm() < 1e-3);
        CHECK(best.w.u1.sup_norm() > 1.0);
        for (std::size_t i = 1; i < res.candidates.size(); ++i)
            CHECK(res.candidates[i].energy >= res.candidates[i - 1].energy);
    }
    SUBCASE("sublinear coupling gives a nonstandard state below both scalar levels") {
        ProblemParams pp(1, 1.5, 0.5);
        LimitParams lp(pp, 1.0, 1.2);
        auto w = solve_coupled_ground(lp, default_limit_grid(1, 1.0));
        CHECK(w.u1.sup_norm() > 1e-3);
        CHECK(w.u2.sup_norm() > 1e-3);
        const double C10 = numeric_C10(1, 1.5);
        const double lower = std::min(C_ab(1.0, 0, C10, pp), C_ab(1.2, 0, C10, pp));
        CHECK(energy_coupled(w, lp).total < lower);
    }
    SUBCASE("decoupled minimum") {
        ProblemParams pp(1, 2, 0.0);
        const double C10 = numeric_C10(1, 2);
        const double e = coupled_ground_energy(LimitParams(pp, 2.0, 1.3), default_limit_grid(1, 1.3));
        CHECK(e == doctest::Approx(C_ab(1.3, 0, C10, pp)).epsilon(1e-3));
    }
}

TEST_CASE("converged critical points sit on their own Nehari set") {
    struct Case {
        ProblemParams pp;
        double a1, a2;
    };
    for (const auto& c : {Case{ProblemParams(1, 1.5, 0.5), 1.0, 1.2}, Case{ProblemParams(1, 2, 1.5), 1.0, 1.0},
                          Case{ProblemParams(1, 3, 4.0), 1.0, 1.1}}) {
        LimitParams lp(c.pp, c.a1, c.a2);
        auto res = solve_coupled_ground_all(lp, default_limit_grid(1, std::min(c.a1, c.a2)));
        for (const auto& cand : res.candidates) {
            if (cand.w.u1.sup_norm() < 1e-3 || cand.w.u2.sup_norm() < 1e-3) continue;
            auto rep = nehari_data(cand.w, lp);
            auto [t, s] = solve_nehari_2x2(rep, c.pp.p, c.pp.beta, std::make_pair(1.0, 1.0));
            CHECK(t == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("lower bound machinery") {
    ProblemParams pp(1, 2, 0.5);
    auto grid = default_limit_grid(1, 1.0);
    const double C10 = numeric_C10(1, 2);

    SUBCASE("synchronized pair meets the bound with zero margin") {
        auto U = solve_scalar_ground(pp, 1.0, 0.5, grid);
        LimitParams lp(pp, 1.0, 1.0);
        auto rep = lower_bound_check(FieldPair(U, U), lp, C10);
        CHECK(rep.bound_case == 1);
        CHECK(rep.pass);
        CHECK(std::abs(rep.margin) < 1e-3);
        CHECK(rep.J == doctest::Approx(2 * C_ab(1.0, 0.5, C10, pp)).epsilon(1e-3));
        CHECK(rep.t_beta == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(rep.s_beta == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(rep.maximizer_is_unit);
    }
    SUBCASE("decoupled pair is tight for the nonpositive case") {
        ProblemParams p0(1, 2, 0.0);
        auto U1 = solve_scalar_ground(p0, 1.0, 0.0, grid);
        auto U2 = solve_scalar_ground(p0, 2.0, 0.0, grid);
        auto rep = lower_bound_check(FieldPair(U1, ScalarField(U1.grid, U2.values)), LimitParams(p0, 1.0, 2.0), C10);
        CHECK(rep.bound_case == 2);
        CHECK(rep.pass);
        CHECK(std::abs(rep.margin) < 1e-3);
        CHECK(rep.maximizer_is_unit);
    }
    SUBCASE("standard pairs are rejected") {
        auto U = solve_scalar_ground(pp, 1.0, 0.0, grid);
        CHECK_THROWS_AS(lower_bound_check(FieldPair(U, ScalarField::zeros(U.grid)), LimitParams(pp, 1, 1), C10),
                        domain_error);
    }
}

TEST_CASE("ground energy follows the scaling law") {
    for (int N : {1, 2}) {
        for (double p : {1.5, 2.0}) {
            ProblemParams pp(N, p, 0);
            const double C10 = numeric_C10(N, p);
            for (auto [a, b] : {std::pair{0.5, 0.0}, std::pair{2.0, 0.0}, std::pair{1.0, 0.7}, std::pair{3.0, 0.3}}) {
                auto U = solve_scalar_ground(pp, a, b, default_limit_grid(N, a));
                const double expected = std::pow(a, p / (p - 1) - N / 2.0) * std::pow(1 + b, -1 / (p - 1)) * C10;
                CHECK(energy_scalar(U, a, b, p) == doctest::Approx(expected).epsilon(1e-3));
            }
        }
    }
}

TEST_CASE("coupled ground energy increases in each alpha") {
    ProblemParams pp(1, 1.5, 0.5);
    double prev = 0;
    for (double a : {0.6, 0.8, 1.0, 1.3}) {
        const double e = coupled_ground_energy(LimitParams(pp, a, 1.0), default_limit_grid(1, std::min(a, 1.0)));
        CHECK(e > prev);
        prev = e;
    }
    prev = 0;
    for (double a : {0.6, 0.8, 1.0, 1.3}) {
        const double e = coupled_ground_energy(LimitParams(pp, 1.0, a), default_limit_grid(1, std::min(a, 1.0)));
        CHECK(e > prev);
        prev = e;
    }
}
