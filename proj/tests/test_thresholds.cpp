#include <cmath>

#include <doctest.h>

#include "solitonlab/thresholds.hpp"

using namespace solitonlab;

namespace {

const ProblemParams kCubicLine(1, 2, 0.5);

LimitSolver coarse() {
    LimitSolver s;
    s.h = 0.02;
    return s;
}

std::vector<std::pair<double, double>> flat_samples(double m1, double m2, int n = 9) {
    return std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {m1, m2});
}

}  // namespace

TEST_CASE("scaled ground energy") {
    const double C10 = 4.0 / 3;
    ProblemParams pp(1, 2, 0);
    CHECK(C_ab(1, 0, C10, pp) == doctest::Approx(C10));
    CHECK(C_ab(4, 0, C10, pp) == doctest::Approx(8 * C10));
    CHECK(C_ab(1, 1, C10, pp) == doctest::Approx(C10 / 2));
    CHECK_THROWS_AS(C_ab(0, 0, C10, pp), validation_error);
    CHECK_THROWS_AS(C_ab(1, -1, C10, pp), validation_error);

    CHECK_FALSE(scaled_ground_energy(2, 0, C10, pp).nonpositive_exponent);
    // Validated parameters never reach a nonpositive exponent; set the fields directly.
    ProblemParams raw;
    raw.N = 3;
    raw.p = 3.5;
    auto flagged = scaled_ground_energy(2, 0, C10, raw);
    CHECK(flagged.nonpositive_exponent);
    CHECK(std::isfinite(flagged.value));
}

TEST_CASE("scaled ground energy is multiplicative in the coupling") {
    for (int N : {1, 2, 3})
        for (double p : {1.3, 2.0, 2.4})
            for (double a : {0.3, 1.0, 5.0})
                for (double b : {-0.5, 0.0, 0.7, 3.0}) {
                    ProblemParams pp(N, p, 0);
                    const double lhs = C_ab(a, b, 1.7, pp);
                    const double rhs = C_ab(a, 0, 1.7, pp) * std::pow(1 + b, -1 / (p - 1));
                    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
                }
}

TEST_CASE("coupling threshold from the potential ratio") {
    CHECK(beta_omega_p(1, 2, 1) == doctest::Approx(1.0));
    CHECK(beta_omega_p(1, 3, 1) == doctest::Approx(3.0));
    CHECK(beta_omega_p(0.25, 2, 1) == doctest::Approx(0.125));
    for (int N : {1, 2, 3})
        for (double p : {1.5, 2.0, 2.5}) CHECK(beta_omega_p(1, p, N) == doctest::Approx(std::pow(2, p - 1) - 1));
    CHECK_THROWS_AS(beta_omega_p(0, 2, 1), validation_error);
    CHECK_THROWS_AS(beta_omega_p(1.5, 2, 1), validation_error);
}

TEST_CASE("level split and the critical coupling") {
    ProblemParams pp(1, 2, 0);
    auto sp = level_split(1, 4, pp);
    CHECK(sp.ratio == doctest::Approx(9.0));
    CHECK(sp.l_tilde == 9);
    CHECK(sp.l_hat == doctest::Approx(0.0));
    CHECK(beta_tilde(1, 4, pp) == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(beta_tilde(1, 1, pp) == 1.0);

    for (double m2 : {1.5, 2.0, 3.7, 4.0}) {
        auto s = level_split(1, m2, pp);
        CHECK(s.l_tilde >= 1);
        CHECK(s.l_hat >= 0);
        CHECK(s.l_hat < 1);
        const double bt = beta_tilde(1, m2, pp);
        const double level = (C_ab(1, bt, 1, pp) + C_ab(m2, bt, 1, pp)) / C_ab(1, 0, 1, pp);
        const bool on_level = std::abs(level - s.l_tilde) < 1e-8 || std::abs(level - (s.l_tilde - 1)) < 1e-8;
        CHECK(on_level);
    }
    CHECK_THROWS_AS(beta_tilde(2, 1, pp), validation_error);
}

TEST_CASE("theta of beta") {
    const double closed = std::pow(4.0 / 3, 2.0 / 3) - 1;
    CHECK(theta_of_beta(1, 1, 0.5, kCubicLine) == doctest::Approx(closed).epsilon(1e-10));
    CHECK(theta_of_beta(1, 1, 1e-9, kCubicLine) == doctest::Approx(std::pow(2.0, 2.0 / 3) - 1).epsilon(1e-8));
    CHECK_THROWS_AS(theta_of_beta(1, 1, 0.0, kCubicLine), domain_error);
    CHECK_THROWS_AS(theta_of_beta(1, 1, 1.0, kCubicLine), domain_error);

    ProblemParams pp(1, 2, 0);
    for (double m2 : {1.0, 2.0, 3.0}) {
        const double bt = beta_tilde(1, m2, pp);
        double prev = INFINITY;
        for (int k = 1; k < 20; ++k) {
            const double th = theta_of_beta(1, m2, bt * k / 20, pp);
            CHECK(th > 0);
            CHECK(th < prev);
            prev = th;
        }
    }
}

TEST_CASE("C* for equal potentials") {
    const double C10 = numeric_C10(1, 2);
    auto c = cstar(1, 1, 0.5, kCubicLine, LimitSolver{});
    CHECK(c.value == doctest::Approx(2 * (4.0 / 3) / 1.5).epsilon(1e-3));
    CHECK(c.value == doctest::Approx(cstar_closed_form(1, 0.5, C10, kCubicLine)).epsilon(1e-4));
    CHECK(c.t == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(c.s == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("C* sandwich and small-coupling limit") {
    LimitSolver solver = coarse();
    for (auto [m1, m2, beta] : {std::tuple{1.0, 1.0, 0.2}, std::tuple{1.0, 1.5, 0.5}, std::tuple{0.8, 2.0, 0.9}}) {
        auto c = cstar(m1, m2, beta, ProblemParams(1, 2, beta), solver);
        CHECK(c.lower <= c.value * (1 + 1e-3));
        CHECK(c.value < c.upper);
    }
    auto tiny = cstar(1, 1.5, 1e-4, ProblemParams(1, 2, 1e-4), solver);
    CHECK(tiny.value == doctest::Approx(tiny.upper).epsilon(1e-3));
    CHECK(tiny.value <= tiny.upper);
    CHECK_THROWS_AS(cstar(1, 1, -0.1, kCubicLine, solver), validation_error);
}

TEST_CASE("separation scan") {
    const double C10 = 4.0 / 3;
    const double theta = theta_of_beta(1, 1, 0.5, kCubicLine);
    const double cs = cstar_closed_form(1, 0.5, C10, kCubicLine);

    auto r = separation_scan(1, 1, 0.5, theta, 5, 1000, cs, C10, kCubicLine);
    CHECK(r.pass);
    // Equal potentials: both window ends equal 2 C_{1,beta} = 16/9.
    CHECK(r.window_lo == doctest::Approx(16.0 / 9));
    CHECK(r.window_hi == doctest::Approx(16.0 / 9));
    CHECK(r.bands[0].hi == doctest::Approx(16.0 / 9).epsilon(1e-9));
    CHECK(r.bands[1].lo == doctest::Approx(8.0 / 3));
    CHECK(r.boundary_hits >= 1);

    SUBCASE("a larger theta reaches the window") {
        auto bad = separation_scan(1, 1, 0.5, 1.2 * theta, 5, 1000, cs, C10, kCubicLine);
        CHECK_FALSE(bad.pass);
    }
    SUBCASE("zero theta leaves only integer multiples") {
        auto z = separation_scan(1, 1, 0.5, 0.0, 5, 100, cs, C10, kCubicLine);
        CHECK(z.pass);
        for (const auto& b : z.bands) CHECK(b.lo == doctest::Approx(b.hi));
    }
    SUBCASE("coupling at the critical value is no longer avoidable") {
        ProblemParams pp(1, 2, 0);
        const double bt = beta_tilde(1, 4, pp);
        const double th = theta_of_beta(1, 4, 0.5 * bt, pp);
        const double cs_hi = C_ab(1, 0, C10, pp) + C_ab(4, 0, C10, pp);
        // At beta_tilde the lower window edge sits on the k = l_tilde - 1 multiple.
        auto at = separation_scan(1, 4, bt, th, 12, 1000, cs_hi, C10, pp);
        CHECK((!at.pass || at.boundary_hits > 0));
    }
    SUBCASE("passes across the admissible couplings") {
        ProblemParams pp(1, 2, 0);
        for (double m2 : {1.0, 2.0, 4.0}) {
            const double bt = beta_tilde(1, m2, pp);
            for (int k = 1; k < 10; ++k) {
                const double b = bt * k / 10;
                const double th = theta_of_beta(1, m2, b, pp);
                const double lower = C_ab(1, b, C10, pp) + C_ab(m2, b, C10, pp);
                // Any admissible C* lies in [lower, upper); the lower end is the tightest window.
                auto rep = separation_scan(1, m2, b, th, 12, 200, lower, C10, pp);
                CHECK(rep.pass);
            }
        }
    }
    CHECK_THROWS_AS(separation_scan(1, 1, 0.5, theta, 0, 1000, cs, C10, kCubicLine), validation_error);
    CHECK_THROWS_AS(separation_scan(1, 1, 0.5, theta, 3, 10, cs, C10, kCubicLine), validation_error);
}

TEST_CASE("ground coupling threshold estimates") {
    LimitSolver solver = coarse();
    CHECK_THROWS_AS(beta_ground_estimate(flat_samples(1, 1, 8), ProblemParams(1, 2, 0), solver), validation_error);

    SUBCASE("cubic, equal potentials") {
        auto r = beta_ground_estimate(flat_samples(1, 1), ProblemParams(1, 2, 0), solver);
        CHECK(std::abs(r.estimate - 1.0) <= 0.02);
        CHECK(r.hi - r.lo <= 0.02);
    }
    SUBCASE("sublinear") {
        auto r = beta_ground_estimate(flat_samples(1, 1), ProblemParams(1, 1.5, 0), solver);
        CHECK(r.estimate <= 0.02);
    }
    SUBCASE("quintic with unequal potentials") {
        auto r = beta_ground_estimate(flat_samples(1, 1.05), ProblemParams(1, 3, 0), solver);
        CHECK(r.estimate > 3.0);
    }
}

TEST_CASE("threshold report") {
    LimitSolver solver = coarse();
    auto r = threshold_report(1, 1, kCubicLine, solver, {{1, 0}, {4, 0}, {1, 1}});
    CHECK(r.C10 == doctest::Approx(4.0 / 3).epsilon(1e-4));
    CHECK(r.c_alpha_beta.at({4, 0}) == doctest::Approx(8 * r.C10));
    CHECK(r.beta_omega_p == doctest::Approx(1.0));
    CHECK(r.beta_tilde == 1.0);
    CHECK(r.theta == doctest::Approx(std::pow(4.0 / 3, 2.0 / 3) - 1));
    CHECK(r.cstar == doctest::Approx(16.0 / 9).epsilon(1e-3));
    CHECK(std::isnan(r.beta_ground));
    CHECK(r.l_tilde == 2);
    CHECK(r.l_hat == doctest::Approx(0.0));
    CHECK_FALSE(r.notes.empty());

    auto outside = threshold_report(1, 1, ProblemParams(1, 2, 1.5), solver);
    CHECK(std::isnan(outside.theta));
    auto negative = threshold_report(1, 2, ProblemParams(1, 2, -0.3), solver);
    CHECK(std::isnan(negative.cstar));
}
