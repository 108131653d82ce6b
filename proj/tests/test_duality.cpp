#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "strongsel/duality.hpp"

using namespace strongsel;

TEST_CASE("duality function values") {
    MutationModel m = PimModel(1.0, {0.5, 0.3, 0.2}).as_general();
    SECTION("all-fit samples give the constant function") {
        CHECK(duality_H({CbiState::from_unfit({0.7, 0.2}), SampleConfig({0, 0, 0})}, m) == 1.0);
        CHECK(duality_H({CbiState::from_unfit({0.7, 0.2}), SampleConfig({1, 0, 0})}, m) == 1.0);
        CHECK(duality_H({CbiState::from_unfit({0.7, 0.2}), SampleConfig({5, 0, 0})}, m) == 1.0);
    }
    SECTION("worked example: H = z^2 / qt_0") {
        // theta P_12 = 1: qt_0((0,2)) = Gamma(3)/Gamma(1) = 2
        MutationModel m2(2, 1.0, {{0.0, 1.0}, {1.0, 0.0}});
        double h = duality_H({CbiState::from_unfit({1.0}), SampleConfig({0, 2})}, m2);
        CHECK(h == Catch::Approx(0.5));
    }
    SECTION("undefined when the leading coefficient vanishes") {
        MutationModel bad(2, 1.0, {{1.0, 0.0}, {1.0, 0.0}});
        CHECK_THROWS(duality_H({CbiState::from_unfit({1.0}), SampleConfig({0, 1})}, bad));
    }
    SECTION("product of component functions") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> zdist(0.1, 2.5);
        std::uniform_int_distribution<int> ndist(0, 3);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> z{zdist(rng), zdist(rng)};
            std::vector<int> n{ndist(rng), ndist(rng), ndist(rng)};
            double h = duality_H({CbiState::from_unfit(z), SampleConfig(n)}, m);
            double prod = duality_H_component(z[0], n[1], m.theta_p1(1)) *
                          duality_H_component(z[1], n[2], m.theta_p1(2));
            CHECK(h == Catch::Approx(prod).epsilon(1e-13));
        }
    }
    SECTION("one-step compatibility with the fast process") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> zdist(0.1, 2.5);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> z{zdist(rng), zdist(rng)};
            std::vector<int> n{1, 2, 1};
            DualityPoint p{CbiState::from_unfit(z), SampleConfig(n)};
            double h = duality_H(p, m);
            for (int i = 1; i < 3; ++i) {
                std::vector<int> down = n, moved = n;
                down[i] -= 1;
                moved[i] -= 1;
                moved[0] += 1;
                double want = (n[i] - 1 + m.theta_p1(i)) / z[i - 1] * h;
                double h_down = duality_H({p.z, SampleConfig(down)}, m);
                double h_moved = duality_H({p.z, SampleConfig(moved)}, m);
                CHECK(h_down == Catch::Approx(want).epsilon(1e-12));
                CHECK(h_moved == Catch::Approx(want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("generator identity") {
    MutationModel m = PimModel(1.0, {0.5, 0.3, 0.2}).as_general();
    SECTION("constant H has zero generator on all-fit samples") {
        std::vector<DualityPoint> grid{{CbiState::from_unfit({0.5, 1.0}), SampleConfig({2, 0, 0})}};
        auto res = generator_duality_check(grid, m);
        CHECK(res.max_residual_analytic == 0.0);
        CHECK(res.max_residual_closed == 0.0);
    }
    SECTION("worked example evaluates to 1/2 on both sides") {
        MutationModel m2(2, 1.0, {{0.0, 1.0}, {1.0, 0.0}});
        // closed form: (1/2)(n_2/z_2)(n_2 - 1 + theta P_12 - z_2) H = 0.5
        DualityPoint p{CbiState::from_unfit({1.0}), SampleConfig({0, 2})};
        double H = duality_H(p, m2);
        double closed = 0.5 * (2.0 / 1.0) * (2.0 - 1.0 + 1.0 - 1.0) * H;
        CHECK(closed == Catch::Approx(0.5));
        auto res = generator_duality_check({p}, m2);
        CHECK(res.max_residual_analytic < 1e-12);
        CHECK(res.max_residual_closed < 1e-12);
    }
    SECTION("random grid in four dimensions") {
        MutationModel m4(4, 1.3,
                         {{0.4, 0.3, 0.2, 0.1},
                          {0.25, 0.35, 0.25, 0.15},
                          {0.3, 0.2, 0.3, 0.2},
                          {0.2, 0.3, 0.2, 0.3}});
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> zdist(0.2, 3.0);
        std::uniform_int_distribution<int> ndist(0, 3);
        std::vector<DualityPoint> grid;
        double max_h = 0.0;
        while (grid.size() < 200) {
            std::vector<double> z(3);
            for (auto& v : z) v = zdist(rng);
            std::vector<int> n(4);
            for (auto& v : n) v = ndist(rng);
            grid.push_back({CbiState::from_unfit(z), SampleConfig(n)});
            max_h = std::max(max_h, duality_H(grid.back(), m4));
        }
        auto res = generator_duality_check(grid, m4);
        CHECK(res.max_residual_analytic < 1e-10 * std::max(1.0, max_h));
        CHECK(res.max_residual_closed < 1e-10 * std::max(1.0, max_h));
        // second differences at step 1e-5 carry roundoff ~ |H| eps / h^2
        CHECK(res.max_residual_fd < 1e-5 * std::max(1.0, max_h));
    }
    SECTION("finite differences agree to 1e-6 where H is order one") {
        MutationModel m4(4, 4.0,
                         {{0.25, 0.25, 0.25, 0.25},
                          {0.25, 0.35, 0.25, 0.15},
                          {0.3, 0.2, 0.3, 0.2},
                          {0.2, 0.3, 0.2, 0.3}});
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> zdist(0.2, 0.45);
        std::uniform_int_distribution<int> ndist(0, 2);
        std::vector<DualityPoint> grid;
        while (grid.size() < 200) {
            std::vector<double> z(3);
            for (auto& v : z) v = zdist(rng);
            std::vector<int> n(4);
            for (auto& v : n) v = ndist(rng);
            grid.push_back({CbiState::from_unfit(z), SampleConfig(n)});
        }
        auto res = generator_duality_check(grid, m4);
        CHECK(res.max_residual_analytic < 1e-10);
        CHECK(res.max_residual_fd < 1e-6);
    }
}

TEST_CASE("monte carlo duality") {
    MutationModel m = PimModel(1.0, {0.5, 0.5}).as_general();
    SECTION("absorbed start: both sides are exactly one") {
        auto est = mc_duality_experiment(CbiState::from_unfit({0.9}), SampleConfig({1, 0}),
                                         0.5, 500, 9, m);
        CHECK(est.lhs == 1.0);
        CHECK(est.lhs_se == 0.0);
        CHECK(est.rhs == 1.0);
        CHECK(est.rhs_se == 0.0);
        auto est0 = mc_duality_experiment(CbiState::from_unfit({0.9}), SampleConfig({0, 0}),
                                          0.5, 500, 9, m);
        CHECK(est0.lhs == 1.0);
        CHECK(est0.rhs == 1.0);
    }
    SECTION("the worked configuration agrees at 99% confidence") {
        auto est = mc_duality_experiment(CbiState::from_unfit({1.3}), SampleConfig({0, 2}),
                                         0.7, 40000, 15, m, 2);
        CHECK(est.ci_overlap());
    }
}

TEST_CASE("component-wise duality") {
    MutationModel m = PimModel(1.0, {0.6, 0.4}).as_general();
    const double a = m.theta_p1(1);
    SECTION("empty component is constant") {
        auto est = componentwise_duality_check(1, 0.8, 0, 0.7, 200, 21, m);
        CHECK(est.lhs == 1.0);
        CHECK(est.rhs == 1.0);
    }
    SECTION("single lineage against the two-state death chain") {
        const double z = 1.1, t = 0.9;
        auto est = componentwise_duality_check(1, z, 1, t, 60000, 22, m, 2);
        // RHS in closed form: H_i steps from z/a to 1 at an Exp(1/2) clock
        double death = std::exp(-0.5 * t);
        double want = death * z / a + (1.0 - death);
        CHECK(std::abs(est.rhs - want) <= 3.0 * est.rhs_se);
        // LHS in closed form: E[Z(t)]/a from the CIR conditional mean
        double want_lhs = cir_conditional_mean(z, a, t) / a;
        CHECK(std::abs(est.lhs - want_lhs) <= 3.0 * est.lhs_se);
        CHECK(est.ci_overlap());
    }
    SECTION("invalid component index") {
        CHECK_THROWS(componentwise_duality_check(0, 1.0, 1, 0.5, 10, 1, m));
    }
}
