#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "recursion_basis_oracle.hpp"
#include "strongsel/expansion.hpp"

using namespace strongsel;

namespace {

MutationModel random_model(int d, double theta, std::uint64_t seed, double lo = 0.05) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, 1.0);
    std::vector<std::vector<double>> P(d, std::vector<double>(d));
    for (auto& row : P) {
        double s = 0;
        for (double& v : row) {
            v = u(rng);
            s += v;
        }
        for (double& v : row) v /= s;
    }
    return MutationModel(d, theta, P);
}

std::vector<int> unit(int d, int i) {
    std::vector<int> v(d, 0);
    v[i] = 1;
    return v;
}

}  // namespace

TEST_CASE("leading coefficient") {
    MutationModel m = random_model(3, 1.3, 5);
    CHECK(q0(SampleConfig(unit(3, 0)), m) == 1.0);
    for (int i = 1; i < 3; ++i)
        CHECK(q0(SampleConfig(unit(3, i)), m) == Catch::Approx(m.theta_p1(i)));
    CHECK(q0(SampleConfig({7, 0, 0}), m) == 1.0);
    // vanishes when an unfit type with no immigration is present
    MutationModel zero(2, 1.0, {{1.0, 0.0}, {1.0, 0.0}});
    CHECK(q0(SampleConfig({0, 1}), zero) == 0.0);
    CHECK(q0(SampleConfig({3, 0}), zero) == 1.0);
}

TEST_CASE("gamma approximation") {
    MutationModel m = random_model(3, 1.0, 6);
    SECTION("empty sample") {
        auto res = gamma_approx(SampleConfig({0, 0, 0}), m, 50.0);
        CHECK(res.value == 1.0);
        CHECK(res.coefficients[0] == 1.0);
    }
    SECTION("first two coefficients") {
        SampleConfig n({2, 1, 1});
        auto res = gamma_approx(n, m, 100.0);
        CHECK(res.coefficients[0] == Catch::Approx(q0(n, m)));
        double want = -res.coefficients[0] * n.n[0] *
                      (m.theta() * (1.0 - m.P(0, 0)) + n.unfit());
        CHECK(res.coefficients[1] == Catch::Approx(want));
    }
    SECTION("no fit copies leaves a single term") {
        MutationModel half(2, 1.0, {{0.5, 0.5}, {0.5, 0.5}});
        auto res = gamma_approx(SampleConfig({0, 1}), half, 100.0);
        CHECK(res.value == Catch::Approx(0.005));  // theta P_12 / sigma
        CHECK(res.coefficients.size() == 1);
    }
}

TEST_CASE("general expansion boundary and explicit first-order values") {
    MutationModel m = random_model(3, 1.4, 7);
    const double theta = m.theta();
    ExpansionTable t = expansion_general(m, 6);
    CHECK_THROWS(expansion_general(m, 0));

    CHECK(t.at(0, unit(3, 0)) == 1.0);
    CHECK(t.at(1, unit(3, 0)) == Catch::Approx(-theta * (1.0 - m.P(0, 0))));
    CHECK(t.at(1, {4, 0, 0}) == Catch::Approx(-4.0 * theta * (1.0 - m.P(0, 0))));
    for (int i = 1; i < 3; ++i) {
        double want = m.theta_p1(i) * (1.0 - theta);
        for (int j = 1; j < 3; ++j) want += theta * theta * m.P(0, j) * m.P(j, i);
        CHECK(t.at(1, unit(3, i)) == Catch::Approx(want));
    }
}

TEST_CASE("first-order general recursion in its rearranged closed form") {
    MutationModel m = random_model(3, 0.9, 8);
    const double theta = m.theta();
    ExpansionTable t = expansion_general(m, 7);
    for (std::vector<int> n : {std::vector<int>{1, 2, 1}, {0, 2, 2}, {2, 1, 1}}) {
        SampleConfig cfg(n);
        const int size = cfg.size(), n1 = n[0];
        double rhs = 0.0;
        for (int i = 1; i < 3; ++i) {
            if (n[i] == 0) continue;
            std::vector<int> down = n;
            down[i] -= 1;
            rhs += n[i] * (n[i] - 1 + m.theta_p1(i)) * t.at(1, down);
        }
        rhs -= (size - n1) * (n1 - 1 + theta * m.P(0, 0)) * t.at(0, n);
        for (int i = 1; i < 3; ++i) {
            if (n[i] == 0) continue;
            for (int j = 1; j < 3; ++j) {
                double delta = i == j ? 1.0 : 0.0;
                rhs += n[i] * theta * (m.P(j, i) - m.P(0, i)) *
                       (n[j] + m.theta_p1(j) - delta) / (n[i] + m.theta_p1(i) - 1.0) *
                       t.at(0, n);
            }
        }
        CHECK((size - n1) * t.at(1, n) == Catch::Approx(rhs));
    }
}

TEST_CASE("consistency-lemma identity holds on every stored entry") {
    for (auto [d, theta, seed] : {std::tuple{2, 1.0, 9ULL}, {3, 0.5, 10ULL}, {3, 2.0, 11ULL}}) {
        MutationModel m = random_model(d, theta, seed);
        const int h = 7;
        ExpansionTable t = expansion_general(m, h);
        t.for_each([&](int k, const std::vector<int>& n, double v) {
            int size = 0;
            for (int c : n) size += c;
            if (k + size + 1 > h) return;  // identity references budget+1 entries
            std::vector<int> up = n;
            up[0] += 1;
            double lhs = t.at(k, up);
            if (k >= 1) {
                for (int j = 1; j < d; ++j) {
                    std::vector<int> uj = n;
                    uj[j] += 1;
                    lhs += t.at(k - 1, uj);
                }
            }
            CHECK(lhs == Catch::Approx(v).epsilon(1e-10).margin(1e-12));
        });
    }
}

TEST_CASE("fit-boundary sum identity is exact") {
    MutationModel m = random_model(3, 1.1, 12);
    ExpansionTable t = expansion_general(m, 6);
    for (int k = 1; k <= 5; ++k) {
        double sum = 0.0;
        for (int i = 1; i < 3; ++i) sum += t.at(k - 1, unit(3, i));
        CHECK(t.at(k, unit(3, 0)) == -sum);  // bitwise: same arithmetic path
    }
    CHECK(t.at(0, unit(3, 0)) == 1.0);
}

TEST_CASE("gamma coefficients against expansion coefficients") {
    MutationModel m = random_model(3, 1.0, 13);
    ExpansionTable t = expansion_general(m, 6);
    // gamma_0 agrees everywhere
    t.for_each([&](int k, const std::vector<int>& n, double) {
        if (k != 0) return;
        auto res = gamma_approx(SampleConfig(n), m, 10.0);
        CHECK(res.coefficients[0] == Catch::Approx(t.at(0, n)).epsilon(1e-12));
    });
    // gamma_1 agrees on all-fit samples...
    auto fit = gamma_approx(SampleConfig({3, 0, 0}), m, 10.0);
    CHECK(fit.coefficients[1] == Catch::Approx(t.at(1, {3, 0, 0})));
    // ...and is expected to differ on mixed samples
    auto mixed = gamma_approx(SampleConfig({2, 1, 1}), m, 10.0);
    CHECK(std::abs(mixed.coefficients[1] - t.at(1, {2, 1, 1})) > 1e-6);
}

TEST_CASE("PIM closed form specializes the general dynamic program") {
    for (auto [d, seed] : {std::pair{2, 14ULL}, {3, 15ULL}}) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.2, 1.0);
        std::vector<double> q(d);
        double s = 0;
        for (double& v : q) {
            v = u(rng);
            s += v;
        }
        for (double& v : q) v /= s;
        PimModel pim(1.0, q);
        ExpansionTable closed = expansion_pim(pim, 8);
        ExpansionTable general = expansion_general(pim.as_general(), 8);
        closed.for_each([&](int k, const std::vector<int>& n, double v) {
            CHECK(general.at(k, n) == Catch::Approx(v).epsilon(1e-9).margin(1e-12));
        });
    }
}

TEST_CASE("PIM closed form k = 0 and k = 1") {
    PimModel pim(1.2, {0.6, 0.25, 0.15});
    MutationModel general = pim.as_general();
    ExpansionTable t = expansion_pim(pim, 6);
    SampleConfig n({1, 2, 1});
    CHECK(t.at(0, n.n) == Catch::Approx(q0(n, general)));
    const double theta = pim.theta();
    double r1 = (n.unfit() + theta * (1 - pim.Q(0))) * (1 - theta * pim.Q(0) - n.n[0]);
    double s1 = theta * (1 - pim.Q(0)) * (1 - theta * pim.Q(0));
    CHECK(t.at(1, n.n) == Catch::Approx(t.at(0, n.n) * (r1 - s1)));
}

TEST_CASE("general dynamic program against the unsimplified per-order recursion") {
    MutationModel m = random_model(3, 1.0, 16);
    const int h = 6;
    ExpansionTable t = expansion_general(m, h);
    strongsel_test::RecursionBasisOracle oracle(m, h - 1, h - 1);
    t.for_each([&](int k, const std::vector<int>& n, double v) {
        int size = 0;
        for (int c : n) size += c;
        if (k > h - 1 || size > h - 1 - k) return;  // oracle range
        double ref = oracle.at(k, n);
        CHECK(v == Catch::Approx(ref).epsilon(1e-9).margin(1e-11));
    });
}

TEST_CASE("asymmetric two-allele matrices expand like their PIM equivalent") {
    MutationModel general(2, 1.5, {{0.8, 0.2}, {0.6, 0.4}});
    const double tp12 = 1.5 * 0.2, tp21 = 1.5 * 0.6;
    PimModel equiv(tp12 + tp21, {tp21 / (tp12 + tp21), tp12 / (tp12 + tp21)});
    ExpansionTable a = expansion_general(general, 7);
    ExpansionTable b = expansion_pim(equiv, 7);
    a.for_each([&](int k, const std::vector<int>& n, double v) {
        CHECK(v == Catch::Approx(b.at(k, n)).epsilon(1e-10).margin(1e-12));
    });
}

TEST_CASE("two-allele series") {
    PimModel pim(1.0, {0.7, 0.3});
    SECTION("leading coefficient and all-fit case") {
        auto qt = two_allele_asymptotic(SampleConfig({1, 2}), pim, 3);
        CHECK(qt[0] == Catch::Approx(std::exp(log_gamma_ratio(0.3, 2))));
        auto allfit = two_allele_asymptotic(SampleConfig({2, 0}), pim, 2);
        CHECK(allfit[0] == 1.0);
    }
    SECTION("agrees with the PIM closed form") {
        ExpansionTable t = expansion_pim(pim, 8);
        for (std::vector<int> n : {std::vector<int>{1, 2}, {0, 3}, {2, 1}, {3, 0}}) {
            int size = n[0] + n[1];
            auto qt = two_allele_asymptotic(SampleConfig(n), pim, 8 - size);
            for (int k = 0; k + size <= 8; ++k)
                CHECK(qt[k] == Catch::Approx(t.at(k, n)).epsilon(1e-12).margin(1e-14));
        }
    }
}
