#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "strongsel/special.hpp"

using namespace strongsel;

TEST_CASE("log_gamma_ratio known values") {
    CHECK(log_gamma_ratio(1.0, 3) == Catch::Approx(std::log(6.0)));
    CHECK(log_gamma_ratio(0.0, 0) == 0.0);  // Gamma(0)/Gamma(0) = 1
    CHECK(log_gamma_ratio(0.5, 2) == Catch::Approx(std::log(0.75)));
    CHECK(log_gamma_ratio(0.0, 1) == neg_inf);
    CHECK(std::exp(log_gamma_ratio(0.0, 5)) == 0.0);
}

TEST_CASE("log_gamma_ratio matches the direct product") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> adist(0.01, 8.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = adist(rng);
        int k = static_cast<int>(rng() % 51);
        double direct = 1.0;
        for (int m = 0; m < k; ++m) direct *= a + m;
        CHECK(std::exp(log_gamma_ratio(a, k)) ==
              Catch::Approx(direct).epsilon(1e-13).margin(0.0));
    }
}

TEST_CASE("rising_factorial known values") {
    CHECK(rising_factorial(-2.0, 3) == 0.0);
    CHECK(rising_factorial(2.0, 2) == 6.0);
    CHECK(rising_factorial(-0.5, 2) == Catch::Approx(-0.25));
    CHECK(rising_factorial(3.7, 0) == 1.0);
}

TEST_CASE("rising_factorial composition identity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> adist(-6.0, 6.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = adist(rng);
        int k = static_cast<int>(rng() % 11);
        int m = static_cast<int>(rng() % (21 - k));
        double lhs = rising_factorial(a, k) * rising_factorial(a + k, m);
        double rhs = rising_factorial(a, k + m);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12).margin(1e-300));
    }
}

TEST_CASE("log-sum-exp accumulator") {
    LogSum acc;
    CHECK(acc.value() == neg_inf);
    acc.add(std::log(2.0));
    acc.add(std::log(3.0));
    CHECK(acc.value() == Catch::Approx(std::log(5.0)));
    acc.add(neg_inf);
    CHECK(acc.value() == Catch::Approx(std::log(5.0)));
    LogSum big;
    big.add(1000.0);
    big.add(1000.0 + std::log(2.0));
    CHECK(big.value() == Catch::Approx(1000.0 + std::log(3.0)));
    CHECK(log_add(std::log(1.5), neg_inf) == Catch::Approx(std::log(1.5)));
}
