// =============================================================================
// special.hpp — Gamma-ratio and rising-factorial primitives.
//
// Every probability-like quantity in this library that involves a Gamma
// ratio is carried in log space; signs (rising factorials take negative
// arguments) are tracked in plain doubles, which is exact at desk scale.
//
// Conventions for the boundary of the parameter domain:
//   Gamma(z)/Gamma(0) = 0 for z > 0,   Gamma(0)/Gamma(0) = 1.
// In log space "ratio = 0" is the sentinel -infinity.
// =============================================================================
#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

namespace strongsel {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// ln(Gamma(a+k)/Gamma(a)) for a >= 0, k >= 0, as the sum of ln(a+m).
/// a = 0: returns 0 for k = 0 (ratio 1) and -inf for k > 0 (ratio 0).
inline double log_gamma_ratio(double a, int k) {
    assert(a >= 0.0 && k >= 0);
    if (k == 0) return 0.0;
    if (a == 0.0) return neg_inf;
    double s = 0.0;
    for (int m = 0; m < k; ++m) s += std::log(a + m);
    return s;
}

/// Rising factorial (a)_k = a(a+1)...(a+k-1), (a)_0 = 1.
/// Plain product; handles negative a (the factor chain may hit zero).
inline double rising_factorial(double a, int k) {
    assert(k >= 0);
    double p = 1.0;
    for (int m = 0; m < k; ++m) p *= a + m;
    return p;
}

/// log(exp(a) + exp(b)) without overflow; absorbs -inf operands.
inline double log_add(double a, double b) {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    double m = a > b ? a : b;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Streaming log-sum-exp accumulator (max-exponent shifting).
class LogSum {
  public:
    void add(double log_term) {
        if (log_term == neg_inf) return;
        if (log_term > shift_) {
            // rescale the running sum to the new maximum exponent
            sum_ = sum_ * std::exp(shift_ - log_term) + 1.0;
            shift_ = log_term;
        } else {
            sum_ += std::exp(log_term - shift_);
        }
    }
    double value() const { return empty() ? neg_inf : shift_ + std::log(sum_); }
    bool empty() const { return sum_ == 0.0; }

  private:
    double shift_ = neg_inf;
    double sum_ = 0.0;
};

inline double log_factorial(int k) { return std::lgamma(double(k) + 1.0); }

}  // namespace strongsel
