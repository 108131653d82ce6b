// =============================================================================
// expansion.hpp — Asymptotic-expansion coefficients of the sampling
// probability under strong selection.
//
// The sampling probability of a configuration n decays like
// sigma^{-(||n||-n1)} and admits an asymptotic (not convergent) expansion
//
//     q(n) = sigma^{-(||n||-n1)} * sum_k qt_k(n) sigma^{-k} + ...
//
// This header computes the coefficients qt_k(n):
//   * expansion_general  — dynamic program over shells k+||n|| for an
//                          arbitrary mutation matrix P,
//   * expansion_pim      — closed form under parent-independent mutation,
//   * two_allele_asymptotic — the two-allele specialization,
//   * gamma_approx       — the Gamma(theta*P_1i,1) moment approximation,
//                          which matches the expansion to leading order.
//
// Allele 0 is the fit allele; "unfit" indices run from 1 to d-1.
// =============================================================================
#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "strongsel/model.hpp"
#include "strongsel/special.hpp"

namespace strongsel {

/// All coefficient values qt_k(n) for k + ||n|| <= max_budget.
class ExpansionTable {
  public:
    ExpansionTable(int d, int max_budget) : d_(d), h_max_(max_budget) {}

    int d() const { return d_; }
    int max_budget() const { return h_max_; }

    /// qt_k(n) with the conventions qt_k(0) = [k==0] and qt_k = 0 for
    /// configurations with a negative component.
    double at(int k, const std::vector<int>& n) const {
        if (k < 0) return 0.0;
        int size = 0;
        for (int c : n) {
            if (c < 0) return 0.0;
            size += c;
        }
        if (size == 0) return k == 0 ? 1.0 : 0.0;
        if (k + size > h_max_) throw std::out_of_range("ExpansionTable: k + ||n|| beyond budget");
        auto it = coeffs_.find(key(k, n));
        if (it == coeffs_.end()) throw std::out_of_range("ExpansionTable: missing entry");
        return it->second;
    }
    double at(int k, const SampleConfig& n) const { return at(k, n.n); }

    void set(int k, const std::vector<int>& n, double v) { coeffs_[key(k, n)] = v; }

    /// Visits every stored (k, n, value) triple.
    void for_each(const std::function<void(int, const std::vector<int>&, double)>& fn) const {
        for (const auto& [key_vec, v] : coeffs_) {
            std::vector<int> n(key_vec.begin() + 1, key_vec.end());
            fn(key_vec[0], n, v);
        }
    }

  private:
    static std::vector<int> key(int k, const std::vector<int>& n) {
        std::vector<int> key_vec;
        key_vec.reserve(n.size() + 1);
        key_vec.push_back(k);
        key_vec.insert(key_vec.end(), n.begin(), n.end());
        return key_vec;
    }

    int d_;
    int h_max_;
    std::map<std::vector<int>, double> coeffs_;
};

namespace detail {

/// Visits every vector of `len` non-negative integers summing to `total`.
template <typename Fn>
void for_each_composition(int total, int len, std::vector<int>& parts, int pos, Fn&& fn) {
    if (pos == len - 1) {
        parts[pos] = total;
        fn(parts);
        return;
    }
    for (int v = 0; v <= total; ++v) {
        parts[pos] = v;
        for_each_composition(total - v, len, parts, pos + 1, fn);
    }
}

template <typename Fn>
void for_each_composition(int total, int len, Fn&& fn) {
    std::vector<int> parts(len, 0);
    if (len == 0) return;
    for_each_composition(total, len, parts, 0, fn);
}

}  // namespace detail

/// Leading coefficient qt_0(n) = prod_{i>=1} Gamma(theta P_1i + n_i)/Gamma(theta P_1i).
inline double q0(const SampleConfig& n, const MutationModel& m) {
    double log_q = 0.0;
    for (int i = 1; i < m.d(); ++i) {
        double term = log_gamma_ratio(m.theta_p1(i), n.n[i]);
        if (term == neg_inf) return 0.0;
        log_q += term;
    }
    return std::exp(log_q);
}

struct GammaApproxResult {
    double value = 0.0;
    std::vector<double> coefficients;  // gamma_0 .. gamma_{n1}
};

/// Sampling probability under e_1 + Z(inf)/sigma with independent
/// Gamma(theta P_1i, 1) fluctuation components.
inline GammaApproxResult gamma_approx(const SampleConfig& n, const MutationModel& m,
                                      double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("gamma_approx: sigma must be > 0");
    const int d = m.d();
    const int n1 = n.n.empty() ? 0 : n.n[0];
    GammaApproxResult res;
    res.coefficients.resize(n1 + 1, 0.0);
    const double log_n1_fact = log_factorial(n1);
    for (int k = 0; k <= n1; ++k) {
        double acc = 0.0;
        detail::for_each_composition(k, d - 1, [&](const std::vector<int>& parts) {
            // multinomial(n1; n1-k, k_2, ..., k_d)
            double log_coef = log_n1_fact - log_factorial(n1 - k);
            double log_gammas = 0.0;
            for (int i = 1; i < d; ++i) {
                log_coef -= log_factorial(parts[i - 1]);
                double g = log_gamma_ratio(m.theta_p1(i), n.n[i] + parts[i - 1]);
                if (g == neg_inf) {
                    log_gammas = neg_inf;
                    break;
                }
                log_gammas += g;
            }
            if (log_gammas != neg_inf) acc += std::exp(log_coef + log_gammas);
        });
        res.coefficients[k] = (k % 2 == 0 ? 1.0 : -1.0) * acc;
    }
    double value = 0.0;
    for (int k = n1; k >= 0; --k) value = value / sigma + res.coefficients[k];
    res.value = value * std::pow(sigma, -double(n.unfit()));
    return res;
}

/// Coefficients for a general mutation model by the shell dynamic program:
/// within each shell h = k + ||n||, boundary states first, then the pure-fit
/// recursion, then the general recursion divided by (||n|| - n1).
inline ExpansionTable expansion_general(const MutationModel& m, int h_max) {
    if (h_max < 1) throw std::invalid_argument("expansion_general: h_max must be >= 1");
    const int d = m.d();
    const double theta = m.theta();
    ExpansionTable table(d, h_max);

    auto unit = [&](int i) {
        std::vector<int> v(d, 0);
        v[i] = 1;
        return v;
    };
    auto shifted = [](std::vector<int> n, int i, int di, int j = -1, int dj = 0) {
        n[i] += di;
        if (j >= 0) n[j] += dj;
        return n;
    };

    for (int h = 1; h <= h_max; ++h) {
        for (int k = 0; k <= h - 1; ++k) {
            const int size = h - k;
            if (size == 1) {
                // (I) boundary, fit allele
                double v = (k == 0) ? 1.0 : 0.0;
                if (k >= 1)
                    for (int i = 1; i < d; ++i) v -= table.at(k - 1, unit(i));
                table.set(k, unit(0), v);
                // (II) boundary, unfit alleles
                for (int i = 1; i < d; ++i) {
                    double w = (k == 0) ? m.theta_p1(i) : 0.0;
                    if (k >= 1) {
                        for (int j = 1; j < d; ++j) {
                            double c = (i == j ? 1.0 : 0.0) + m.P(0, i) - m.P(j, i);
                            w -= theta * c * table.at(k - 1, unit(j));
                            w += table.at(k - 1, shifted(unit(i), j, +1));
                        }
                    }
                    table.set(k, unit(i), w);
                }
                continue;
            }
            detail::for_each_composition(size, d, [&](const std::vector<int>& n) {
                const int n1 = n[0];
                if (n1 == size) {
                    // (III) pure-fit recursion
                    std::vector<int> below = shifted(n, 0, -1);
                    double v = table.at(k, below);
                    if (k >= 1) v -= theta * (1.0 - m.P(0, 0)) * table.at(k - 1, below);
                    if (k >= 2) {
                        for (int j = 1; j < d; ++j)
                            v += (n1 - 2 + theta * m.P(j, 0)) *
                                 table.at(k - 2, shifted(n, 0, -2, j, +1));
                    }
                    table.set(k, n, v);
                    return;
                }
                // (IV) general recursion
                double rhs = 0.0;
                for (int i = 1; i < d; ++i) {
                    if (n[i] == 0) continue;
                    rhs += n[i] * (n[i] - 1 + m.theta_p1(i)) * table.at(k, shifted(n, i, -1));
                }
                if (k >= 1) {
                    rhs += (n1 * (n1 - 1 + theta * m.P(0, 0)) - size * (size - 1 + theta)) *
                           table.at(k - 1, n);
                    for (int i = 1; i < d; ++i) {
                        if (n[i] == 0) continue;
                        for (int j = 1; j < d; ++j)
                            rhs += n[i] * theta * (m.P(j, i) - m.P(0, i)) *
                                   table.at(k - 1, shifted(n, i, -1, j, +1));
                    }
                    for (int i = 1; i < d; ++i)
                        rhs += size * table.at(k - 1, shifted(n, i, +1));
                }
                if (k >= 2 && n1 >= 1) {
                    for (int j = 1; j < d; ++j)
                        rhs += n1 * (n1 - 1 + theta * m.P(j, 0)) *
                               table.at(k - 2, shifted(n, 0, -1, j, +1));
                }
                table.set(k, n, rhs / double(size - n1));
            });
        }
    }
    return table;
}

namespace detail {

/// r_k and s_k of the closed-form PIM coefficients.
inline double pim_r(const PimModel& m, int total, int n1, int k) {
    double a = double(total - n1) + m.theta() * (1.0 - m.Q(0));
    double b = 1.0 - m.theta() * m.Q(0) - double(n1);
    return rising_factorial(a, k) * rising_factorial(b, k) / std::exp(log_factorial(k));
}

inline double pim_s(const PimModel& m, int k) {
    double a = m.theta() * (1.0 - m.Q(0));
    double b = 1.0 - m.theta() * m.Q(0);
    return rising_factorial(a, k) * rising_factorial(b, k) / std::exp(log_factorial(k));
}

}  // namespace detail

/// Closed-form coefficients under parent-independent mutation:
/// qt_k(n) = qt_0(n) r_k(n) - sum_{m<k} s_{k-m} qt_m(n).
inline ExpansionTable expansion_pim(const PimModel& m, int h_max) {
    if (h_max < 1) throw std::invalid_argument("expansion_pim: h_max must be >= 1");
    if (!m.irreducible())
        throw std::invalid_argument("expansion_pim: requires all Q_i > 0");
    const int d = m.d();
    ExpansionTable table(d, h_max);
    MutationModel general = m.as_general();
    for (int size = 1; size <= h_max; ++size) {
        detail::for_each_composition(size, d, [&](const std::vector<int>& n) {
            SampleConfig cfg(n);
            double qt0 = q0(cfg, general);
            std::vector<double> qt(h_max - size + 1, 0.0);
            for (int k = 0; k <= h_max - size; ++k) {
                double v = qt0 * detail::pim_r(m, size, n[0], k);
                for (int mm = 0; mm < k; ++mm) v -= detail::pim_s(m, k - mm) * qt[mm];
                qt[k] = v;
                table.set(k, n, v);
            }
        });
    }
    return table;
}

/// Two-allele coefficients qt_0..qt_K from the Kummer-function expansion;
/// the d = 2 specialization of expansion_pim.
inline std::vector<double> two_allele_asymptotic(const SampleConfig& n, const PimModel& m,
                                                 int K) {
    if (m.d() != 2 || n.d() != 2)
        throw std::invalid_argument("two_allele_asymptotic: needs d = 2");
    const double theta = m.theta();
    const double a1 = theta * m.Q(0), a2 = theta * m.Q(1);
    const int n1 = n.n[0], n2 = n.n[1];
    auto r = [&](int k) {
        return rising_factorial(n2 + a2, k) * rising_factorial(1.0 - a1 - n1, k) /
               std::exp(log_factorial(k));
    };
    auto s = [&](int k) {
        return rising_factorial(a2, k) * rising_factorial(1.0 - a1, k) /
               std::exp(log_factorial(k));
    };
    double qt0 = std::exp(log_gamma_ratio(a2, n2));
    std::vector<double> qt(K + 1, 0.0);
    qt[0] = qt0;
    for (int k = 1; k <= K; ++k) {
        double v = qt0 * (r(k) - s(k));
        for (int mm = 1; mm < k; ++mm) v -= s(k - mm) * qt[mm];
        qt[k] = v;
    }
    return qt;
}

}  // namespace strongsel
