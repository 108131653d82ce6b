// =============================================================================
// discrete_wf.hpp — Finite-population Wright-Fisher model with per-generation
// mutation matrix u and selection coefficients s, built from (theta, P,
// sigma) through scaling sequences eps^(N), eps_i^(N):
//
//     u_ij = eps (theta/2) P_ij  (i != j),     s_i = eps_i (sigma_i / 2).
//
// Exhibits the scaling regimes of the large-N limits: exact infinitesimal
// increment moments, the multinomial one-step sampler, and the fluctuation
// experiments around the boundary equilibrium (CIR limit) and around an
// interior equilibrium (OU limit).
// =============================================================================
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "strongsel/diffusion.hpp"
#include "strongsel/model.hpp"
#include "strongsel/rng.hpp"

namespace strongsel {

struct DiscreteWfParams {
    long N = 0;
    std::vector<std::vector<double>> u;  // row-stochastic mutation probabilities
    std::vector<double> s;               // per-generation selection coefficients

    int d() const { return static_cast<int>(s.size()); }

    /// u_ij = eps (theta/2) P_ij off-diagonal, rows forced to sum to 1;
    /// s_i = eps_i (sigma_i/2).
    static DiscreteWfParams from_scalings(const MutationModel& m,
                                          const std::vector<double>& sigmas, long N,
                                          double eps, const std::vector<double>& eps_i) {
        const int d = m.d();
        if (static_cast<int>(sigmas.size()) != d || static_cast<int>(eps_i.size()) != d)
            throw std::invalid_argument("DiscreteWfParams: sigma/eps_i must have d entries");
        DiscreteWfParams p;
        p.N = N;
        p.u.assign(d, std::vector<double>(d, 0.0));
        p.s.resize(d);
        for (int i = 0; i < d; ++i) {
            double off = 0.0;
            for (int j = 0; j < d; ++j) {
                if (i == j) continue;
                p.u[i][j] = eps * 0.5 * m.theta() * m.P(i, j);
                off += p.u[i][j];
            }
            if (off > 1.0)
                throw std::invalid_argument("DiscreteWfParams: mutation probabilities exceed 1");
            p.u[i][i] = 1.0 - off;
            p.s[i] = eps_i[i] * 0.5 * sigmas[i];
            if (1.0 + p.s[i] <= 0.0)
                throw std::invalid_argument("DiscreteWfParams: 1 + s_i must be positive");
        }
        return p;
    }
};

/// Expected next-generation frequencies q^{(N)}(x):
/// selection-tilted frequencies pushed through the mutation matrix.
inline std::vector<double> wf_expected_freq(const std::vector<double>& x,
                                            const DiscreteWfParams& p) {
    const int d = p.d();
    double denom = 0.0;
    for (int j = 0; j < d; ++j) denom += (1.0 + p.s[j]) * x[j];
    std::vector<double> tilted(d), q(d, 0.0);
    for (int j = 0; j < d; ++j) tilted[j] = (1.0 + p.s[j]) * x[j] / denom;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) q[i] += tilted[j] * p.u[j][i];
    return q;
}

namespace detail {

inline std::vector<long> multinomial(long N, const std::vector<double>& prob,
                                     std::mt19937_64& rng) {
    const int d = static_cast<int>(prob.size());
    std::vector<long> counts(d, 0);
    long remaining = N;
    double prob_left = 1.0;
    for (int i = 0; i < d - 1 && remaining > 0; ++i) {
        double pi = std::min(1.0, std::max(0.0, prob[i] / prob_left));
        std::binomial_distribution<long> bin(remaining, pi);
        counts[i] = bin(rng);
        remaining -= counts[i];
        prob_left -= prob[i];
        if (prob_left <= 0.0) break;
    }
    counts[d - 1] += remaining;
    return counts;
}

}  // namespace detail

/// One generation: multinomial resampling of N individuals at q^{(N)}(x).
inline std::vector<long> wf_step_counts(const std::vector<long>& counts,
                                        const DiscreteWfParams& p, std::mt19937_64& rng) {
    std::vector<double> x(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        x[i] = static_cast<double>(counts[i]) / static_cast<double>(p.N);
    return detail::multinomial(p.N, wf_expected_freq(x, p), rng);
}

inline std::vector<double> wf_step(const std::vector<double>& x, const DiscreteWfParams& p,
                                   std::uint64_t seed) {
    auto rng = make_stream(seed, 0);
    std::vector<long> counts(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        counts[i] = std::lround(x[i] * static_cast<double>(p.N));
    std::vector<long> next = wf_step_counts(counts, p, rng);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = static_cast<double>(next[i]) / static_cast<double>(p.N);
    return out;
}

struct IncrementMoments {
    Eigen::VectorXd drift;   // alpha_N * E[Delta X]
    Eigen::MatrixXd cov;     // alpha_N * E[Delta X_i Delta X_j]
};

/// Exact analytic infinitesimal-increment moments of the alpha_N-timescaled
/// chain at state x (no sampling).
inline IncrementMoments increment_moments(const std::vector<double>& x,
                                          const DiscreteWfParams& p, double alpha_N) {
    const int d = p.d();
    const std::vector<double> q = wf_expected_freq(x, p);
    IncrementMoments mom;
    mom.drift.resize(d);
    mom.cov.resize(d, d);
    for (int i = 0; i < d; ++i) mom.drift[i] = alpha_N * (q[i] - x[i]);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            mom.cov(i, j) = alpha_N * (q[i] * ((i == j ? 1.0 : 0.0) - q[j]) / p.N +
                                       (q[i] - x[i]) * (q[j] - x[j]));
    return mom;
}

// ---------------------------------------------------------------------------
// Fluctuation experiments
// ---------------------------------------------------------------------------

struct FluctuationRow {
    long N = 0;
    int component = 0;            // unfit component index (0-based allele index)
    double realized_z0 = 0.0;     // a_N (X_i(0) - delta_1i) after grid rounding
    double wf_mean = 0.0, wf_mean_se = 0.0;
    double wf_second = 0.0, wf_second_se = 0.0;
    double limit_mean = 0.0, limit_second = 0.0;
    double raw_variance = 0.0;    // Var(X_i) before any scaling
};

/// Case with the equilibrium on the boundary: eps = 1/N, eps_1 = N^{-beta},
/// sigma_1 = 1, alpha_N = N^beta, a_N = N eps_1 = N^{1-beta}.  Simulates
/// Z^(N)(t) = a_N (X(floor(alpha_N t)) - e_1) and reports its first two
/// moments next to the CIR conditional moments.
inline std::vector<FluctuationRow> boundary_fluctuation_experiment(
    const MutationModel& m, const std::vector<double>& z0_unfit, double beta, double t,
    const std::vector<long>& N_list, std::size_t replicates, std::uint64_t seed,
    unsigned threads = 1) {
    const int d = m.d();
    if (static_cast<int>(z0_unfit.size()) != d - 1)
        throw std::invalid_argument("boundary_fluctuation_experiment: z0 needs d-1 entries");
    if (beta <= 0.0 || beta >= 1.0)
        throw std::invalid_argument("boundary_fluctuation_experiment: beta in (0,1)");
    std::vector<FluctuationRow> rows;
    for (long N : N_list) {
        const double eps1 = std::pow(double(N), -beta);
        const double a_N = double(N) * eps1;
        const double alpha_N = 1.0 / eps1;
        std::vector<double> sigmas(d, 0.0), eps_i(d, 1.0 / double(N));
        sigmas[0] = 1.0;
        eps_i[0] = eps1;
        DiscreteWfParams p =
            DiscreteWfParams::from_scalings(m, sigmas, N, 1.0 / double(N), eps_i);
        // initial counts: e_1 + z0 / a_N on the N-grid
        std::vector<long> counts0(d, 0);
        long used = 0;
        for (int i = 1; i < d; ++i) {
            counts0[i] = std::lround(double(N) * z0_unfit[i - 1] / a_N);
            used += counts0[i];
        }
        counts0[0] = N - used;
        const long generations = static_cast<long>(std::floor(alpha_N * t));

        std::vector<std::vector<double>> samples(replicates);
        parallel_replicates(replicates, threads, [&](std::size_t r) {
            auto rng = make_stream(seed, r);
            std::vector<long> counts = counts0;
            for (long g = 0; g < generations; ++g) counts = wf_step_counts(counts, p, rng);
            std::vector<double> z(d - 1);
            for (int i = 1; i < d; ++i)
                z[i - 1] = a_N * (double(counts[i]) / double(N));
            samples[r] = z;
        });
        for (int i = 1; i < d; ++i) {
            RunningStats m1, m2, raw;
            for (std::size_t r = 0; r < replicates; ++r) {
                const double z = samples[r][i - 1];
                m1.add(z);
                m2.add(z * z);
                raw.add(z / a_N);
            }
            FluctuationRow row;
            row.N = N;
            row.component = i;
            row.realized_z0 = a_N * double(counts0[i]) / double(N);
            row.wf_mean = m1.mean();
            row.wf_mean_se = m1.stderror();
            row.wf_second = m2.mean();
            row.wf_second_se = m2.stderror();
            row.limit_mean = cir_conditional_mean(row.realized_z0, m.theta_p1(i), t);
            row.limit_second = cir_conditional_var(row.realized_z0, m.theta_p1(i), t) +
                               row.limit_mean * row.limit_mean;
            row.raw_variance = raw.variance();
            rows.push_back(row);
        }
    }
    return rows;
}

struct OuRow {
    long N = 0;
    int i = 0, j = 0;
    double emp_cov = 0.0, emp_se = 0.0;
    double limit = 0.0;  // Q_i (delta_ij - Q_j) / theta
};

/// Neutral PIM case with interior equilibrium Q: eps = N^{-beta}, a_N =
/// sqrt(N eps); the fluctuations a_N (X - Q) approach an OU process whose
/// stationary covariance is Q_i (delta_ij - Q_j) / theta.
inline std::vector<OuRow> interior_ou_experiment(const PimModel& m, double beta, double t,
                                                 long N, std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads = 1) {
    const int d = m.d();
    const double eps = std::pow(double(N), -beta);
    const double a_N = std::sqrt(double(N) * eps);
    const double alpha_N = 1.0 / eps;
    MutationModel general = m.as_general();
    DiscreteWfParams p = DiscreteWfParams::from_scalings(
        general, std::vector<double>(d, 0.0), N, eps, std::vector<double>(d, eps));
    std::vector<long> counts0(d, 0);
    long used = 0;
    for (int i = 1; i < d; ++i) {
        counts0[i] = std::lround(double(N) * m.Q(i));
        used += counts0[i];
    }
    counts0[0] = N - used;
    const long generations = static_cast<long>(std::floor(alpha_N * t));

    std::vector<std::vector<double>> samples(replicates);
    parallel_replicates(replicates, threads, [&](std::size_t r) {
        auto rng = make_stream(seed, r);
        std::vector<long> counts = counts0;
        for (long g = 0; g < generations; ++g) counts = wf_step_counts(counts, p, rng);
        std::vector<double> z(d);
        for (int i = 0; i < d; ++i) z[i] = a_N * (double(counts[i]) / double(N) - m.Q(i));
        samples[r] = z;
    });

    // covariance with group-wise standard errors (10 replicate groups)
    std::vector<OuRow> rows;
    const std::size_t groups = 10;
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            RunningStats group_cov;
            for (std::size_t g = 0; g < groups; ++g) {
                RunningStats zi, zj, zij;
                for (std::size_t r = g; r < replicates; r += groups) {
                    zi.add(samples[r][i]);
                    zj.add(samples[r][j]);
                    zij.add(samples[r][i] * samples[r][j]);
                }
                group_cov.add(zij.mean() - zi.mean() * zj.mean());
            }
            OuRow row;
            row.N = N;
            row.i = i;
            row.j = j;
            row.emp_cov = group_cov.mean();
            row.emp_se = group_cov.stderror();
            row.limit = m.Q(i) * ((i == j ? 1.0 : 0.0) - m.Q(j)) / m.theta();
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace strongsel
