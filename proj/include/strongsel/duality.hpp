// =============================================================================
// duality.hpp — The limiting moment duality between the CBI fluctuation
// diffusion (forwards) and the fast ancestral jump process (backwards):
//
//     E[H(Z(t), n) | Z(0) = z]  =  E[H(z, M(t)) | M(0) = n],
//     H(z, n) = (1 / qt_0(n)) prod_{i>=2} z_i^{n_i}.
//
// Provides the duality function, a grid check of the generator identity
// G H(z,.)(n) = L0 H(.,n)(z) = (1/2) sum_i (n_i/z_i)(n_i - 1 + theta P_1i - z_i) H,
// and the two-sided Monte Carlo experiment (exact CIR transitions on the
// left, the fast jump chain frozen at t on the right).
// =============================================================================
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "strongsel/asg.hpp"
#include "strongsel/diffusion.hpp"
#include "strongsel/expansion.hpp"
#include "strongsel/model.hpp"
#include "strongsel/rng.hpp"

namespace strongsel {

struct DualityPoint {
    CbiState z;
    SampleConfig n;
};

/// H(z, n) = (1/qt_0(n)) prod_{i>=2} z_i^{n_i}; equals 1 on all-fit samples.
/// Undefined (throws) when qt_0(n) = 0, i.e. P_1i = 0 for some i with n_i > 0.
inline double duality_H(const DualityPoint& p, const MutationModel& m) {
    if (p.n.d() != m.d() || p.z.d() != m.d())
        throw std::invalid_argument("duality_H: dimension mismatch");
    double log_h = 0.0;
    for (int i = 1; i < m.d(); ++i) {
        const int ni = p.n.n[i];
        if (ni == 0) continue;
        double lg = log_gamma_ratio(m.theta_p1(i), ni);
        if (lg == neg_inf)
            throw std::invalid_argument("duality_H: qt_0(n) = 0 (theta P_1i = 0 with n_i > 0)");
        if (p.z.z[i] == 0.0) return 0.0;
        log_h += ni * std::log(p.z.z[i]) - lg;
    }
    return std::exp(log_h);
}

/// Component duality function H_i(z_i, n_i) = Gamma(a)/Gamma(a+n_i) z_i^{n_i},
/// a = theta P_1i.
inline double duality_H_component(double z_i, int n_i, double theta_p1i) {
    if (n_i == 0) return 1.0;
    double lg = log_gamma_ratio(theta_p1i, n_i);
    if (lg == neg_inf)
        throw std::invalid_argument("duality_H_component: theta P_1i = 0 with n_i > 0");
    if (z_i == 0.0) return 0.0;
    return std::exp(n_i * std::log(z_i) - lg);
}

// ---------------------------------------------------------------------------
// Generator identity
// ---------------------------------------------------------------------------

struct GeneratorCheckResult {
    double max_residual_analytic = 0.0;  // |G H - L0 H| with exact derivatives
    double max_residual_fd = 0.0;        // |G H - L0 H| with central differences
    double max_residual_closed = 0.0;    // |G H - closed form|
};

namespace detail {

/// H from raw coordinates: only the unfit components of z enter.
inline double duality_H_at(const std::vector<double>& z, const std::vector<int>& n,
                           const MutationModel& m) {
    double log_h = 0.0;
    for (int i = 1; i < m.d(); ++i) {
        const int ni = n[i];
        if (ni == 0) continue;
        double lg = log_gamma_ratio(m.theta_p1(i), ni);
        if (lg == neg_inf)
            throw std::invalid_argument("duality_H: qt_0(n) = 0 (theta P_1i = 0 with n_i > 0)");
        if (z[i] == 0.0) return 0.0;
        log_h += ni * std::log(z[i]) - lg;
    }
    return std::exp(log_h);
}

}  // namespace detail

/// Evaluates the discrete generator of the fast ancestral process and the
/// differential CBI generator on H over the supplied grid and returns the
/// worst-case residuals.  Requires z_i > 0 wherever n_i > 0.
inline GeneratorCheckResult generator_duality_check(const std::vector<DualityPoint>& grid,
                                                    const MutationModel& m) {
    GeneratorCheckResult res;
    const int d = m.d();
    for (const auto& p : grid) {
        const std::vector<double>& z = p.z.z;
        const std::vector<int>& n = p.n.n;
        const double H = detail::duality_H_at(z, n, m);

        // discrete generator: coalescence and mutation-to-fit both drop one
        // unfit lineage of type i, and H(z, n-e_i) = H(z, n-e_i+e_1)
        double GH = 0.0;
        for (int i = 1; i < d; ++i) {
            const int ni = n[i];
            if (ni == 0) continue;
            const double denom = ni - 1 + m.theta_p1(i);
            if (denom <= 0.0)
                throw std::invalid_argument("generator_duality_check: theta P_1i = 0");
            std::vector<int> down = n;
            down[i] -= 1;
            const double H_down = detail::duality_H_at(z, down, m);
            const double rate = 0.5 * (ni * (ni - 1) + ni * m.theta_p1(i)) / denom;
            GH += rate * (H_down - H);
        }

        // differential generator, exact derivatives of the monomial
        double LH = 0.0;
        for (int i = 1; i < d; ++i) {
            const int ni = n[i];
            if (ni == 0) continue;
            const double zi = z[i];
            const double d1 = ni / zi * H;
            const double d2 = ni * (ni - 1) / (zi * zi) * H;
            LH += 0.5 * zi * d2 + 0.5 * (m.theta_p1(i) - zi) * d1;
        }

        // differential generator by central finite differences
        double LH_fd = 0.0;
        for (int i = 1; i < d; ++i) {
            if (n[i] == 0) continue;
            const double h = 1e-5 * std::max(1.0, z[i]);
            std::vector<double> zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            const double Hp = detail::duality_H_at(zp, n, m);
            const double Hm = detail::duality_H_at(zm, n, m);
            const double d1 = (Hp - Hm) / (2 * h);
            const double d2 = (Hp - 2 * H + Hm) / (h * h);
            LH_fd += 0.5 * z[i] * d2 + 0.5 * (m.theta_p1(i) - z[i]) * d1;
        }

        double closed = 0.0;
        for (int i = 1; i < d; ++i) {
            if (n[i] == 0) continue;
            closed += 0.5 * n[i] / z[i] * (n[i] - 1 + m.theta_p1(i) - z[i]) * H;
        }

        res.max_residual_analytic = std::max(res.max_residual_analytic, std::abs(GH - LH));
        res.max_residual_fd = std::max(res.max_residual_fd, std::abs(GH - LH_fd));
        res.max_residual_closed = std::max(res.max_residual_closed, std::abs(GH - closed));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo duality experiments
// ---------------------------------------------------------------------------

struct DualityEstimate {
    double lhs = 0.0, lhs_se = 0.0;  // E[H(Z(t), n)]
    double rhs = 0.0, rhs_se = 0.0;  // E[H(z, M(t))]

    /// Overlap of two-sided confidence intervals at the given z-quantile.
    bool ci_overlap(double z_crit = 2.5758) const {
        const double lo1 = lhs - z_crit * lhs_se, hi1 = lhs + z_crit * lhs_se;
        const double lo2 = rhs - z_crit * rhs_se, hi2 = rhs + z_crit * rhs_se;
        return lo1 <= hi2 && lo2 <= hi1;
    }
};

/// Two-sided estimate of the duality identity at time t: the left side uses
/// exact CIR transitions of Z, the right side runs the fast jump chain and
/// freezes it at t (absorbed all-fit states contribute H = 1).
inline DualityEstimate mc_duality_experiment(const CbiState& z0, const SampleConfig& n0,
                                             double t, std::size_t replicates,
                                             std::uint64_t seed, const MutationModel& m,
                                             unsigned threads = 1) {
    if (z0.d() != m.d() || n0.d() != m.d())
        throw std::invalid_argument("mc_duality_experiment: dimension mismatch");
    const int d = m.d();
    for (int i = 1; i < d; ++i)
        if (n0.n[i] > 0 && m.theta_p1(i) == 0.0)
            throw std::invalid_argument("mc_duality_experiment: needs P_1i > 0 on support");

    std::vector<double> lhs_vals(replicates), rhs_vals(replicates);
    parallel_replicates(replicates, threads, [&](std::size_t r) {
        auto rng = make_stream(seed, r);
        std::vector<double> zt = z0.z;
        double sum = 0.0;
        for (int i = 1; i < d; ++i) {
            zt[i] = cir_transition_sample(z0.z[i], m.theta_p1(i), t, rng);
            sum += zt[i];
        }
        zt[0] = -sum;
        lhs_vals[r] = duality_H(DualityPoint{CbiState(zt, t), n0}, m);

        auto rng2 = make_stream(seed ^ 0x9e3779b9ULL, r);
        std::vector<int> nt = fast_state_at(n0, m, t, rng2);
        rhs_vals[r] = duality_H(DualityPoint{z0, SampleConfig(nt)}, m);
    });
    RunningStats lhs, rhs;
    for (std::size_t r = 0; r < replicates; ++r) {
        lhs.add(lhs_vals[r]);
        rhs.add(rhs_vals[r]);
    }
    return {lhs.mean(), lhs.stderror(), rhs.mean(), rhs.stderror()};
}

/// Component-wise duality (type i alone): M_i is a pure death chain with the
/// linear rate n_i/2; Z_i is the CIR component with immigration theta P_1i.
inline DualityEstimate componentwise_duality_check(int i, double z_i, int n_i, double t,
                                                   std::size_t replicates, std::uint64_t seed,
                                                   const MutationModel& m,
                                                   unsigned threads = 1) {
    if (i < 1 || i >= m.d())
        throw std::invalid_argument("componentwise_duality_check: unfit type index required");
    const double a = m.theta_p1(i);
    if (n_i > 0 && a == 0.0)
        throw std::invalid_argument("componentwise_duality_check: theta P_1i = 0");

    std::vector<double> lhs_vals(replicates), rhs_vals(replicates);
    parallel_replicates(replicates, threads, [&](std::size_t r) {
        auto rng = make_stream(seed, r);
        lhs_vals[r] = duality_H_component(cir_transition_sample(z_i, a, t, rng), n_i, a);

        auto rng2 = make_stream(seed ^ 0x85ebca6bULL, r);
        int k = n_i;
        double now = 0.0;
        while (k > 0) {
            std::exponential_distribution<double> hold(0.5 * k);
            now += hold(rng2);
            if (now > t) break;
            --k;
        }
        rhs_vals[r] = duality_H_component(z_i, k, a);
    });
    RunningStats lhs, rhs;
    for (std::size_t r = 0; r < replicates; ++r) {
        lhs.add(lhs_vals[r]);
        rhs.add(rhs_vals[r]);
    }
    return {lhs.mean(), lhs.stderror(), rhs.mean(), rhs.stderror()};
}

}  // namespace strongsel
