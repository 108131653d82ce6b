// =============================================================================
// acceptance.hpp — End-to-end validation suite: eleven cross-module checks
// that pin the library's quantitative claims at fixed tolerances.  Each
// criterion prints a single pass/fail line; the suite exits nonzero if any
// fails.
// =============================================================================
#pragma once

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "strongsel/asg.hpp"
#include "strongsel/diffusion.hpp"
#include "strongsel/discrete_wf.hpp"
#include "strongsel/duality.hpp"
#include "strongsel/expansion.hpp"
#include "strongsel/model.hpp"
#include "strongsel/oracles.hpp"
#include "strongsel/quadrature.hpp"
#include "strongsel/rng.hpp"
#include "strongsel/tolerances.hpp"

namespace strongsel {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string details;
    double seconds = 0.0;
};

namespace acceptance_detail {

inline double fit_slope(const std::vector<double>& log_x, const std::vector<double>& log_y) {
    const double n = static_cast<double>(log_x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < log_x.size(); ++i) {
        sx += log_x[i];
        sy += log_y[i];
        sxx += log_x[i] * log_x[i];
        sxy += log_x[i] * log_y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::vector<double> random_simplex_weights(int d, std::mt19937_64& rng, double lo) {
    std::uniform_real_distribution<double> u(lo, 1.0);
    std::vector<double> q(d);
    double sum = 0.0;
    for (double& v : q) {
        v = u(rng);
        sum += v;
    }
    for (double& v : q) v /= sum;
    return q;
}

inline MutationModel random_positive_model(int d, double theta, std::mt19937_64& rng,
                                           double lo = 0.05) {
    std::vector<std::vector<double>> P(d);
    for (auto& row : P) row = random_simplex_weights(d, rng, lo);
    return MutationModel(d, theta, P);
}

/// Kolmogorov-Smirnov p-value against a continuous CDF (asymptotic law with
/// the standard finite-n refinement of the effective sample size).
inline double ks_p_value(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        dmax = std::max(dmax, std::abs(f - (i + 1) / n));
        dmax = std::max(dmax, std::abs(f - i / n));
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * dmax;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j)
        p += 2.0 * (j % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    return std::min(1.0, std::max(0.0, p));
}

struct Check {
    bool ok = true;
    std::ostringstream msg;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (msg.tellp() > 0) msg << "; ";
            msg << what;
        }
    }
};

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace acceptance_detail

class AcceptanceSuite {
  public:
    explicit AcceptanceSuite(unsigned threads = 1, std::uint64_t seed = 20240817)
        : threads_(threads), seed_(seed) {}

    std::vector<CriterionResult> run_all() {
        std::vector<CriterionResult> out;
        out.push_back(run(1, "coefficient cross-check (general DP vs PIM closed form)",
                          [this] { return criterion1(); }));
        out.push_back(run(2, "two-allele exact vs expansion: residual decay slopes",
                          [this] { return criterion2(); }));
        out.push_back(run(3, "oracle triangle: quadrature / linear system / Monte Carlo",
                          [this] { return criterion3(); }));
        out.push_back(run(4, "consistency condition on the truncated system",
                          [this] { return criterion4(); }));
        out.push_back(run(5, "generator duality identity", [this] { return criterion5(); }));
        out.push_back(run(6, "Monte Carlo duality: CI overlap", [this] { return criterion6(); }));
        out.push_back(run(7, "CIR transition exactness", [this] { return criterion7(); }));
        out.push_back(run(8, "WF-to-CBI fluctuation moments", [this] { return criterion8(); }));
        out.push_back(run(9, "Gaussian limit degenerates at stationarity",
                          [this] { return criterion9(); }));
        out.push_back(run(10, "ASG total-rate identity and rate convergence",
                          [this] { return criterion10(); }));
        out.push_back(run(11, "discrete-model scaling limits", [this] { return criterion11(); }));
        return out;
    }

    static bool print_and_summarize(const std::vector<CriterionResult>& results) {
        bool all = true;
        for (const auto& r : results) {
            std::printf("%s  criterion %2d: %s (%.1fs)%s%s\n", r.passed ? "PASS" : "FAIL",
                        r.id, r.name.c_str(), r.seconds, r.details.empty() ? "" : " — ",
                        r.details.c_str());
            all = all && r.passed;
        }
        std::printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILURES");
        return all;
    }

  private:
    template <typename Fn>
    CriterionResult run(int id, const std::string& name, Fn&& fn) {
        CriterionResult res;
        res.id = id;
        res.name = name;
        auto t0 = std::chrono::steady_clock::now();
        try {
            acceptance_detail::Check c = fn();
            res.passed = c.ok;
            res.details = c.msg.str();
        } catch (const std::exception& e) {
            res.passed = false;
            res.details = std::string("exception: ") + e.what();
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    }

    // 1. For d in {2,3}, theta in {0.5,1,2}, random PIM Q: the general
    //    dynamic program on the constant-row matrix equals the closed form
    //    for all k + ||n|| <= 8 within 1e-9 relative.
    acceptance_detail::Check criterion1() {
        acceptance_detail::Check c;
        auto rng = make_stream(seed_, 101);
        double worst = 0.0;
        for (int d : {2, 3}) {
            for (double theta : {0.5, 1.0, 2.0}) {
                PimModel pim(theta, acceptance_detail::random_simplex_weights(d, rng, 0.2));
                ExpansionTable closed = expansion_pim(pim, 8);
                ExpansionTable general = expansion_general(pim.as_general(), 8);
                closed.for_each([&](int k, const std::vector<int>& n, double v_closed) {
                    double v_gen = general.at(k, n);
                    double denom = std::max(std::abs(v_closed), std::abs(v_gen));
                    double rel = denom > 1e-12 ? std::abs(v_closed - v_gen) / denom : 0.0;
                    worst = std::max(worst, rel);
                });
            }
        }
        c.require(worst <= tol.cross_check, "max relative deviation " + acceptance_detail::fmt(worst));
        c.msg << "max rel dev " << acceptance_detail::fmt(worst);
        return c;
    }

    // 2. theta=1, Q=(0.7,0.3), n=(1,2): the residual of the K-term expansion
    //    against the exact 1F1 formula decays with log-log slope -(K+1)+-0.5
    //    over sigma in {50,...,800}.
    acceptance_detail::Check criterion2() {
        acceptance_detail::Check c;
        PimModel pim(1.0, {0.7, 0.3});
        SampleConfig n({1, 2});
        std::vector<double> qt = two_allele_asymptotic(n, pim, 4);
        const std::vector<double> sigmas{50, 100, 200, 400, 800};
        for (int K = 0; K <= 2; ++K) {
            std::vector<double> lx, ly;
            for (double s : sigmas) {
                double q = two_allele_exact(n, pim, s, 0.0);
                double partial = 0.0;
                for (int k = 0; k <= K; ++k) partial += qt[k] * std::pow(s, -k);
                double resid = std::abs(s * s * q - partial);
                lx.push_back(std::log(s));
                ly.push_back(std::log(resid));
            }
            double slope = acceptance_detail::fit_slope(lx, ly);
            c.require(std::abs(slope + (K + 1)) <= 0.5,
                      "K=" + std::to_string(K) + " slope " + acceptance_detail::fmt(slope));
            c.msg << "K=" << K << " slope " << acceptance_detail::fmt(slope) << " ";
        }
        return c;
    }

    // 3. d=2 PIM panel at sigma in {50, 200}: quadrature, truncated system
    //    (cap >= ||n||+6) and Monte Carlo agree pairwise within
    //    max(1e-6, 3 * combined error estimates).  The panel satisfies the
    //    Feller condition theta Q_i >= 1, where the Euler boundary projection
    //    is unbiased in practice; sub-Feller models carry the discretization
    //    bias inside the Monte Carlo error estimate instead.
    acceptance_detail::Check criterion3() {
        acceptance_detail::Check c;
        PimModel pim(2.5, {0.5, 0.5});
        MutationModel general = pim.as_general();
        std::vector<SampleConfig> panel{SampleConfig({1, 1}), SampleConfig({0, 2}),
                                        SampleConfig({2, 1})};
        for (double sigma : {50.0, 200.0}) {
            int cap = 0;
            for (const auto& n : panel) cap = std::max(cap, n.size() + 6);
            auto linsys = truncated_system_oracle(general, sigma, cap + 2);
            McOracleSettings mcs;
            mcs.paths = 24;
            mcs.dt = 0.01 / sigma;
            mcs.seed = seed_ + static_cast<std::uint64_t>(sigma);
            mcs.threads = threads_;
            auto mc = mc_oracle_multi(general, sigma, panel, mcs);
            for (std::size_t i = 0; i < panel.size(); ++i) {
                OracleResult quad = pim_quadrature_oracle(panel[i], pim, {sigma, 0.0});
                const OracleResult& lin = linsys.at(panel[i].n);
                const OracleResult& mcr = mc[i];
                auto check_pair = [&](const OracleResult& a, const OracleResult& b,
                                      const std::string& label) {
                    double bound = std::max(1e-6, 3.0 * (a.error_estimate + b.error_estimate));
                    c.require(std::abs(a.value - b.value) <= bound,
                              label + " diff " + acceptance_detail::fmt(a.value - b.value) +
                                  " bound " + acceptance_detail::fmt(bound));
                };
                std::string tag = "sigma=" + acceptance_detail::fmt(sigma) + " n=(" +
                                  std::to_string(panel[i].n[0]) + "," +
                                  std::to_string(panel[i].n[1]) + ")";
                check_pair(quad, lin, tag + " quad/linsys");
                check_pair(quad, mcr, tag + " quad/mc");
                check_pair(lin, mcr, tag + " linsys/mc");
            }
        }
        if (c.ok) c.msg << "9 pairwise checks per sigma passed";
        return c;
    }

    // 4. sum_i q(n+e_i) = q(n) within 1e-8 on interior states of the
    //    truncated-system solution (sigma=200, d=3, cap=15, margin 7: the
    //    closure's influence attenuates geometrically per level below the cap).
    acceptance_detail::Check criterion4() {
        acceptance_detail::Check c;
        auto rng = make_stream(seed_, 104);
        MutationModel m = acceptance_detail::random_positive_model(3, 1.0, rng);
        const int cap = 15, margin = 7;
        TruncatedSystemSolution sol(m, 200.0, cap);
        double worst = 0.0;
        for (int size = 0; size <= cap - margin; ++size) {
            detail::for_each_composition(size, 3, [&](const std::vector<int>& n) {
                double q_n = size == 0 ? 1.0 : sol.q(n);
                double sum = 0.0;
                for (int i = 0; i < 3; ++i) {
                    std::vector<int> up = n;
                    up[i] += 1;
                    sum += sol.q(up);
                }
                worst = std::max(worst, std::abs(sum - q_n) / q_n);
            });
        }
        c.require(worst <= tol.consistency, "max relative residual " + acceptance_detail::fmt(worst));
        c.msg << "max rel residual " << acceptance_detail::fmt(worst) << " over ||n|| <= "
              << cap - margin;
        return c;
    }

    // 5. |G H - L0 H| on a 200-point random grid, d=4: analytic residual
    //    below 1e-10, finite-difference residual below 1e-6.  The grid keeps
    //    H = O(1): at the pinned step 1e-5 the second difference carries
    //    roundoff ~ |H| eps / h^2 ~ 2e-6 |H|, so the 1e-6 bound is only
    //    meaningful when |H| stays below one.
    acceptance_detail::Check criterion5() {
        acceptance_detail::Check c;
        auto rng = make_stream(seed_, 105);
        MutationModel m = acceptance_detail::random_positive_model(4, 4.0, rng, 0.7);
        std::uniform_real_distribution<double> zdist(0.2, 0.45);
        std::uniform_int_distribution<int> ndist(0, 2);
        std::vector<DualityPoint> grid;
        while (grid.size() < 200) {
            std::vector<double> z(3);
            std::vector<int> n(4, 0);
            for (auto& v : z) v = zdist(rng);
            n[0] = ndist(rng);
            int unfit = 0;
            for (int i = 1; i < 4; ++i) {
                n[i] = ndist(rng);
                unfit += n[i];
            }
            if (unfit == 0) n[1] = 1;
            grid.push_back({CbiState::from_unfit(z), SampleConfig(n)});
        }
        GeneratorCheckResult res = generator_duality_check(grid, m);
        c.require(res.max_residual_analytic < tol.generator_residual,
                  "analytic residual " + acceptance_detail::fmt(res.max_residual_analytic));
        c.require(res.max_residual_fd < tol.generator_residual_fd,
                  "FD residual " + acceptance_detail::fmt(res.max_residual_fd));
        c.msg << "analytic " << acceptance_detail::fmt(res.max_residual_analytic) << ", fd "
              << acceptance_detail::fmt(res.max_residual_fd);
        return c;
    }

    // 6. LHS/RHS 99% confidence intervals of the duality identity overlap
    //    for three configurations at 1e5 replicates.
    acceptance_detail::Check criterion6() {
        acceptance_detail::Check c;
        const std::size_t reps = 100000;
        {
            MutationModel m = PimModel(1.0, {0.5, 0.5}).as_general();
            auto est = mc_duality_experiment(CbiState::from_unfit({1.3}), SampleConfig({0, 2}),
                                             0.7, reps, seed_ + 61, m, threads_);
            c.require(est.ci_overlap(), "config A: lhs " + acceptance_detail::fmt(est.lhs) +
                                            " rhs " + acceptance_detail::fmt(est.rhs));
            c.msg << "A(" << acceptance_detail::fmt(est.lhs) << "~"
                  << acceptance_detail::fmt(est.rhs) << ") ";
        }
        {
            MutationModel m = PimModel(1.0, {0.5, 0.5}).as_general();
            auto est = mc_duality_experiment(CbiState::from_unfit({0.7}), SampleConfig({1, 1}),
                                             0.5, reps, seed_ + 62, m, threads_);
            c.require(est.ci_overlap(), "config B: lhs " + acceptance_detail::fmt(est.lhs) +
                                            " rhs " + acceptance_detail::fmt(est.rhs));
            c.msg << "B(" << acceptance_detail::fmt(est.lhs) << "~"
                  << acceptance_detail::fmt(est.rhs) << ") ";
        }
        {
            auto rng = make_stream(seed_, 106);
            MutationModel m = acceptance_detail::random_positive_model(3, 1.0, rng, 0.15);
            auto est = mc_duality_experiment(CbiState::from_unfit({0.9, 1.4}),
                                             SampleConfig({0, 1, 2}), 0.8, reps, seed_ + 63, m,
                                             threads_);
            c.require(est.ci_overlap(), "config C: lhs " + acceptance_detail::fmt(est.lhs) +
                                            " rhs " + acceptance_detail::fmt(est.rhs));
            c.msg << "C(" << acceptance_detail::fmt(est.lhs) << "~"
                  << acceptance_detail::fmt(est.rhs) << ")";
        }
        return c;
    }

    // 7. CIR exact sampling: conditional mean within 4 SE at 1e6 draws;
    //    KS vs Gamma(a,1) at long time with p > 0.01; zero-df atom frequency
    //    within 4 SE of exp(-noncentrality/2).
    acceptance_detail::Check criterion7() {
        acceptance_detail::Check c;
        {
            const double z = 1.2, a = 0.7, t = 1.5;
            const std::size_t n = 1000000;
            RunningStats stats;
            auto rng = make_stream(seed_, 107);
            for (std::size_t i = 0; i < n; ++i)
                stats.add(cir_transition_sample(z, a, t, rng));
            const double expect = cir_conditional_mean(z, a, t);
            const double se = std::sqrt(cir_conditional_var(z, a, t) / double(n));
            c.require(std::abs(stats.mean() - expect) <= 4.0 * se,
                      "conditional mean off by " +
                          acceptance_detail::fmt((stats.mean() - expect) / se) + " SE");
            c.msg << "mean dev " << acceptance_detail::fmt((stats.mean() - expect) / se)
                  << " SE; ";
        }
        {
            const double a = 0.8, z = 0.5, t = 60.0;
            const std::size_t n = 100000;
            auto rng = make_stream(seed_, 108);
            std::vector<double> samples(n);
            for (auto& s : samples) s = cir_transition_sample(z, a, t, rng);
            double p = acceptance_detail::ks_p_value(
                std::move(samples), [&](double x) { return boost::math::gamma_p(a, x); });
            c.require(p > 0.01, "KS p = " + acceptance_detail::fmt(p));
            c.msg << "KS p " << acceptance_detail::fmt(p) << "; ";
        }
        {
            const double z = 1.0, t = 1.0;
            const std::size_t n = 1000000;
            auto rng = make_stream(seed_, 109);
            std::size_t zeros = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (cir_transition_sample(z, 0.0, t, rng) == 0.0) ++zeros;
            const double decay = std::exp(-0.5 * t);
            const double p0 = std::exp(-z * decay / (1.0 - decay));
            const double se = std::sqrt(p0 * (1.0 - p0) / double(n));
            const double freq = double(zeros) / double(n);
            c.require(std::abs(freq - p0) <= 4.0 * se,
                      "atom freq off by " + acceptance_detail::fmt((freq - p0) / se) + " SE");
            c.msg << "atom dev " << acceptance_detail::fmt((freq - p0) / se) << " SE";
        }
        return c;
    }

    // 8. sigma=200, d=2, theta=1: first two moments of sigma(1 - X_1) at late
    //    times within 3 SE of the stationary Gamma(theta P_12, 1) moments.
    //    theta P_12 = 0.5 violates the Feller condition, so the Euler
    //    projection leaves a residual boundary bias ~ h^(1/2); the step is
    //    chosen to push that bias (~1%) well inside the 3-SE band.
    acceptance_detail::Check criterion8() {
        acceptance_detail::Check c;
        MutationModel m = PimModel(1.0, {0.5, 0.5}).as_general();
        const double sigma = 200.0, a = m.theta_p1(1);
        const double dt = 3.125e-6;  // h_Z = sigma dt = 6.25e-4
        const double burn_z = 20.0, collect_z = 20.0, gap_z = 4.0;
        const std::size_t paths = 1200;
        std::vector<double> mean1(paths), mean2(paths);
        parallel_replicates(paths, threads_, [&](std::size_t r) {
            auto rng = make_stream(seed_ + 88, r);
            std::vector<double> x0{1.0 - 0.5 / sigma, 0.5 / sigma};
            WfSimulator sim(m, SelectionRegime{sigma, {}}, SimplexPoint(x0), dt);
            const long burn_steps = static_cast<long>(burn_z / (sigma * dt));
            for (long k = 0; k < burn_steps; ++k) sim.step(rng);
            const long gap_steps = static_cast<long>(gap_z / (sigma * dt));
            RunningStats s1, s2;
            for (double z = gap_z; z <= collect_z; z += gap_z) {
                for (long k = 0; k < gap_steps; ++k) sim.step(rng);
                const double val = sigma * (1.0 - sim.state()[0]);
                s1.add(val);
                s2.add(val * val);
            }
            mean1[r] = s1.mean();
            mean2[r] = s2.mean();
        });
        RunningStats m1, m2;
        for (std::size_t r = 0; r < paths; ++r) {
            m1.add(mean1[r]);
            m2.add(mean2[r]);
        }
        const double want1 = a, want2 = a + a * a;
        c.require(std::abs(m1.mean() - want1) <= 3.0 * m1.stderror(),
                  "mean dev " + acceptance_detail::fmt((m1.mean() - want1) / m1.stderror()) +
                      " SE");
        c.require(std::abs(m2.mean() - want2) <= 3.0 * m2.stderror(),
                  "second-moment dev " +
                      acceptance_detail::fmt((m2.mean() - want2) / m2.stderror()) + " SE");
        c.msg << "mean " << acceptance_detail::fmt(m1.mean()) << " vs " << want1 << ", second "
              << acceptance_detail::fmt(m2.mean()) << " vs " << want2;
        return c;
    }

    // 9. Gaussian moments from xi_1(0) > 0 decay to zero: ||m(60)||, ||C(60)||
    //    below 1e-6.
    acceptance_detail::Check criterion9() {
        acceptance_detail::Check c;
        SimplexPoint xi0({0.4, 0.35, 0.25});
        Eigen::VectorXd m0(3);
        m0 << 0.2, -0.05, -0.15;
        Eigen::MatrixXd c0 = detail::wf_diffusion_matrix(Eigen::VectorXd::Map(xi0.x.data(), 3));
        auto moments = gaussian_moments_solve(xi0, m0, c0, 60.0, 0.02, 100);
        const auto& last = moments.back();
        c.require(last.mean.norm() < 1e-6, "||m(60)|| = " + acceptance_detail::fmt(last.mean.norm()));
        c.require(last.cov.norm() < 1e-6, "||C(60)|| = " + acceptance_detail::fmt(last.cov.norm()));
        c.msg << "||m|| " << acceptance_detail::fmt(last.mean.norm()) << ", ||C|| "
              << acceptance_detail::fmt(last.cov.norm());
        return c;
    }

    // 10. Total-rate identity to 1e-9 relative on 100 random states, and
    //     (1/sigma)-scaled exact rates approach the fast rates with slope -1
    //     over sigma in {1e2, 1e3, 1e4}.
    acceptance_detail::Check criterion10() {
        acceptance_detail::Check c;
        auto rng = make_stream(seed_, 110);
        MutationModel m = acceptance_detail::random_positive_model(3, 1.0, rng);
        std::uniform_int_distribution<int> cnt(0, 2);
        std::vector<AsgState> states;
        while (states.size() < 100) {
            std::vector<int> n(3), nu(3, 0);
            for (int i = 0; i < 3; ++i) n[i] = cnt(rng);
            for (int i = 1; i < 3; ++i) nu[i] = cnt(rng);
            AsgState s(n, nu);
            if (s.total() >= 1 && s.total() <= 6) states.push_back(s);
        }
        int max_total = 0;
        for (const auto& s : states) max_total = std::max(max_total, s.total());

        TruncatedSystemSolution sol100(m, 100.0, max_total + 7);
        double worst_identity = 0.0;
        for (const auto& s : states) {
            RateTable t = asg_rates(s, m, 100.0, sol100.provider());
            worst_identity = std::max(
                worst_identity, std::abs(t.total - t.total_closed_form) / t.total_closed_form);
        }
        c.require(worst_identity <= tol.rate_identity,
                  "identity residual " + acceptance_detail::fmt(worst_identity));
        c.msg << "identity " << acceptance_detail::fmt(worst_identity) << "; ";

        std::vector<double> lx, ly;
        for (double sigma : {100.0, 1000.0, 10000.0}) {
            TruncatedSystemSolution sol(m, sigma, max_total + 7);
            double dist = 0.0;
            for (const auto& s : states) {
                if (s.unfit_total() == 0) continue;
                RateTable exact = asg_rates(s, m, sigma, sol.provider());
                AsymptoticRates lim = asymptotic_rates(s, m);
                for (const auto& e : exact.entries) {
                    double fast = 0.0;
                    for (const auto& f : lim.fast->entries) {
                        bool match = f.type == e.type &&
                                     ((f.kind == e.kind && e.kind != EventKind::mutate_real) ||
                                      (f.kind == EventKind::mutate_to_fit &&
                                       e.kind == EventKind::mutate_real && e.type_to == 0));
                        if (match) {
                            fast = f.rate;
                            break;
                        }
                    }
                    dist = std::max(dist, std::abs(e.rate / sigma - fast));
                }
            }
            lx.push_back(std::log(sigma));
            ly.push_back(std::log(dist));
        }
        double slope = acceptance_detail::fit_slope(lx, ly);
        c.require(std::abs(slope + 1.0) <= 0.3, "rate slope " + acceptance_detail::fmt(slope));
        c.msg << "rate slope " << acceptance_detail::fmt(slope);
        return c;
    }

    // 11. Appendix scalings: increment-moment errors for cases (d,i) and
    //     (a,ii) decay like 1/alpha_N (for (d,i), alpha_N = N, i.e. slope -1
    //     in 1/N); boundary fluctuation moments approach the CIR conditional
    //     moments monotonically with 3-SE agreement at the largest N.
    acceptance_detail::Check criterion11() {
        acceptance_detail::Check c;
        auto rng = make_stream(seed_, 111);
        MutationModel m = acceptance_detail::random_positive_model(3, 1.0, rng);
        const std::vector<double> x{0.5, 0.3, 0.2};
        const std::vector<long> Ns{1000, 10000, 100000};
        {
            // case (d,i): eps = eps_i = 1/N, alpha = N
            std::vector<double> sigmas{1.5, 0.5, 0.0};
            SelectionRegime reg{sigmas[0], {sigmas[1], sigmas[2]}};
            Eigen::VectorXd x_e = Eigen::VectorXd::Map(x.data(), 3);
            Eigen::VectorXd drift_lim = wf_drift(m, reg, x_e);
            Eigen::MatrixXd cov_lim = detail::wf_diffusion_matrix(x_e);
            std::vector<double> lx, ly;
            for (long N : Ns) {
                auto p = DiscreteWfParams::from_scalings(m, sigmas, N, 1.0 / N,
                                                         std::vector<double>(3, 1.0 / N));
                IncrementMoments mom = increment_moments(x, p, double(N));
                double err = (mom.drift - drift_lim).lpNorm<Eigen::Infinity>() +
                             (mom.cov - cov_lim).lpNorm<Eigen::Infinity>();
                lx.push_back(std::log(double(N)));
                ly.push_back(std::log(err));
            }
            double slope = acceptance_detail::fit_slope(lx, ly);
            c.require(std::abs(slope + 1.0) <= 0.4,
                      "case (d,i) slope " + acceptance_detail::fmt(slope));
            c.msg << "(d,i) slope " << acceptance_detail::fmt(slope) << "; ";
        }
        {
            // case (a,ii): eps_1 = N^{-1/2} dominates; alpha = sqrt(N)
            std::vector<double> sigmas{1.0, 0.0, 0.0};
            Eigen::VectorXd x_e = Eigen::VectorXd::Map(x.data(), 3);
            Eigen::VectorXd drift_lim = logistic_velocity(x_e);
            std::vector<double> lx, ly;
            for (long N : Ns) {
                const double eps1 = 1.0 / std::sqrt(double(N));
                const double eps_small = std::pow(double(N), -1.5);
                std::vector<double> eps_i{eps1, eps_small, eps_small};
                auto p = DiscreteWfParams::from_scalings(m, sigmas, N, eps_small, eps_i);
                IncrementMoments mom = increment_moments(x, p, 1.0 / eps1);
                double err = (mom.drift - drift_lim).lpNorm<Eigen::Infinity>() +
                             mom.cov.lpNorm<Eigen::Infinity>();
                lx.push_back(std::log(1.0 / eps1));  // alpha_N
                ly.push_back(std::log(err));
            }
            double slope = acceptance_detail::fit_slope(lx, ly);
            c.require(std::abs(slope + 1.0) <= 0.4,
                      "case (a,ii) slope vs alpha " + acceptance_detail::fmt(slope));
            c.msg << "(a,ii) slope " << acceptance_detail::fmt(slope) << "; ";
        }
        {
            MutationModel m2 = PimModel(1.0, {0.5, 0.5}).as_general();
            auto rows = boundary_fluctuation_experiment(m2, {0.8}, 0.5, 2.0, Ns, 4000,
                                                        seed_ + 112, threads_);
            std::vector<double> diff, se;
            for (const auto& r : rows) {
                diff.push_back(std::abs(r.wf_mean - r.limit_mean));
                se.push_back(r.wf_mean_se);
            }
            for (std::size_t k = 1; k < diff.size(); ++k)
                c.require(diff[k] <= diff[k - 1] + se[k] + se[k - 1],
                          "mean diffs not monotone at step " + std::to_string(k));
            c.require(diff.back() < diff.front(), "no overall decrease of the mean diff");
            const auto& last = rows.back();
            c.require(std::abs(last.wf_mean - last.limit_mean) <= 3.0 * last.wf_mean_se,
                      "largest-N mean dev " +
                          acceptance_detail::fmt((last.wf_mean - last.limit_mean) /
                                                 last.wf_mean_se) +
                          " SE");
            c.require(std::abs(last.wf_second - last.limit_second) <= 3.0 * last.wf_second_se,
                      "largest-N second-moment dev " +
                          acceptance_detail::fmt((last.wf_second - last.limit_second) /
                                                 last.wf_second_se) +
                          " SE");
            c.msg << "fluct diffs";
            for (double v : diff) c.msg << " " << acceptance_detail::fmt(v);
        }
        return c;
    }

    unsigned threads_;
    std::uint64_t seed_;
};

}  // namespace strongsel
