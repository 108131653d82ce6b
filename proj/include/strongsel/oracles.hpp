// =============================================================================
// oracles.hpp — Independent finite-sigma estimates of the sampling
// probability q(n), used to cross-validate the asymptotic expansion and to
// feed exact ASG rates.
//
//   * pim_quadrature_oracle   — Dirichlet-weighted exponential integrals over
//                               the simplex (d = 2 and d = 3).
//   * two_allele_exact        — the closed 1F1 formula for d = 2.
//   * truncated_system_oracle — direct sparse solve of the sampling recursion
//                               with a leading-order asymptotic closure.
//   * mc_oracle               — ergodic average over the simulated diffusion.
//
// Every oracle reports an error estimate alongside its value; all values are
// also available in log space (the ASG rates divide q's that underflow).
// =============================================================================
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "strongsel/diffusion.hpp"
#include "strongsel/expansion.hpp"
#include "strongsel/model.hpp"
#include "strongsel/quadrature.hpp"
#include "strongsel/rng.hpp"

namespace strongsel {

struct OracleResult {
    double value = 0.0;
    double log_value = neg_inf;
    std::string method;  // pim-quadrature | truncated-linear-system | monte-carlo
    double error_estimate = 0.0;
};

/// log q(n) supplier used by the ASG rate machinery.
using LogQProvider = std::function<double(const std::vector<int>&)>;

// ---------------------------------------------------------------------------
// PIM quadrature
// ---------------------------------------------------------------------------

namespace detail {

inline double log_pim_integral_d2(const PimModel& m, const std::vector<double>& sigmas,
                                  const std::vector<int>& n, double rel_tol,
                                  double* rel_err) {
    const double a1 = m.theta() * m.Q(0) - 1.0 + n[0];
    const double a2 = m.theta() * m.Q(1) - 1.0 + n[1];
    auto logf = [&](double y, double log_y, double log_1my) {
        // y = x_2, 1-y = x_1
        return sigmas[0] * (1.0 - y) + sigmas[1] * y + a1 * log_1my + a2 * log_y;
    };
    QuadResult r = integrate_log(logf, rel_tol, 11);
    if (!r.converged) throw QuadratureError("pim_quadrature_oracle: d=2 integral diverged");
    if (rel_err) *rel_err = r.rel_error;
    return r.log_value;
}

inline double log_pim_integral_d3(const PimModel& m, const std::vector<double>& sigmas,
                                  const std::vector<int>& n, double rel_tol,
                                  double* rel_err) {
    const double a1 = m.theta() * m.Q(0) - 1.0 + n[0];
    const double a2 = m.theta() * m.Q(1) - 1.0 + n[1];
    const double a3 = m.theta() * m.Q(2) - 1.0 + n[2];
    // x_2 = v, x_3 = (1-v) u, x_1 = (1-v)(1-u); Jacobian (1-v)
    auto logf = [&](double v, double log_v, double log_1mv, double u, double log_u,
                    double log_1mu) {
        const double x1 = (1.0 - v) * (1.0 - u);
        const double x2 = v;
        const double x3 = (1.0 - v) * u;
        return sigmas[0] * x1 + sigmas[1] * x2 + sigmas[2] * x3 +
               a1 * (log_1mv + log_1mu) + a2 * log_v + a3 * (log_1mv + log_u) + log_1mv;
    };
    QuadResult r = integrate_log_2d(logf, rel_tol, 7);
    if (!r.converged) throw QuadratureError("pim_quadrature_oracle: d=3 integral diverged");
    if (rel_err) *rel_err = r.rel_error;
    return r.log_value;
}

}  // namespace detail

/// q(n) = int prod e^{sigma_i x_i} x_i^{theta Q_i - 1 + n_i} dx / (same with n = 0).
inline OracleResult pim_quadrature_oracle(const SampleConfig& n, const PimModel& m,
                                          const std::vector<double>& sigmas,
                                          double rel_tol = 1e-12) {
    if (!m.irreducible())
        throw std::invalid_argument("pim_quadrature_oracle: requires all Q_i > 0");
    if (static_cast<int>(sigmas.size()) != m.d())
        throw std::invalid_argument("pim_quadrature_oracle: sigmas must have d entries");
    if (n.d() != m.d()) throw std::invalid_argument("pim_quadrature_oracle: dim mismatch");
    const std::vector<int> zero(m.d(), 0);
    double err_num = 0.0, err_den = 0.0, log_num, log_den;
    if (m.d() == 2) {
        log_num = detail::log_pim_integral_d2(m, sigmas, n.n, rel_tol, &err_num);
        log_den = detail::log_pim_integral_d2(m, sigmas, zero, rel_tol, &err_den);
    } else if (m.d() == 3) {
        log_num = detail::log_pim_integral_d3(m, sigmas, n.n, rel_tol, &err_num);
        log_den = detail::log_pim_integral_d3(m, sigmas, zero, rel_tol, &err_den);
    } else {
        throw std::invalid_argument("pim_quadrature_oracle: only d = 2 and d = 3");
    }
    OracleResult res;
    res.log_value = log_num - log_den;
    res.value = std::exp(res.log_value);
    res.method = "pim-quadrature";
    res.error_estimate = res.value * (err_num + err_den + 1e-14);
    return res;
}

// ---------------------------------------------------------------------------
// Two-allele closed form
// ---------------------------------------------------------------------------

/// q(n) for d = 2 from the weighted-Dirichlet stationary density:
/// Gamma-factor prefactors times a ratio of Kummer functions.
inline double two_allele_exact(const SampleConfig& n, const PimModel& m, double sigma1,
                               double sigma2) {
    if (m.d() != 2 || n.d() != 2) throw std::invalid_argument("two_allele_exact: d = 2 only");
    const double t1 = m.theta() * m.Q(0), t2 = m.theta() * m.Q(1);
    if (t1 <= 0.0 || t2 <= 0.0)
        throw std::invalid_argument("two_allele_exact: requires theta*Q_i > 0");
    const double z = sigma2 - sigma1;
    const double size = n.size();
    double log_q = log_gamma_ratio(t1, n.n[0]) + log_gamma_ratio(t2, n.n[1]) -
                   log_gamma_ratio(m.theta(), n.size());
    log_q += log_kummer_1f1(n.n[1] + t2, size + m.theta(), z) -
             log_kummer_1f1(t2, m.theta(), z);
    return std::exp(log_q);
}

// ---------------------------------------------------------------------------
// Truncated linear system
// ---------------------------------------------------------------------------

/// Solution of the sampling recursion on {n : 1 <= ||n|| <= level_cap}.
///
/// The recursion couples level ||n|| upward through the selective term, so the
/// system is closed at the cap by substituting the leading-order asymptotic
/// value sigma^{-(||n||+1-n_1)} qt_0(n+e_i).  Two reformulations keep the
/// solve well conditioned:
///   * unknowns are w(n) = sigma^{||n||-n_1} q(n) / c(n), with c(n) a floored
///     leading-coefficient scale, so w stays O(1) uniformly in sigma and n;
///   * the level-blocked system is eliminated from the cap downward and
///     back-substituted upward, which follows the decaying mode of the
///     recursion instead of its combinatorially growing one.
///
/// The recursion alone is homogeneous (nothing in it pins q(0) = 1), so the
/// solution is rescaled to satisfy sum_i q(e_i) = 1.  Values within a few
/// levels of the cap are dominated by the closure; the paired error estimate
/// (cap vs cap+2) exposes that, and non-positive entries there are reported
/// on access.
class TruncatedSystemSolution {
  public:
    TruncatedSystemSolution(const MutationModel& m, double sigma, int level_cap)
        : d_(m.d()), sigma_(sigma), level_cap_(level_cap) {
        m.require_irreducible("truncated_system_oracle");
        if (sigma <= 0.0) throw std::invalid_argument("truncated_system_oracle: sigma <= 0");
        if (level_cap < 1) throw std::invalid_argument("truncated_system_oracle: level_cap < 1");
        solve(m);
    }

    int level_cap() const { return level_cap_; }

    bool contains(const std::vector<int>& n) const {
        int size = 0;
        for (int c : n) size += c;
        return size <= level_cap_;
    }

    double log_q(const std::vector<int>& n) const {
        int size = 0, n1 = n.empty() ? 0 : n[0];
        for (int c : n) {
            if (c < 0) return neg_inf;
            size += c;
        }
        if (size == 0) return 0.0;  // q(0) = 1 by convention
        if (size > level_cap_)
            throw std::out_of_range("truncated_system_oracle: state beyond level_cap");
        const double w = w_[size][index_[size].at(n)];
        if (!(w > 0.0))
            throw std::runtime_error(
                "truncated_system_oracle: value unresolved this close to the truncation "
                "level; increase level_cap");
        return std::log(w) + log_scale_[size][index_[size].at(n)] -
               (size - n1) * std::log(sigma_) - log_norm_;
    }
    double q(const std::vector<int>& n) const { return std::exp(log_q(n)); }

    LogQProvider provider() const {
        return [this](const std::vector<int>& n) { return log_q(n); };
    }

  private:
    void solve(const MutationModel& m) {
        const int L = level_cap_;
        const double theta = m.theta();
        states_.resize(L + 1);
        index_.resize(L + 1);
        log_scale_.resize(L + 1);
        for (int s = 1; s <= L; ++s) {
            detail::for_each_composition(s, d_, [&](const std::vector<int>& n) {
                index_[s][n] = static_cast<int>(states_[s].size());
                states_[s].push_back(n);
            });
            log_scale_[s].resize(states_[s].size());
            for (std::size_t r = 0; r < states_[s].size(); ++r) {
                double ls = 0.0;
                for (int i = 1; i < d_; ++i)
                    ls += log_gamma_ratio(std::max(m.theta_p1(i), 0.05), states_[s][r][i]);
                log_scale_[s][r] = ls;
            }
        }
        auto scale_of = [&](const std::vector<int>& n) {
            int s = 0;
            for (int c : n) s += c;
            return std::exp(log_scale_[s][index_[s].at(n)]);
        };

        // level blocks: B w_{s-1} + D w_s + U w_{s+1} = b
        std::vector<Eigen::MatrixXd> D(L + 1), B(L + 1), U(L + 1);
        std::vector<Eigen::VectorXd> b(L + 1);
        for (int s = 1; s <= L; ++s) {
            const int ns = static_cast<int>(states_[s].size());
            const int ns_down = s > 1 ? static_cast<int>(states_[s - 1].size()) : 0;
            const int ns_up = s < L ? static_cast<int>(states_[s + 1].size()) : 0;
            D[s] = Eigen::MatrixXd::Zero(ns, ns);
            B[s] = Eigen::MatrixXd::Zero(ns, std::max(ns_down, 1));
            U[s] = Eigen::MatrixXd::Zero(ns, std::max(ns_up, 1));
            b[s] = Eigen::VectorXd::Zero(ns);
            for (int r = 0; r < ns; ++r) {
                const std::vector<int>& n = states_[s][r];
                const int n1 = n[0];
                double diag = s * (s - 1.0 + theta) + (s - n1) * sigma_;
                for (int i = 0; i < d_; ++i) diag -= n[i] * theta * m.P(i, i);
                D[s](r, r) += diag * scale_of(n);
                std::vector<int> t;
                if (n1 >= 2) {
                    t = n;
                    t[0] -= 1;
                    B[s](r, index_[s - 1].at(t)) -= double(n1) * (n1 - 1) * scale_of(t);
                }
                for (int i = 1; i < d_; ++i) {
                    if (n[i] < 2) continue;
                    t = n;
                    t[i] -= 1;
                    B[s](r, index_[s - 1].at(t)) -= sigma_ * n[i] * (n[i] - 1) * scale_of(t);
                }
                // mutation (i != j; i == j sits on the diagonal)
                for (int i = 0; i < d_; ++i) {
                    if (n[i] == 0) continue;
                    for (int j = 0; j < d_; ++j) {
                        if (i == j || m.P(j, i) == 0.0) continue;
                        t = n;
                        t[i] -= 1;
                        t[j] += 1;
                        double coef = n[i] * theta * m.P(j, i);
                        if (i == 0) coef /= sigma_;       // fit removed, unfit added
                        else if (j == 0) coef *= sigma_;  // unfit removed, fit added
                        D[s](r, index_[s].at(t)) -= coef * scale_of(t);
                    }
                }
                // selection: upward coupling, closed at the cap by the
                // leading-order asymptotic value
                for (int i = 1; i < d_; ++i) {
                    t = n;
                    t[i] += 1;
                    if (s < L)
                        U[s](r, index_[s + 1].at(t)) -= double(s) * scale_of(t);
                    else
                        b[s][r] += s * q0(SampleConfig(t), m);
                }
            }
        }

        // eliminate from the cap downward: w_s = F_s - G_s w_{s-1}
        std::vector<Eigen::MatrixXd> G(L + 1);
        std::vector<Eigen::VectorXd> F(L + 1);
        for (int s = L; s >= 1; --s) {
            Eigen::MatrixXd Dt = D[s];
            Eigen::VectorXd bt = b[s];
            if (s < L) {
                Dt -= U[s] * G[s + 1];
                bt -= U[s] * F[s + 1];
            }
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(Dt);
            F[s] = lu.solve(bt);
            if (s > 1) G[s] = lu.solve(B[s]);
        }
        w_.resize(L + 1);
        w_[1] = F[1];
        for (int s = 2; s <= L; ++s) w_[s] = F[s] - G[s] * w_[s - 1];

        // anchor the scale: sum_i q(e_i) = q(0) = 1
        double norm = 0.0;
        for (int i = 0; i < d_; ++i) {
            std::vector<int> e(d_, 0);
            e[i] = 1;
            const int r = index_[1].at(e);
            norm += w_[1][r] * std::exp(log_scale_[1][r]) * (i == 0 ? 1.0 : 1.0 / sigma_);
        }
        if (!(norm > 0.0))
            throw std::runtime_error("truncated_system_oracle: non-positive normalization");
        log_norm_ = std::log(norm);
    }

    int d_;
    double sigma_;
    int level_cap_;
    double log_norm_ = 0.0;
    std::vector<std::vector<std::vector<int>>> states_;       // per level
    std::vector<std::map<std::vector<int>, int>> index_;      // per level
    std::vector<std::vector<double>> log_scale_;               // per level, per state
    std::vector<Eigen::VectorXd> w_;                           // per level
};

/// Solves at level_cap and level_cap + 2; error estimate per state is the
/// change between the two solutions.
inline std::map<std::vector<int>, OracleResult> truncated_system_oracle(
    const MutationModel& m, double sigma, int level_cap) {
    TruncatedSystemSolution base(m, sigma, level_cap);
    TruncatedSystemSolution bumped(m, sigma, level_cap + 2);
    std::map<std::vector<int>, OracleResult> out;
    for (int size = 0; size <= level_cap; ++size) {
        detail::for_each_composition(size, m.d(), [&](const std::vector<int>& n) {
            OracleResult r;
            r.log_value = base.log_q(n);
            r.value = std::exp(r.log_value);
            r.method = "truncated-linear-system";
            r.error_estimate = std::abs(r.value - bumped.q(n));
            out[n] = r;
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct McOracleSettings {
    std::size_t paths = 32;        // independent streams; one batch mean each
    double burn_in = 0.0;          // pre-limit time units; 0 = 20/min(1,theta)
    double run_length = 20.0;      // post-burn-in collection window per stream
    double dt = 0.0;               // 0 = 0.02/sigma
    double thin = 0.0;             // sampling interval; 0 = 4/sigma
    std::uint64_t seed = 1;
    unsigned threads = 1;
    int max_burnin_doublings = 3;  // doubled until first-moment drift < 1 SE
};

/// Estimates q(n) = E[prod X_i(inf)^{n_i}] jointly for several sample
/// configurations from the same set of diffusion streams; the standard error
/// comes from batch means (one batch per stream).  Burn-in is doubled until
/// the first-moment drift between the two halves of the collection window
/// falls below one standard error.  A companion run at twice the step feeds
/// a discretization-bias component into the error estimate: the Euler scheme
/// is biased near the boundary when theta P_1i < 1, and the estimate has to
/// own that.
inline std::vector<OracleResult> mc_oracle_multi(const MutationModel& m, double sigma,
                                                 const std::vector<SampleConfig>& configs,
                                                 const McOracleSettings& settings = {}) {
    m.require_irreducible("mc_oracle");
    const int d = m.d();
    const std::size_t n_cfg = configs.size();
    for (const auto& n : configs)
        if (n.d() != d) throw std::invalid_argument("mc_oracle: dimension mismatch");
    const double dt = settings.dt > 0.0 ? settings.dt : 0.01 / std::max(sigma, 1.0);
    const double thin = settings.thin > 0.0 ? settings.thin : 4.0 / std::max(sigma, 1.0);

    // start near the strong-selection equilibrium vertex
    std::vector<double> x0(d, 0.0);
    x0[0] = 1.0 - 0.5 / std::max(sigma, 2.0);
    for (int i = 1; i < d; ++i) x0[i] = 0.5 / std::max(sigma, 2.0) / (d - 1);

    struct RunOutput {
        std::vector<double> value, se;
        double drift_mean = 0.0, drift_se = 0.0;
    };
    auto run_once = [&](double step, double burn, std::uint64_t salt) {
        const long thin_steps = std::max(1L, static_cast<long>(std::round(thin / step)));
        std::vector<std::vector<double>> batch_mean(n_cfg,
                                                    std::vector<double>(settings.paths));
        std::vector<double> half_drift(settings.paths, 0.0);
        parallel_replicates(settings.paths, settings.threads, [&](std::size_t r) {
            auto rng = make_stream(settings.seed ^ salt, r);
            WfSimulator sim(m, SelectionRegime{sigma, {}}, SimplexPoint(x0), step);
            const long burn_steps = static_cast<long>(std::ceil(burn / step));
            for (long k = 0; k < burn_steps; ++k) sim.step(rng);
            const long run_steps = static_cast<long>(std::ceil(settings.run_length / step));
            std::vector<RunningStats> acc(n_cfg);
            RunningStats first_half, second_half;
            for (long k = 0; k < run_steps; ++k) {
                sim.step(rng);
                if (k % thin_steps == 0) {
                    for (std::size_t c = 0; c < n_cfg; ++c) {
                        double f = 1.0;
                        for (int i = 0; i < d; ++i)
                            f *= std::pow(sim.state()[i], configs[c].n[i]);
                        acc[c].add(f);
                        if (c == 0) (k < run_steps / 2 ? first_half : second_half).add(f);
                    }
                }
            }
            for (std::size_t c = 0; c < n_cfg; ++c) batch_mean[c][r] = acc[c].mean();
            half_drift[r] = second_half.mean() - first_half.mean();
        });
        RunOutput out;
        out.value.resize(n_cfg);
        out.se.resize(n_cfg);
        for (std::size_t c = 0; c < n_cfg; ++c) {
            RunningStats batches;
            for (std::size_t r = 0; r < settings.paths; ++r) batches.add(batch_mean[c][r]);
            out.value[c] = batches.mean();
            out.se[c] = batches.stderror();
        }
        RunningStats drifts;
        for (std::size_t r = 0; r < settings.paths; ++r) drifts.add(half_drift[r]);
        out.drift_mean = drifts.mean();
        out.drift_se = drifts.stderror();
        return out;
    };

    double burn_in = settings.burn_in > 0.0
                         ? settings.burn_in
                         : 20.0 / std::min(1.0, std::max(m.theta(), 1e-3));
    RunOutput main;
    for (int attempt = 0; attempt <= settings.max_burnin_doublings; ++attempt) {
        main = run_once(dt, burn_in, 11400714819323198485ULL * attempt);
        if (std::abs(main.drift_mean) < std::max(main.drift_se, 1e-300) ||
            attempt == settings.max_burnin_doublings)
            break;
        burn_in *= 2.0;
    }
    RunOutput coarse = run_once(2.0 * dt, burn_in, 0x9e3779b97f4a7c15ULL);

    // Richardson weighting of the step-halving difference: the weak error is
    // O(h^p) with p = min(1, min_i theta P_1i) (boundary singularity below
    // the Feller threshold), so bias(h) ~ |v_h - v_2h| / (2^p - 1).
    double p = 1.0;
    for (int i = 1; i < d; ++i) p = std::min(p, m.theta_p1(i));
    const double richardson = 1.0 / (std::pow(2.0, std::max(p, 0.05)) - 1.0);

    std::vector<OracleResult> out(n_cfg);
    for (std::size_t c = 0; c < n_cfg; ++c) {
        out[c].method = "monte-carlo";
        out[c].value = main.value[c];
        out[c].error_estimate =
            main.se[c] + richardson * std::abs(main.value[c] - coarse.value[c]);
        out[c].log_value = out[c].value > 0.0 ? std::log(out[c].value) : neg_inf;
        if (configs[c].size() == 0) {  // q(0) = 1 exactly
            out[c].value = 1.0;
            out[c].log_value = 0.0;
            out[c].error_estimate = 0.0;
        }
    }
    return out;
}

inline OracleResult mc_oracle(const MutationModel& m, double sigma, const SampleConfig& n,
                              const McOracleSettings& settings = {}) {
    return mc_oracle_multi(m, sigma, {n}, settings).front();
}

}  // namespace strongsel
