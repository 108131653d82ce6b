// =============================================================================
// diffusion.hpp — The Wright-Fisher diffusion and its three strong-selection
// limits.
//
//   * wf_simulate            — Euler-Maruyama on the simplex with post-step
//                              projection (clip negatives, renormalize).
//   * logistic_trajectory    — deterministic limit of X(t/sigma).
//   * gaussian_moments_solve — mean/covariance ODEs of the sqrt(sigma)-scaled
//                              fluctuations around the logistic trajectory.
//   * cir_transition_sample  — exact transition draw of the CIR fluctuation
//                              component (noncentral chi-squared law, incl.
//                              the zero-degrees-of-freedom atom at 0).
//   * cbi_simulate           — the sigma-scaled fluctuation limit: independent
//                              CIR components i >= 2 and z_1 = -sum.
//   * scaled_fluctuation_compare — Monte Carlo comparison of the pre-limit
//                              fluctuations against both limits.
// =============================================================================
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "strongsel/model.hpp"
#include "strongsel/rng.hpp"

namespace strongsel {

// ---------------------------------------------------------------------------
// Pre-limit diffusion
// ---------------------------------------------------------------------------

struct DiffusionPath {
    std::vector<double> times;
    std::vector<SimplexPoint> states;
    std::uint64_t seed = 0;
};

/// Drift mu_i(x) + s_i(x) of the WF diffusion.
inline Eigen::VectorXd wf_drift(const MutationModel& m, const SelectionRegime& s,
                                const Eigen::VectorXd& x) {
    const int d = m.d();
    Eigen::VectorXd out(d);
    double sbar = 0.0;
    for (int j = 0; j < d; ++j) sbar += s.sigma_of(j, d) * x[j];
    for (int i = 0; i < d; ++i) {
        double mut = 0.0;
        for (int j = 0; j < d; ++j) mut += m.P(j, i) * x[j];
        mut = 0.5 * m.theta() * (mut - x[i]);
        out[i] = mut + 0.5 * x[i] * (s.sigma_of(i, d) - sbar);
    }
    return out;
}

/// Symmetric square root of D(x) = diag(x) - x x^T, eigenvalues clamped at 0
/// (D is PSD but numerically indefinite near the vertices).
inline Eigen::MatrixXd wf_diffusion_sqrt(const Eigen::VectorXd& x) {
    const int d = static_cast<int>(x.size());
    if (d == 2) {
        // rank-one: D = x_1 x_2 uu^T with u = (1,-1)
        const double c = std::sqrt(std::max(0.0, 0.5 * x[0] * x[1]));
        Eigen::MatrixXd B(2, 2);
        B << c, -c, -c, c;
        return B;
    }
    Eigen::MatrixXd D = Eigen::MatrixXd(x.asDiagonal()) - x * x.transpose();
    if (d == 3) {
        Eigen::Matrix3d D3 = D;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
        es.computeDirect(D3);
        Eigen::Vector3d lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

/// One-step Euler-Maruyama engine; state stays on the simplex.
class WfSimulator {
  public:
    WfSimulator(MutationModel m, SelectionRegime s, SimplexPoint x0, double dt)
        : m_(std::move(m)), s_(std::move(s)), dt_(dt), sqrt_dt_(std::sqrt(dt)),
          x_(Eigen::VectorXd::Map(x0.x.data(), x0.d())) {
        if (dt <= 0.0) throw std::invalid_argument("WfSimulator: dt must be > 0");
        if (s_.sigma > 0.0 && dt >= 0.1 / s_.sigma)
            throw std::invalid_argument("WfSimulator: dt >= 0.1/sigma (stability guard)");
        if (x0.d() != m_.d()) throw std::invalid_argument("WfSimulator: dimension mismatch");
        const int d = m_.d();
        sigma_of_.resize(d);
        for (int i = 0; i < d; ++i) sigma_of_[i] = s_.sigma_of(i, d);
        noise_.resize(d);
        drift_.resize(d);
    }

    void step(std::mt19937_64& rng) {
        const int d = m_.d();
        for (int i = 0; i < d; ++i) noise_[i] = normal_(rng);
        double sbar = 0.0;
        for (int j = 0; j < d; ++j) sbar += sigma_of_[j] * x_[j];
        for (int i = 0; i < d; ++i) {
            double mut = 0.0;
            for (int j = 0; j < d; ++j) mut += m_.P(j, i) * x_[j];
            drift_[i] = 0.5 * m_.theta() * (mut - x_[i]) +
                        0.5 * x_[i] * (sigma_of_[i] - sbar);
        }
        if (d == 2) {
            const double c = std::sqrt(std::max(0.0, 0.5 * x_[0] * x_[1]));
            const double kick = c * sqrt_dt_ * (noise_[0] - noise_[1]);
            x_[0] += drift_[0] * dt_ + kick;
            x_[1] += drift_[1] * dt_ - kick;
        } else {
            x_ += drift_ * dt_ + wf_diffusion_sqrt(x_) * (sqrt_dt_ * noise_);
        }
        // projection back onto the simplex
        double total = 0.0;
        for (int i = 0; i < d; ++i) {
            if (x_[i] < 0.0) x_[i] = 0.0;
            total += x_[i];
        }
        x_ /= total;
    }

    const Eigen::VectorXd& state() const { return x_; }
    double dt() const { return dt_; }

  private:
    MutationModel m_;
    SelectionRegime s_;
    double dt_, sqrt_dt_;
    Eigen::VectorXd x_, noise_, drift_;
    std::vector<double> sigma_of_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Simulates to `horizon`, recording every `stride`-th step.
inline DiffusionPath wf_simulate(const MutationModel& m, const SelectionRegime& s,
                                 const SimplexPoint& x0, double horizon, double dt,
                                 std::uint64_t seed, int stride = 1) {
    WfSimulator sim(m, s, x0, dt);
    auto rng = make_stream(seed, 0);
    const long n_steps = static_cast<long>(std::ceil(horizon / dt));
    DiffusionPath path;
    path.seed = seed;
    auto record = [&](long k) {
        path.times.push_back(k * dt);
        std::vector<double> coords(sim.state().data(), sim.state().data() + m.d());
        // renormalized state satisfies the simplex invariant exactly enough
        double sum = 0.0;
        for (double c : coords) sum += c;
        for (double& c : coords) c /= sum;
        path.states.push_back(SimplexPoint(coords));
    };
    record(0);
    for (long k = 1; k <= n_steps; ++k) {
        sim.step(rng);
        if (k % stride == 0 || k == n_steps) record(k);
    }
    return path;
}

// ---------------------------------------------------------------------------
// Deterministic limit
// ---------------------------------------------------------------------------

/// xi_i(t) = xi_i(0) e^{(t/2) delta_1i} / (xi_1(0) e^{t/2} + 1 - xi_1(0)).
inline SimplexPoint logistic_trajectory(const SimplexPoint& xi0, double t) {
    const int d = xi0.d();
    const double g = std::exp(0.5 * t);
    const double denom = xi0.x[0] * g + 1.0 - xi0.x[0];
    std::vector<double> out(d);
    out[0] = xi0.x[0] * g / denom;
    for (int i = 1; i < d; ++i) out[i] = xi0.x[i] / denom;
    double sum = 0.0;
    for (double v : out) sum += v;
    for (double& v : out) v /= sum;
    return SimplexPoint(out);
}

/// Vector field omega(x) = (x_1/2)(e_1 - x) of the logistic ODE.
inline Eigen::VectorXd logistic_velocity(const Eigen::VectorXd& x) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(x.size());
    e1[0] = 1.0;
    return 0.5 * x[0] * (e1 - x);
}

// ---------------------------------------------------------------------------
// Gaussian fluctuation limit
// ---------------------------------------------------------------------------

struct GaussianMoments {
    double t = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

namespace detail {

/// Jacobian of omega at xi:  J U = -(1/2)[U_1 (xi - e_1) + xi_1 U].
inline Eigen::MatrixXd logistic_jacobian(const Eigen::VectorXd& xi) {
    const int d = static_cast<int>(xi.size());
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
    e1[0] = 1.0;
    Eigen::MatrixXd J = -0.5 * ((xi - e1) * e1.transpose() +
                                xi[0] * Eigen::MatrixXd::Identity(d, d));
    return J;
}

inline Eigen::MatrixXd wf_diffusion_matrix(const Eigen::VectorXd& x) {
    return Eigen::MatrixXd(x.asDiagonal()) - x * x.transpose();
}

}  // namespace detail

/// Integrates dm/dt = J m and dC/dt = D(xi) + J C + C J^T along the logistic
/// trajectory with classical RK4; a full step-halving rerun guards accuracy.
inline std::vector<GaussianMoments> gaussian_moments_solve(const SimplexPoint& xi0,
                                                           const Eigen::VectorXd& mean0,
                                                           const Eigen::MatrixXd& cov0,
                                                           double horizon, double dt,
                                                           int stride = 1) {
    if (dt <= 0.0) throw std::invalid_argument("gaussian_moments_solve: dt must be > 0");
    const int d = xi0.d();
    auto xi_at = [&](double t) {
        SimplexPoint p = logistic_trajectory(xi0, t);
        return Eigen::VectorXd::Map(p.x.data(), d).eval();
    };
    auto integrate = [&](double h, long n_steps, std::vector<GaussianMoments>* record,
                         int rec_stride) {
        Eigen::VectorXd mean = mean0;
        Eigen::MatrixXd cov = cov0;
        if (record) record->push_back({0.0, mean, cov});
        for (long k = 0; k < n_steps; ++k) {
            const double t = k * h;
            auto rhs = [&](double tt, const Eigen::VectorXd& mm, const Eigen::MatrixXd& cc,
                           Eigen::VectorXd& dm, Eigen::MatrixXd& dc) {
                Eigen::VectorXd xi = xi_at(tt);
                Eigen::MatrixXd J = detail::logistic_jacobian(xi);
                dm = J * mm;
                dc = detail::wf_diffusion_matrix(xi) + J * cc + cc * J.transpose();
            };
            Eigen::VectorXd k1m, k2m, k3m, k4m;
            Eigen::MatrixXd k1c, k2c, k3c, k4c;
            rhs(t, mean, cov, k1m, k1c);
            rhs(t + h / 2, mean + h / 2 * k1m, cov + h / 2 * k1c, k2m, k2c);
            rhs(t + h / 2, mean + h / 2 * k2m, cov + h / 2 * k2c, k3m, k3c);
            rhs(t + h, mean + h * k3m, cov + h * k3c, k4m, k4c);
            mean += h / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m);
            cov += h / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c);
            cov = 0.5 * (cov + cov.transpose());
            if (record && ((k + 1) % rec_stride == 0 || k + 1 == n_steps))
                record->push_back({(k + 1) * h, mean, cov});
        }
        GaussianMoments last{n_steps * h, mean, cov};
        return last;
    };
    const long n_steps = static_cast<long>(std::ceil(horizon / dt));
    std::vector<GaussianMoments> out;
    GaussianMoments coarse = integrate(dt, n_steps, &out, stride);
    GaussianMoments fine = integrate(dt / 2, 2 * n_steps, nullptr, 1);
    double gap = (coarse.mean - fine.mean).norm() + (coarse.cov - fine.cov).norm();
    if (gap > 1e-6)
        throw std::runtime_error("gaussian_moments_solve: step-halving check failed, gap = " +
                                 std::to_string(gap));
    return out;
}

// ---------------------------------------------------------------------------
// CIR / CBI fluctuation limit
// ---------------------------------------------------------------------------

/// Exact draw of Z(t) | Z(0) = z for dZ = (1/2)(a - Z)dt + sqrt(Z) dW:
/// scaled noncentral chi-squared, sampled as a Poisson-Gamma mixture.
/// a = 0 gives the zero-degrees-of-freedom law with its atom at 0.
inline double cir_transition_sample(double z, double a, double t, std::mt19937_64& rng) {
    if (z < 0.0 || a < 0.0 || t < 0.0)
        throw std::invalid_argument("cir_transition_sample: need z, a, t >= 0");
    if (t == 0.0) return z;
    const double decay = std::exp(-0.5 * t);
    const double scale = 1.0 - decay;  // = 2 * (1-e^{-t/2})/2
    const double poisson_mean = z * decay / scale;
    long jumps = 0;
    if (poisson_mean > 0.0) {
        std::poisson_distribution<long> pois(poisson_mean);
        jumps = pois(rng);
    }
    const double shape = a + static_cast<double>(jumps);
    if (shape == 0.0) return 0.0;
    std::gamma_distribution<double> gamma(shape, scale);
    return gamma(rng);
}

inline double cir_transition_sample(double z, double a, double t, std::uint64_t seed) {
    auto rng = make_stream(seed, 0);
    return cir_transition_sample(z, a, t, rng);
}

/// E[Z(t) | Z(0) = z] = a (1 - e^{-t/2}) + z e^{-t/2}.
inline double cir_conditional_mean(double z, double a, double t) {
    const double decay = std::exp(-0.5 * t);
    return a * (1.0 - decay) + z * decay;
}

/// Var[Z(t) | Z(0) = z]: scale^2 * (2*df + 4*noncentrality) / 4 with
/// df = 2a, noncentrality = 2 z e^{-t/2}/(1-e^{-t/2}).
inline double cir_conditional_var(double z, double a, double t) {
    const double decay = std::exp(-0.5 * t);
    const double s = (1.0 - decay) / 2.0;
    return s * s * (4.0 * a + 8.0 * z * decay / (1.0 - decay));
}

/// Fluctuation state: z_1 = -sum_{i>=2} z_i, z_i >= 0 for i >= 2.
struct CbiState {
    std::vector<double> z;
    double time = 0.0;

    CbiState() = default;
    CbiState(std::vector<double> coords, double t) : z(std::move(coords)), time(t) {
        validate();
    }
    /// Builds the state from the unfit components alone.
    static CbiState from_unfit(const std::vector<double>& unfit, double t = 0.0) {
        std::vector<double> full(unfit.size() + 1, 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < unfit.size(); ++i) {
            full[i + 1] = unfit[i];
            sum += unfit[i];
        }
        full[0] = -sum;
        return CbiState(std::move(full), t);
    }
    void validate() const {
        double sum = 0.0;
        for (std::size_t i = 1; i < z.size(); ++i) {
            if (z[i] < 0.0) throw std::invalid_argument("CbiState: z_i < 0 for i >= 2");
            sum += z[i];
        }
        if (std::abs(z[0] + sum) > 1e-9 * std::max(1.0, sum))
            throw std::invalid_argument("CbiState: z_1 != -sum z_i");
    }
    int d() const { return static_cast<int>(z.size()); }
};

/// Advances each unfit component independently by exact CIR transitions and
/// recomputes z_1 = -sum.
inline std::vector<CbiState> cbi_simulate(const MutationModel& m, const CbiState& z0,
                                          const std::vector<double>& times,
                                          std::uint64_t seed) {
    if (z0.d() != m.d()) throw std::invalid_argument("cbi_simulate: dimension mismatch");
    auto rng = make_stream(seed, 0);
    std::vector<CbiState> out;
    out.reserve(times.size());
    std::vector<double> z = z0.z;
    double t_now = z0.time;
    for (double t : times) {
        if (t < t_now) throw std::invalid_argument("cbi_simulate: times must be increasing");
        const double dt = t - t_now;
        double sum = 0.0;
        for (int i = 1; i < m.d(); ++i) {
            z[i] = cir_transition_sample(z[i], m.theta_p1(i), dt, rng);
            sum += z[i];
        }
        z[0] = -sum;
        t_now = t;
        out.push_back(CbiState(z, t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fluctuation comparison harness
// ---------------------------------------------------------------------------

struct MomentComparison {
    std::string label;
    double wf_value = 0.0, wf_se = 0.0;
    double limit_value = 0.0, limit_se = 0.0;  // limit_se = 0 for analytic limits

    double discrepancy_in_se() const {
        double se = std::sqrt(wf_se * wf_se + limit_se * limit_se);
        return se > 0.0 ? std::abs(wf_value - limit_value) / se : 0.0;
    }
};

struct FluctuationReport {
    std::vector<MomentComparison> rows;
};

/// CBI branch of Prop-style fluctuation checks: the pre-limit diffusion is
/// run to Z-clock time t_z from x0 = e_1 + z0/sigma, and the first two
/// moments of sigma * X_i are compared against exact CBI simulation.
inline FluctuationReport compare_cbi_fluctuations(const MutationModel& m, double sigma,
                                                  const CbiState& z0, double t_z,
                                                  std::size_t replicates, std::uint64_t seed,
                                                  double dt = 0.0, unsigned threads = 1) {
    if (sigma < 50.0) throw std::invalid_argument("compare_cbi_fluctuations: sigma >= 50 required");
    const int d = m.d();
    if (dt <= 0.0) dt = 0.02 / sigma;
    const double horizon = t_z / sigma;
    std::vector<double> x0v(d);
    for (int i = 0; i < d; ++i) x0v[i] = (i == 0 ? 1.0 : 0.0) + z0.z[i] / sigma;
    SimplexPoint x0(x0v);
    const long n_steps = static_cast<long>(std::ceil(horizon / dt));

    std::vector<std::vector<double>> wf_samples(replicates), cbi_samples(replicates);
    parallel_replicates(replicates, threads, [&](std::size_t r) {
        auto rng = make_stream(seed, r);
        WfSimulator sim(m, SelectionRegime{sigma, {}}, x0, dt);
        for (long k = 0; k < n_steps; ++k) sim.step(rng);
        std::vector<double> zs(d - 1);
        for (int i = 1; i < d; ++i) zs[i - 1] = sigma * sim.state()[i];
        wf_samples[r] = zs;

        auto rng2 = make_stream(seed ^ 0x5bd1e995ULL, r);
        std::vector<double> zc(d - 1);
        for (int i = 1; i < d; ++i)
            zc[i - 1] = cir_transition_sample(z0.z[i], m.theta_p1(i), t_z, rng2);
        cbi_samples[r] = zc;
    });

    FluctuationReport rep;
    for (int i = 1; i < d; ++i) {
        RunningStats wf1, wf2, cb1, cb2;
        for (std::size_t r = 0; r < replicates; ++r) {
            double w = wf_samples[r][i - 1], c = cbi_samples[r][i - 1];
            wf1.add(w);
            wf2.add(w * w);
            cb1.add(c);
            cb2.add(c * c);
        }
        rep.rows.push_back({"mean z_" + std::to_string(i + 1), wf1.mean(), wf1.stderror(),
                            cb1.mean(), cb1.stderror()});
        rep.rows.push_back({"second moment z_" + std::to_string(i + 1), wf2.mean(),
                            wf2.stderror(), cb2.mean(), cb2.stderror()});
    }
    return rep;
}

/// Gaussian branch: sqrt(sigma)-scaled fluctuations around the logistic
/// trajectory at Z-clock time t_z, against the moment ODE solution.
inline FluctuationReport compare_gaussian_fluctuations(const MutationModel& m, double sigma,
                                                       const SimplexPoint& xi0, double t_z,
                                                       std::size_t replicates,
                                                       std::uint64_t seed, double dt = 0.0,
                                                       unsigned threads = 1) {
    const int d = m.d();
    if (dt <= 0.0) dt = 0.02 / sigma;
    const double horizon = t_z / sigma;
    const long n_steps = static_cast<long>(std::ceil(horizon / dt));
    // starting exactly on xi0 means U(0) = 0: zero initial mean and covariance
    auto moments = gaussian_moments_solve(xi0, Eigen::VectorXd::Zero(d),
                                          Eigen::MatrixXd::Zero(d, d), t_z,
                                          std::min(0.01, t_z / 64.0));
    const GaussianMoments& limit = moments.back();
    SimplexPoint xi_t = logistic_trajectory(xi0, t_z);

    std::vector<std::vector<double>> samples(replicates);
    parallel_replicates(replicates, threads, [&](std::size_t r) {
        auto rng = make_stream(seed, r);
        WfSimulator sim(m, SelectionRegime{sigma, {}}, xi0, dt);
        for (long k = 0; k < n_steps; ++k) sim.step(rng);
        std::vector<double> u(d);
        for (int i = 0; i < d; ++i)
            u[i] = std::sqrt(sigma) * (sim.state()[i] - xi_t.x[i]);
        samples[r] = u;
    });

    FluctuationReport rep;
    for (int i = 0; i < d; ++i) {
        RunningStats mean_i, sq_i;
        for (std::size_t r = 0; r < replicates; ++r) {
            mean_i.add(samples[r][i]);
            sq_i.add(samples[r][i] * samples[r][i]);
        }
        rep.rows.push_back({"mean U_" + std::to_string(i + 1), mean_i.mean(),
                            mean_i.stderror(), limit.mean[i], 0.0});
        // compare raw second moments: C_ii + m_i^2
        rep.rows.push_back({"second moment U_" + std::to_string(i + 1), sq_i.mean(),
                            sq_i.stderror(),
                            limit.cov(i, i) + limit.mean[i] * limit.mean[i], 0.0});
    }
    return rep;
}

/// Combined report covering both fluctuation limits.
inline FluctuationReport scaled_fluctuation_compare(const MutationModel& m, double sigma,
                                                    double horizon_z, std::size_t replicates,
                                                    std::uint64_t seed, unsigned threads = 1) {
    CbiState z0 = CbiState::from_unfit(std::vector<double>(m.d() - 1, 0.5));
    FluctuationReport rep = compare_cbi_fluctuations(m, sigma, z0, horizon_z, replicates,
                                                     seed, 0.0, threads);
    std::vector<double> xi0(m.d(), 0.5 / (m.d() - 1));
    xi0[0] = 0.5;
    FluctuationReport gauss = compare_gaussian_fluctuations(
        m, sigma, SimplexPoint(xi0), std::min(2.0, horizon_z), replicates, seed + 1, 0.0,
        threads);
    rep.rows.insert(rep.rows.end(), gauss.rows.begin(), gauss.rows.end());
    return rep;
}

}  // namespace strongsel
