// =============================================================================
// quadrature.hpp — tanh-sinh quadrature on (0,1) in log space, and the
// confluent hypergeometric function 1F1 through its integral representation.
//
// The integrands of interest combine e^{z y} factors with |z| up to 1e4 and
// integrable endpoint singularities y^{a-1} (1-y)^{b-a-1}.  tanh-sinh nodes
// cluster double-exponentially at both endpoints, and the whole accumulation
// runs as a log-sum-exp with max-exponent shifting, so neither the endpoint
// spikes nor the e^{z} scale ever leaves log space.
//
// Integrands receive (y, log y, log(1-y)); the transformed coordinate is
// computed so that both log y and log(1-y) stay accurate near the endpoints.
// =============================================================================
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "strongsel/special.hpp"

namespace strongsel {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// log of the integrand at (y, log y, log(1-y)); may return -inf.
using LogIntegrand = std::function<double(double, double, double)>;
/// two-dimensional version over the unit square.
using LogIntegrand2 =
    std::function<double(double, double, double, double, double, double)>;

struct QuadResult {
    double log_value = neg_inf;
    double rel_error = 0.0;  // relative change at the final refinement
    int levels = 0;
    bool converged = false;
};

namespace tanhsinh {

struct Node {
    double y, log_y, log_1my, log_weight;
};

/// Nodes at t = j*step for odd j when refining (skip_even), else all j.
inline void append_nodes(double step, double t_max, bool odd_only, std::vector<Node>& out) {
    const int j_max = static_cast<int>(t_max / step);
    for (int j = -j_max; j <= j_max; ++j) {
        if (odd_only && j % 2 == 0) continue;
        const double t = j * step;
        const double u = (M_PI / 2.0) * std::sinh(t);
        // y = sigmoid(2u); both tails evaluated without cancellation
        const double log_y = -std::log1p(std::exp(-2.0 * u));
        const double log_1my = -std::log1p(std::exp(2.0 * u));
        const double y = std::exp(log_y);
        // dy/dt = (pi/4) cosh t / cosh^2 u
        const double log_w = std::log(M_PI / 4.0) + std::log(std::cosh(t)) -
                             2.0 * (std::abs(u) + std::log1p(std::exp(-2.0 * std::abs(u))) -
                                    std::log(2.0));
        out.push_back({y, log_y, log_1my, log_w});
    }
}

}  // namespace tanhsinh

/// Integrates exp(logf) over (0,1); refines until the log-integral moves by
/// less than rel_tol between levels.
inline QuadResult integrate_log(const LogIntegrand& logf, double rel_tol = 1e-12,
                                int max_level = 10, double t_max = 6.0) {
    QuadResult res;
    LogSum acc;
    double step = 0.5;
    std::vector<tanhsinh::Node> fresh;
    double prev = neg_inf;
    for (int level = 0; level <= max_level; ++level) {
        fresh.clear();
        tanhsinh::append_nodes(step, t_max, level > 0, fresh);
        for (const auto& nd : fresh) {
            double lf = logf(nd.y, nd.log_y, nd.log_1my);
            if (lf != neg_inf) acc.add(lf + nd.log_weight);
        }
        double current = std::log(step) + acc.value();
        res.levels = level;
        res.log_value = current;
        if (level > 0) {
            double diff = std::abs(current - prev);
            res.rel_error = diff;
            if (diff <= rel_tol) {
                res.converged = true;
                return res;
            }
        }
        prev = current;
        step *= 0.5;
    }
    return res;
}

/// Tensorized tanh-sinh over (0,1)^2; node set rebuilt per level.
inline QuadResult integrate_log_2d(const LogIntegrand2& logf, double rel_tol = 1e-10,
                                   int max_level = 7, double t_max = 6.0) {
    QuadResult res;
    double step = 0.5;
    double prev = neg_inf;
    for (int level = 0; level <= max_level; ++level) {
        std::vector<tanhsinh::Node> nodes;
        tanhsinh::append_nodes(step, t_max, false, nodes);
        LogSum acc;
        for (const auto& a : nodes) {
            for (const auto& b : nodes) {
                double lf = logf(a.y, a.log_y, a.log_1my, b.y, b.log_y, b.log_1my);
                if (lf != neg_inf) acc.add(lf + a.log_weight + b.log_weight);
            }
        }
        double current = 2.0 * std::log(step) + acc.value();
        res.levels = level;
        res.log_value = current;
        if (level > 0) {
            double diff = std::abs(current - prev);
            res.rel_error = diff;
            if (diff <= rel_tol) {
                res.converged = true;
                return res;
            }
        }
        prev = current;
        step *= 0.5;
    }
    return res;
}

/// log 1F1[a, b, z] for b > a >= 0 via
///   1F1[a,b,z] = Gamma(b)/(Gamma(a)Gamma(b-a)) * int_0^1 e^{zy} y^{a-1} (1-y)^{b-a-1} dy.
/// The power series is useless in the regime of interest (large negative z,
/// catastrophic cancellation), hence quadrature.
inline double log_kummer_1f1(double a, double b, double z, double rel_tol = 1e-13) {
    if (a < 0.0 || b <= 0.0 || b < a)
        throw std::invalid_argument("log_kummer_1f1: need b >= a >= 0, b > 0");
    if (a == 0.0) return 0.0;   // 1F1[0,b,z] = 1
    if (a == b) return z;       // 1F1[a,a,z] = e^z
    auto logf = [&](double y, double log_y, double log_1my) {
        return z * y + (a - 1.0) * log_y + (b - a - 1.0) * log_1my;
    };
    QuadResult r = integrate_log(logf, rel_tol, 11);
    if (!r.converged)
        throw QuadratureError("log_kummer_1f1: quadrature did not converge");
    return std::lgamma(b) - std::lgamma(a) - std::lgamma(b - a) + r.log_value;
}

}  // namespace strongsel
