// =============================================================================
// asg.hpp — Block-counting process of the reduced conditional ancestral
// selection graph: exact sigma-dependent jump rates (weighted by sampling-
// probability ratios), their strong-selection limits, and simulators for the
// limiting fast and slow processes.
//
// States carry real lineage counts n and virtual lineage counts nu; virtual
// fit lineages never arise when the process starts from nu = 0, so nu_1 = 0
// is enforced throughout.
// =============================================================================
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "strongsel/expansion.hpp"
#include "strongsel/model.hpp"
#include "strongsel/oracles.hpp"
#include "strongsel/rng.hpp"

namespace strongsel {

struct AsgState {
    std::vector<int> n;   // real lineages per type
    std::vector<int> nu;  // virtual lineages per type

    AsgState() = default;
    AsgState(std::vector<int> real, std::vector<int> virt)
        : n(std::move(real)), nu(std::move(virt)) {
        if (n.size() != nu.size()) throw std::invalid_argument("AsgState: size mismatch");
        for (std::size_t i = 0; i < n.size(); ++i)
            if (n[i] < 0 || nu[i] < 0) throw std::invalid_argument("AsgState: negative count");
    }
    static AsgState real_only(std::vector<int> real) {
        std::vector<int> zero(real.size(), 0);
        return AsgState(std::move(real), std::move(zero));
    }

    int d() const { return static_cast<int>(n.size()); }
    std::vector<int> combined() const {
        std::vector<int> m(n.size());
        for (std::size_t i = 0; i < n.size(); ++i) m[i] = n[i] + nu[i];
        return m;
    }
    int total() const {
        int s = 0;
        for (std::size_t i = 0; i < n.size(); ++i) s += n[i] + nu[i];
        return s;
    }
    int fit_total() const { return n[0] + nu[0]; }
    int unfit_total() const { return total() - fit_total(); }
    int real_unfit() const {
        int s = 0;
        for (std::size_t i = 1; i < n.size(); ++i) s += n[i];
        return s;
    }
};

enum class EventKind { coalesce_real, remove_virtual, mutate_real, create_virtual, mutate_to_fit };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::coalesce_real: return "coalesce-real";
        case EventKind::remove_virtual: return "remove-virtual";
        case EventKind::mutate_real: return "mutate-real";
        case EventKind::create_virtual: return "create-virtual";
        case EventKind::mutate_to_fit: return "mutate-to-fit";
    }
    return "?";
}

struct RateEntry {
    AsgState target;
    EventKind kind;
    int type = 0;       // allele index the event acts on (1-based in reports)
    int type_to = -1;   // destination type for mutations
    double rate = 0.0;
};

struct RateTable {
    std::vector<RateEntry> entries;
    double total = 0.0;             // sum of listed rates
    double total_closed_form = 0.0; // (1/2)||m||(||m||-1+theta) + (sigma/2)(||m||-m_1)
};

// ---------------------------------------------------------------------------
// Exact rates of the reduced conditional ASG
// ---------------------------------------------------------------------------

/// Jump rates out of (n, nu), each weighted by q(m +- e)/q(m) ratios from the
/// supplied finite-sigma provider (log-space; underflow-proof ratios).
inline RateTable asg_rates(const AsgState& state, const MutationModel& m, double sigma,
                           const LogQProvider& log_q) {
    const int d = m.d();
    if (state.d() != d) throw std::invalid_argument("asg_rates: dimension mismatch");
    if (state.total() < 1) throw std::invalid_argument("asg_rates: empty state");
    if (state.nu[0] != 0)
        throw std::invalid_argument("asg_rates: reduced graph never holds virtual fit lineages");
    const std::vector<int> mv = state.combined();
    const double log_qm = log_q(mv);
    if (log_qm == neg_inf)
        throw std::invalid_argument("asg_rates: q(n+nu) vanishes for this state");
    auto ratio = [&](std::vector<int> t) {
        double lq = log_q(t);
        return lq == neg_inf ? 0.0 : std::exp(lq - log_qm);
    };
    auto shifted = [](std::vector<int> v, int i, int di, int j = -1, int dj = 0) {
        v[i] += di;
        if (j >= 0) v[j] += dj;
        return v;
    };

    RateTable table;
    // real coalescence
    for (int i = 0; i < d; ++i) {
        if (state.n[i] < 2) continue;
        RateEntry e;
        e.kind = EventKind::coalesce_real;
        e.type = i;
        e.target = AsgState(shifted(state.n, i, -1), state.nu);
        e.rate = 0.5 * state.n[i] * (state.n[i] - 1) * ratio(shifted(mv, i, -1));
        table.entries.push_back(std::move(e));
    }
    // virtual removal: pairwise coalescence involving a virtual lineage plus
    // any mutation of a virtual lineage (discarded by the reduction)
    for (int i = 1; i < d; ++i) {
        if (state.nu[i] < 1) continue;
        double rate = 0.5 * state.nu[i] * (state.nu[i] - 1 + 2 * state.n[i]) *
                      ratio(shifted(mv, i, -1));
        for (int j = 0; j < d; ++j)
            rate += 0.5 * state.nu[i] * m.theta() * m.P(j, i) * ratio(shifted(mv, i, -1, j, +1));
        RateEntry e;
        e.kind = EventKind::remove_virtual;
        e.type = i;
        e.target = AsgState(state.n, shifted(state.nu, i, -1));
        e.rate = rate;
        table.entries.push_back(std::move(e));
    }
    // real mutation (i == j leaves the state unchanged but carries rate)
    for (int i = 0; i < d; ++i) {
        if (state.n[i] < 1) continue;
        for (int j = 0; j < d; ++j) {
            if (m.P(j, i) == 0.0) continue;
            RateEntry e;
            e.kind = EventKind::mutate_real;
            e.type = i;
            e.type_to = j;
            e.target = AsgState(shifted(state.n, i, -1, j, +1), state.nu);
            e.rate = 0.5 * state.n[i] * m.theta() * m.P(j, i) * ratio(shifted(mv, i, -1, j, +1));
            table.entries.push_back(std::move(e));
        }
    }
    // virtual creation (unfit incoming lineage of a selective event)
    for (int i = 1; i < d; ++i) {
        RateEntry e;
        e.kind = EventKind::create_virtual;
        e.type = i;
        e.target = AsgState(state.n, shifted(state.nu, i, +1));
        e.rate = 0.5 * state.total() * sigma * ratio(shifted(mv, i, +1));
        table.entries.push_back(std::move(e));
    }
    for (const auto& e : table.entries) table.total += e.rate;
    const int size = state.total();
    table.total_closed_form = 0.5 * size * (size - 1.0 + m.theta()) +
                              0.5 * sigma * (size - state.fit_total());
    return table;
}

/// Rates of the *unreduced* conditional ASG (virtual mutations kept, fit
/// parental selective events included).  Only used to exhibit the exploding
/// total rate (1/2)||m||(||m||-1+theta+sigma); the asymptotic analysis works
/// with the reduced graph.
inline RateTable unreduced_asg_rates(const AsgState& state, const MutationModel& m,
                                     double sigma, const LogQProvider& log_q) {
    const int d = m.d();
    const std::vector<int> mv = state.combined();
    const double log_qm = log_q(mv);
    auto ratio = [&](std::vector<int> t) {
        double lq = log_q(t);
        return lq == neg_inf ? 0.0 : std::exp(lq - log_qm);
    };
    auto shifted = [](std::vector<int> v, int i, int di, int j = -1, int dj = 0) {
        v[i] += di;
        if (j >= 0) v[j] += dj;
        return v;
    };
    RateTable table;
    for (int i = 0; i < d; ++i) {
        if (state.n[i] >= 2) {
            RateEntry e{AsgState(shifted(state.n, i, -1), state.nu), EventKind::coalesce_real,
                        i, -1, 0.5 * state.n[i] * (state.n[i] - 1) * ratio(shifted(mv, i, -1))};
            table.entries.push_back(std::move(e));
        }
        if (state.nu[i] >= 1) {
            RateEntry e{AsgState(state.n, shifted(state.nu, i, -1)), EventKind::remove_virtual,
                        i, -1,
                        0.5 * state.nu[i] * (state.nu[i] - 1 + 2 * state.n[i]) *
                            ratio(shifted(mv, i, -1))};
            table.entries.push_back(std::move(e));
        }
        for (int j = 0; j < d; ++j) {
            if (state.n[i] >= 1 && m.P(j, i) > 0.0) {
                RateEntry e{AsgState(shifted(state.n, i, -1, j, +1), state.nu),
                            EventKind::mutate_real, i, j,
                            0.5 * state.n[i] * m.theta() * m.P(j, i) *
                                ratio(shifted(mv, i, -1, j, +1))};
                table.entries.push_back(std::move(e));
            }
            // mutation of a virtual lineage (kept in the unreduced graph)
            if (state.nu[i] >= 1 && m.P(j, i) > 0.0 && i != 0) {
                RateEntry e{AsgState(state.n, shifted(state.nu, i, -1, j, +1)),
                            EventKind::mutate_real, i, j,
                            0.5 * state.nu[i] * m.theta() * m.P(j, i) *
                                ratio(shifted(mv, i, -1, j, +1))};
                table.entries.push_back(std::move(e));
            }
        }
    }
    for (int i = 1; i < d; ++i) {
        RateEntry e{AsgState(state.n, shifted(state.nu, i, +1)), EventKind::create_virtual, i,
                    -1, 0.5 * state.total() * sigma * ratio(shifted(mv, i, +1))};
        table.entries.push_back(std::move(e));
    }
    // selective events with a fit parental incoming lineage (any continuing
    // type i, including the fit one)
    for (int i = 0; i < d; ++i) {
        RateEntry e{AsgState(state.n, shifted(state.nu, i, +1)), EventKind::create_virtual, i,
                    -1, 0.5 * state.fit_total() * sigma * ratio(shifted(mv, i, +1))};
        table.entries.push_back(std::move(e));
    }
    for (const auto& e : table.entries) table.total += e.rate;
    const int size = state.total();
    table.total_closed_form = 0.5 * size * (size - 1.0 + m.theta() + sigma);
    return table;
}

// ---------------------------------------------------------------------------
// Strong-selection limits of the rates
// ---------------------------------------------------------------------------

struct AsymptoticRates {
    std::optional<RateTable> slow;  // original timescale; no unfit lineages
    std::optional<RateTable> fast;  // time rescaled by sigma; some unfit lineages
};

/// Limiting jump rates.  States without unfit lineages evolve on the original
/// timescale (slow table); states with unfit lineages only move on the
/// sigma-rescaled timescale (fast table).  Asking for the wrong regime is an
/// error surfaced by the empty optional.
inline AsymptoticRates asymptotic_rates(const AsgState& state, const MutationModel& m) {
    const int d = m.d();
    if (state.d() != d) throw std::invalid_argument("asymptotic_rates: dimension mismatch");
    auto shifted = [](std::vector<int> v, int i, int di, int j = -1, int dj = 0) {
        v[i] += di;
        if (j >= 0) v[j] += dj;
        return v;
    };
    AsymptoticRates out;
    if (state.unfit_total() == 0) {
        RateTable slow;
        if (state.n[0] >= 2) {
            slow.entries.push_back({AsgState(shifted(state.n, 0, -1), state.nu),
                                    EventKind::coalesce_real, 0, -1,
                                    0.5 * state.n[0] * (state.n[0] - 1)});
        }
        for (int i = 1; i < d; ++i) {
            slow.entries.push_back({AsgState(state.n, shifted(state.nu, i, +1)),
                                    EventKind::create_virtual, i, -1,
                                    0.5 * state.total() * m.theta_p1(i)});
        }
        for (const auto& e : slow.entries) slow.total += e.rate;
        slow.total_closed_form = slow.total;
        out.slow = std::move(slow);
    } else {
        RateTable fast;
        for (int i = 1; i < d; ++i) {
            const int ni = state.n[i], vi = state.nu[i];
            if (ni + vi == 0) continue;
            const double denom = ni + vi - 1 + m.theta_p1(i);
            auto push = [&](EventKind kind, double numer, auto make_target, int to = -1) {
                if (numer == 0.0) return;
                if (denom <= 0.0)
                    throw std::invalid_argument(
                        "asymptotic_rates: vanishing denominator (theta*P_1i = 0)");
                fast.entries.push_back({make_target(), kind, i, to, 0.5 * numer / denom});
            };
            push(EventKind::coalesce_real, double(ni) * (ni - 1),
                 [&] { return AsgState(shifted(state.n, i, -1), state.nu); });
            push(EventKind::remove_virtual, double(vi) * (vi - 1 + 2 * ni + m.theta_p1(i)),
                 [&] { return AsgState(state.n, shifted(state.nu, i, -1)); });
            push(EventKind::mutate_to_fit, double(ni) * m.theta_p1(i),
                 [&] { return AsgState(shifted(state.n, i, -1, 0, +1), state.nu); }, 0);
        }
        for (const auto& e : fast.entries) fast.total += e.rate;
        fast.total_closed_form = fast.total;
        out.fast = std::move(fast);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Limiting-process simulators
// ---------------------------------------------------------------------------

struct AsgEvent {
    double time = 0.0;
    EventKind kind = EventKind::coalesce_real;
    int type = 0;
    AsgState state_after;
};

using EventSequence = std::vector<AsgEvent>;

/// Fast limiting process on real lineages (nu = 0): unfit coalescences and
/// unfit-to-fit mutations with exponential holding times, run until no unfit
/// lineage remains.  The unfit count strictly decreases at every event.
inline EventSequence simulate_fast(const SampleConfig& n0, const MutationModel& m,
                                   std::mt19937_64& rng) {
    AsgState state = AsgState::real_only(n0.n);
    EventSequence events;
    double t = 0.0;
    while (state.unfit_total() > 0) {
        AsymptoticRates rates = asymptotic_rates(state, m);
        const RateTable& table = *rates.fast;
        std::exponential_distribution<double> hold(table.total);
        t += hold(rng);
        std::uniform_real_distribution<double> pick(0.0, table.total);
        double u = pick(rng);
        const RateEntry* chosen = &table.entries.back();
        for (const auto& e : table.entries) {
            if (u < e.rate) {
                chosen = &e;
                break;
            }
            u -= e.rate;
        }
        state = chosen->target;
        events.push_back({t, chosen->kind, chosen->type, state});
    }
    return events;
}

inline EventSequence simulate_fast(const SampleConfig& n0, const MutationModel& m,
                                   std::uint64_t seed) {
    auto rng = make_stream(seed, 0);
    return simulate_fast(n0, m, rng);
}

/// State of the fast process frozen at time t (absorbed states persist).
inline std::vector<int> fast_state_at(const SampleConfig& n0, const MutationModel& m,
                                      double t, std::mt19937_64& rng) {
    AsgState state = AsgState::real_only(n0.n);
    double now = 0.0;
    while (state.unfit_total() > 0) {
        AsymptoticRates rates = asymptotic_rates(state, m);
        const RateTable& table = *rates.fast;
        std::exponential_distribution<double> hold(table.total);
        now += hold(rng);
        if (now > t) break;
        std::uniform_real_distribution<double> pick(0.0, table.total);
        double u = pick(rng);
        const RateEntry* chosen = &table.entries.back();
        for (const auto& e : table.entries) {
            if (u < e.rate) {
                chosen = &e;
                break;
            }
            u -= e.rate;
        }
        state = chosen->target;
    }
    return state.n;
}

/// Slow limiting process: Kingman death chain on the fit lineages
/// (virtual creations are omitted; each would be removed immediately on the
/// fast timescale).  theta_out only annotates reports.
inline EventSequence simulate_slow(int n1, double theta_out, std::uint64_t seed) {
    if (n1 < 1) throw std::invalid_argument("simulate_slow: n1 >= 1 required");
    if (theta_out < 0.0) throw std::invalid_argument("simulate_slow: theta_out < 0");
    auto rng = make_stream(seed, 0);
    EventSequence events;
    double t = 0.0;
    for (int j = n1; j >= 2; --j) {
        std::exponential_distribution<double> hold(0.5 * j * (j - 1));
        t += hold(rng);
        events.push_back({t, EventKind::coalesce_real, 0, AsgState::real_only({j - 1})});
    }
    return events;
}

// ---------------------------------------------------------------------------
// sigma-scaling probe
// ---------------------------------------------------------------------------

struct ProbeReport {
    std::vector<double> sigmas;
    std::vector<double> values;       // oracle q(n) per sigma
    double fitted_slope = 0.0;        // of log q against log sigma
    double fitted_constant = 0.0;     // exp(intercept)
    double expected_slope = 0.0;      // -(||n|| - n_1)
    double q0_value = 0.0;            // leading coefficient qt_0(n)
};

/// Least-squares fit of log q(n) against log sigma over the supplied sigma
/// list, using the truncated-system oracle; exhibits the sigma^{-(||n||-n1)}
/// decay with constant qt_0(n).
inline ProbeReport genealogical_interpretation_probe(const SampleConfig& n,
                                                     const MutationModel& m,
                                                     const std::vector<double>& sigmas,
                                                     int level_cap = 0) {
    if (sigmas.size() < 2)
        throw std::invalid_argument("genealogical_interpretation_probe: need >= 2 sigmas");
    ProbeReport rep;
    rep.sigmas = sigmas;
    rep.expected_slope = -double(n.unfit());
    rep.q0_value = q0(n, m);
    const int cap = level_cap > 0 ? level_cap : n.size() + 6;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double sigma : sigmas) {
        TruncatedSystemSolution sol(m, sigma, cap);
        double lq = sol.log_q(n.n);
        rep.values.push_back(std::exp(lq));
        double lx = std::log(sigma);
        sx += lx;
        sy += lq;
        sxx += lx * lx;
        sxy += lx * lq;
    }
    const double count = static_cast<double>(sigmas.size());
    rep.fitted_slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    rep.fitted_constant = std::exp((sy - rep.fitted_slope * sx) / count);
    return rep;
}

}  // namespace strongsel
