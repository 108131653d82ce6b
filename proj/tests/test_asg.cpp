#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "strongsel/asg.hpp"

using namespace strongsel;

namespace {

const MutationModel& model3() {
    static MutationModel m(3, 1.0,
                           {{0.7, 0.2, 0.1}, {0.3, 0.5, 0.2}, {0.25, 0.35, 0.4}});
    return m;
}

}  // namespace

TEST_CASE("total-rate identity of the reduced graph") {
    const MutationModel& m = model3();
    const double sigma = 100.0;
    TruncatedSystemSolution sol(m, sigma, 13);
    auto provider = sol.provider();
    for (AsgState s : {AsgState({2, 0, 0}, {0, 0, 0}), AsgState({1, 2, 0}, {0, 1, 0}),
                       AsgState({0, 1, 2}, {0, 0, 1}), AsgState({2, 1, 1}, {0, 1, 1})}) {
        RateTable t = asg_rates(s, m, sigma, provider);
        CHECK(t.total ==
              Catch::Approx(t.total_closed_form).epsilon(1e-9));
    }
}

TEST_CASE("rates agree across independent q providers") {
    // the same state fed by the linear-system and quadrature oracles
    PimModel pim(1.0, {0.7, 0.3});
    MutationModel m = pim.as_general();
    const double sigma = 200.0;
    AsgState s({1, 1}, {0, 1});
    auto linsys = truncated_system_oracle(m, sigma, s.total() + 7);
    LogQProvider lin = [&](const std::vector<int>& n) { return linsys.at(n).log_value; };
    LogQProvider quad = [&](const std::vector<int>& n) {
        return pim_quadrature_oracle(SampleConfig(n), pim, {sigma, 0.0}).log_value;
    };
    RateTable a = asg_rates(s, m, sigma, lin);
    RateTable b = asg_rates(s, m, sigma, quad);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t k = 0; k < a.entries.size(); ++k)
        CHECK(a.entries[k].rate == Catch::Approx(b.entries[k].rate).epsilon(1e-5));
}

TEST_CASE("unreduced graph total rate explodes linearly in sigma") {
    const MutationModel& m = model3();
    AsgState s({1, 1, 0}, {0, 0, 1});
    const double sigma = 100.0;
    TruncatedSystemSolution sol(m, sigma, 11);
    RateTable t = unreduced_asg_rates(s, m, sigma, sol.provider());
    const int size = s.total();
    CHECK(t.total_closed_form ==
          Catch::Approx(0.5 * size * (size - 1 + m.theta() + sigma)));
    CHECK(t.total == Catch::Approx(t.total_closed_form).epsilon(1e-9));
}

TEST_CASE("all-fit state only coalesces or creates virtual unfit lineages") {
    const MutationModel& m = model3();
    TruncatedSystemSolution sol(m, 100.0, 11);
    RateTable t = asg_rates(AsgState({2, 0, 0}, {0, 0, 0}), m, 100.0, sol.provider());
    bool saw_coalescence = false, saw_creation = false;
    for (const auto& e : t.entries) {
        if (e.kind == EventKind::coalesce_real) {
            CHECK(e.type == 0);  // the only coalescence prefactor n_i(n_i-1) > 0
            saw_coalescence = true;
        }
        CHECK(e.kind != EventKind::remove_virtual);  // nu = 0
        if (e.kind == EventKind::mutate_real) CHECK(e.type == 0);  // n_i = 0 for i >= 2
        if (e.kind == EventKind::create_virtual) {
            CHECK(e.type >= 1);
            saw_creation = true;
        }
    }
    CHECK(saw_coalescence);
    CHECK(saw_creation);
    // rejects virtual fit lineages
    CHECK_THROWS(asg_rates(AsgState({1, 0, 0}, {1, 0, 0}), m, 100.0, sol.provider()));
}

TEST_CASE("asymptotic rate tables") {
    const MutationModel& m = model3();
    SECTION("single virtual lineage is removed at rate 1/2") {
        AsgState s({3, 0, 0}, {0, 1, 0});
        AsymptoticRates r = asymptotic_rates(s, m);
        REQUIRE(r.fast.has_value());
        CHECK_FALSE(r.slow.has_value());
        REQUIRE(r.fast->entries.size() == 1);
        CHECK(r.fast->entries[0].kind == EventKind::remove_virtual);
        CHECK(r.fast->entries[0].rate == Catch::Approx(0.5));
    }
    SECTION("slow table on an all-fit sample") {
        AsgState s({3, 0, 0}, {0, 0, 0});
        AsymptoticRates r = asymptotic_rates(s, m);
        REQUIRE(r.slow.has_value());
        CHECK_FALSE(r.fast.has_value());
        double coal = 0.0, create = 0.0;
        for (const auto& e : r.slow->entries) {
            if (e.kind == EventKind::coalesce_real) coal += e.rate;
            if (e.kind == EventKind::create_virtual) create += e.rate;
        }
        CHECK(coal == Catch::Approx(3.0));
        CHECK(create == Catch::Approx(1.5 * (m.theta_p1(1) + m.theta_p1(2))));
    }
    SECTION("exact rates rescaled by sigma approach the fast table") {
        AsgState s({1, 2, 1}, {0, 1, 0});
        double prev = 1e300;
        for (double sigma : {100.0, 1000.0}) {
            TruncatedSystemSolution sol(m, sigma, 12);
            RateTable exact = asg_rates(s, m, sigma, sol.provider());
            AsymptoticRates lim = asymptotic_rates(s, m);
            double dist = 0.0;
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
            CHECK(dist < prev / 5.0);  // at least ~1/sigma decay per decade
            prev = dist;
        }
    }
}

TEST_CASE("fast process simulation") {
    const MutationModel& m = model3();
    SECTION("no unfit lineages: nothing happens") {
        CHECK(simulate_fast(SampleConfig({4, 0, 0}), m, 1).empty());
    }
    SECTION("single unfit lineage mutates to fit with an Exp(1/2) clock") {
        RunningStats time;
        for (std::uint64_t r = 0; r < 20000; ++r) {
            auto events = simulate_fast(SampleConfig({0, 1, 0}), m, r);
            REQUIRE(events.size() == 1);
            CHECK(events[0].kind == EventKind::mutate_to_fit);
            time.add(events[0].time);
        }
        CHECK(std::abs(time.mean() - 2.0) <= 4.0 * time.stderror());
    }
    SECTION("unfit count strictly decreases; terminates all-fit") {
        for (std::uint64_t r = 0; r < 200; ++r) {
            auto events = simulate_fast(SampleConfig({1, 3, 2}), m, 100 + r);
            int prev_unfit = 5;
            for (const auto& e : events) {
                int unfit = e.state_after.n[1] + e.state_after.n[2];
                CHECK(unfit == prev_unfit - 1);
                prev_unfit = unfit;
            }
            CHECK(prev_unfit == 0);
        }
    }
    SECTION("first-event frequencies follow the rate ratios") {
        SampleConfig n0({0, 2, 1});
        AsymptoticRates lim = asymptotic_rates(AsgState::real_only(n0.n), m);
        double total = lim.fast->total;
        std::map<std::pair<int, int>, double> want;  // (kind as int, type) -> prob
        for (const auto& e : lim.fast->entries)
            want[{static_cast<int>(e.kind), e.type}] = e.rate / total;
        const std::size_t reps = 40000;
        std::map<std::pair<int, int>, int> seen;
        for (std::uint64_t r = 0; r < reps; ++r) {
            auto events = simulate_fast(n0, m, 7000 + r);
            REQUIRE(!events.empty());
            seen[{static_cast<int>(events[0].kind), events[0].type}]++;
        }
        for (const auto& [key, p] : want) {
            double freq = seen[key] / double(reps);
            double se = std::sqrt(p * (1.0 - p) / double(reps));
            CHECK(std::abs(freq - p) <= 4.0 * se);
        }
    }
}

TEST_CASE("slow process simulation") {
    CHECK(simulate_slow(1, 0.5, 3).empty());
    CHECK_THROWS(simulate_slow(0, 0.5, 3));
    RunningStats total_time, pair_time;
    for (std::uint64_t r = 0; r < 20000; ++r) {
        auto events = simulate_slow(6, 0.5, r);
        REQUIRE(events.size() == 5);
        CHECK(events.back().state_after.n[0] == 1);
        total_time.add(events.back().time);
        pair_time.add(simulate_slow(2, 0.5, r ^ 0xabcdULL).back().time);
    }
    // Kingman expectation: 2 (1 - 1/n)
    CHECK(std::abs(total_time.mean() - 2.0 * (1.0 - 1.0 / 6.0)) <=
          4.0 * total_time.stderror());
    CHECK(std::abs(pair_time.mean() - 1.0) <= 4.0 * pair_time.stderror());
}

TEST_CASE("sigma-scaling probe") {
    const MutationModel& m = model3();
    SECTION("one unfit copy decays like 1/sigma with constant qt_0") {
        SampleConfig n({2, 1, 0});
        auto rep = genealogical_interpretation_probe(n, m, {100, 200, 400, 800});
        CHECK(rep.fitted_slope == Catch::Approx(-1.0).margin(0.1));
        CHECK(rep.fitted_constant == Catch::Approx(rep.q0_value).epsilon(0.1));
    }
    SECTION("two unfit copies decay like 1/sigma^2") {
        SampleConfig n({1, 1, 1});
        auto rep = genealogical_interpretation_probe(n, m, {100, 200, 400, 800});
        CHECK(rep.fitted_slope == Catch::Approx(-2.0).margin(0.1));
        CHECK(rep.fitted_constant == Catch::Approx(rep.q0_value).epsilon(0.1));
    }
    SECTION("all-fit samples do not decay") {
        SampleConfig n({3, 0, 0});
        auto rep = genealogical_interpretation_probe(n, m, {100, 200, 400, 800});
        CHECK(std::abs(rep.fitted_slope) < 0.05);
    }
}
