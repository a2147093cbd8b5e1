// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "mmw/beammgmt.hpp"

using namespace mmw;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kLowestThreshold = 3.0; // RLF threshold 1 dB with the default offset

// Full report over gnbs x tx x 1 subarray x rx beams; snr(tuple) gives the value.
MeasurementReport report(double t_ms, int gnbs, int tx, int rx, const std::function<double(const BeamTuple&)>& snr)
{
    MeasurementReport r;
    r.t_ms = t_ms;
    for (int g = 0; g < gnbs; ++g)
        for (int b = 0; b < tx; ++b)
            for (int u = 0; u < rx; ++u) {
                const BeamTuple t{g, b, 0, u};
                r.entries.push_back({t, snr(t)});
            }
    return r;
}

int count(const std::vector<Event>& ev, EventType type)
{
    int n = 0;
    for (const auto& e : ev)
        n += e.type == type;
    return n;
}

struct Run {
    std::vector<Event> events;
    std::vector<LinkState> states;
};

// Drives the manager through `steps` sweeps of `period` ms.
Run drive(BeamManager& bm, int steps, double period, int gnbs, int tx, int rx,
          const std::function<double(double, const BeamTuple&)>& snr)
{
    Run run;
    for (int i = 0; i < steps; ++i) {
        const double t = i * period;
        auto r = report(t, gnbs, tx, rx, [&](const BeamTuple& b) { return snr(t, b); });
        auto ev = bm.tick(r, period);
        run.events.insert(run.events.end(), ev.begin(), ev.end());
        run.states.push_back(bm.state());
    }
    return run;
}

} // namespace

TEST_CASE("sweep plans")
{
    const BmConfig c;
    CHECK(sweep_schedule(c, 1, 1, 1).length() == 1);
    const auto p = sweep_schedule(c, 2, 128, 16);
    CHECK(p.length() == 4096);
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& s : p.slots)
        seen.insert({s.gnb, s.tx_beam, s.ue_beam});
    CHECK(seen.size() == 4096);
    const auto q = sweep_schedule(c, 2, 128, 16);
    for (std::size_t i = 0; i < p.length(); ++i) {
        CHECK(p.slots[i].gnb == q.slots[i].gnb);
        CHECK(p.slots[i].tx_beam == q.slots[i].tx_beam);
        CHECK(p.slots[i].ue_beam == q.slots[i].ue_beam);
    }
    CHECK_THAT(p.acquisition_latency_ms(), WithinAbs(4096 * c.measurement_time_us / 1000.0, 1e-12));
    CHECK_THROWS_AS(sweep_schedule(c, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("hierarchical search length")
{
    Codebook cb;
    cb.levels = {std::vector<Beam>(4), std::vector<Beam>(16), std::vector<Beam>(108)};
    // 4 coarse beams, 4 children at level 1, ceil(108 / 16) = 7 at level 2.
    CHECK(hierarchical_search_length(cb, 16) == (4 + 4 + 7) * 16);
}

TEST_CASE("acquisition")
{
    const BmConfig c;
    {
        BeamManager bm(c, kLowestThreshold);
        auto r = report(0, 1, 1, 1, [](const BeamTuple&) { return 10.0; });
        const auto e = bm.acquire(r);
        REQUIRE(e);
        CHECK(e->type == EventType::Acquired);
        CHECK(bm.state().mode == LinkMode::Connected);
        CHECK(bm.state().serving == BeamTuple{0, 0, 0, 0});
        CHECK(bm.state().filtered_snr_db == 10.0);
    }
    {
        BeamManager bm(c, kLowestThreshold);
        auto r = report(0, 2, 4, 2, [](const BeamTuple& t) { return t.gnb == 1 && t.tx_beam == 2 ? 20.0 : 5.0; });
        REQUIRE(bm.acquire(r));
        CHECK(bm.state().serving == BeamTuple{1, 2, 0, 0});
    }
    {
        BeamManager bm(c, kLowestThreshold);
        auto r = report(0, 2, 4, 2, [](const BeamTuple&) { return 0.5; });
        CHECK_FALSE(bm.acquire(r));
        CHECK(bm.state().mode == LinkMode::Acquiring);
    }
    {
        BeamManager bm(c, kLowestThreshold);
        auto r = report(0, 2, 4, 2, [](const BeamTuple& t) { return t.tx_beam >= 2 ? 12.0 : 4.0; });
        REQUIRE(bm.acquire(r));
        CHECK(bm.state().serving == BeamTuple{0, 2, 0, 0});
    }
    BeamManager bm(c, kLowestThreshold);
    CHECK_THROWS_AS(bm.acquire(MeasurementReport{}), std::invalid_argument);
}

TEST_CASE("stable link stays put")
{
    const BmConfig c;
    BeamManager bm(c, kLowestThreshold);
    const auto run = drive(bm, 40, c.sweep_period_ms, 1, 8, 4, [](double, const BeamTuple& t) {
        return t.tx_beam == 3 && t.rx_beam == 1 ? 25.0 : 10.0 - t.tx_beam;
    });
    REQUIRE(run.events.size() == 1);
    CHECK(run.events[0].type == EventType::Acquired);
    CHECK(bm.state().serving == BeamTuple{0, 3, 0, 1});
    CHECK_THAT(bm.state().filtered_snr_db, WithinAbs(25.0, 1e-9));
}

TEST_CASE("filter converges to a new level")
{
    const BmConfig c;
    BeamManager bm(c, kLowestThreshold);
    drive(bm, 30, c.sweep_period_ms, 1, 1, 1, [](double t, const BeamTuple&) { return t < 500 ? 20.0 : 14.0; });
    CHECK_THAT(bm.state().filtered_snr_db, WithinAbs(14.0, 1e-4));
}

TEST_CASE("blocked serving path falls back to a reflection on the same gNB")
{
    const BmConfig c;
    BeamManager bm(c, kLowestThreshold);
    // Direct path on beam 5, reflection 6 dB weaker on beam 1; a second gNB
    // far weaker. The direct path loses 30 dB at t = 1 s.
    const auto run = drive(bm, 60, c.sweep_period_ms, 2, 8, 2, [](double t, const BeamTuple& b) {
        if (b.gnb == 1)
            return 2.0;
        if (b.tx_beam == 5 && b.rx_beam == 0)
            return t < 1000 ? 30.0 : 0.0;
        if (b.tx_beam == 1 && b.rx_beam == 1)
            return 24.0;
        return 8.0;
    });
    CHECK(count(run.events, EventType::BeamSwitch) == 1);
    CHECK(count(run.events, EventType::Handover) == 0);
    CHECK(count(run.events, EventType::LinkDrop) == 0);
    CHECK(bm.state().serving == BeamTuple{0, 1, 0, 1});
    for (const auto& e : run.events)
        if (e.type == EventType::BeamSwitch)
            CHECK(e.t_ms == 1000.0);
}

TEST_CASE("handover after the dwell time")
{
    BmConfig c;
    c.dwell_ms = 150.0;
    BeamManager bm(c, kLowestThreshold);
    const auto run = drive(bm, 40, c.sweep_period_ms, 2, 2, 1, [](double t, const BeamTuple& b) {
        if (b.gnb == 0)
            return t < 500 ? 20.0 : 12.0;
        return 16.0 + b.tx_beam;
    });
    REQUIRE(count(run.events, EventType::Handover) == 1);
    for (const auto& e : run.events)
        if (e.type == EventType::Handover) {
            CHECK(e.from.gnb == 0);
            CHECK(e.to == BeamTuple{1, 1, 0, 0});
            CHECK(e.t_ms > 500.0 + c.dwell_ms - c.sweep_period_ms);
        }
}

TEST_CASE("single gNB never hands over")
{
    const BmConfig c;
    BeamManager bm(c, kLowestThreshold);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 6.0);
    std::vector<double> noise(200 * 16);
    for (auto& x : noise)
        x = n(rng);
    const auto run = drive(bm, 200, c.sweep_period_ms, 1, 8, 2, [&](double t, const BeamTuple& b) {
        return 12.0 + noise[static_cast<std::size_t>(t / 50.0) * 16 + b.tx_beam * 2 + b.rx_beam];
    });
    CHECK(count(run.events, EventType::Handover) == 0);
}

TEST_CASE("no ping-pong below the hysteresis")
{
    const BmConfig c;
    BeamManager bm(c, kLowestThreshold);
    // Two gNBs trading places by 2 dB (under the 3 dB hysteresis) every tick.
    const auto run = drive(bm, 400, c.sweep_period_ms, 2, 1, 1, [](double t, const BeamTuple& b) {
        const bool odd = static_cast<int>(t / 50.0) % 2 == 1;
        return 15.0 + ((b.gnb == 1) == odd ? 2.0 : 0.0);
    });
    CHECK(count(run.events, EventType::Handover) <= 1);
}

TEST_CASE("random fields keep the state machine invariants")
{
    BmConfig c;
    c.dwell_ms = 100.0;
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        // Random walk per tuple.
        const int gnbs = 3, tx = 4, rx = 2, steps = 300;
        std::vector<double> level(gnbs * tx * rx);
        for (auto& x : level)
            x = 12.0 + 4.0 * n(rng);
        std::vector<std::vector<double>> field;
        for (int s = 0; s < steps; ++s) {
            for (auto& x : level)
                x += 1.5 * n(rng);
            field.push_back(level);
        }
        auto snr = [&](double t, const BeamTuple& b) {
            return field[static_cast<std::size_t>(t / c.sweep_period_ms)]
                        [static_cast<std::size_t>((b.gnb * tx + b.tx_beam) * rx + b.rx_beam)];
        };
        BeamManager a(c, kLowestThreshold), b(c, kLowestThreshold);
        const auto ra = drive(a, steps, c.sweep_period_ms, gnbs, tx, rx, snr);
        const auto rb = drive(b, steps, c.sweep_period_ms, gnbs, tx, rx, snr);

        // Deterministic event log.
        REQUIRE(ra.events.size() == rb.events.size());
        for (std::size_t i = 0; i < ra.events.size(); ++i) {
            CHECK(ra.events[i].t_ms == rb.events[i].t_ms);
            CHECK(ra.events[i].type == rb.events[i].type);
            CHECK(ra.events[i].to == rb.events[i].to);
        }

        // At most one handover per dwell window, events ordered in time.
        double last_ho = -1e9, last = -1e9;
        for (const auto& e : ra.events) {
            CHECK(e.t_ms >= last);
            last = e.t_ms;
            if (e.type == EventType::Handover) {
                CHECK(e.t_ms - last_ho >= c.dwell_ms);
                last_ho = e.t_ms;
            }
        }

        // Serving tuple within 1 dB of the best filtered tuple on its gNB.
        BeamManager probe(c, kLowestThreshold);
        for (int s = 0; s < steps; ++s) {
            const double t = s * c.sweep_period_ms;
            probe.tick(report(t, gnbs, tx, rx, [&](const BeamTuple& bt) { return snr(t, bt); }), c.sweep_period_ms);
            const auto& st = probe.state();
            if (st.mode != LinkMode::Connected)
                continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int bi = 0; bi < tx; ++bi)
                for (int ri = 0; ri < rx; ++ri)
                    best = std::max(best, probe.filtered({st.serving.gnb, bi, 0, ri}));
            CHECK(probe.filtered(st.serving) >= best - c.switch_margin_db - 1e-9);
        }
    }
}

TEST_CASE("radio link failure and recovery")
{
    const BmConfig c;
    BeamManager bm(c, kLowestThreshold);
    CHECK_THAT(bm.rlf_threshold_db(), WithinAbs(1.0, 1e-12));
    // Everything collapses at 1 s; beam 2 comes back at 3 s.
    const auto run = drive(bm, 100, c.sweep_period_ms, 1, 4, 2, [](double t, const BeamTuple& b) {
        if (t < 1000)
            return b.tx_beam == 0 ? 20.0 : 5.0;
        if (t < 3000)
            return -20.0;
        return b.tx_beam == 2 ? 18.0 : -20.0;
    });
    REQUIRE(count(run.events, EventType::LinkDrop) == 1);
    REQUIRE(count(run.events, EventType::Reacquired) == 1);
    double drop = 0.0, back = 0.0;
    for (const auto& e : run.events) {
        if (e.type == EventType::LinkDrop) {
            drop = e.t_ms;
            CHECK(e.from == BeamTuple{0, 0, 0, 0});
        }
        if (e.type == EventType::Reacquired) {
            back = e.t_ms;
            CHECK(e.to == BeamTuple{0, 2, 0, 0});
        }
    }
    CHECK(drop > 1000.0);
    CHECK(drop <= 1000.0 + c.rlf_timer_ms + c.sweep_period_ms);
    // Liveness: connected within one RLF timer plus one sweep once a candidate clears the threshold.
    CHECK(back >= 3000.0);
    CHECK(back <= 3000.0 + c.rlf_timer_ms + c.sweep_period_ms);
    CHECK(bm.state().mode == LinkMode::Connected);
}

TEST_CASE("report without the serving tuple is rejected")
{
    const BmConfig c;
    BeamManager bm(c, kLowestThreshold);
    bm.tick(report(0, 1, 2, 1, [](const BeamTuple& t) { return t.tx_beam == 0 ? 20.0 : 5.0; }), 50.0);
    REQUIRE(bm.state().serving == BeamTuple{0, 0, 0, 0});
    MeasurementReport partial;
    partial.t_ms = 50.0;
    partial.entries.push_back({{0, 1, 0, 0}, 5.0});
    CHECK_THROWS_AS(bm.tick(partial, 50.0), IntegrityError);
    CHECK_THROWS_AS(bm.tick(partial, 0.0), std::invalid_argument);
}

TEST_CASE("configuration validation")
{
    BmConfig c;
    c.dwell_ms = 10.0;
    CHECK_THROWS_AS(BeamManager(c, 3.0), std::invalid_argument);
    c = {};
    c.filter_coefficient = 0.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = {};
    c.handover_hysteresis_db = -1.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
}
