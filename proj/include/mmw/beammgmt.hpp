// SPDX-License-Identifier: Apache-2.0
//
// Beam management: acquisition, filtered candidate tracking, intra-gNB beam
// switching, inter-gNB handover with hysteresis and dwell, and radio link
// failure with re-acquisition.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/array.hpp"

namespace mmw {

struct BeamTuple {
    int gnb = -1;
    int tx_beam = -1;
    int rx_subarray = -1;
    int rx_beam = -1;

    bool valid() const { return gnb >= 0 && tx_beam >= 0 && rx_subarray >= 0 && rx_beam >= 0; }
    auto operator<=>(const BeamTuple&) const = default;
};

struct Measurement {
    BeamTuple tuple;
    double snr_db = -std::numeric_limits<double>::infinity();
};

struct MeasurementReport {
    double t_ms = 0.0;
    std::vector<Measurement> entries;
};

struct BmConfig {
    double handover_hysteresis_db = 3.0;
    double dwell_ms = 100.0;
    double rlf_offset_db = -2.0; // relative to the lowest MCS threshold
    double rlf_timer_ms = 200.0;
    double sweep_period_ms = 50.0;
    double filter_coefficient = 0.5; // per sweep period
    double switch_margin_db = 1.0;
    double switch_cost_ms = 0.0;
    double measurement_time_us = 10.0;
};

inline void validate(const BmConfig& c)
{
    if (!(c.handover_hysteresis_db >= 0.0))
        throw std::invalid_argument("beam_management.handover_hysteresis_db must be >= 0");
    if (!(c.sweep_period_ms > 0.0))
        throw std::invalid_argument("beam_management.sweep_period_ms must be > 0");
    if (!(c.dwell_ms >= c.sweep_period_ms))
        throw std::invalid_argument("beam_management.dwell_ms must be >= sweep_period_ms");
    if (!(c.filter_coefficient > 0.0 && c.filter_coefficient <= 1.0))
        throw std::invalid_argument("beam_management.filter_coefficient must be in (0, 1]");
    if (!(c.rlf_timer_ms >= 0.0) || !(c.switch_margin_db >= 0.0) || !(c.switch_cost_ms >= 0.0))
        throw std::invalid_argument("beam_management timers and margins must be >= 0");
    if (!(c.measurement_time_us > 0.0))
        throw std::invalid_argument("beam_management.measurement_time_us must be > 0");
}

enum class LinkMode { Acquiring, Connected, RadioLinkFailure };

inline std::string_view to_string(LinkMode m)
{
    switch (m) {
    case LinkMode::Acquiring: return "Acquiring";
    case LinkMode::Connected: return "Connected";
    case LinkMode::RadioLinkFailure: return "RadioLinkFailure";
    }
    return "?";
}

struct LinkState {
    LinkMode mode = LinkMode::Acquiring;
    BeamTuple serving;
    double filtered_snr_db = -std::numeric_limits<double>::infinity();
    double time_in_state_ms = 0.0;
};

enum class EventType { Acquired, BeamSwitch, Handover, LinkDrop, Reacquired };

inline std::string_view to_string(EventType e)
{
    switch (e) {
    case EventType::Acquired: return "Acquired";
    case EventType::BeamSwitch: return "BeamSwitch";
    case EventType::Handover: return "Handover";
    case EventType::LinkDrop: return "LinkDrop";
    case EventType::Reacquired: return "Reacquired";
    }
    return "?";
}

struct Event {
    double t_ms = 0.0;
    EventType type = EventType::Acquired;
    BeamTuple from;
    BeamTuple to;
    double snr_from_db = -std::numeric_limits<double>::infinity();
    double snr_to_db = -std::numeric_limits<double>::infinity();
};

struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Round-robin measurement plan covering every (gnb, tx beam, ue beam) once.
struct SweepPlan {
    struct Slot {
        int gnb;
        int tx_beam;
        int ue_beam;
    };
    std::vector<Slot> slots;
    double measurement_time_us = 10.0;

    std::size_t length() const { return slots.size(); }
    double acquisition_latency_ms() const { return static_cast<double>(slots.size()) * measurement_time_us / 1000.0; }
};

inline SweepPlan sweep_schedule(const BmConfig& c, int n_gnbs, int beams_per_gnb, int ue_beams)
{
    if (n_gnbs < 1 || beams_per_gnb < 1 || ue_beams < 1)
        throw std::invalid_argument("sweep_schedule: counts must be positive");
    SweepPlan p;
    p.measurement_time_us = c.measurement_time_us;
    p.slots.reserve(static_cast<std::size_t>(n_gnbs) * beams_per_gnb * ue_beams);
    for (int g = 0; g < n_gnbs; ++g)
        for (int b = 0; b < beams_per_gnb; ++b)
            for (int u = 0; u < ue_beams; ++u)
                p.slots.push_back({g, b, u});
    return p;
}

// Measurements needed by a top-down hierarchical search: every coarsest beam,
// then at each finer level the children of one parent (level size ratio,
// rounded up), each against every UE beam.
inline std::size_t hierarchical_search_length(const Codebook& cb, int ue_beams)
{
    std::size_t n = cb.levels.front().size();
    for (std::size_t l = 1; l < cb.levels.size(); ++l) {
        const std::size_t prev = cb.levels[l - 1].size();
        n += (cb.levels[l].size() + prev - 1) / prev;
    }
    return n * static_cast<std::size_t>(ue_beams);
}

// Single-owner state machine; feed it one full report per sweep period.
class BeamManager {
public:
    BeamManager(const BmConfig& cfg, double lowest_mcs_threshold_db)
        : cfg_(cfg), rlf_threshold_db_(lowest_mcs_threshold_db + cfg.rlf_offset_db)
    {
        validate(cfg_);
    }

    const LinkState& state() const { return state_; }
    double rlf_threshold_db() const { return rlf_threshold_db_; }

    // Filtered SNR of a tuple (-inf if never measured).
    double filtered(const BeamTuple& t) const
    {
        auto it = filters_.find(t);
        return it == filters_.end() ? -std::numeric_limits<double>::infinity() : it->second;
    }

    // Global argmax of the instantaneous report; lowest tuple wins ties.
    static std::optional<Measurement> best_of(const MeasurementReport& r, std::optional<int> gnb = std::nullopt)
    {
        std::optional<Measurement> best;
        for (const auto& m : r.entries) {
            if (gnb && m.tuple.gnb != *gnb)
                continue;
            if (!best || m.snr_db > best->snr_db || (m.snr_db == best->snr_db && m.tuple < best->tuple))
                best = m;
        }
        return best;
    }

    // Connect on the global argmax if it clears the RLF threshold.
    std::optional<Event> acquire(const MeasurementReport& report)
    {
        if (report.entries.empty())
            throw std::invalid_argument("acquire: empty measurement report");
        const auto best = best_of(report);
        if (!best || !(best->snr_db >= rlf_threshold_db_))
            return std::nullopt;
        const EventType type =
            state_.mode == LinkMode::RadioLinkFailure ? EventType::Reacquired : EventType::Acquired;
        Event e{report.t_ms, type, last_serving_, best->tuple, -std::numeric_limits<double>::infinity(),
                best->snr_db};
        state_.mode = LinkMode::Connected;
        state_.serving = best->tuple;
        state_.filtered_snr_db = best->snr_db;
        state_.time_in_state_ms = 0.0;
        filters_[best->tuple] = best->snr_db;
        reset_timers();
        return e;
    }

    std::vector<Event> tick(const MeasurementReport& report, double dt_ms)
    {
        if (!(dt_ms > 0.0))
            throw std::invalid_argument("tick: dt must be > 0");
        std::vector<Event> events;
        update_filters(report, dt_ms);
        state_.time_in_state_ms += dt_ms;

        if (state_.mode != LinkMode::Connected) {
            if (auto e = acquire(report))
                events.push_back(*e);
            return events;
        }

        bool present = false;
        for (const auto& m : report.entries)
            if (m.tuple == state_.serving) {
                present = true;
                break;
            }
        if (!present)
            throw IntegrityError("measurement report at t=" + std::to_string(report.t_ms) +
                                 " ms lacks the serving beam tuple");
        const double serving = filtered(state_.serving);

        // Best filtered candidate per gNB.
        std::map<int, std::pair<BeamTuple, double>> best;
        for (const auto& [t, f] : filters_) {
            auto it = best.find(t.gnb);
            if (it == best.end() || f > it->second.second)
                best[t.gnb] = {t, f};
        }

        // Inter-gNB handover.
        std::optional<std::pair<BeamTuple, double>> target;
        for (const auto& [g, cand] : best) {
            if (g == state_.serving.gnb)
                continue;
            double& timer = dwell_[g];
            if (cand.second >= serving + cfg_.handover_hysteresis_db)
                timer += dt_ms;
            else
                timer = 0.0;
            if (timer >= cfg_.dwell_ms - 1e-9 && (!target || cand.second > target->second))
                target = cand;
        }
        if (target) {
            events.push_back(switch_to(report.t_ms, EventType::Handover, target->first, serving, target->second));
            reset_timers();
            state_.filtered_snr_db = filtered(state_.serving);
            return events;
        }

        // Intra-gNB beam or subarray switch.
        const auto& own = best.at(state_.serving.gnb);
        if (own.first != state_.serving && own.second >= serving + cfg_.switch_margin_db) {
            events.push_back(switch_to(report.t_ms, EventType::BeamSwitch, own.first, serving, own.second));
            rlf_timer_ms_ = 0.0;
        }
        state_.filtered_snr_db = filtered(state_.serving);

        // Radio link failure.
        if (state_.filtered_snr_db < rlf_threshold_db_) {
            rlf_timer_ms_ += dt_ms;
            if (rlf_timer_ms_ >= cfg_.rlf_timer_ms - 1e-9) {
                events.push_back({report.t_ms, EventType::LinkDrop, state_.serving, BeamTuple{},
                                  state_.filtered_snr_db, -std::numeric_limits<double>::infinity()});
                last_serving_ = state_.serving;
                state_.mode = LinkMode::RadioLinkFailure;
                state_.serving = BeamTuple{};
                state_.filtered_snr_db = -std::numeric_limits<double>::infinity();
                state_.time_in_state_ms = 0.0;
                reset_timers();
            }
        } else {
            rlf_timer_ms_ = 0.0;
        }
        return events;
    }

private:
    void update_filters(const MeasurementReport& report, double dt_ms)
    {
        // Coefficient is specified per sweep period; scale to the actual step.
        const double a = 1.0 - std::pow(1.0 - cfg_.filter_coefficient, dt_ms / cfg_.sweep_period_ms);
        for (const auto& m : report.entries) {
            const double x = std::max(m.snr_db, kFloorDb); // fully blocked tuples sit at the floor
            auto [it, inserted] = filters_.try_emplace(m.tuple, x);
            if (!inserted)
                it->second += a * (x - it->second);
        }
    }

    Event switch_to(double t_ms, EventType type, const BeamTuple& to, double snr_from, double snr_to)
    {
        Event e{t_ms, type, state_.serving, to, snr_from, snr_to};
        state_.serving = to;
        state_.time_in_state_ms = 0.0;
        return e;
    }

    void reset_timers()
    {
        dwell_.clear();
        rlf_timer_ms_ = 0.0;
    }

    static constexpr double kFloorDb = -300.0;

    BmConfig cfg_;
    double rlf_threshold_db_;
    LinkState state_;
    BeamTuple last_serving_;
    std::map<BeamTuple, double> filters_;
    std::map<int, double> dwell_;
    double rlf_timer_ms_ = 0.0;
};

} // namespace mmw
