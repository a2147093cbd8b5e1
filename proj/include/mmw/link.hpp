// SPDX-License-Identifier: Apache-2.0
//
// Link budget, MCS selection and TDD throughput.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmw {

enum class Direction { Downlink, Uplink };

struct LinkBudget {
    double gnb_eirp_dbm = 55.0;
    double dynamic_range_db = 19.0;
    double bandwidth_hz = 240e6;
    double noise_figure_db = 7.0;
    double ue_eirp_dbm = 30.0;
    double carrier_ghz = 28.0;
};

inline double noise_floor_dbm(const LinkBudget& b)
{
    return -174.0 + 10.0 * std::log10(b.bandwidth_hz) + b.noise_figure_db;
}

// EIRP minus backoff plus the composite path gain (beamforming included),
// over the thermal noise floor of the full bandwidth.
inline double snr_db(const LinkBudget& b, Direction dir, double path_gain_db, double backoff_db = 0.0)
{
    if (!(backoff_db >= 0.0 && backoff_db <= b.dynamic_range_db))
        throw std::domain_error("snr_db: power backoff outside the transmit dynamic range");
    const double eirp = dir == Direction::Downlink ? b.gnb_eirp_dbm : b.ue_eirp_dbm;
    return eirp - backoff_db + path_gain_db - noise_floor_dbm(b);
}

enum class Modulation { QPSK, QAM16, QAM64 };

inline std::string_view to_string(Modulation m)
{
    switch (m) {
    case Modulation::QPSK: return "QPSK";
    case Modulation::QAM16: return "16QAM";
    case Modulation::QAM64: return "64QAM";
    }
    return "?";
}

inline Modulation parse_modulation(std::string_view s)
{
    for (Modulation m : {Modulation::QPSK, Modulation::QAM16, Modulation::QAM64})
        if (to_string(m) == s)
            return m;
    throw std::invalid_argument("unknown modulation '" + std::string(s) + "'");
}

struct McsEntry {
    Modulation modulation = Modulation::QPSK;
    double code_rate = 0.5;
    double threshold_db = 0.0;
    double efficiency = 0.0; // effective bps/Hz
};

struct McsTable {
    std::vector<McsEntry> entries;
};

// 7 entries from QPSK 1/2 to 64QAM 5/6. Effective efficiency is half the
// nominal bits per symbol times code rate; thresholds are AWGN waterfall
// points plus a 2 dB implementation margin.
inline McsTable default_mcs_table()
{
    return {{
        {Modulation::QPSK, 1.0 / 2.0, 3.0, 0.5},
        {Modulation::QPSK, 3.0 / 4.0, 6.0, 0.75},
        {Modulation::QAM16, 1.0 / 2.0, 8.5, 1.0},
        {Modulation::QAM16, 3.0 / 4.0, 12.0, 1.5},
        {Modulation::QAM64, 2.0 / 3.0, 16.0, 2.0},
        {Modulation::QAM64, 3.0 / 4.0, 17.5, 2.25},
        {Modulation::QAM64, 5.0 / 6.0, 19.0, 2.5},
    }};
}

inline void validate(const McsTable& t, double bandwidth_hz = 240e6, std::optional<double> peak_mbps = std::nullopt)
{
    if (t.entries.empty())
        throw std::invalid_argument("MCS table is empty");
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
        const auto& e = t.entries[i];
        if (!(e.efficiency > 0.0) || !(e.code_rate > 0.0 && e.code_rate <= 1.0) || !std::isfinite(e.threshold_db))
            throw std::invalid_argument("MCS entry " + std::to_string(i) + " has invalid values");
        if (i > 0 && !(e.threshold_db > t.entries[i - 1].threshold_db))
            throw std::invalid_argument("MCS thresholds must be strictly increasing");
        if (i > 0 && !(e.efficiency > t.entries[i - 1].efficiency))
            throw std::invalid_argument("MCS efficiencies must be strictly increasing");
    }
    if (t.entries.back().modulation != Modulation::QAM64)
        throw std::invalid_argument("MCS table top entry must be 64QAM");
    if (peak_mbps && std::abs(t.entries.back().efficiency * bandwidth_hz / 1e6 - *peak_mbps) > 1e-6)
        throw std::invalid_argument("MCS table top entry does not reach the configured peak rate");
}

// Index of the highest entry whose threshold <= snr - hysteresis; -1 for outage.
inline int select_mcs(const McsTable& t, double snr, double hysteresis_db = 0.0)
{
    int best = -1;
    for (int i = 0; i < static_cast<int>(t.entries.size()); ++i)
        if (t.entries[static_cast<std::size_t>(i)].threshold_db <= snr - hysteresis_db)
            best = i;
    return best;
}

// Stateful selection: steps up only once the SNR clears the higher entry's
// threshold by the hysteresis, steps down as soon as the current entry's
// threshold is lost. An entry change therefore needs an SNR swing of at
// least the hysteresis.
class McsSelector {
public:
    explicit McsSelector(double hysteresis_db = 0.0) : h_(hysteresis_db) {}

    int update(const McsTable& t, double snr)
    {
        const int plain = select_mcs(t, snr, 0.0);
        if (plain < current_)
            current_ = plain;
        else if (plain > current_)
            current_ = std::max(current_, select_mcs(t, snr, h_));
        return current_;
    }
    int current() const { return current_; }
    void reset() { current_ = -1; }

private:
    double h_;
    int current_ = -1;
};

struct DuplexConfig {
    double dl_fraction = 0.75;
    double ul_fraction = 0.25;
};

inline void validate(const DuplexConfig& d)
{
    if (!(d.dl_fraction > 0.0) || !(d.ul_fraction > 0.0) || d.dl_fraction + d.ul_fraction > 1.0 + 1e-12)
        throw std::invalid_argument("duplex fractions must be > 0 and sum to at most 1");
}

inline double spectral_efficiency(const McsTable& t, int mcs)
{
    return mcs < 0 ? 0.0 : t.entries.at(static_cast<std::size_t>(mcs)).efficiency;
}

inline double throughput_mbps(const McsTable& t, int mcs, const DuplexConfig& d, Direction dir,
                              double bandwidth_hz = 240e6)
{
    const double frac = dir == Direction::Downlink ? d.dl_fraction : d.ul_fraction;
    return spectral_efficiency(t, mcs) * bandwidth_hz / 1e6 * frac;
}

} // namespace mmw
