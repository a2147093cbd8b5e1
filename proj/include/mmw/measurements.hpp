// SPDX-License-Identifier: Apache-2.0
//
// Channel-sounding emulation and model fitting: m-sequence generation,
// correlation-based power delay profiles, RMS delay spread, and close-in
// path loss fitting.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmw/array.hpp"
#include "mmw/channel.hpp"
#include "mmw/rng.hpp"

namespace mmw {

// Feedback taps (1-based register stages) of one primitive polynomial per
// register length, from the standard maximal-length LFSR tables.
inline const std::vector<int>& pn_taps(int order)
{
    static const std::vector<std::vector<int>> kTaps = {
        {},           {},           {2, 1},          {3, 2},     {4, 3},         {5, 3},  {6, 5},
        {7, 6},       {8, 6, 5, 4}, {9, 5},          {10, 7},    {11, 9},        {12, 6, 4, 1},
        {13, 4, 3, 1}, {14, 5, 3, 1}, {15, 14},      {16, 15, 13, 4}, {17, 14},  {18, 11}, {19, 6, 2, 1},
        {20, 17},
    };
    if (order < 2 || order > 20)
        throw std::invalid_argument("pn_sequence: order must be in [2, 20]");
    return kTaps[static_cast<std::size_t>(order)];
}

// Maximal-length sequence of 2^order - 1 chips, bit 1 -> +1, bit 0 -> -1.
// Fibonacci register seeded with all ones; the output is the last stage.
inline std::vector<int> pn_sequence(int order)
{
    const auto& taps = pn_taps(order);
    const std::size_t length = (std::size_t{1} << order) - 1;
    std::uint32_t state = (1u << order) - 1;
    std::vector<int> chips(length);
    for (std::size_t i = 0; i < length; ++i) {
        chips[i] = (state & 1u) ? 1 : -1;
        std::uint32_t fb = 0;
        for (int t : taps)
            fb ^= (state >> (order - t)) & 1u;
        state = (state >> 1) | (fb << (order - 1));
    }
    return chips;
}

struct PdpTap {
    double delay_ns = 0.0;
    double power = 0.0;
};

struct Pdp {
    std::vector<PdpTap> taps;
    double resolution_ns = 0.0;  // one chip
    double bin_spacing_ns = 0.0; // one sample
};

struct CirTap {
    double delay_ns = 0.0;
    cd amplitude{1.0, 0.0};
};

struct SounderConfig {
    double chip_rate_mcps = 100.0;
    int order = 10;
    double noise_snr_db = std::numeric_limits<double>::infinity(); // per-sample SNR; -inf = noise only
    int periods = 32;                                             // noncoherently averaged
    std::uint64_t seed = 0;
};

struct AliasingError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// PN sounder: return-to-zero chips sampled at twice the chip rate, passed
// through the tapped delay line (taps rounded to the nearest sample), white
// complex noise added, circularly correlated against the unipolar reference
// (chip + 1), whose cross-correlation with the bipolar sequence is an exact
// delta. Bins are scaled so that a tap of energy E yields E * L.
inline Pdp sound_channel(std::span<const CirTap> cir, const SounderConfig& cfg)
{
    if (!(cfg.chip_rate_mcps > 0.0))
        throw std::invalid_argument("sound_channel: chip rate must be > 0");
    if (cfg.periods < 1)
        throw std::invalid_argument("sound_channel: periods must be >= 1");
    const std::vector<int> chips = pn_sequence(cfg.order);
    const std::size_t L = chips.size();
    const std::size_t S = 2 * L;
    const double chip_ns = 1000.0 / cfg.chip_rate_mcps;
    const double sample_ns = 0.5 * chip_ns;
    const double duration_ns = static_cast<double>(L) * chip_ns;

    double energy = 0.0;
    std::vector<cd> rx(S, cd{0.0, 0.0});
    const bool signal_on = !(std::isinf(cfg.noise_snr_db) && cfg.noise_snr_db < 0);
    for (const auto& tap : cir) {
        if (!(tap.delay_ns >= 0.0))
            throw std::invalid_argument("sound_channel: tap delay must be >= 0");
        if (tap.delay_ns >= duration_ns)
            throw AliasingError("sound_channel: tap delay exceeds the sequence duration (aliasing)");
        energy += std::norm(tap.amplitude);
        if (!signal_on)
            continue;
        const auto shift = static_cast<std::size_t>(std::llround(tap.delay_ns / sample_ns)) % S;
        for (std::size_t i = 0; i < L; ++i)
            rx[(2 * i + shift) % S] += tap.amplitude * static_cast<double>(chips[i]);
    }

    double noise_var = 0.0;
    if (!signal_on)
        noise_var = 1.0;
    else if (std::isfinite(cfg.noise_snr_db))
        noise_var = energy / std::pow(10.0, cfg.noise_snr_db / 10.0);
    RngStream rng(derive_seed(cfg.seed, StreamKind::Noise));
    const double sd = std::sqrt(0.5 * noise_var);
    const double scale = static_cast<double>(L) / ((L + 1.0) * (L + 1.0));

    std::vector<double> acc(S, 0.0);
    std::vector<cd> y(S);
    const int periods = noise_var > 0.0 ? cfg.periods : 1;
    for (int p = 0; p < periods; ++p) {
        for (std::size_t n = 0; n < S; ++n)
            y[n] = noise_var > 0.0 ? rx[n] + cd{rng.normal() * sd, rng.normal() * sd} : rx[n];
        for (std::size_t k = 0; k < S; ++k) {
            cd r{0.0, 0.0};
            for (std::size_t i = 0; i < L; ++i)
                r += y[(2 * i + k) % S] * static_cast<double>(chips[i] + 1);
            acc[k] += std::norm(r) * scale;
        }
    }
    Pdp pdp;
    pdp.resolution_ns = chip_ns;
    pdp.bin_spacing_ns = sample_ns;
    pdp.taps.reserve(S);
    for (std::size_t k = 0; k < S; ++k)
        pdp.taps.push_back({static_cast<double>(k) * sample_ns, acc[k] / periods});
    return pdp;
}

inline constexpr double kDefaultSpreadThresholdDb = 25.0;

// Power-weighted RMS delay spread over taps within threshold_db of the peak.
inline double rms_delay_spread(const Pdp& p, double threshold_db = kDefaultSpreadThresholdDb)
{
    double peak = 0.0;
    for (const auto& t : p.taps) {
        if (!(t.power >= 0.0))
            throw std::invalid_argument("rms_delay_spread: negative tap power");
        peak = std::max(peak, t.power);
    }
    if (!(peak > 0.0))
        throw std::invalid_argument("rms_delay_spread: no tap above the threshold");
    const double floor = peak * std::pow(10.0, -threshold_db / 10.0);
    // Moments about the first kept delay keep the result shift-invariant.
    double origin = std::numeric_limits<double>::quiet_NaN();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (const auto& t : p.taps) {
        if (t.power < floor)
            continue;
        if (std::isnan(origin))
            origin = t.delay_ns;
        const double d = t.delay_ns - origin;
        s0 += t.power;
        s1 += t.power * d;
        s2 += t.power * d * d;
    }
    const double mean = s1 / s0;
    return std::sqrt(std::max(0.0, s2 / s0 - mean * mean));
}

// Omni PDP of a cluster set: one tap per cluster (delays sorted; coincident
// delays merged).
inline Pdp cluster_pdp(const ClusterSet& set, std::span<const double> extra_gain_db = {})
{
    std::vector<PdpTap> taps;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& c = set.clusters[i];
        double db = c.relative_power_db;
        if (i < set.blockage_loss_db.size())
            db -= set.blockage_loss_db[i];
        if (i < extra_gain_db.size())
            db += extra_gain_db[i];
        taps.push_back({c.excess_delay_ns, db_to_lin(db)});
    }
    std::sort(taps.begin(), taps.end(), [](const PdpTap& a, const PdpTap& b) { return a.delay_ns < b.delay_ns; });
    Pdp p;
    for (const auto& t : taps) {
        if (!p.taps.empty() && p.taps.back().delay_ns == t.delay_ns)
            p.taps.back().power += t.power;
        else
            p.taps.push_back(t);
    }
    return p;
}

// PDP seen through the finest-level transmit beam that captures the most
// cluster power.
inline Pdp beamformed_pdp(const ClusterSet& set, const Codebook& cb)
{
    std::vector<double> best_gain;
    double best_power = -1.0;
    for (const auto& beam : cb.finest()) {
        const CVec w = beam.weights.complex();
        std::vector<double> g;
        double total = 0.0;
        for (std::size_t i = 0; i < set.size(); ++i) {
            const auto& c = set.clusters[i];
            g.push_back(beam_gain_db(cb.geometry, w, c.aod.azimuth_deg, c.aod.elevation_deg));
            double db = c.relative_power_db + g.back();
            if (i < set.blockage_loss_db.size())
                db -= set.blockage_loss_db[i];
            total += db_to_lin(db);
        }
        if (total > best_power) {
            best_power = total;
            best_gain = std::move(g);
        }
    }
    return cluster_pdp(set, best_gain);
}

// ---------------------------------------------------------------------------
// Path loss fitting

struct PathLossSample {
    double distance_m = 1.0;
    double path_loss_db = 0.0;
    LinkType link = LinkType::LOS;
    UseCase use_case = UseCase::IndoorOffice;
    double carrier_ghz = 29.0;
};

struct PathLossFit {
    double alpha = 0.0;
    double sigma_db = 0.0;
    std::vector<double> residuals_db;
};

// Close-in model fit: alpha minimizes sum (y - alpha x)^2 with
// y = PL - FSPL(f, 1 m) and x = 10 log10(d); sigma uses n - 1.
inline PathLossFit fit_path_loss(std::span<const PathLossSample> samples)
{
    if (samples.size() < 3)
        throw std::invalid_argument("fit_path_loss: need at least 3 samples");
    bool spread = false;
    for (const auto& s : samples) {
        if (!(s.distance_m >= 1.0))
            throw std::invalid_argument("fit_path_loss: sample distance below the 1 m reference");
        if (s.distance_m != samples[0].distance_m)
            spread = true;
    }
    if (!spread)
        throw std::invalid_argument("fit_path_loss: degenerate distance spread (all distances equal)");

    double sxx = 0.0, sxy = 0.0;
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        const double x = 10.0 * std::log10(s.distance_m);
        const double y = s.path_loss_db - free_space_loss_db(s.carrier_ghz, 1.0);
        xs.push_back(x);
        ys.push_back(y);
        sxx += x * x;
        sxy += x * y;
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("fit_path_loss: degenerate distance spread");
    PathLossFit fit;
    fit.alpha = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - fit.alpha * xs[i];
        fit.residuals_db.push_back(r);
        ss += r * r;
    }
    fit.sigma_db = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return fit;
}

// Synthetic measurement campaign: log-uniform distances in [d_min, d_max],
// i.i.d. Gaussian shadowing.
inline std::vector<PathLossSample> synthetic_path_loss_samples(const PathLossParams& p, int n, std::uint64_t seed,
                                                               double d_min = 1.0, double d_max = 200.0)
{
    if (n < 1 || !(d_min >= p.d0_m) || !(d_max > d_min))
        throw std::invalid_argument("synthetic_path_loss_samples: invalid count or distance range");
    RngStream rng(derive_seed(seed, StreamKind::Synthetic));
    std::vector<PathLossSample> out;
    out.reserve(static_cast<std::size_t>(n));
    const double l0 = std::log10(d_min), l1 = std::log10(d_max);
    for (int i = 0; i < n; ++i) {
        const double d = std::pow(10.0, rng.uniform(l0, l1));
        const double x = rng.normal(0.0, p.shadow_sigma_db);
        out.push_back({d, path_loss_db(p, d, x), p.link, p.use_case, p.carrier_ghz});
    }
    return out;
}

inline void write_pdp(std::ostream& os, const Pdp& p)
{
    os << "delay_ns,power\n";
    char buf[64];
    for (const auto& t : p.taps) {
        std::snprintf(buf, sizeof buf, "%.3f,%.9g\n", t.delay_ns, t.power);
        os << buf;
    }
}

inline void write_fit(std::ostream& os, const PathLossFit& f)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "alpha,sigma_db,n\n%.6f,%.6f,%zu\n", f.alpha, f.sigma_db, f.residuals_db.size());
    os << buf;
}

} // namespace mmw
