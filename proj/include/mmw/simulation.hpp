// SPDX-License-Identifier: Apache-2.0
//
// Fixed-step mobility simulation: move the UE, evaluate every gNB link,
// sweep all beam tuples on schedule, tick beam management, adapt the MCS and
// log one trace row per step.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mmw/array.hpp"
#include "mmw/beammgmt.hpp"
#include "mmw/link.hpp"
#include "mmw/propagation.hpp"
#include "mmw/scenario.hpp"

namespace mmw {

// Codebooks are pure functions of their parameters and take about a second to
// design, so they are shared process-wide.
inline std::shared_ptr<const Codebook> cached_codebook(const ArrayGeometry& g, const Sector& s, int levels, int bits)
{
    using Key = std::tuple<int, int, double, double, int, double, double, double, int, int>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const Codebook>> cache;
    const Key key{g.rows, g.cols, g.spacing_wl, g.element_gain_dbi, static_cast<int>(g.pattern), g.front_to_back_db,
                  s.az_half_deg, s.el_half_deg, levels, bits};
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    ArrayGeometry plain = g;
    plain.orientation = {};
    auto cb = std::make_shared<const Codebook>(build_codebook(plain, s, levels, bits));
    cache.emplace(key, cb);
    return cb;
}

// Linear per-path gains of one gNB link at one instant.
//   power[c]      path power
//   rx(k, c)      UE tuple k = subarray * beams + beam toward path c
//   tx(b, c)      gNB finest beam b toward path c (filled on demand)
struct LinkSnapshot {
    Eigen::VectorXd power;
    CMat responses;              // N x paths, array responses at the AoDs
    Eigen::VectorXd element_tx;  // per path, linear
    Eigen::MatrixXd rx;

    bool empty() const { return power.size() == 0; }
};

// gNB side of one link: codebook in matrix form for fast evaluation.
class GnbModel {
public:
    GnbModel(const GnbConfig& cfg, std::shared_ptr<const Codebook> cb) : cfg_(cfg), cb_(std::move(cb))
    {
        const auto& beams = cb_->finest();
        wh_.resize(static_cast<Eigen::Index>(beams.size()), cfg_.array.size());
        norms_.resize(wh_.rows());
        for (std::size_t b = 0; b < beams.size(); ++b) {
            const CVec w = beams[b].weights.complex();
            wh_.row(static_cast<Eigen::Index>(b)) = w.adjoint();
            norms_[static_cast<Eigen::Index>(b)] = w.squaredNorm();
        }
    }

    const GnbConfig& config() const { return cfg_; }
    const Codebook& codebook() const { return *cb_; }
    int beams() const { return static_cast<int>(wh_.rows()); }

    // beams x paths linear gains (array factor times element gain).
    Eigen::MatrixXd tx_gains(const LinkSnapshot& s) const
    {
        Eigen::MatrixXd g = (wh_ * s.responses).cwiseAbs2();
        for (Eigen::Index b = 0; b < g.rows(); ++b)
            g.row(b) /= norms_[b];
        return g * s.element_tx.asDiagonal();
    }

    Eigen::RowVectorXd tx_gains(const LinkSnapshot& s, int beam) const
    {
        Eigen::RowVectorXd g = (wh_.row(beam) * s.responses).cwiseAbs2() / norms_[beam];
        return g.cwiseProduct(s.element_tx.transpose());
    }

private:
    GnbConfig cfg_;
    std::shared_ptr<const Codebook> cb_;
    CMat wh_;
    Eigen::VectorXd norms_;
};

// UE side: antenna state and per-subarray codebooks.
struct UeModel {
    UeAntennaState antenna;
    UeCodebooks codebooks;
    int beams_per_subarray = 0;

    static UeModel make(const UeConfig& cfg)
    {
        UeModel m;
        m.antenna = make_ue_antenna(cfg.grip, cfg.array, cfg.mask_loss_db);
        m.codebooks = build_ue_codebooks(m.antenna, cfg.array);
        m.beams_per_subarray = cfg.array.beams;
        return m;
    }
    int tuples() const { return kUeSubarrays * beams_per_subarray; }
};

inline LinkSnapshot snapshot(const GnbModel& gnb, const UeModel& ue, const LinkGains& gains, double heading_deg)
{
    std::vector<const Path*> live;
    for (const auto& p : gains.paths)
        if (p.power() > 0.0)
            live.push_back(&p);
    LinkSnapshot s;
    const auto n = static_cast<Eigen::Index>(live.size());
    const auto& g = gnb.config().array;
    s.power.resize(n);
    s.responses.resize(g.size(), n);
    s.element_tx.resize(n);
    s.rx.resize(ue.tuples(), n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const Path& p = *live[static_cast<std::size_t>(c)];
        s.power[c] = p.power();
        s.responses.col(c) = array_response(g, p.aod.azimuth_deg, p.aod.elevation_deg);
        s.element_tx[c] = db_to_lin(element_gain_db(g, p.aod.azimuth_deg, p.aod.elevation_deg));
        const LocalAngles a = body_angles(p.arrival, heading_deg);
        for (int sub = 0; sub < kUeSubarrays; ++sub)
            for (int b = 0; b < ue.beams_per_subarray; ++b)
                s.rx(sub * ue.beams_per_subarray + b, c) =
                    db_to_lin(ue_beam_gain_db(ue.antenna, ue.codebooks, sub, b, a.azimuth_deg, a.elevation_deg));
    }
    return s;
}

inline double lin_to_db(double x) { return x > 0.0 ? 10.0 * std::log10(x) : -kInf; }

// Composite beamformed gain (dB) of every (tx beam, ue tuple): sum over
// paths of P_c G_tx G_rx.
inline Eigen::MatrixXd coupling_db(const GnbModel& gnb, const LinkSnapshot& s)
{
    if (s.empty())
        return Eigen::MatrixXd::Constant(gnb.beams(), s.rx.rows(), -kInf);
    const Eigen::MatrixXd lin = gnb.tx_gains(s) * s.power.asDiagonal() * s.rx.transpose();
    return lin.unaryExpr([](double x) { return lin_to_db(x); });
}

struct TraceRow {
    double t_s = 0.0;
    Vec3 position;
    BeamTuple serving;
    double snr_db = -kInf;
    double fsnr_db = -kInf;
    int mcs = -1;
    int ul_mcs = -1;
    double dl_mbps = 0.0;
    double ul_mbps = 0.0;
    std::vector<EventType> events;
};

struct SimResult {
    std::vector<TraceRow> rows;
    std::vector<Event> events;
    std::vector<std::string> gnb_ids;
};

struct SimOptions {
    std::optional<double> timestep_ms;
    std::optional<std::uint64_t> seed;
};

inline double lowest_threshold_db(const McsTable& t) { return t.entries.front().threshold_db; }

inline LinkBudget budget_for(const Scenario& s, const GnbConfig& g)
{
    LinkBudget b = s.budget;
    b.gnb_eirp_dbm = g.max_eirp_dbm;
    return b;
}

class Simulator {
public:
    explicit Simulator(const Scenario& s, const SimOptions& opt = {})
        : s_(s),
          dt_ms_(opt.timestep_ms.value_or(s.timestep_ms)),
          seed_(opt.seed.value_or(s.seed)),
          ue_(UeModel::make(s.ue))
    {
        if (!(dt_ms_ > 0.0))
            throw std::invalid_argument("timestep must be > 0");
        const Vec3 anchor = s.ue.trajectory.waypoints().front();
        for (std::size_t i = 0; i < s.gnbs.size(); ++i) {
            const auto& g = s.gnbs[i];
            gnbs_.emplace_back(g, cached_codebook(g.array, g.sector, g.codebook_levels, g.codebook_bits));
            links_.emplace_back(s_.env, g.position, g.array.orientation, g.scatterers, s.propagation, seed_, i, anchor);
        }
    }

    SimResult run()
    {
        SimResult out;
        for (const auto& g : s_.gnbs)
            out.gnb_ids.push_back(g.id);
        BeamManager bm(s_.bm, lowest_threshold_db(s_.mcs));
        McsSelector dl(s_.mcs_hysteresis_db), ul(s_.mcs_hysteresis_db);
        const double duration_ms = s_.duration_s * 1000.0;
        const auto steps = static_cast<long>(std::floor(duration_ms / dt_ms_ + 1e-9)) + 1;
        double next_sweep_ms = 0.0, last_sweep_ms = -s_.bm.sweep_period_ms;
        double interruption_until_ms = -1.0;
        double heading = s_.ue.heading_deg.value_or(0.0);
        const int U = ue_.tuples();

        for (long k = 0; k < steps; ++k) {
            const double t_ms = static_cast<double>(k) * dt_ms_;
            const double t = t_ms / 1000.0;
            TraceRow row;
            row.t_s = t;
            row.position = s_.ue.trajectory.position_clamped(t);
            if (t < s_.ue.trajectory.duration() || !s_.ue.heading_deg)
                if (auto h = s_.ue.trajectory.heading_at(t))
                    heading = *h;

            std::vector<LinkSnapshot> snaps;
            for (std::size_t g = 0; g < gnbs_.size(); ++g) {
                const LinkGains gains = links_[g].evaluate_static(row.position, t);
                snaps.push_back(snapshot(gnbs_[g], ue_, gains, heading));
            }

            if (t_ms >= next_sweep_ms - 1e-9) {
                MeasurementReport report;
                report.t_ms = t_ms;
                for (std::size_t g = 0; g < gnbs_.size(); ++g) {
                    const Eigen::MatrixXd c = coupling_db(gnbs_[g], snaps[g]);
                    const double offset = snr_db(budget_for(s_, s_.gnbs[g]), Direction::Downlink, 0.0);
                    for (int b = 0; b < c.rows(); ++b)
                        for (int u = 0; u < U; ++u)
                            report.entries.push_back({{static_cast<int>(g), b, u / ue_.beams_per_subarray,
                                                       u % ue_.beams_per_subarray},
                                                      c(b, u) + offset});
                }
                const double elapsed = t_ms - last_sweep_ms;
                last_sweep_ms = t_ms;
                while (next_sweep_ms <= t_ms + 1e-9)
                    next_sweep_ms += s_.bm.sweep_period_ms;
                for (const auto& e : bm.tick(report, elapsed)) {
                    row.events.push_back(e.type);
                    out.events.push_back(e);
                    if ((e.type == EventType::BeamSwitch || e.type == EventType::Handover) && s_.bm.switch_cost_ms > 0.0)
                        interruption_until_ms = t_ms + s_.bm.switch_cost_ms;
                }
            }

            const LinkState& st = bm.state();
            if (st.mode == LinkMode::Connected) {
                row.serving = st.serving;
                row.fsnr_db = st.filtered_snr_db;
                const auto g = static_cast<std::size_t>(st.serving.gnb);
                const double gain = tuple_gain_db(gnbs_[g], snaps[g], st.serving);
                const LinkBudget b = budget_for(s_, s_.gnbs[g]);
                row.snr_db = snr_db(b, Direction::Downlink, gain);
                row.mcs = dl.update(s_.mcs, row.snr_db);
                row.ul_mcs = ul.update(s_.mcs, snr_db(b, Direction::Uplink, gain));
                if (t_ms >= interruption_until_ms) {
                    row.dl_mbps = throughput_mbps(s_.mcs, row.mcs, s_.duplex, Direction::Downlink, b.bandwidth_hz);
                    row.ul_mbps = throughput_mbps(s_.mcs, row.ul_mcs, s_.duplex, Direction::Uplink, b.bandwidth_hz);
                }
            } else {
                dl.reset();
                ul.reset();
            }
            out.rows.push_back(std::move(row));
        }
        return out;
    }

    double timestep_ms() const { return dt_ms_; }

private:
    double tuple_gain_db(const GnbModel& gnb, const LinkSnapshot& s, const BeamTuple& t) const
    {
        if (s.empty())
            return -kInf;
        const int u = t.rx_subarray * ue_.beams_per_subarray + t.rx_beam;
        return lin_to_db(gnb.tx_gains(s, t.tx_beam).cwiseProduct(s.power.transpose()).dot(s.rx.row(u)));
    }

    const Scenario& s_;
    double dt_ms_;
    std::uint64_t seed_;
    UeModel ue_;
    std::vector<GnbModel> gnbs_;
    std::vector<LinkChannel> links_;
};

} // namespace mmw
