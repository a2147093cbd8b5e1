// SPDX-License-Identifier: Apache-2.0
//
// Composite link channel between one gNB and the UE.
//
// Paths are a direct ray plus single-bounce rays through scatterer points.
// The direct path follows the LOS close-in model; bounced paths follow the
// NLOS model evaluated at the direct T-R distance, offset by a power that
// decays linearly with excess delay. Every ray segment picks up penetration
// loss from the obstacles it crosses and a fixed loss from each blocker
// cylinder it crosses.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmw/channel.hpp"
#include "mmw/geometry.hpp"
#include "mmw/rng.hpp"

namespace mmw {

// Vertical cylinder moving along a trajectory; position is held at the
// trajectory ends outside its time span.
struct Blocker {
    std::string id;
    Trajectory path;
    double start_s = 0.0;
    double radius_m = 0.3;
    double height_m = 1.8;
    double loss_db = 20.0;

    Cylinder at(double t) const
    {
        const Vec3 p = path.position_clamped(t - start_s);
        return {p.x, p.y, radius_m, p.z, p.z + height_m};
    }
};

struct Scatterer {
    Vec3 position;
    double extra_loss_db = 0.0;
};

struct Environment {
    UseCase use_case = UseCase::IndoorOffice;
    double carrier_ghz = 28.0;
    std::vector<Material> materials;
    std::vector<Obstacle> obstacles;
    std::vector<Blocker> blockers;

    const Material& material(const std::string& id) const
    {
        for (const auto& m : materials)
            if (m.id == id)
                return m;
        throw std::out_of_range("unknown material '" + id + "'");
    }

    // Penetration loss along a segment, summed over crossed obstacles.
    double penetration_db(const Vec3& a, const Vec3& b) const
    {
        double loss = 0.0;
        for (const auto& hit : los_test(obstacles, a, b).intersections)
            loss += penetration_loss_db(material(hit.material), carrier_ghz, hit.length, hit.thickness);
        return loss;
    }

    double blocker_db(const Vec3& a, const Vec3& b, double t) const
    {
        double loss = 0.0;
        for (const auto& bl : blockers)
            if (traversal_length(bl.at(t), a, b) > 1e-12)
                loss += bl.loss_db;
        return loss;
    }
};

inline bool is_indoor(UseCase u) { return u == UseCase::IndoorOffice || u == UseCase::IndoorMall; }

struct PropagationConfig {
    bool shadowing = true;
    std::optional<double> shadow_corr_m; // default 5 m indoor, 10 m outdoor
    double delay_tail_multiplier = 1.0;
    std::optional<DelayCalibration> calibration;
    bool statistical_scatterers = true;
    int shadow_components = 256;

    double corr_m(UseCase u) const { return shadow_corr_m.value_or(is_indoor(u) ? 5.0 : 10.0); }
};

struct Path {
    bool direct = false;
    Vec3 bounce;             // scatterer position for bounced paths
    LocalAngles aod;         // at the gNB array
    Vec3 arrival;            // unit world direction from the UE toward the incoming ray
    double excess_delay_ns = 0.0;
    double gain_db = -kInf;  // includes path loss, penetration, blockers, shadowing
    double phase_rad = 0.0;

    double power() const { return std::isinf(gain_db) ? 0.0 : std::pow(10.0, gain_db / 10.0); }
};

struct LinkGains {
    std::vector<Path> paths;
    double aggregate_path_loss_db = kInf; // -10 log10 of the summed path powers
};

struct EvalOptions {
    bool blockers = true;
    bool shadowing = true;
};

// Places a scatterer on the ellipse of constant total path length so that the
// bounce leaves the gNB along `dir` with the given excess delay toward `ue`.
inline std::optional<Vec3> scatterer_on_delay_ellipse(const Vec3& gnb, const Vec3& ue, const Vec3& dir,
                                                      double excess_delay_ns)
{
    const Vec3 v = ue - gnb;
    const double d = v.norm();
    const double total = d + excess_delay_ns * 1e-9 * kSpeedOfLight;
    const double denom = 2.0 * (total - dir.dot(v));
    if (!(denom > 1e-9) || !(total > d))
        return std::nullopt;
    const double r = (total * total - d * d) / denom;
    return gnb + dir * r;
}

class LinkChannel {
public:
    LinkChannel(const Environment& env, const Vec3& gnb_position, const Orientation& gnb_orientation,
                std::vector<Scatterer> scatterers, const PropagationConfig& cfg, std::uint64_t seed,
                std::uint64_t gnb_index, const Vec3& anchor)
        : env_(&env),
          gnb_(gnb_position),
          orient_(gnb_orientation),
          scatterers_(std::move(scatterers)),
          los_(nearest_measured_params(env.use_case, LinkType::LOS, env.carrier_ghz)),
          nlos_(nearest_measured_params(env.use_case, LinkType::NLOS, env.carrier_ghz)),
          phases_(derive_seed(seed, StreamKind::Phases, gnb_index)),
          wavelength_m_(kSpeedOfLight / (env.carrier_ghz * 1e9))
    {
        cal_ = cfg.calibration.value_or(default_delay_calibration(env.use_case));
        cal_.delay_scale_ns *= cfg.delay_tail_multiplier;
        cal_.power_decay_db_per_ns /= cfg.delay_tail_multiplier;
        if (cfg.shadowing) {
            const double corr = cfg.corr_m(env.use_case);
            shadow_los_ = ShadowField(los_.shadow_sigma_db, corr, derive_seed(seed, StreamKind::Shadowing, 2 * gnb_index),
                                      cfg.shadow_components);
            shadow_nlos_ = ShadowField(nlos_.shadow_sigma_db, corr,
                                       derive_seed(seed, StreamKind::Shadowing, 2 * gnb_index + 1),
                                       cfg.shadow_components);
        }
        if (cfg.statistical_scatterers && distance(gnb_, anchor) > 0.0) {
            RngStream rng(derive_seed(seed, StreamKind::Scatterers, gnb_index));
            ClusterConfig cc;
            cc.delay_tail_multiplier = cfg.delay_tail_multiplier;
            cc.calibration = cfg.calibration;
            LosResult direct;
            direct.is_los = true;
            const ClusterSet set = sample_clusters(rng, los_, direct, cc);
            for (const auto& c : set.clusters) {
                if (c.is_los)
                    continue;
                const Vec3 dir = local_to_direction(c.aod, orient_);
                if (auto p = scatterer_on_delay_ellipse(gnb_, anchor, dir, c.excess_delay_ns))
                    scatterers_.push_back({*p, 0.0});
            }
        }
    }

    const Vec3& gnb_position() const { return gnb_; }
    const Orientation& gnb_orientation() const { return orient_; }
    const std::vector<Scatterer>& scatterers() const { return scatterers_; }
    const PathLossParams& los_params() const { return los_; }
    const PathLossParams& nlos_params() const { return nlos_; }

    // Per-path gains at UE position `ue` and time `t`. Phases are redrawn
    // whenever the UE has moved more than a quarter wavelength since the last
    // draw.
    LinkGains evaluate(const Vec3& ue, double t, const EvalOptions& opt = {})
    {
        LinkGains out = evaluate_static(ue, t, opt);
        if (!phase_anchor_ || distance(*phase_anchor_, ue) > 0.25 * wavelength_m_ ||
            phase_values_.size() != out.paths.size()) {
            phase_anchor_ = ue;
            phase_values_.resize(out.paths.size());
            for (auto& p : phase_values_)
                p = phases_.uniform(0.0, 2.0 * std::numbers::pi);
        }
        for (std::size_t i = 0; i < out.paths.size(); ++i)
            out.paths[i].phase_rad = phase_values_[i];
        return out;
    }

    // Same gains without touching the phase stream (phases are zero).
    LinkGains evaluate_static(const Vec3& ue, double t, const EvalOptions& opt = {}) const
    {
        const double d_direct = distance(gnb_, ue);
        if (d_direct == 0.0)
            throw std::invalid_argument("LinkChannel: UE coincides with the gNB");
        const double d_pl = std::max(d_direct, los_.d0_m);
        const bool shadow = opt.shadowing;
        LinkGains out;

        Path direct;
        direct.direct = true;
        direct.aod = local_angles(gnb_, ue, orient_);
        direct.arrival = (gnb_ - ue).normalized();
        direct.gain_db = -path_loss_db(los_, d_pl, shadow ? shadow_los_.sample(ue) : 0.0) -
                         env_->penetration_db(gnb_, ue) - (opt.blockers ? env_->blocker_db(gnb_, ue, t) : 0.0);
        out.paths.push_back(direct);

        const double nlos_shadow = shadow ? shadow_nlos_.sample(ue) : 0.0;
        const double pl_nlos = path_loss_db(nlos_, d_pl, nlos_shadow);
        for (const auto& s : scatterers_) {
            const double d1 = distance(gnb_, s.position), d2 = distance(s.position, ue);
            if (d1 == 0.0 || d2 == 0.0)
                continue;
            Path p;
            p.bounce = s.position;
            p.aod = local_angles(gnb_, s.position, orient_);
            p.arrival = (s.position - ue).normalized();
            p.excess_delay_ns = std::max(0.0, (d1 + d2 - d_direct) / kSpeedOfLight * 1e9);
            p.gain_db = -pl_nlos - cal_.power_decay_db_per_ns * p.excess_delay_ns - s.extra_loss_db -
                        env_->penetration_db(gnb_, s.position) - env_->penetration_db(s.position, ue);
            if (opt.blockers)
                p.gain_db -= env_->blocker_db(gnb_, s.position, t) + env_->blocker_db(s.position, ue, t);
            out.paths.push_back(p);
        }

        double total = 0.0;
        for (const auto& p : out.paths)
            total += p.power();
        out.aggregate_path_loss_db = total > 0.0 ? -10.0 * std::log10(total) : kInf;
        return out;
    }

private:
    const Environment* env_;
    Vec3 gnb_;
    Orientation orient_;
    std::vector<Scatterer> scatterers_;
    PathLossParams los_, nlos_;
    DelayCalibration cal_;
    ShadowField shadow_los_, shadow_nlos_;
    RngStream phases_;
    double wavelength_m_;
    std::optional<Vec3> phase_anchor_;
    std::vector<double> phase_values_;
};

// Convenience wrapper: per-path gains for one link at one instant.
inline LinkGains composite_link_gain(LinkChannel& link, const Vec3& ue, double t, const EvalOptions& opt = {})
{
    return link.evaluate(ue, t, opt);
}

// Angles of a world direction in the handset body frame (heading = compass
// azimuth of the body x axis, handset held level).
inline LocalAngles body_angles(const Vec3& world_dir, double heading_deg)
{
    Orientation o;
    o.azimuth_deg = std::fmod(std::fmod(heading_deg, 360.0) + 360.0, 360.0);
    if (o.azimuth_deg >= 360.0)
        o.azimuth_deg = 0.0;
    return direction_to_local(world_dir, o);
}

} // namespace mmw
