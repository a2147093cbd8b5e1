// SPDX-License-Identifier: Apache-2.0
//
// Scenario files: YAML with strict key checking. Every field that is left
// out and filled with a default is recorded in Scenario::defaults_applied.
// The schema is documented in README.md.

#pragma once

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmw/array.hpp"
#include "mmw/beammgmt.hpp"
#include "mmw/channel.hpp"
#include "mmw/geometry.hpp"
#include "mmw/link.hpp"
#include "mmw/propagation.hpp"

namespace mmw {

struct ValidationError : std::runtime_error {
    ValidationError(const std::string& field, const std::string& rule)
        : std::runtime_error(field + ": " + rule), field_(field)
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct GnbConfig {
    std::string id;
    Vec3 position;
    ArrayGeometry array{8, 16, 0.5, 0.0, ElementPattern::Cosine, 20.0, {}};
    int codebook_levels = 3;
    int codebook_bits = 4;
    Sector sector{};
    double max_eirp_dbm = 55.0;
    std::vector<Scatterer> scatterers;
};

struct UeConfig {
    Trajectory trajectory;
    GripMode grip = GripMode::Freespace;
    std::optional<double> heading_deg; // used while the UE is not moving
    UeArrayConfig array{};
    double mask_loss_db = 25.0;
};

struct Corridor {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    bool contains(double x, double y) const
    {
        return x >= std::min(x0, x1) - 1e-9 && x <= std::max(x0, x1) + 1e-9 && y >= std::min(y0, y1) - 1e-9 &&
               y <= std::max(y0, y1) + 1e-9;
    }
};

struct CoverageConfig {
    std::optional<Corridor> region; // defaults to the world bounds
    double z = 1.5;
    double step_m = 1.0;
    std::vector<Corridor> corridors;
};

struct WorldBounds {
    Vec3 min{-1e4, -1e4, -1e3};
    Vec3 max{1e4, 1e4, 1e3};
    bool contains(const Vec3& p) const
    {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
    }
};

struct Scenario {
    std::string name;
    Environment env;
    WorldBounds bounds;
    std::vector<GnbConfig> gnbs;
    UeConfig ue;
    LinkBudget budget;
    McsTable mcs = default_mcs_table();
    DuplexConfig duplex;
    double mcs_hysteresis_db = 0.5;
    BmConfig bm;
    PropagationConfig propagation;
    CoverageConfig coverage;
    double timestep_ms = 10.0;
    double duration_s = 0.0;
    std::uint64_t seed = 1;
    std::vector<std::string> defaults_applied;
};

namespace detail {

class YamlReader {
public:
    explicit YamlReader(std::vector<std::string>& defaults) : defaults_(&defaults) {}

    static std::string join(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }

    void expect_map(const YAML::Node& n, const std::string& path) const
    {
        if (!n.IsMap())
            throw ValidationError(path.empty() ? "<root>" : path, "must be a mapping");
    }

    void allow(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> keys) const
    {
        expect_map(n, path);
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!ok.count(key))
                throw ValidationError(join(path, key), "unknown key");
        }
    }

    template <class T>
    T as(const YAML::Node& n, const std::string& field) const
    {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ValidationError(field, std::string("must be a ") + type_name<T>());
        }
    }

    template <class T>
    T req(const YAML::Node& n, const std::string& path, const std::string& key) const
    {
        if (!n[key])
            throw ValidationError(join(path, key), "required field missing");
        return as<T>(n[key], join(path, key));
    }

    template <class T>
    T opt(const YAML::Node& n, const std::string& path, const std::string& key, const T& fallback) const
    {
        if (!n[key]) {
            defaults_->push_back(join(path, key));
            return fallback;
        }
        return as<T>(n[key], join(path, key));
    }

    Vec3 vec3(const YAML::Node& n, const std::string& field) const
    {
        if (!n.IsSequence() || n.size() != 3)
            throw ValidationError(field, "must be a list of 3 numbers");
        Vec3 v{as<double>(n[0], field), as<double>(n[1], field), as<double>(n[2], field)};
        if (!v.finite())
            throw ValidationError(field, "must be finite");
        return v;
    }

    std::vector<double> numbers(const YAML::Node& n, const std::string& field, std::size_t count) const
    {
        if (!n.IsSequence() || n.size() != count)
            throw ValidationError(field, "must be a list of " + std::to_string(count) + " numbers");
        std::vector<double> out;
        for (const auto& x : n)
            out.push_back(as<double>(x, field));
        return out;
    }

    void defaulted(const std::string& field) const { defaults_->push_back(field); }

private:
    template <class T>
    static const char* type_name()
    {
        if constexpr (std::is_same_v<T, bool>)
            return "boolean";
        else if constexpr (std::is_integral_v<T>)
            return "integer";
        else if constexpr (std::is_floating_point_v<T>)
            return "number";
        else
            return "string";
    }

    std::vector<std::string>* defaults_;
};

inline void check(bool ok, const std::string& field, const std::string& rule)
{
    if (!ok)
        throw ValidationError(field, rule);
}

inline Material parse_material(const YamlReader& r, const YAML::Node& n, const std::string& p)
{
    r.allow(n, p,
            {"id", "base_loss_db", "loss_slope_db_per_ghz", "ref_freq_ghz", "notch_depth_db", "notch_period_ghz",
             "notch_width_ghz", "opaque"});
    Material m;
    m.id = r.req<std::string>(n, p, "id");
    const bool opaque = r.opt<bool>(n, p, "opaque", false);
    m.base_loss_db = opaque ? kInf : r.req<double>(n, p, "base_loss_db");
    m.loss_slope_db_per_ghz = r.opt<double>(n, p, "loss_slope_db_per_ghz", 0.0);
    m.ref_freq_ghz = r.opt<double>(n, p, "ref_freq_ghz", 28.0);
    m.notch_depth_db = r.opt<double>(n, p, "notch_depth_db", 0.0);
    m.notch_period_ghz = r.opt<double>(n, p, "notch_period_ghz", 0.0);
    m.notch_width_ghz = r.opt<double>(n, p, "notch_width_ghz", 0.0);
    try {
        validate(m);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(p, e.what());
    }
    return m;
}

inline Obstacle parse_obstacle(const YamlReader& r, const YAML::Node& n, const std::string& p)
{
    r.expect_map(n, p);
    const auto type = r.req<std::string>(n, p, "type");
    Obstacle o;
    if (type == "box") {
        r.allow(n, p, {"type", "min", "max", "material", "thickness_m"});
        o.shape = Box{r.vec3(n["min"], YamlReader::join(p, "min")), r.vec3(n["max"], YamlReader::join(p, "max"))};
    } else if (type == "wall") {
        r.allow(n, p, {"type", "from", "to", "z", "material", "thickness_m"});
        const auto a = r.numbers(n["from"], YamlReader::join(p, "from"), 2);
        const auto b = r.numbers(n["to"], YamlReader::join(p, "to"), 2);
        const auto z = r.numbers(n["z"], YamlReader::join(p, "z"), 2);
        o.shape = VerticalRect{a[0], a[1], b[0], b[1], z[0], z[1]};
    } else {
        throw ValidationError(YamlReader::join(p, "type"), "must be 'box' or 'wall'");
    }
    o.material = r.req<std::string>(n, p, "material");
    o.thickness = r.opt<double>(n, p, "thickness_m", 0.2);
    try {
        validate(o);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(p, e.what());
    }
    return o;
}

inline Trajectory parse_trajectory(const YamlReader& r, const YAML::Node& n, const std::string& p)
{
    r.allow(n, p, {"waypoints", "speed_mps"});
    const auto& wp = n["waypoints"];
    check(wp && wp.IsSequence() && wp.size() >= 1, YamlReader::join(p, "waypoints"),
          "required list of at least one [x, y, z] point");
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < wp.size(); ++i)
        pts.push_back(r.vec3(wp[i], YamlReader::join(p, "waypoints[" + std::to_string(i) + "]")));
    if (pts.size() == 1)
        pts.push_back(pts[0]); // stationary
    std::vector<double> speeds;
    const auto sp = n["speed_mps"];
    if (!sp) {
        r.defaulted(YamlReader::join(p, "speed_mps"));
        speeds = {1.0};
    } else if (sp.IsSequence()) {
        for (const auto& s : sp)
            speeds.push_back(r.as<double>(s, YamlReader::join(p, "speed_mps")));
    } else {
        speeds = {r.as<double>(sp, YamlReader::join(p, "speed_mps"))};
    }
    try {
        return Trajectory(pts, speeds);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(p, e.what());
    }
}

inline ElementPattern parse_pattern(const YamlReader& r, const YAML::Node& n, const std::string& p,
                                    ElementPattern fallback)
{
    const auto s = r.opt<std::string>(n, p, "element_pattern", fallback == ElementPattern::Cosine ? "cosine" : "isotropic");
    if (s == "cosine")
        return ElementPattern::Cosine;
    if (s == "isotropic")
        return ElementPattern::Isotropic;
    throw ValidationError(YamlReader::join(p, "element_pattern"), "must be 'cosine' or 'isotropic'");
}

} // namespace detail

inline Scenario parse_scenario(const YAML::Node& root)
{
    using detail::check;
    using detail::YamlReader;
    Scenario s;
    YamlReader r(s.defaults_applied);
    r.allow(root, "",
            {"name", "use_case", "carrier_ghz", "timestep_ms", "duration_s", "seed", "world", "materials",
             "obstacles", "gnbs", "ue", "blockers", "link", "beam_management", "channel", "coverage"});

    s.name = r.opt<std::string>(root, "", "name", "unnamed");
    try {
        s.env.use_case = parse_use_case(r.req<std::string>(root, "", "use_case"));
    } catch (const std::invalid_argument& e) {
        throw ValidationError("use_case", e.what());
    }
    s.env.carrier_ghz = r.opt<double>(root, "", "carrier_ghz", 28.0);
    check(s.env.carrier_ghz > 0.0, "carrier_ghz", "must be > 0");
    s.budget.carrier_ghz = s.env.carrier_ghz;
    s.timestep_ms = r.opt<double>(root, "", "timestep_ms", 10.0);
    check(s.timestep_ms > 0.0, "timestep_ms", "must be > 0");
    s.seed = r.opt<std::uint64_t>(root, "", "seed", 1);

    if (const auto w = root["world"]) {
        r.allow(w, "world", {"min", "max"});
        s.bounds.min = r.vec3(w["min"], "world.min");
        s.bounds.max = r.vec3(w["max"], "world.max");
        check(s.bounds.min.x < s.bounds.max.x && s.bounds.min.y < s.bounds.max.y && s.bounds.min.z < s.bounds.max.z,
              "world", "min must be below max on every axis");
    } else {
        r.defaulted("world");
    }

    if (const auto m = root["materials"]) {
        check(m.IsSequence(), "materials", "must be a list");
        for (std::size_t i = 0; i < m.size(); ++i) {
            auto mat = detail::parse_material(r, m[i], "materials[" + std::to_string(i) + "]");
            for (const auto& other : s.env.materials)
                check(other.id != mat.id, "materials[" + std::to_string(i) + "].id", "duplicate id '" + mat.id + "'");
            s.env.materials.push_back(std::move(mat));
        }
    }
    if (const auto o = root["obstacles"]) {
        check(o.IsSequence(), "obstacles", "must be a list");
        for (std::size_t i = 0; i < o.size(); ++i) {
            const std::string p = "obstacles[" + std::to_string(i) + "]";
            auto obs = detail::parse_obstacle(r, o[i], p);
            bool known = false;
            for (const auto& m : s.env.materials)
                known = known || m.id == obs.material;
            check(known, p + ".material", "undefined material id '" + obs.material + "'");
            s.env.obstacles.push_back(std::move(obs));
        }
    }

    const auto g = root["gnbs"];
    check(g && g.IsSequence() && g.size() >= 1, "gnbs", "at least one gnb is required");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string p = "gnbs[" + std::to_string(i) + "]";
        r.allow(g[i], p,
                {"id", "position", "azimuth_deg", "downtilt_deg", "array", "codebook", "max_eirp_dbm", "scatterers"});
        GnbConfig gc;
        gc.id = r.opt<std::string>(g[i], p, "id", "gnb" + std::to_string(i));
        for (const auto& other : s.gnbs)
            check(other.id != gc.id, p + ".id", "duplicate id '" + gc.id + "'");
        gc.position = r.vec3(g[i]["position"], p + ".position");
        gc.array.orientation.azimuth_deg = r.opt<double>(g[i], p, "azimuth_deg", 0.0);
        gc.array.orientation.downtilt_deg = r.opt<double>(g[i], p, "downtilt_deg", 90.0);
        try {
            validate(gc.array.orientation);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(p, e.what());
        }
        if (const auto a = g[i]["array"]) {
            const std::string ap = p + ".array";
            r.allow(a, ap, {"rows", "cols", "spacing_wl", "element_gain_dbi", "element_pattern", "front_to_back_db"});
            gc.array.rows = r.opt<int>(a, ap, "rows", 8);
            gc.array.cols = r.opt<int>(a, ap, "cols", 16);
            gc.array.spacing_wl = r.opt<double>(a, ap, "spacing_wl", 0.5);
            gc.array.element_gain_dbi = r.opt<double>(a, ap, "element_gain_dbi", 0.0);
            gc.array.pattern = detail::parse_pattern(r, a, ap, ElementPattern::Cosine);
            gc.array.front_to_back_db = r.opt<double>(a, ap, "front_to_back_db", 20.0);
            try {
                validate(gc.array);
            } catch (const std::invalid_argument& e) {
                throw ValidationError(ap, e.what());
            }
        } else {
            r.defaulted(p + ".array");
        }
        if (const auto c = g[i]["codebook"]) {
            const std::string cp = p + ".codebook";
            r.allow(c, cp, {"levels", "bits", "sector_az_deg", "sector_el_deg"});
            gc.codebook_levels = r.opt<int>(c, cp, "levels", 3);
            gc.codebook_bits = r.opt<int>(c, cp, "bits", 4);
            gc.sector.az_half_deg = r.opt<double>(c, cp, "sector_az_deg", 60.0);
            gc.sector.el_half_deg = r.opt<double>(c, cp, "sector_el_deg", 30.0);
            check(gc.codebook_levels >= 1, cp + ".levels", "must be >= 1");
            check(gc.codebook_bits >= 1 && gc.codebook_bits <= 15, cp + ".bits", "must be in [1, 15]");
            check(gc.sector.az_half_deg > 0.0 && gc.sector.az_half_deg < 90.0, cp + ".sector_az_deg",
                  "must be in (0, 90)");
            check(gc.sector.el_half_deg >= 0.0 && gc.sector.el_half_deg < 90.0, cp + ".sector_el_deg",
                  "must be in [0, 90)");
        } else {
            r.defaulted(p + ".codebook");
        }
        gc.max_eirp_dbm = r.opt<double>(g[i], p, "max_eirp_dbm", 55.0);
        if (const auto sc = g[i]["scatterers"]) {
            check(sc.IsSequence(), p + ".scatterers", "must be a list");
            for (std::size_t k = 0; k < sc.size(); ++k) {
                const std::string sp = p + ".scatterers[" + std::to_string(k) + "]";
                r.allow(sc[k], sp, {"position", "extra_loss_db"});
                Scatterer x;
                x.position = r.vec3(sc[k]["position"], sp + ".position");
                x.extra_loss_db = r.opt<double>(sc[k], sp, "extra_loss_db", 0.0);
                check(x.extra_loss_db >= 0.0, sp + ".extra_loss_db", "must be >= 0");
                gc.scatterers.push_back(x);
            }
        }
        check(s.bounds.contains(gc.position), p + ".position", "outside the world bounds");
        s.gnbs.push_back(std::move(gc));
    }

    const auto u = root["ue"];
    check(u && u.IsMap(), "ue", "required mapping");
    r.allow(u, "ue", {"trajectory", "grip", "heading_deg", "array", "mask_loss_db"});
    check(static_cast<bool>(u["trajectory"]), "ue.trajectory", "required field missing");
    s.ue.trajectory = detail::parse_trajectory(r, u["trajectory"], "ue.trajectory");
    for (std::size_t i = 0; i < s.ue.trajectory.waypoints().size(); ++i)
        check(s.bounds.contains(s.ue.trajectory.waypoints()[i]), "ue.trajectory.waypoints[" + std::to_string(i) + "]",
              "outside the world bounds");
    try {
        s.ue.grip = parse_grip_mode(r.opt<std::string>(u, "ue", "grip", "Freespace"));
    } catch (const std::invalid_argument& e) {
        throw ValidationError("ue.grip", e.what());
    }
    if (u["heading_deg"])
        s.ue.heading_deg = r.as<double>(u["heading_deg"], "ue.heading_deg");
    s.ue.mask_loss_db = r.opt<double>(u, "ue", "mask_loss_db", 25.0);
    check(s.ue.mask_loss_db >= 0.0, "ue.mask_loss_db", "must be >= 0");
    if (const auto a = u["array"]) {
        r.allow(a, "ue.array",
                {"elements", "spacing_wl", "element_gain_dbi", "element_pattern", "front_to_back_db", "beams", "bits",
                 "beam_span_deg"});
        auto& c = s.ue.array;
        c.elements = r.opt<int>(a, "ue.array", "elements", 4);
        c.spacing_wl = r.opt<double>(a, "ue.array", "spacing_wl", 0.5);
        c.element_gain_dbi = r.opt<double>(a, "ue.array", "element_gain_dbi", 5.0);
        c.pattern = detail::parse_pattern(r, a, "ue.array", ElementPattern::Cosine);
        c.front_to_back_db = r.opt<double>(a, "ue.array", "front_to_back_db", 20.0);
        c.beams = r.opt<int>(a, "ue.array", "beams", 4);
        c.bits = r.opt<int>(a, "ue.array", "bits", 4);
        c.beam_span_half_deg = r.opt<double>(a, "ue.array", "beam_span_deg", 45.0);
        check(c.elements >= 1, "ue.array.elements", "must be >= 1");
        check(c.spacing_wl > 0.0, "ue.array.spacing_wl", "must be > 0");
        check(c.beams >= 1, "ue.array.beams", "must be >= 1");
        check(c.bits >= 1 && c.bits <= 15, "ue.array.bits", "must be in [1, 15]");
        check(c.beam_span_half_deg > 0.0 && c.beam_span_half_deg < 90.0, "ue.array.beam_span_deg", "must be in (0, 90)");
    } else {
        r.defaulted("ue.array");
    }

    if (const auto b = root["blockers"]) {
        check(b.IsSequence(), "blockers", "must be a list");
        for (std::size_t i = 0; i < b.size(); ++i) {
            const std::string p = "blockers[" + std::to_string(i) + "]";
            r.allow(b[i], p, {"id", "trajectory", "start_s", "radius_m", "height_m", "loss_db"});
            Blocker bl;
            bl.id = r.opt<std::string>(b[i], p, "id", "blocker" + std::to_string(i));
            check(static_cast<bool>(b[i]["trajectory"]), p + ".trajectory", "required field missing");
            bl.path = detail::parse_trajectory(r, b[i]["trajectory"], p + ".trajectory");
            bl.start_s = r.opt<double>(b[i], p, "start_s", 0.0);
            bl.radius_m = r.opt<double>(b[i], p, "radius_m", 0.3);
            bl.height_m = r.opt<double>(b[i], p, "height_m", 1.8);
            bl.loss_db = r.opt<double>(b[i], p, "loss_db", 20.0);
            check(bl.radius_m > 0.0 && bl.height_m > 0.0, p, "radius_m and height_m must be > 0");
            check(bl.loss_db >= 0.0, p + ".loss_db", "must be >= 0");
            s.env.blockers.push_back(std::move(bl));
        }
    }

    if (const auto l = root["link"]) {
        r.allow(l, "link",
                {"noise_figure_db", "ue_eirp_dbm", "bandwidth_mhz", "dynamic_range_db", "dl_fraction", "ul_fraction",
                 "mcs_hysteresis_db", "mcs_table", "peak_mbps"});
        s.budget.noise_figure_db = r.opt<double>(l, "link", "noise_figure_db", 7.0);
        s.budget.ue_eirp_dbm = r.opt<double>(l, "link", "ue_eirp_dbm", 30.0);
        s.budget.bandwidth_hz = r.opt<double>(l, "link", "bandwidth_mhz", 240.0) * 1e6;
        s.budget.dynamic_range_db = r.opt<double>(l, "link", "dynamic_range_db", 19.0);
        s.duplex.dl_fraction = r.opt<double>(l, "link", "dl_fraction", 0.75);
        s.duplex.ul_fraction = r.opt<double>(l, "link", "ul_fraction", 0.25);
        s.mcs_hysteresis_db = r.opt<double>(l, "link", "mcs_hysteresis_db", 0.5);
        check(s.budget.bandwidth_hz > 0.0, "link.bandwidth_mhz", "must be > 0");
        check(s.mcs_hysteresis_db >= 0.0, "link.mcs_hysteresis_db", "must be >= 0");
        if (const auto t = l["mcs_table"]) {
            check(t.IsSequence(), "link.mcs_table", "must be a list");
            s.mcs.entries.clear();
            for (std::size_t i = 0; i < t.size(); ++i) {
                const std::string p = "link.mcs_table[" + std::to_string(i) + "]";
                r.allow(t[i], p, {"modulation", "code_rate", "threshold_db", "efficiency"});
                McsEntry e;
                try {
                    e.modulation = parse_modulation(r.req<std::string>(t[i], p, "modulation"));
                } catch (const std::invalid_argument& ex) {
                    throw ValidationError(p + ".modulation", ex.what());
                }
                e.code_rate = r.req<double>(t[i], p, "code_rate");
                e.threshold_db = r.req<double>(t[i], p, "threshold_db");
                e.efficiency = r.req<double>(t[i], p, "efficiency");
                s.mcs.entries.push_back(e);
            }
        } else {
            r.defaulted("link.mcs_table");
        }
        std::optional<double> peak;
        if (l["peak_mbps"])
            peak = r.as<double>(l["peak_mbps"], "link.peak_mbps");
        try {
            validate(s.mcs, s.budget.bandwidth_hz, peak);
        } catch (const std::invalid_argument& e) {
            throw ValidationError("link.mcs_table", e.what());
        }
    } else {
        r.defaulted("link");
    }
    try {
        validate(s.duplex);
    } catch (const std::invalid_argument& e) {
        throw ValidationError("link", e.what());
    }

    if (const auto b = root["beam_management"]) {
        const std::string p = "beam_management";
        r.allow(b, p,
                {"handover_hysteresis_db", "dwell_ms", "rlf_offset_db", "rlf_timer_ms", "sweep_period_ms",
                 "filter_coefficient", "switch_margin_db", "switch_cost_ms", "measurement_time_us"});
        s.bm.handover_hysteresis_db = r.opt<double>(b, p, "handover_hysteresis_db", 3.0);
        s.bm.dwell_ms = r.opt<double>(b, p, "dwell_ms", 100.0);
        s.bm.rlf_offset_db = r.opt<double>(b, p, "rlf_offset_db", -2.0);
        s.bm.rlf_timer_ms = r.opt<double>(b, p, "rlf_timer_ms", 200.0);
        s.bm.sweep_period_ms = r.opt<double>(b, p, "sweep_period_ms", 50.0);
        s.bm.filter_coefficient = r.opt<double>(b, p, "filter_coefficient", 0.5);
        s.bm.switch_margin_db = r.opt<double>(b, p, "switch_margin_db", 1.0);
        s.bm.switch_cost_ms = r.opt<double>(b, p, "switch_cost_ms", 0.0);
        s.bm.measurement_time_us = r.opt<double>(b, p, "measurement_time_us", 10.0);
    } else {
        r.defaulted("beam_management");
    }
    try {
        validate(s.bm);
    } catch (const std::invalid_argument& e) {
        throw ValidationError("beam_management", e.what());
    }

    if (const auto c = root["channel"]) {
        const std::string p = "channel";
        r.allow(c, p,
                {"shadowing", "shadow_corr_m", "delay_tail_multiplier", "statistical_scatterers", "delay_scale_ns",
                 "power_decay_db_per_ns"});
        s.propagation.shadowing = r.opt<bool>(c, p, "shadowing", true);
        if (c["shadow_corr_m"]) {
            s.propagation.shadow_corr_m = r.as<double>(c["shadow_corr_m"], "channel.shadow_corr_m");
            check(*s.propagation.shadow_corr_m > 0.0, "channel.shadow_corr_m", "must be > 0");
        } else {
            r.defaulted("channel.shadow_corr_m");
        }
        s.propagation.delay_tail_multiplier = r.opt<double>(c, p, "delay_tail_multiplier", 1.0);
        check(s.propagation.delay_tail_multiplier > 0.0, "channel.delay_tail_multiplier", "must be > 0");
        s.propagation.statistical_scatterers = r.opt<bool>(c, p, "statistical_scatterers", true);
        if (c["delay_scale_ns"] || c["power_decay_db_per_ns"]) {
            DelayCalibration cal = default_delay_calibration(s.env.use_case);
            cal.delay_scale_ns = r.opt<double>(c, p, "delay_scale_ns", cal.delay_scale_ns);
            cal.power_decay_db_per_ns = r.opt<double>(c, p, "power_decay_db_per_ns", cal.power_decay_db_per_ns);
            check(cal.delay_scale_ns > 0.0 && cal.power_decay_db_per_ns >= 0.0, "channel",
                  "delay_scale_ns must be > 0 and power_decay_db_per_ns >= 0");
            s.propagation.calibration = cal;
        }
    } else {
        r.defaulted("channel");
    }

    if (const auto c = root["coverage"]) {
        r.allow(c, "coverage", {"region", "z", "step_m", "corridors"});
        auto rect = [&](const YAML::Node& n, const std::string& field) {
            const auto v = r.numbers(n, field, 4);
            check(v[0] < v[2] && v[1] < v[3], field, "must be [x0, y0, x1, y1] with x0 < x1 and y0 < y1");
            return Corridor{v[0], v[1], v[2], v[3]};
        };
        if (c["region"])
            s.coverage.region = rect(c["region"], "coverage.region");
        s.coverage.z = r.opt<double>(c, "coverage", "z", 1.5);
        s.coverage.step_m = r.opt<double>(c, "coverage", "step_m", 1.0);
        check(s.coverage.step_m > 0.0, "coverage.step_m", "must be > 0");
        if (const auto k = c["corridors"]) {
            check(k.IsSequence(), "coverage.corridors", "must be a list");
            for (std::size_t i = 0; i < k.size(); ++i)
                s.coverage.corridors.push_back(rect(k[i], "coverage.corridors[" + std::to_string(i) + "]"));
        }
    }

    const double traj = s.ue.trajectory.duration();
    if (root["duration_s"]) {
        s.duration_s = r.as<double>(root["duration_s"], "duration_s");
    } else {
        check(traj > 0.0, "duration_s", "required for a stationary UE");
        s.duration_s = traj;
        r.defaulted("duration_s");
    }
    check(s.duration_s > 0.0, "duration_s", "must be > 0");
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
    } catch (const YAML::ParserException& e) {
        throw ValidationError(path.string(), std::string("YAML syntax error: ") + e.what());
    }
    return parse_scenario(root);
}

inline Scenario load_scenario_text(const std::string& text)
{
    try {
        return parse_scenario(YAML::Load(text));
    } catch (const YAML::ParserException& e) {
        throw ValidationError("<text>", std::string("YAML syntax error: ") + e.what());
    }
}

#ifdef MMW_SCENARIO_DIR
inline constexpr const char* kScenarioDir = MMW_SCENARIO_DIR;
#else
inline constexpr const char* kScenarioDir = "scenarios";
#endif

// Resolves a bundled scenario name ("fig6a") or returns the path unchanged.
inline std::filesystem::path resolve_scenario(const std::string& name_or_path)
{
    std::filesystem::path p(name_or_path);
    if (std::filesystem::exists(p))
        return p;
    std::filesystem::path bundled = std::filesystem::path(kScenarioDir) / (name_or_path + ".yaml");
    if (std::filesystem::exists(bundled))
        return bundled;
    return p;
}

} // namespace mmw
