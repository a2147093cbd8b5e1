// SPDX-License-Identifier: Apache-2.0
//
// World model: positions, obstacles, trajectories, line-of-sight tests and
// local array-frame angles.
//
// World frame: x east, y north, z up (meters). Azimuths are compass-style,
// positive clockwise viewed from above. Elevations are positive upward.
// Orientation downtilt is measured from zenith, so 90 deg is a horizontal
// boresight and 110 deg points 20 deg below the horizon.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mmw {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const
    {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const { return *this / norm(); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (b - a).norm(); }

// Wraps an angle into (-180, 180].
inline double wrap_deg(double a)
{
    a = std::fmod(a, 360.0);
    if (a <= -180.0)
        a += 360.0;
    else if (a > 180.0)
        a -= 360.0;
    return a;
}

// Axis-aligned box. A zero extent along one axis describes a sheet; it is
// treated as a slab of the obstacle thickness centered on that plane.
struct Box {
    Vec3 min;
    Vec3 max;
};

// Wall whose centerline runs from (x0, y0) to (x1, y1) between z_min and
// z_max. The obstacle thickness gives the wall depth.
struct VerticalRect {
    double x0 = 0.0, y0 = 0.0;
    double x1 = 0.0, y1 = 0.0;
    double z_min = 0.0, z_max = 0.0;
};

struct Obstacle {
    std::variant<Box, VerticalRect> shape;
    std::string material;
    double thickness = 0.0;
};

// Throws std::invalid_argument on a degenerate obstacle.
inline void validate(const Obstacle& o)
{
    if (!(o.thickness > 0.0) || !std::isfinite(o.thickness))
        throw std::invalid_argument("obstacle thickness must be > 0");
    if (const auto* b = std::get_if<Box>(&o.shape)) {
        if (!b->min.finite() || !b->max.finite())
            throw std::invalid_argument("obstacle box corners must be finite");
        const Vec3 e = b->max - b->min;
        if (e.x < 0.0 || e.y < 0.0 || e.z < 0.0)
            throw std::invalid_argument("obstacle box max must be >= min on every axis");
        const int positive = (e.x > 0.0) + (e.y > 0.0) + (e.z > 0.0);
        if (positive < 2)
            throw std::invalid_argument("obstacle box needs positive extent in at least 2 dimensions");
    } else {
        const auto& w = std::get<VerticalRect>(o.shape);
        if (std::hypot(w.x1 - w.x0, w.y1 - w.y0) <= 0.0)
            throw std::invalid_argument("wall endpoints must differ");
        if (!(w.z_max > w.z_min))
            throw std::invalid_argument("wall z_max must exceed z_min");
    }
}

struct Intersection {
    std::string material;
    double length = 0.0;         // meters of the segment inside the obstacle
    std::size_t obstacle = 0;    // index into the obstacle list
    double thickness = 0.0;      // nominal obstacle thickness
};

struct LosResult {
    bool is_los = true;
    std::vector<Intersection> intersections;
};

namespace detail {

// Clips the parametric segment o + t*d, t in [t0, t1], against [lo, hi].
inline bool clip_axis(double o, double d, double lo, double hi, double& t0, double& t1)
{
    constexpr double kParallel = 1e-15;
    if (std::abs(d) < kParallel)
        return o >= lo && o <= hi;
    double tn = (lo - o) / d;
    double tf = (hi - o) / d;
    if (tn > tf)
        std::swap(tn, tf);
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    return t0 <= t1;
}

inline double slab_length(const Vec3& a, const Vec3& b, const Vec3& lo, const Vec3& hi)
{
    const Vec3 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    if (!clip_axis(a.x, d.x, lo.x, hi.x, t0, t1))
        return 0.0;
    if (!clip_axis(a.y, d.y, lo.y, hi.y, t0, t1))
        return 0.0;
    if (!clip_axis(a.z, d.z, lo.z, hi.z, t0, t1))
        return 0.0;
    return (t1 - t0) * d.norm();
}

inline double box_length(const Box& box, double thickness, const Vec3& a, const Vec3& b)
{
    Vec3 lo = box.min, hi = box.max;
    const double h = 0.5 * thickness;
    if (hi.x == lo.x) { lo.x -= h; hi.x += h; }
    if (hi.y == lo.y) { lo.y -= h; hi.y += h; }
    if (hi.z == lo.z) { lo.z -= h; hi.z += h; }
    return slab_length(a, b, lo, hi);
}

inline double wall_length(const VerticalRect& w, double thickness, const Vec3& a, const Vec3& b)
{
    // Wall-local frame: u along the centerline, n across it.
    const double dx = w.x1 - w.x0, dy = w.y1 - w.y0;
    const double len = std::hypot(dx, dy);
    const double ux = dx / len, uy = dy / len;
    auto to_local = [&](const Vec3& p) {
        const double px = p.x - w.x0, py = p.y - w.y0;
        return Vec3{px * ux + py * uy, -px * uy + py * ux, p.z};
    };
    const double h = 0.5 * thickness;
    return slab_length(to_local(a), to_local(b), {0.0, -h, w.z_min}, {len, h, w.z_max});
}

} // namespace detail

// Segment length inside one obstacle (0 if disjoint).
inline double traversal_length(const Obstacle& o, const Vec3& a, const Vec3& b)
{
    if (const auto* box = std::get_if<Box>(&o.shape))
        return detail::box_length(*box, o.thickness, a, b);
    return detail::wall_length(std::get<VerticalRect>(o.shape), o.thickness, a, b);
}

inline LosResult los_test(std::span<const Obstacle> obstacles, const Vec3& a, const Vec3& b)
{
    constexpr double kMinLength = 1e-12;
    LosResult r;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const double len = traversal_length(obstacles[i], a, b);
        if (len > kMinLength)
            r.intersections.push_back({obstacles[i].material, len, i, obstacles[i].thickness});
    }
    r.is_los = r.intersections.empty();
    return r;
}

// Vertical cylinder used for human and vehicle blockers.
struct Cylinder {
    double cx = 0.0, cy = 0.0;
    double radius = 0.0;
    double z_min = 0.0, z_max = 0.0;
};

inline double traversal_length(const Cylinder& c, const Vec3& a, const Vec3& b)
{
    const Vec3 d = b - a;
    double t0 = 0.0, t1 = 1.0;
    if (!detail::clip_axis(a.z, d.z, c.z_min, c.z_max, t0, t1))
        return 0.0;
    const double fx = a.x - c.cx, fy = a.y - c.cy;
    const double qa = d.x * d.x + d.y * d.y;
    const double qb = 2.0 * (fx * d.x + fy * d.y);
    const double qc = fx * fx + fy * fy - c.radius * c.radius;
    if (qa < 1e-30) {
        if (qc > 0.0)
            return 0.0;
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc <= 0.0)
            return 0.0;
        const double s = std::sqrt(disc);
        t0 = std::max(t0, (-qb - s) / (2.0 * qa));
        t1 = std::min(t1, (-qb + s) / (2.0 * qa));
        if (t0 >= t1)
            return 0.0;
    }
    return (t1 - t0) * d.norm();
}

struct Orientation {
    double azimuth_deg = 0.0;   // boresight compass azimuth, [0, 360)
    double downtilt_deg = 90.0; // from zenith, [0, 180]
};

inline void validate(const Orientation& o)
{
    if (!(o.azimuth_deg >= 0.0 && o.azimuth_deg < 360.0))
        throw std::invalid_argument("orientation azimuth must be in [0, 360)");
    if (!(o.downtilt_deg >= 0.0 && o.downtilt_deg <= 180.0))
        throw std::invalid_argument("orientation downtilt must be in [0, 180]");
}

// Orthonormal array frame. `right` is the direction of positive local azimuth.
struct Frame {
    Vec3 boresight;
    Vec3 right;
    Vec3 up;
};

inline Frame frame_of(const Orientation& o)
{
    const double az = o.azimuth_deg * kDegToRad;
    const double dt = o.downtilt_deg * kDegToRad;
    const Vec3 b{std::sin(az) * std::sin(dt), std::cos(az) * std::sin(dt), std::cos(dt)};
    const Vec3 r{std::cos(az), -std::sin(az), 0.0};
    return {b, r, r.cross(b)};
}

struct LocalAngles {
    double azimuth_deg = 0.0;   // (-180, 180]
    double elevation_deg = 0.0; // [-90, 90]
};

inline LocalAngles direction_to_local(const Vec3& dir, const Orientation& o)
{
    const Frame f = frame_of(o);
    const double xb = dir.dot(f.boresight), xr = dir.dot(f.right), xu = dir.dot(f.up);
    double az = std::atan2(xr, xb) * kRadToDeg;
    if (az <= -180.0)
        az = 180.0;
    const double el = std::atan2(xu, std::hypot(xb, xr)) * kRadToDeg;
    return {az, el};
}

// Direction of `to` seen from `from` in the array frame given by `o`.
inline LocalAngles local_angles(const Vec3& from, const Vec3& to, const Orientation& o)
{
    const Vec3 d = to - from;
    if (d.norm() == 0.0)
        throw std::invalid_argument("local_angles: coincident points");
    return direction_to_local(d, o);
}

// Unit world direction for local angles (inverse of direction_to_local).
inline Vec3 local_to_direction(const LocalAngles& a, const Orientation& o)
{
    const Frame f = frame_of(o);
    const double az = a.azimuth_deg * kDegToRad, el = a.elevation_deg * kDegToRad;
    return f.boresight * (std::cos(el) * std::cos(az)) + f.right * (std::cos(el) * std::sin(az)) +
           f.up * std::sin(el);
}

// Great-circle angle between two local directions, degrees.
inline double angular_separation_deg(const LocalAngles& a, const LocalAngles& b)
{
    const Orientation ref{};
    const double c = std::clamp(local_to_direction(a, ref).dot(local_to_direction(b, ref)), -1.0, 1.0);
    return std::acos(c) * kRadToDeg;
}

// Compass azimuth of a horizontal direction, [0, 360).
inline double compass_azimuth_deg(double dx, double dy)
{
    double a = std::atan2(dx, dy) * kRadToDeg;
    if (a < 0.0)
        a += 360.0;
    if (a >= 360.0)
        a -= 360.0;
    return a;
}

// Piecewise-linear path. `speeds` holds one entry (constant speed) or one per
// segment.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<Vec3> waypoints, std::vector<double> speeds)
        : waypoints_(std::move(waypoints)), speeds_(std::move(speeds))
    {
        if (waypoints_.size() < 2)
            throw std::invalid_argument("trajectory needs at least 2 waypoints");
        if (speeds_.size() != 1 && speeds_.size() != waypoints_.size() - 1)
            throw std::invalid_argument("trajectory speeds: give one value or one per segment");
        for (double s : speeds_)
            if (!(s > 0.0) || !std::isfinite(s))
                throw std::invalid_argument("trajectory speed must be > 0");
        for (const auto& w : waypoints_)
            if (!w.finite())
                throw std::invalid_argument("trajectory waypoints must be finite");
        seg_start_.reserve(waypoints_.size());
        double t = 0.0;
        seg_start_.push_back(0.0);
        for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
            t += distance(waypoints_[i], waypoints_[i + 1]) / speed(i);
            seg_start_.push_back(t);
        }
    }

    Trajectory(std::vector<Vec3> waypoints, double speed)
        : Trajectory(std::move(waypoints), std::vector<double>{speed})
    {
    }

    const std::vector<Vec3>& waypoints() const { return waypoints_; }
    double speed(std::size_t segment) const { return speeds_.size() == 1 ? speeds_[0] : speeds_[segment]; }
    double max_speed() const { return *std::max_element(speeds_.begin(), speeds_.end()); }
    double duration() const { return seg_start_.back(); }

    Vec3 position_at(double t) const
    {
        if (!(t >= 0.0 && t <= duration()))
            throw std::out_of_range("position_at: time outside trajectory duration");
        const std::size_t i = segment_at(t);
        const double span = seg_start_[i + 1] - seg_start_[i];
        if (span <= 0.0)
            return waypoints_[i + 1];
        const double f = (t - seg_start_[i]) / span;
        return waypoints_[i] + (waypoints_[i + 1] - waypoints_[i]) * f;
    }

    // Holds the end points outside [0, duration].
    Vec3 position_clamped(double t) const { return position_at(std::clamp(t, 0.0, duration())); }

    // Compass heading of travel at time t; nullopt while on a zero-length path.
    std::optional<double> heading_at(double t) const
    {
        t = std::clamp(t, 0.0, duration());
        std::size_t i = segment_at(t);
        // Search forward, then backward, for a segment with horizontal extent.
        for (std::size_t k = i; k + 1 < waypoints_.size(); ++k)
            if (auto h = segment_heading(k))
                return h;
        for (std::size_t k = i; k-- > 0;)
            if (auto h = segment_heading(k))
                return h;
        return std::nullopt;
    }

private:
    std::size_t segment_at(double t) const
    {
        auto it = std::upper_bound(seg_start_.begin(), seg_start_.end(), t);
        std::size_t i = static_cast<std::size_t>(std::distance(seg_start_.begin(), it));
        i = i == 0 ? 0 : i - 1;
        return std::min(i, waypoints_.size() - 2);
    }

    std::optional<double> segment_heading(std::size_t k) const
    {
        const Vec3 d = waypoints_[k + 1] - waypoints_[k];
        if (std::hypot(d.x, d.y) < 1e-9)
            return std::nullopt;
        return compass_azimuth_deg(d.x, d.y);
    }

    std::vector<Vec3> waypoints_;
    std::vector<double> speeds_;
    std::vector<double> seg_start_;
};

} // namespace mmw
