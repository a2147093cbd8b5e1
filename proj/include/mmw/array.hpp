// SPDX-License-Identifier: Apache-2.0
//
// Phased-array models: planar steering vectors, n-bit phase quantization,
// hierarchical broadened beam codebooks, and the four-subarray handset with
// hand-grip blockage masks.
//
// Element (m, n) sits in row m (vertical) and column n (horizontal), flat
// index m * cols + n. Local angles are relative to the array boresight.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/geometry.hpp"

namespace mmw {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

enum class ElementPattern { Isotropic, Cosine };

struct ArrayGeometry {
    int rows = 1;
    int cols = 1;
    double spacing_wl = 0.5;
    double element_gain_dbi = 0.0;
    ElementPattern pattern = ElementPattern::Cosine;
    double front_to_back_db = 20.0; // floor of the cosine pattern below its peak
    Orientation orientation{};

    int size() const { return rows * cols; }
};

inline void validate(const ArrayGeometry& g)
{
    if (g.rows < 1 || g.cols < 1)
        throw std::invalid_argument("array needs rows >= 1 and cols >= 1");
    if (!(g.spacing_wl > 0.0))
        throw std::invalid_argument("array element spacing must be > 0");
    if (g.front_to_back_db < 0.0)
        throw std::invalid_argument("array front-to-back floor must be >= 0 dB");
}

// Response toward any local direction (front or back).
inline CVec array_response(const ArrayGeometry& g, double az_deg, double el_deg)
{
    const double az = az_deg * kDegToRad, el = el_deg * kDegToRad;
    const double kv = 2.0 * std::numbers::pi * g.spacing_wl * std::sin(el);
    const double ku = 2.0 * std::numbers::pi * g.spacing_wl * std::cos(el) * std::sin(az);
    CVec a(g.size());
    for (int m = 0; m < g.rows; ++m)
        for (int n = 0; n < g.cols; ++n)
            a[m * g.cols + n] = std::polar(1.0, m * kv + n * ku);
    return a;
}

inline CVec steering_vector(const ArrayGeometry& g, double az_deg, double el_deg)
{
    if (!(az_deg > -90.0 && az_deg < 90.0) || !(el_deg > -90.0 && el_deg < 90.0))
        throw std::domain_error("steering_vector: angles must lie in (-90, 90) degrees");
    return array_response(g, az_deg, el_deg);
}

// Weights steered to sine-space coordinates u = cos(el) sin(az), v = sin(el).
inline CVec steering_vector_uv(const ArrayGeometry& g, double u, double v)
{
    CVec a(g.size());
    const double k = 2.0 * std::numbers::pi * g.spacing_wl;
    for (int m = 0; m < g.rows; ++m)
        for (int n = 0; n < g.cols; ++n)
            a[m * g.cols + n] = std::polar(1.0, k * (m * v + n * u));
    return a;
}

struct BeamWeights {
    int bits = 4;
    std::vector<std::uint16_t> phase_index; // in [0, 2^bits)
    std::vector<bool> on;

    int levels() const { return 1 << bits; }
    int active() const { return static_cast<int>(std::count(on.begin(), on.end(), true)); }

    CVec complex() const
    {
        CVec w(static_cast<Eigen::Index>(phase_index.size()));
        const double step = 2.0 * std::numbers::pi / levels();
        for (std::size_t i = 0; i < phase_index.size(); ++i)
            w[static_cast<Eigen::Index>(i)] = on[i] ? std::polar(1.0, step * phase_index[i]) : cd{0.0, 0.0};
        return w;
    }
};

// Nearest of 2^bits uniform phase levels; amplitudes forced to unit modulus.
inline BeamWeights quantize_weights(const CVec& w, int bits)
{
    if (bits < 1 || bits > 15)
        throw std::invalid_argument("quantize_weights: bits must be in [1, 15]");
    BeamWeights q;
    q.bits = bits;
    q.phase_index.resize(static_cast<std::size_t>(w.size()));
    q.on.resize(static_cast<std::size_t>(w.size()));
    const double peak = w.size() > 0 ? w.cwiseAbs().maxCoeff() : 0.0;
    const int n = 1 << bits;
    const double step = 2.0 * std::numbers::pi / n;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        q.on[k] = std::abs(w[i]) > 1e-12 * peak;
        long idx = std::lround(std::arg(w[i]) / step);
        idx = ((idx % n) + n) % n;
        q.phase_index[k] = static_cast<std::uint16_t>(idx);
    }
    if (q.active() == 0)
        throw std::invalid_argument("quantize_weights: all weights are zero");
    return q;
}

inline double element_gain_db(const ArrayGeometry& g, double az_deg, double el_deg)
{
    if (g.pattern == ElementPattern::Isotropic)
        return g.element_gain_dbi;
    const double c = std::cos(el_deg * kDegToRad) * std::cos(az_deg * kDegToRad);
    const double floor = std::pow(10.0, -g.front_to_back_db / 10.0);
    return g.element_gain_dbi + 10.0 * std::log10(std::max(c, floor));
}

// |w^H a|^2 / |w|^2 in dB: peaks at 10 log10(N_on) for a matched beam.
inline double array_factor_db(const ArrayGeometry& g, const CVec& w, double az_deg, double el_deg)
{
    const double num = std::norm(w.dot(array_response(g, az_deg, el_deg)));
    return 10.0 * std::log10(num / w.squaredNorm());
}

inline double beam_gain_db(const ArrayGeometry& g, const CVec& w, double az_deg, double el_deg)
{
    return array_factor_db(g, w, az_deg, el_deg) + element_gain_db(g, az_deg, el_deg);
}

inline double beam_gain_db(const ArrayGeometry& g, const BeamWeights& w, double az_deg, double el_deg)
{
    return beam_gain_db(g, w.complex(), az_deg, el_deg);
}

struct Beam {
    BeamWeights weights;
    double az_deg = 0.0; // nominal pointing direction
    double el_deg = 0.0;
    double width_az_deg = 0.0; // nominal 3 dB widths at boresight
    double width_el_deg = 0.0;
};

struct Sector {
    double az_half_deg = 60.0;
    double el_half_deg = 30.0;
};

// levels.front() is the coarsest level, levels.back() the finest.
struct Codebook {
    ArrayGeometry geometry;
    Sector sector;
    std::vector<std::vector<Beam>> levels;

    const std::vector<Beam>& finest() const { return levels.back(); }
    std::size_t total_beams() const
    {
        std::size_t n = 0;
        for (const auto& l : levels)
            n += l.size();
        return n;
    }
};

// Grid of array responses for fast evaluation over many directions.
struct DirectionGrid {
    std::vector<LocalAngles> directions;
    CMat responses; // N x P

    static DirectionGrid sector(const ArrayGeometry& g, const Sector& s, double step_deg)
    {
        DirectionGrid grid;
        const int naz = static_cast<int>(std::floor(2.0 * s.az_half_deg / step_deg + 1e-9)) + 1;
        const int nel = static_cast<int>(std::floor(2.0 * s.el_half_deg / step_deg + 1e-9)) + 1;
        for (int i = 0; i < nel; ++i)
            for (int j = 0; j < naz; ++j)
                grid.directions.push_back({-s.az_half_deg + j * step_deg, -s.el_half_deg + i * step_deg});
        grid.responses.resize(g.size(), static_cast<Eigen::Index>(grid.directions.size()));
        for (std::size_t p = 0; p < grid.directions.size(); ++p)
            grid.responses.col(static_cast<Eigen::Index>(p)) =
                array_response(g, grid.directions[p].azimuth_deg, grid.directions[p].elevation_deg);
        return grid;
    }

    // Array-factor gain (dB) of each beam (rows) at each direction (cols).
    Eigen::MatrixXd array_factor_db(const std::vector<Beam>& beams) const
    {
        CMat w(static_cast<Eigen::Index>(beams.size()), responses.rows());
        Eigen::VectorXd norms(w.rows());
        for (std::size_t b = 0; b < beams.size(); ++b) {
            const CVec c = beams[b].weights.complex();
            w.row(static_cast<Eigen::Index>(b)) = c.adjoint();
            norms[static_cast<Eigen::Index>(b)] = c.squaredNorm();
        }
        const Eigen::MatrixXd power = (w * responses).cwiseAbs2();
        Eigen::MatrixXd out(power.rows(), power.cols());
        for (Eigen::Index b = 0; b < power.rows(); ++b)
            out.row(b) = (power.row(b) / norms[b]).array().log10() * 10.0;
        return out;
    }
};

struct CoverageReport {
    double level_peak_db = 0.0;
    double worst_best_db = 0.0; // min over grid of max over beams
    double margin_db() const { return level_peak_db - worst_best_db; }
};

// Array-factor coverage of one codebook level over the sector.
inline CoverageReport level_coverage(const std::vector<Beam>& level, const DirectionGrid& grid,
                                     const ArrayGeometry& g)
{
    const Eigen::MatrixXd af = grid.array_factor_db(level);
    CoverageReport r;
    r.level_peak_db = af.maxCoeff();
    for (const auto& b : level)
        r.level_peak_db = std::max(r.level_peak_db, array_factor_db(g, b.weights.complex(), b.az_deg, b.el_deg));
    r.worst_best_db = af.colwise().maxCoeff().minCoeff();
    return r;
}

namespace detail {

// One-dimensional broadened weights for n elements, centered at u = 0.
//
// The aperture is split into `split` contiguous sub-apertures steered to
// adjacent, evenly spaced offsets, with phase kept continuous across the
// sub-aperture boundaries. The offset spread is picked to make the composite
// beam best over a target interval of `split` full-aperture beamwidths, then
// each element phase is refined by coordinate ascent on the same measure:
// worst gain in the interval times its ratio to the pattern peak.
inline std::vector<cd> broadened_1d(int n, double spacing_wl, int split)
{
    if (split <= 1 || n <= 1)
        return std::vector<cd>(static_cast<std::size_t>(n), cd{1.0, 0.0});
    split = std::min(split, n);
    const double k = 2.0 * std::numbers::pi * spacing_wl;
    const double half = 0.5 * split * 0.886 / (n * spacing_wl);
    const int group = n / split;

    constexpr int kTarget = 61, kFull = 401;
    CMat target(n, kTarget), full(n, kFull);
    for (int e = 0; e < n; ++e) {
        for (int i = 0; i < kTarget; ++i)
            target(e, i) = std::polar(1.0, k * e * (-half + 2.0 * half * i / (kTarget - 1)));
        for (int i = 0; i < kFull; ++i)
            full(e, i) = std::polar(1.0, k * e * (-1.0 + 2.0 * i / (kFull - 1)));
    }
    Eigen::VectorXd phase(n);
    auto score = [&](const Eigen::VectorXd& ph) {
        Eigen::RowVectorXcd wh(n);
        for (int e = 0; e < n; ++e)
            wh[e] = std::polar(1.0, -ph[e]);
        const double worst = (wh * target).cwiseAbs2().minCoeff();
        return worst * worst / (wh * full).cwiseAbs2().maxCoeff();
    };

    double best = -1.0;
    Eigen::VectorXd trial(n);
    for (int i = 0; i <= 60; ++i) {
        const double spread = 2.0 * half * (0.2 + 0.03 * i);
        trial[0] = 0.0;
        for (int e = 1; e < n; ++e) {
            const int g = std::min(e / group, split - 1);
            trial[e] = trial[e - 1] + k * (g - 0.5 * (split - 1)) * spread / (split - 1);
        }
        const double v = score(trial);
        if (v > best) {
            best = v;
            phase = trial;
        }
    }

    constexpr int kPhaseSteps = 64;
    for (int sweep = 0; sweep < 8; ++sweep) {
        bool improved = false;
        for (int e = 1; e < n; ++e) {
            const double keep = phase[e];
            double chosen = keep;
            for (int s = 0; s < kPhaseSteps; ++s) {
                phase[e] = 2.0 * std::numbers::pi * s / kPhaseSteps;
                const double v = score(phase);
                if (v > best * (1.0 + 1e-9)) {
                    best = v;
                    chosen = phase[e];
                    improved = true;
                }
            }
            phase[e] = chosen;
        }
        if (!improved)
            break;
    }
    std::vector<cd> w(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e)
        w[static_cast<std::size_t>(e)] = std::polar(1.0, phase[e]);
    return w;
}

// Separable broadened shape for a planar array, before steering.
struct BroadenedShape {
    std::vector<cd> cols;
    std::vector<cd> rows;
};

inline BroadenedShape broadened_shape(const ArrayGeometry& g, int split_c, int split_r)
{
    return {broadened_1d(g.cols, g.spacing_wl, split_c), broadened_1d(g.rows, g.spacing_wl, split_r)};
}

inline CVec steer_shape(const ArrayGeometry& g, const BroadenedShape& shape, double u0, double v0)
{
    const double k = 2.0 * std::numbers::pi * g.spacing_wl;
    CVec w(g.size());
    for (int m = 0; m < g.rows; ++m)
        for (int n = 0; n < g.cols; ++n)
            w[m * g.cols + n] = shape.rows[static_cast<std::size_t>(m)] * shape.cols[static_cast<std::size_t>(n)] *
                                std::polar(1.0, k * (m * v0 + n * u0));
    return w;
}

// 3 dB width of a beam centered at the origin along one sine-space axis:
// distance between the outermost points of the main region whose gain stays
// within 3 dB of the pattern maximum.
inline double measure_width(const ArrayGeometry& g, const CVec& w, bool along_u)
{
    auto gain = [&](double s) {
        const double u = along_u ? s : 0.0, v = along_u ? 0.0 : s;
        return std::norm(w.dot(steering_vector_uv(g, u, v)));
    };
    constexpr int kSteps = 2000;
    std::vector<double> p(2 * kSteps + 1);
    for (int i = -kSteps; i <= kSteps; ++i)
        p[static_cast<std::size_t>(i + kSteps)] = gain(static_cast<double>(i) / kSteps);
    const double half = 0.5 * *std::max_element(p.begin(), p.end());
    // Walk outward from the origin; the beam is centered there.
    int lo = kSteps, hi = kSteps;
    while (lo > 0 && p[static_cast<std::size_t>(lo - 1)] >= half)
        --lo;
    while (hi < 2 * kSteps && p[static_cast<std::size_t>(hi + 1)] >= half)
        ++hi;
    if (p[kSteps] < half)
        return 0.0;
    return static_cast<double>(hi - lo) / kSteps;
}

inline double sine_width_to_deg(double width) { return 2.0 * std::asin(std::min(1.0, 0.5 * width)) * kRadToDeg; }

// Centers spaced at most `spacing` apart. Interior tiling keeps every center
// half a spacing inside the extent; edge tiling puts the first and last
// centers on the boundary, which suits flat-topped broadened beams.
inline std::vector<double> tile_centers(double half_extent, double spacing, bool to_edges)
{
    if (half_extent <= 0.0)
        return {0.0};
    const int n = std::max(1, static_cast<int>(std::ceil(2.0 * half_extent / spacing - 1e-9)));
    std::vector<double> c;
    if (to_edges) {
        for (int i = 0; i <= n; ++i)
            c.push_back(-half_extent + i * 2.0 * half_extent / n);
    } else {
        for (int i = 0; i < n; ++i)
            c.push_back(-half_extent + (i + 0.5) * 2.0 * half_extent / n);
    }
    return c;
}

inline std::vector<Beam> tile_level(const ArrayGeometry& g, const Sector& s, const BroadenedShape& shape,
                                    bool broadened, int bits, double width_u, double width_v, double spacing_factor)
{
    const double U = std::sin(s.az_half_deg * kDegToRad);
    const double V = std::sin(s.el_half_deg * kDegToRad);
    std::vector<Beam> beams;
    for (double v : tile_centers(V, spacing_factor * width_v, broadened)) {
        const double cos_el = std::sqrt(1.0 - v * v);
        for (double u : tile_centers(U, spacing_factor * width_u, broadened)) {
            Beam b;
            b.weights = quantize_weights(steer_shape(g, shape, u, v), bits);
            b.el_deg = std::asin(v) * kRadToDeg;
            b.az_deg = std::asin(std::clamp(u / cos_el, -1.0, 1.0)) * kRadToDeg;
            b.width_az_deg = sine_width_to_deg(width_u);
            b.width_el_deg = sine_width_to_deg(width_v);
            beams.push_back(std::move(b));
        }
    }
    return beams;
}

} // namespace detail

inline constexpr double kCoverageMarginDb = 4.0;
inline constexpr int kMinSubaperture = 4;

// Hierarchical codebook. The finest level tiles quantized steering beams over
// the sector in sine space; level l (0 = coarsest) of L splits the aperture
// into 2^(L-1-l) sub-apertures per axis. Beams start at 3 dB-width spacing,
// tightened by 10% steps until every level keeps its array-factor gain within
// kCoverageMarginDb of the level peak over a 1 degree sector grid.
inline Codebook build_codebook(const ArrayGeometry& g, const Sector& sector, int levels, int bits)
{
    validate(g);
    if (levels < 1)
        throw std::invalid_argument("build_codebook: levels must be >= 1");
    if (!(sector.az_half_deg > 0.0 && sector.az_half_deg < 90.0) ||
        !(sector.el_half_deg >= 0.0 && sector.el_half_deg < 90.0))
        throw std::invalid_argument("build_codebook: sector wider than the steerable range");

    Codebook cb;
    cb.geometry = g;
    cb.sector = sector;
    const DirectionGrid grid = DirectionGrid::sector(g, sector, 1.0);
    for (int level = 0; level < levels; ++level) {
        const int split = 1 << (levels - 1 - level);
        // Sub-apertures keep at least kMinSubaperture elements per axis.
        const int split_c = std::clamp(split, 1, std::max(1, g.cols / kMinSubaperture));
        const int split_r = std::clamp(split, 1, std::max(1, g.rows / kMinSubaperture));
        const detail::BroadenedShape shape = detail::broadened_shape(g, split_c, split_r);
        const CVec center = detail::steer_shape(g, shape, 0.0, 0.0);
        const double wu = detail::measure_width(g, center, true);
        const double wv = detail::measure_width(g, center, false);
        const bool broadened = split_c > 1 || split_r > 1;
        double factor = 1.0;
        std::vector<Beam> beams;
        for (int attempt = 0;; ++attempt) {
            beams = detail::tile_level(g, sector, shape, broadened, bits, wu, wv, factor);
            if (level_coverage(beams, grid, g).margin_db() <= kCoverageMarginDb)
                break;
            if (attempt == 15)
                throw std::runtime_error("build_codebook: could not meet the coverage margin");
            factor *= 0.9;
        }
        cb.levels.push_back(std::move(beams));
    }
    return cb;
}

// Tabular export: beam_id,level,az_deg,el_deg,width_az_deg,width_el_deg,phases.
// Phases are one hex digit per element in flat order, '-' for an element that
// is switched off.
inline void write_codebook_table(std::ostream& os, const Codebook& cb)
{
    os << "beam_id,level,az_deg,el_deg,width_az_deg,width_el_deg,phases\n";
    char buf[160];
    for (std::size_t l = 0; l < cb.levels.size(); ++l) {
        for (std::size_t b = 0; b < cb.levels[l].size(); ++b) {
            const Beam& beam = cb.levels[l][b];
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.4f,%.4f,%.4f,%.4f,", b, l, beam.az_deg, beam.el_deg,
                          beam.width_az_deg, beam.width_el_deg);
            os << buf;
            static constexpr char kHex[] = "0123456789abcdefghijklmnopqrstuv";
            for (std::size_t i = 0; i < beam.weights.phase_index.size(); ++i) {
                if (!beam.weights.on[i])
                    os << '-';
                else if (beam.weights.bits <= 5)
                    os << kHex[beam.weights.phase_index[i]];
                else
                    os << (i ? ":" : "") << beam.weights.phase_index[i];
            }
            os << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Handset model

enum class GripMode { Freespace, Landscape, Portrait };

inline std::string_view to_string(GripMode g)
{
    switch (g) {
    case GripMode::Freespace: return "Freespace";
    case GripMode::Landscape: return "Landscape";
    case GripMode::Portrait: return "Portrait";
    }
    return "?";
}

inline GripMode parse_grip_mode(std::string_view s)
{
    for (GripMode g : {GripMode::Freespace, GripMode::Landscape, GripMode::Portrait})
        if (to_string(g) == s)
            return g;
    throw std::invalid_argument("unknown grip mode '" + std::string(s) + "'");
}

// Subarray slots. Top and Long edge follow the reference handset; the other
// two mirror them on the opposite edges.
enum UeSubarrayId : int { kTopEdge = 0, kLongEdge = 1, kBottomEdge = 2, kFarLongEdge = 3 };
inline constexpr int kUeSubarrays = 4;
inline constexpr std::array<double, kUeSubarrays> kUeMountAzimuthDeg = {0.0, 90.0, 180.0, -90.0};

// Angular rectangle in the handset body frame.
struct AngularRect {
    double center_az_deg = 0.0;
    double center_el_deg = 0.0;
    double extent_az_deg = 0.0;
    double extent_el_deg = 0.0;

    bool empty() const { return extent_az_deg <= 0.0 || extent_el_deg <= 0.0; }
    bool contains(double az_deg, double el_deg) const
    {
        return !empty() && std::abs(wrap_deg(az_deg - center_az_deg)) <= 0.5 * extent_az_deg &&
               std::abs(el_deg - center_el_deg) <= 0.5 * extent_el_deg;
    }
};

inline constexpr double kLandscapeMaskAzDeg = 160.0;
inline constexpr double kLandscapeMaskElDeg = 75.0;
inline constexpr double kPortraitMaskAzDeg = 120.0;
inline constexpr double kPortraitMaskElDeg = 80.0;

struct UeArrayConfig {
    int elements = 4;
    double spacing_wl = 0.5;
    double element_gain_dbi = 5.0;
    ElementPattern pattern = ElementPattern::Cosine;
    double front_to_back_db = 20.0;
    int beams = 4;
    int bits = 4;
    double beam_span_half_deg = 45.0; // beams tile +-span around each subarray boresight
};

struct UeSubarray {
    ArrayGeometry geometry;
    double mount_az_deg = 0.0; // boresight azimuth in the body frame
};

struct UeAntennaState {
    std::array<UeSubarray, kUeSubarrays> subarrays;
    GripMode grip = GripMode::Freespace;
    double mask_loss_db = 25.0;
};

inline UeAntennaState make_ue_antenna(GripMode grip, const UeArrayConfig& cfg = {}, double mask_loss_db = 25.0)
{
    UeAntennaState ue;
    ue.grip = grip;
    ue.mask_loss_db = mask_loss_db;
    for (int i = 0; i < kUeSubarrays; ++i) {
        auto& s = ue.subarrays[static_cast<std::size_t>(i)];
        s.geometry = ArrayGeometry{1, cfg.elements, cfg.spacing_wl, cfg.element_gain_dbi, cfg.pattern,
                                   cfg.front_to_back_db, {}};
        s.mount_az_deg = kUeMountAzimuthDeg[static_cast<std::size_t>(i)];
    }
    return ue;
}

// Blocked region that applies to a given subarray under the current grip.
// Landscape: the palm covers the Top edge panel. Portrait: the fingers cover
// the Long edge, which is disabled, and shadow its direction for every panel.
inline AngularRect grip_mask(GripMode grip, int subarray)
{
    switch (grip) {
    case GripMode::Freespace: return {};
    case GripMode::Landscape:
        if (subarray == kTopEdge)
            return {kUeMountAzimuthDeg[kTopEdge], 0.0, kLandscapeMaskAzDeg, kLandscapeMaskElDeg};
        return {};
    case GripMode::Portrait:
        return {kUeMountAzimuthDeg[kLongEdge], 0.0, kPortraitMaskAzDeg, kPortraitMaskElDeg};
    }
    return {};
}

inline bool subarray_enabled(const UeAntennaState& ue, int subarray)
{
    return !(ue.grip == GripMode::Portrait && subarray == kLongEdge);
}

// Extra loss toward a body-frame direction; +inf for a disabled subarray.
inline double apply_grip_mask(const UeAntennaState& ue, int subarray, double az_deg, double el_deg)
{
    if (subarray < 0 || subarray >= kUeSubarrays)
        throw std::out_of_range("apply_grip_mask: invalid subarray id");
    if (!subarray_enabled(ue, subarray))
        return std::numeric_limits<double>::infinity();
    return grip_mask(ue.grip, subarray).contains(az_deg, el_deg) ? ue.mask_loss_db : 0.0;
}

using UeCodebooks = std::array<std::vector<Beam>, kUeSubarrays>;

inline UeCodebooks build_ue_codebooks(const UeAntennaState& ue, const UeArrayConfig& cfg = {})
{
    if (cfg.beams < 1)
        throw std::invalid_argument("UE codebook needs at least one beam per subarray");
    UeCodebooks cbs;
    const double U = std::sin(cfg.beam_span_half_deg * kDegToRad);
    for (int s = 0; s < kUeSubarrays; ++s) {
        const auto& g = ue.subarrays[static_cast<std::size_t>(s)].geometry;
        const double width = detail::measure_width(g, steering_vector_uv(g, 0.0, 0.0), true);
        for (int b = 0; b < cfg.beams; ++b) {
            const double u = -U + (b + 0.5) * 2.0 * U / cfg.beams;
            Beam beam;
            beam.weights = quantize_weights(steering_vector_uv(g, u, 0.0), cfg.bits);
            beam.az_deg = std::asin(u) * kRadToDeg;
            beam.width_az_deg = detail::sine_width_to_deg(width);
            cbs[static_cast<std::size_t>(s)].push_back(std::move(beam));
        }
    }
    return cbs;
}

// Gain of one handset beam toward a body-frame direction, grip mask included.
inline double ue_beam_gain_db(const UeAntennaState& ue, const UeCodebooks& cbs, int subarray, int beam,
                              double az_deg, double el_deg)
{
    const double mask = apply_grip_mask(ue, subarray, az_deg, el_deg);
    if (std::isinf(mask))
        return -std::numeric_limits<double>::infinity();
    const auto& s = ue.subarrays[static_cast<std::size_t>(subarray)];
    const auto& w = cbs[static_cast<std::size_t>(subarray)][static_cast<std::size_t>(beam)].weights;
    return beam_gain_db(s.geometry, w, wrap_deg(az_deg - s.mount_az_deg), el_deg) - mask;
}

struct NoCoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SubarraySelection {
    int subarray = -1;
    int beam = -1;
    double gain_db = -std::numeric_limits<double>::infinity();
};

// Best enabled (subarray, beam) toward a body-frame direction. Ties go to the
// lowest (subarray, beam).
inline SubarraySelection best_subarray(const UeAntennaState& ue, const UeCodebooks& cbs, double az_deg,
                                       double el_deg)
{
    SubarraySelection best;
    bool any = false;
    for (int s = 0; s < kUeSubarrays; ++s) {
        if (!subarray_enabled(ue, s))
            continue;
        any = true;
        for (int b = 0; b < static_cast<int>(cbs[static_cast<std::size_t>(s)].size()); ++b) {
            const double g = ue_beam_gain_db(ue, cbs, s, b, az_deg, el_deg);
            if (best.subarray < 0 || g > best.gain_db)
                best = {s, b, g};
        }
    }
    if (!any)
        throw NoCoverageError("best_subarray: every subarray is disabled");
    return best;
}

} // namespace mmw
