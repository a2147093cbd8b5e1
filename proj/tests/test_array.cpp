// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mmw/array.hpp"

using namespace mmw;
using Catch::Matchers::WithinAbs;

namespace {

ArrayGeometry panel(int rows = 8, int cols = 16, double element_gain = 0.0)
{
    ArrayGeometry g;
    g.rows = rows;
    g.cols = cols;
    g.element_gain_dbi = element_gain;
    return g;
}

const Codebook& shared_codebook()
{
    static const Codebook cb = build_codebook(panel(), Sector{60.0, 30.0}, 3, 4);
    return cb;
}

} // namespace

TEST_CASE("broadside steering is all ones")
{
    const CVec a = steering_vector(panel(), 0.0, 0.0);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        CHECK_THAT(a[i].real(), WithinAbs(1.0, 1e-15));
        CHECK_THAT(a[i].imag(), WithinAbs(0.0, 1e-15));
    }
    CHECK_THROWS_AS(steering_vector(panel(), 90.0, 0.0), std::domain_error);
}

TEST_CASE("inter-element phase approaches pi near endfire")
{
    const ArrayGeometry g = panel(1, 2);
    for (double az : {80.0, 89.0, 89.9, 89.999}) {
        const CVec a = steering_vector(g, az, 0.0);
        const double dphi = std::arg(a[1] / a[0]);
        CHECK_THAT(dphi, WithinAbs(std::numbers::pi * std::sin(az * kDegToRad), 1e-12));
    }
    const CVec a = steering_vector(g, 89.999, 0.0);
    CHECK_THAT(std::arg(a[1] / a[0]), WithinAbs(std::numbers::pi, 1e-6));
}

TEST_CASE("matched beam gain equals element count")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> az(-80, 80), el(-60, 60);
    const ArrayGeometry g = panel(4, 8);
    ArrayGeometry iso = g;
    iso.pattern = ElementPattern::Isotropic;
    for (int i = 0; i < 50; ++i) {
        const double a = az(rng), e = el(rng);
        const CVec w = steering_vector(iso, a, e);
        CHECK_THAT(array_factor_db(iso, w, a, e), WithinAbs(10.0 * std::log10(32.0), 1e-9));
    }
}

TEST_CASE("16x8 boresight gain")
{
    const ArrayGeometry g = panel(8, 16, 5.0);
    const CVec w = steering_vector(g, 0.0, 0.0);
    CHECK_THAT(beam_gain_db(g, w, 0.0, 0.0), WithinAbs(10.0 * std::log10(128.0) + 5.0, 1e-9));
    CHECK_THAT(10.0 * std::log10(128.0), WithinAbs(21.07, 0.005));
}

TEST_CASE("single element carries only the element gain")
{
    ArrayGeometry g = panel(1, 1, 7.0);
    g.pattern = ElementPattern::Isotropic;
    const CVec w = CVec::Ones(1);
    for (double az : {-170.0, -30.0, 0.0, 45.0, 120.0})
        for (double el : {-60.0, 0.0, 33.0})
            CHECK_THAT(beam_gain_db(g, w, az, el), WithinAbs(7.0, 1e-12));
}

TEST_CASE("gain never exceeds the matched peak")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> az(-180, 180), el(-90, 90), ph(0, 2 * std::numbers::pi);
    const ArrayGeometry g = panel(4, 4);
    for (int i = 0; i < 200; ++i) {
        CVec w(g.size());
        for (Eigen::Index k = 0; k < w.size(); ++k)
            w[k] = std::polar(1.0, ph(rng));
        CHECK(array_factor_db(g, w, az(rng), el(rng)) <= 10.0 * std::log10(16.0) + 1e-9);
    }
}

TEST_CASE("cosine element pattern with a floor")
{
    ArrayGeometry g = panel(1, 1, 5.0);
    CHECK_THAT(element_gain_db(g, 0.0, 0.0), WithinAbs(5.0, 1e-12));
    CHECK_THAT(element_gain_db(g, 60.0, 0.0), WithinAbs(5.0 + 10.0 * std::log10(0.5), 1e-12));
    CHECK_THAT(element_gain_db(g, 180.0, 0.0), WithinAbs(5.0 - 20.0, 1e-12));
}

TEST_CASE("phase quantization")
{
    const int bits = 4;
    const double step = 2.0 * std::numbers::pi / (1 << bits);
    CVec on_grid(5);
    for (int i = 0; i < 5; ++i)
        on_grid[i] = std::polar(1.0, step * (3 * i));
    const auto q = quantize_weights(on_grid, bits);
    for (int i = 0; i < 5; ++i)
        CHECK(q.phase_index[static_cast<std::size_t>(i)] == (3 * i) % 16);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    CVec w(256);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        w[i] = std::polar(1.0, ph(rng));
    const CVec c = quantize_weights(w, bits).complex();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        CHECK(std::abs(std::abs(c[i]) - 1.0) < 1e-15);
        CHECK(std::abs(std::arg(c[i] / w[i])) <= std::numbers::pi / (1 << bits) + 1e-12);
    }
    CHECK_THROWS_AS(quantize_weights(CVec::Zero(3), 4), std::invalid_argument);
    CHECK_THROWS_AS(quantize_weights(w, 0), std::invalid_argument);
}

TEST_CASE("quantized beams lose little and never gain")
{
    const ArrayGeometry g = panel();
    CHECK(beam_gain_db(g, quantize_weights(steering_vector(g, 0, 0), 4), 0, 0) >=
          beam_gain_db(g, steering_vector(g, 0, 0), 0, 0) - 0.2);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> az(-60, 60), el(-30, 30);
    for (int i = 0; i < 100; ++i) {
        const double a = az(rng), e = el(rng);
        const CVec ideal = steering_vector(g, a, e);
        const double gq = beam_gain_db(g, quantize_weights(ideal, 4), a, e);
        CHECK(gq <= beam_gain_db(g, ideal, a, e) + 1e-9);
        CHECK(gq >= beam_gain_db(g, ideal, a, e) - 0.2);
    }
}

namespace {

// Solid-angle weighted mean of the linear array factor over the sphere:
// `step`-degree cells in elevation and azimuth, each integrated in
// (sin el, az) with 3-point Gauss-Legendre.
double sphere_mean(const ArrayGeometry& g, const CVec& w, double step)
{
    static constexpr double kNode[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double kWeight[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double acc = 0.0, area = 0.0;
    for (double el = -90.0; el < 90.0 - 1e-9; el += step) {
        const double u0 = std::sin(el * kDegToRad), u1 = std::sin((el + step) * kDegToRad);
        for (double az = -180.0; az < 180.0 - 1e-9; az += step)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * kNode[i];
                    const double a = az + 0.5 * step * (1.0 + kNode[j]);
                    const double cell = kWeight[i] * kWeight[j] * 0.25 * (u1 - u0) * step;
                    acc += std::pow(10.0, array_factor_db(g, w, a, std::asin(u) * kRadToDeg) / 10.0) * cell;
                    area += cell;
                }
    }
    return acc / area;
}

// Closed form: sum_mn conj(w_m) w_n sinc(k |r_m - r_n|) / |w|^2.
double sphere_mean_exact(const ArrayGeometry& g, const CVec& w)
{
    const double k = 2.0 * std::numbers::pi * g.spacing_wl;
    cd acc{0.0, 0.0};
    for (int a = 0; a < g.size(); ++a)
        for (int b = 0; b < g.size(); ++b) {
            const double r = k * std::hypot(a / g.cols - b / g.cols, a % g.cols - b % g.cols);
            acc += std::conj(w[a]) * w[b] * (r == 0.0 ? 1.0 : std::sin(r) / r);
        }
    return acc.real() / w.squaredNorm();
}

} // namespace

TEST_CASE("linear array factor averages to one over the sphere")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ph(0, 2 * std::numbers::pi);
    for (int n : {2, 4, 8}) {
        const ArrayGeometry g = panel(1, n);
        for (int trial = 0; trial < 4; ++trial) {
            CVec w(g.size());
            for (Eigen::Index k = 0; k < w.size(); ++k)
                w[k] = std::polar(1.0, trial == 0 ? 0.0 : ph(rng));
            const double m = sphere_mean(g, w, 2.0);
            CHECK(m <= 1.0 + 1e-6);
            CHECK_THAT(m, WithinAbs(1.0, 1e-6));
        }
    }
}

TEST_CASE("planar array factor sphere mean matches the closed form")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ph(0, 2 * std::numbers::pi);
    const ArrayGeometry g = panel(4, 8);
    for (int trial = 0; trial < 4; ++trial) {
        CVec w(g.size());
        for (Eigen::Index k = 0; k < w.size(); ++k)
            w[k] = std::polar(1.0, trial == 0 ? 0.0 : ph(rng));
        CHECK_THAT(sphere_mean(g, w, 2.0), WithinAbs(sphere_mean_exact(g, w), 1e-6));
    }
}

TEST_CASE("codebook structure")
{
    const Codebook& cb = shared_codebook();
    REQUIRE(cb.levels.size() == 3);
    const auto& finest = cb.finest();
    CHECK(finest.size() >= 64);
    CHECK(finest.size() <= 256);
    CHECK(cb.levels[0].size() < cb.levels[1].size());
    CHECK(cb.levels[1].size() < finest.size());
    for (const auto& level : cb.levels)
        for (const auto& beam : level) {
            CHECK(beam.weights.bits == 4);
            CHECK(beam.weights.phase_index.size() == 128);
            for (auto p : beam.weights.phase_index)
                CHECK(p < 16);
        }
    const DirectionGrid grid = DirectionGrid::sector(cb.geometry, cb.sector, 1.0);
    const double coarse_peak = level_coverage(cb.levels.front(), grid, cb.geometry).level_peak_db;
    const double fine_peak = level_coverage(finest, grid, cb.geometry).level_peak_db;
    CHECK(coarse_peak < fine_peak);
    for (const auto& level : cb.levels)
        CHECK(level_coverage(level, grid, cb.geometry).margin_db() <= 4.0);
}

TEST_CASE("codebook rejects bad input")
{
    CHECK_THROWS_AS(build_codebook(panel(), Sector{95.0, 30.0}, 1, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_codebook(panel(), Sector{60.0, 30.0}, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_codebook(panel(0, 16), Sector{60.0, 30.0}, 1, 4), std::invalid_argument);
}

TEST_CASE("grip masks")
{
    const auto free = make_ue_antenna(GripMode::Freespace);
    for (int s = 0; s < kUeSubarrays; ++s)
        for (double az = -180.0; az < 180.0; az += 15.0)
            CHECK(apply_grip_mask(free, s, az, 10.0) == 0.0);

    const auto land = make_ue_antenna(GripMode::Landscape, {}, 25.0);
    CHECK(apply_grip_mask(land, kTopEdge, 0.0, 0.0) == 25.0);
    CHECK(apply_grip_mask(land, kTopEdge, 79.0, 37.0) == 25.0);
    CHECK(apply_grip_mask(land, kTopEdge, 81.0, 0.0) == 0.0);
    CHECK(apply_grip_mask(land, kLongEdge, 0.0, 0.0) == 0.0);

    const auto port = make_ue_antenna(GripMode::Portrait);
    for (double az = -180.0; az < 180.0; az += 30.0)
        CHECK(std::isinf(apply_grip_mask(port, kLongEdge, az, 0.0)));
    CHECK_FALSE(subarray_enabled(port, kLongEdge));
    CHECK_THROWS_AS(apply_grip_mask(port, 4, 0.0, 0.0), std::out_of_range);
}

TEST_CASE("subarray selection")
{
    const auto free = make_ue_antenna(GripMode::Freespace);
    const auto cbs = build_ue_codebooks(free);
    CHECK(best_subarray(free, cbs, 0.0, 0.0).subarray == kTopEdge);
    CHECK(best_subarray(free, cbs, 90.0, 0.0).subarray == kLongEdge);
    CHECK(best_subarray(free, cbs, 180.0, 0.0).subarray == kBottomEdge);

    const auto land = make_ue_antenna(GripMode::Landscape);
    CHECK(best_subarray(land, build_ue_codebooks(land), 60.0, 0.0).subarray == kLongEdge);

    // One broadside beam per subarray: 45 degrees sits symmetrically between
    // the Top and Long edge panels.
    UeArrayConfig one;
    one.beams = 1;
    const auto sym = build_ue_codebooks(free, one);
    const auto pick = best_subarray(free, sym, 45.0, 0.0);
    CHECK(ue_beam_gain_db(free, sym, 0, 0, 45.0, 0.0) == ue_beam_gain_db(free, sym, 1, 0, 45.0, 0.0));
    CHECK(pick.subarray == 0);
}

TEST_CASE("grip never improves the best subarray")
{
    const auto free = make_ue_antenna(GripMode::Freespace);
    const auto cbs = build_ue_codebooks(free);
    for (GripMode grip : {GripMode::Landscape, GripMode::Portrait}) {
        const auto held = make_ue_antenna(grip);
        for (double az = -180.0; az < 180.0; az += 7.0)
            for (double el = -60.0; el <= 60.0; el += 20.0)
                CHECK(best_subarray(held, cbs, az, el).gain_db <= best_subarray(free, cbs, az, el).gain_db + 1e-12);
    }
}
