// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "mmw/measurements.hpp"

using namespace mmw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::size_t peak_bin(const Pdp& p)
{
    std::size_t k = 0;
    for (std::size_t i = 1; i < p.taps.size(); ++i)
        if (p.taps[i].power > p.taps[k].power)
            k = i;
    return k;
}

double total_power(const Pdp& p)
{
    double s = 0.0;
    for (const auto& t : p.taps)
        s += t.power;
    return s;
}

SounderConfig sounder(int order = 10)
{
    SounderConfig c;
    c.order = order;
    return c;
}

} // namespace

TEST_CASE("m-sequence structure")
{
    const auto s3 = pn_sequence(3);
    REQUIRE(s3.size() == 7);
    CHECK(std::accumulate(s3.begin(), s3.end(), 0) == 1);
    for (int order : {2, 5, 7, 10, 11, 13}) {
        const auto s = pn_sequence(order);
        const std::size_t L = (std::size_t{1} << order) - 1;
        REQUIRE(s.size() == L);
        CHECK(std::accumulate(s.begin(), s.end(), 0) == 1);
        // Two-valued circular autocorrelation.
        for (std::size_t m = 0; m < L; ++m) {
            long r = 0;
            for (std::size_t i = 0; i < L; ++i)
                r += s[i] * s[(i + m) % L];
            CHECK(r == (m == 0 ? static_cast<long>(L) : -1));
        }
    }
    CHECK(pn_sequence(10).size() == 1023);
    CHECK_THROWS_AS(pn_sequence(1), std::invalid_argument);
    CHECK_THROWS_AS(pn_sequence(21), std::invalid_argument);
}

TEST_CASE("single tap sounds as a delta")
{
    const std::vector<CirTap> cir{{0.0, {1.0, 0.0}}};
    const auto p = sound_channel(cir, sounder());
    const double L = 1023.0;
    REQUIRE(p.taps.size() == 2046);
    CHECK(p.resolution_ns == 10.0);
    CHECK(p.bin_spacing_ns == 5.0);
    CHECK(peak_bin(p) == 0);
    CHECK_THAT(p.taps[0].power, WithinRel(L, 1e-9));
    for (std::size_t k = 1; k < p.taps.size(); ++k)
        CHECK(p.taps[k].power <= p.taps[0].power / L);
}

TEST_CASE("two taps land ten chips apart")
{
    const std::vector<CirTap> cir{{0.0, {1.0, 0.0}}, {100.0, {0.0, 1.0}}};
    const auto p = sound_channel(cir, sounder());
    std::vector<std::size_t> bins;
    for (std::size_t k = 0; k < p.taps.size(); ++k)
        if (p.taps[k].power > 0.5 * 1023.0)
            bins.push_back(k);
    REQUIRE(bins.size() == 2);
    CHECK(bins[1] - bins[0] == 20);
    CHECK_THAT(rms_delay_spread(p), WithinAbs(50.0, 1e-9));
}

TEST_CASE("sounded energy scales with the sequence length")
{
    const std::vector<CirTap> cir{{0.0, {0.8, 0.1}}, {35.0, {-0.3, 0.2}}, {240.0, {0.05, -0.4}}};
    double e = 0.0;
    for (const auto& t : cir)
        e += std::norm(t.amplitude);
    for (int order : {7, 10}) {
        const auto p = sound_channel(cir, sounder(order));
        const double L = static_cast<double>((1 << order) - 1);
        CHECK_THAT(total_power(p), WithinRel(e * L, 1e-6));
    }
}

TEST_CASE("noise-only sounding is flat")
{
    auto c = sounder();
    c.noise_snr_db = -std::numeric_limits<double>::infinity();
    c.seed = 4;
    const auto p = sound_channel(std::span<const CirTap>{}, c);
    std::vector<double> pw;
    for (const auto& t : p.taps)
        pw.push_back(t.power);
    std::nth_element(pw.begin(), pw.begin() + static_cast<long>(pw.size() / 2), pw.end());
    const double median = pw[pw.size() / 2];
    REQUIRE(median > 0.0);
    for (const auto& t : p.taps)
        CHECK(t.power <= 3.0 * median);
}

TEST_CASE("noisy sounding keeps the peak")
{
    auto c = sounder();
    c.noise_snr_db = 0.0;
    c.seed = 9;
    const std::vector<CirTap> cir{{50.0, {1.0, 0.0}}};
    const auto p = sound_channel(cir, c);
    CHECK(peak_bin(p) == 10);
    const auto q = sound_channel(cir, c);
    for (std::size_t k = 0; k < p.taps.size(); ++k)
        CHECK(p.taps[k].power == q.taps[k].power);
}

TEST_CASE("sounder rejects aliasing and bad input")
{
    auto c = sounder(3); // 7 chips of 10 ns
    const std::vector<CirTap> late{{70.0, {1.0, 0.0}}};
    CHECK_THROWS_AS(sound_channel(late, c), AliasingError);
    const std::vector<CirTap> ok{{65.0, {1.0, 0.0}}};
    CHECK_NOTHROW(sound_channel(ok, c));
    const std::vector<CirTap> neg{{-1.0, {1.0, 0.0}}};
    CHECK_THROWS_AS(sound_channel(neg, c), std::invalid_argument);
    c.chip_rate_mcps = 0.0;
    CHECK_THROWS_AS(sound_channel(ok, c), std::invalid_argument);
}

TEST_CASE("RMS delay spread")
{
    CHECK(rms_delay_spread(Pdp{{{12.0, 3.0}}, 0, 0}) == 0.0);
    CHECK_THAT(rms_delay_spread(Pdp{{{0.0, 1.0}, {80.0, 1.0}}, 0, 0}), WithinAbs(40.0, 1e-12));
    // Powers 1 and 3 at 0 and 40 ns: mean 30, variance 300.
    CHECK_THAT(rms_delay_spread(Pdp{{{0.0, 1.0}, {40.0, 3.0}}, 0, 0}), WithinAbs(std::sqrt(300.0), 1e-12));
    // 30 dB down is outside the default 25 dB window, 20 dB down is inside.
    CHECK(rms_delay_spread(Pdp{{{0.0, 1.0}, {500.0, 1e-3}}, 0, 0}) == 0.0);
    CHECK(rms_delay_spread(Pdp{{{0.0, 1.0}, {500.0, 1e-2}}, 0, 0}) > 0.0);
    CHECK_THROWS_AS(rms_delay_spread(Pdp{}), std::invalid_argument);
    CHECK_THROWS_AS(rms_delay_spread(Pdp{{{0.0, -1.0}}, 0, 0}), std::invalid_argument);

    RngStream rng(derive_seed(5, StreamKind::Synthetic));
    for (int trial = 0; trial < 200; ++trial) {
        Pdp p;
        for (int i = 0; i < 6; ++i)
            p.taps.push_back({rng.uniform(0.0, 400.0), rng.exponential(1.0)});
        std::sort(p.taps.begin(), p.taps.end(), [](auto& a, auto& b) { return a.delay_ns < b.delay_ns; });
        Pdp shifted = p;
        for (auto& t : shifted.taps)
            t.delay_ns += 1234.5;
        CHECK_THAT(rms_delay_spread(shifted), WithinAbs(rms_delay_spread(p), 1e-9));
        Pdp scaled = p;
        for (auto& t : scaled.taps)
            t.power *= 17.0;
        CHECK_THAT(rms_delay_spread(scaled), WithinAbs(rms_delay_spread(p), 1e-9));
    }
}

TEST_CASE("sounded spread matches the true spread")
{
    const std::vector<CirTap> cir{{0.0, {1.0, 0.0}}, {30.0, {0.0, 0.7}}, {90.0, {0.4, 0.0}}};
    Pdp truth;
    for (const auto& t : cir)
        truth.taps.push_back({t.delay_ns, std::norm(t.amplitude)});
    CHECK_THAT(rms_delay_spread(sound_channel(cir, sounder())), WithinAbs(rms_delay_spread(truth), 1e-9));
}

TEST_CASE("cluster PDP")
{
    ClusterSet s;
    s.clusters = {{{}, {}, 20.0, -3.0, false}, {{}, {}, 0.0, 0.0, true}, {{}, {}, 20.0, -3.0, false}};
    const auto p = cluster_pdp(s);
    REQUIRE(p.taps.size() == 2);
    CHECK(p.taps[0].delay_ns == 0.0);
    CHECK_THAT(p.taps[1].power, WithinAbs(2.0 * db_to_lin(-3.0), 1e-12));
    s.blockage_loss_db = {0.0, 0.0, kInf};
    CHECK_THAT(cluster_pdp(s).taps[1].power, WithinAbs(db_to_lin(-3.0), 1e-12));
    const std::vector<double> gain{0.0, 10.0, 0.0};
    CHECK_THAT(cluster_pdp(s, gain).taps[0].power, WithinAbs(10.0, 1e-12));
}

TEST_CASE("beam filtering spread behavior")
{
    // A uniform gain on every cluster leaves the spread unchanged.
    ClusterSet s;
    s.clusters = {{{0.0, 0.0}, {}, 0.0, 0.0, false}, {{30.0, 0.0}, {}, 60.0, -6.0, false}};
    const std::vector<double> flat{9.0, 9.0};
    CHECK_THAT(rms_delay_spread(cluster_pdp(s, flat)), WithinAbs(rms_delay_spread(cluster_pdp(s)), 1e-9));
    // Suppressing the late cluster collapses it.
    const std::vector<double> early{20.0, -30.0};
    CHECK(rms_delay_spread(cluster_pdp(s, early)) < rms_delay_spread(cluster_pdp(s)));
    // Favoring the weak late cluster raises it: a single beam can widen the
    // spread when it points at the later path.
    const std::vector<double> late{-3.0, 3.0};
    CHECK(rms_delay_spread(cluster_pdp(s, late)) > rms_delay_spread(cluster_pdp(s)));
}

TEST_CASE("close-in fit recovers the exponent")
{
    const auto p = measured_params(UseCase::IndoorOffice, LinkType::NLOS, 29.0);
    auto clean = p;
    clean.shadow_sigma_db = 0.0;
    const auto s0 = synthetic_path_loss_samples(clean, 50, 1);
    const auto f0 = fit_path_loss(s0);
    CHECK_THAT(f0.alpha, WithinAbs(3.46, 1e-9));
    CHECK(f0.sigma_db < 1e-9);
    CHECK(f0.residuals_db.size() == 50);

    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const auto f = fit_path_loss(synthetic_path_loss_samples(p, 500, seed));
        CHECK_THAT(f.alpha, WithinAbs(3.46, 0.15));
        CHECK(f.sigma_db >= 7.5);
        CHECK(f.sigma_db <= 9.1);
    }

    // Exact through two distinct distances.
    std::vector<PathLossSample> two;
    for (double d : {10.0, 10.0, 100.0})
        two.push_back({d, path_loss_db(clean, d, 0.0), LinkType::NLOS, UseCase::IndoorOffice, 29.0});
    CHECK_THAT(fit_path_loss(two).alpha, WithinAbs(3.46, 1e-9));
}

TEST_CASE("close-in fit over every measured set")
{
    for (const auto& m : kMeasuredPathLoss) {
        auto p = measured_params(m.use_case, m.link, m.carrier_ghz);
        p.shadow_sigma_db = 0.0;
        CHECK_THAT(fit_path_loss(synthetic_path_loss_samples(p, 20, 3)).alpha, WithinAbs(m.ple, 1e-9));
    }
}

TEST_CASE("fit rejects degenerate input")
{
    std::vector<PathLossSample> same(5, PathLossSample{20.0, 90.0});
    CHECK_THROWS_AS(fit_path_loss(same), std::invalid_argument);
    CHECK_THROWS_AS(fit_path_loss(std::span<const PathLossSample>(same.data(), 2)), std::invalid_argument);
    std::vector<PathLossSample> near{{0.5, 60.0}, {2.0, 70.0}, {3.0, 75.0}};
    CHECK_THROWS_AS(fit_path_loss(near), std::invalid_argument);
    CHECK_THROWS_AS(synthetic_path_loss_samples(PathLossParams{}, 0, 1), std::invalid_argument);
}

TEST_CASE("CSV writers")
{
    std::ostringstream a, b;
    write_pdp(a, Pdp{{{0.0, 1.0}, {5.0, 0.5}}, 10.0, 5.0});
    CHECK(a.str() == "delay_ns,power\n0.000,1\n5.000,0.5\n");
    write_fit(b, PathLossFit{3.46, 8.31, {0.0, 1.0, -1.0}});
    CHECK(b.str() == "alpha,sigma_db,n\n3.460000,8.310000,3\n");
}
