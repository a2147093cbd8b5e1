// SPDX-License-Identifier: Apache-2.0
//
// Coverage map: best downlink spectral efficiency per grid point over all
// gNBs, beams and UE subarrays, with shadowing at its median and blockers
// removed.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "mmw/link.hpp"
#include "mmw/simulation.hpp"

namespace mmw {

struct CoveragePoint {
    double x = 0.0;
    double y = 0.0;
    double se_bpshz = 0.0;
    int best_gnb = -1; // -1 in outage
    double snr_db = -kInf;
};

struct CoverageMap {
    int nx = 0;
    int ny = 0;
    double step_m = 1.0;
    std::vector<CoveragePoint> points; // row-major, x fastest

    const CoveragePoint& at(int ix, int iy) const { return points[static_cast<std::size_t>(iy * nx + ix)]; }
};

inline std::vector<double> grid_axis(double lo, double hi, double step)
{
    std::vector<double> v;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i)
        v.push_back(lo + static_cast<double>(i) * step);
    return v;
}

inline CoverageMap coverage_map(const Scenario& s, std::optional<double> step_m = std::nullopt,
                                unsigned threads = 0)
{
    const double step = step_m.value_or(s.coverage.step_m);
    if (!(step > 0.0))
        throw std::invalid_argument("coverage: grid step must be > 0");
    const Corridor region = s.coverage.region.value_or(
        Corridor{s.bounds.min.x, s.bounds.min.y, s.bounds.max.x, s.bounds.max.y});
    const auto xs = grid_axis(region.x0, region.x1, step);
    const auto ys = grid_axis(region.y0, region.y1, step);
    if (xs.size() * ys.size() > 50'000'000)
        throw std::invalid_argument("coverage: grid too large; declare coverage.region or a larger step");

    PropagationConfig prop = s.propagation;
    prop.shadowing = false;
    Environment env = s.env;
    env.blockers.clear();
    const UeModel ue = UeModel::make(s.ue);
    const Vec3 anchor = s.ue.trajectory.waypoints().front();
    std::vector<GnbModel> gnbs;
    std::vector<LinkChannel> links;
    for (std::size_t i = 0; i < s.gnbs.size(); ++i) {
        const auto& g = s.gnbs[i];
        gnbs.emplace_back(g, cached_codebook(g.array, g.sector, g.codebook_levels, g.codebook_bits));
        links.emplace_back(env, g.position, g.array.orientation, g.scatterers, prop, s.seed, i, anchor);
    }
    const double heading = s.ue.heading_deg.value_or(0.0);

    CoverageMap map;
    map.nx = static_cast<int>(xs.size());
    map.ny = static_cast<int>(ys.size());
    map.step_m = step;
    map.points.resize(xs.size() * ys.size());

    auto eval = [&](std::size_t idx) {
        CoveragePoint& p = map.points[idx];
        p.x = xs[idx % xs.size()];
        p.y = ys[idx / xs.size()];
        const Vec3 pos{p.x, p.y, s.coverage.z};
        double best_snr = -kInf;
        int best = -1;
        for (std::size_t g = 0; g < gnbs.size(); ++g) {
            if (distance(pos, s.gnbs[g].position) == 0.0)
                continue;
            const LinkGains gains = links[g].evaluate_static(pos, 0.0, {false, false});
            const double c = coupling_db(gnbs[g], snapshot(gnbs[g], ue, gains, heading)).maxCoeff();
            const double snr = snr_db(budget_for(s, s.gnbs[g]), Direction::Downlink, c);
            if (snr > best_snr) {
                best_snr = snr;
                best = static_cast<int>(g);
            }
        }
        const int mcs = select_mcs(s.mcs, best_snr);
        p.snr_db = best_snr;
        p.se_bpshz = spectral_efficiency(s.mcs, mcs);
        p.best_gnb = mcs < 0 ? -1 : best;
    };

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i)
        pool.emplace_back([&] {
            for (std::size_t idx = next++; idx < map.points.size(); idx = next++)
                eval(idx);
        });
    for (auto& t : pool)
        t.join();
    return map;
}

} // namespace mmw
