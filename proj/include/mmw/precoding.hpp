// SPDX-License-Identifier: Apache-2.0
//
// Single-user beam-pair selection and multi-user analog precoders.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmw/array.hpp"
#include "mmw/channel.hpp"

namespace mmw {

// ---------------------------------------------------------------------------
// Beam-pair selection

struct BeamPair {
    int tx_beam = -1;
    int rx_subarray = -1;
    int rx_beam = -1;
    double gain_db = -std::numeric_limits<double>::infinity();
};

// Linear gains of every candidate toward every path.
//   tx[b][c]     gNB beam b toward path c
//   rx[s][b][c]  UE subarray s, beam b toward path c (0 when disabled)
//   power[c]     path power
struct CouplingTable {
    std::vector<double> power;
    std::vector<std::vector<double>> tx;
    std::vector<std::vector<std::vector<double>>> rx;

    double coupled(int t, int s, int r) const
    {
        const auto& gt = tx[static_cast<std::size_t>(t)];
        const auto& gr = rx[static_cast<std::size_t>(s)][static_cast<std::size_t>(r)];
        double acc = 0.0;
        for (std::size_t c = 0; c < power.size(); ++c)
            acc += power[c] * gt[c] * gr[c];
        return acc;
    }
};

// Exhaustive argmax of sum_c P_c G_tx G_rx; ties go to the lowest index tuple.
inline BeamPair select_beam_pair(const CouplingTable& table)
{
    if (table.power.empty())
        throw std::invalid_argument("select_beam_pair: empty cluster set");
    if (table.tx.empty() || table.rx.empty())
        throw std::invalid_argument("select_beam_pair: empty codebook");
    BeamPair best;
    double best_lin = -1.0;
    for (int t = 0; t < static_cast<int>(table.tx.size()); ++t)
        for (int s = 0; s < static_cast<int>(table.rx.size()); ++s)
            for (int r = 0; r < static_cast<int>(table.rx[static_cast<std::size_t>(s)].size()); ++r) {
                const double g = table.coupled(t, s, r);
                if (g > best_lin) {
                    best_lin = g;
                    best = {t, s, r, 0.0};
                }
            }
    best.gain_db = best_lin > 0.0 ? 10.0 * std::log10(best_lin) : -std::numeric_limits<double>::infinity();
    return best;
}

// Cluster-level form: cluster powers from relative power minus blockage,
// AoD in the gNB array frame, AoA in the handset body frame.
inline CouplingTable coupling_table(const ClusterSet& clusters, const Codebook& tx_cb, const UeAntennaState& ue,
                                    const UeCodebooks& rx_cbs)
{
    CouplingTable t;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const double block = c < clusters.blockage_loss_db.size() ? clusters.blockage_loss_db[c] : 0.0;
        t.power.push_back(db_to_lin(clusters.clusters[c].relative_power_db - block));
    }
    for (const auto& beam : tx_cb.finest()) {
        const CVec w = beam.weights.complex();
        std::vector<double> g;
        for (const auto& c : clusters.clusters)
            g.push_back(db_to_lin(beam_gain_db(tx_cb.geometry, w, c.aod.azimuth_deg, c.aod.elevation_deg)));
        t.tx.push_back(std::move(g));
    }
    t.rx.resize(kUeSubarrays);
    for (int s = 0; s < kUeSubarrays; ++s)
        for (int b = 0; b < static_cast<int>(rx_cbs[static_cast<std::size_t>(s)].size()); ++b) {
            std::vector<double> g;
            for (const auto& c : clusters.clusters)
                g.push_back(db_to_lin(ue_beam_gain_db(ue, rx_cbs, s, b, c.aoa.azimuth_deg, c.aoa.elevation_deg)));
            t.rx[static_cast<std::size_t>(s)].push_back(std::move(g));
        }
    return t;
}

inline BeamPair select_beam_pair(const ClusterSet& clusters, const Codebook& tx_cb, const UeAntennaState& ue,
                                 const UeCodebooks& rx_cbs)
{
    if (clusters.size() == 0)
        throw std::invalid_argument("select_beam_pair: empty cluster set");
    return select_beam_pair(coupling_table(clusters, tx_cb, ue, rx_cbs));
}

// ---------------------------------------------------------------------------
// Multi-user precoding

// Array-domain channel: sum over paths of complex gain times the array
// response toward the path's departure direction.
struct PathComponent {
    LocalAngles aod;
    cd gain;
};

inline CVec effective_channel(const ArrayGeometry& g, std::span<const PathComponent> paths)
{
    CVec h = CVec::Zero(g.size());
    for (const auto& p : paths)
        h += p.gain * array_response(g, p.aod.azimuth_deg, p.aod.elevation_deg);
    return h;
}

enum class Strategy { Steering, Zeroforcing, GeneralizedEigenvector };

struct PrecoderSet {
    std::vector<CVec> weights;
    Strategy strategy = Strategy::Steering;
};

struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_channels(std::span<const CVec> h)
{
    if (h.empty())
        throw std::invalid_argument("precoder: need at least one user");
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h[k].size() != h[0].size())
            throw std::invalid_argument("precoder: channel length mismatch");
        if (!h[k].allFinite())
            throw std::invalid_argument("precoder: non-finite channel for user " + std::to_string(k));
        if (h[k].norm() == 0.0)
            throw std::invalid_argument("precoder: zero channel for user " + std::to_string(k));
    }
}

// Orthonormal basis (n rows) of the span of the given vectors: modified
// Gram-Schmidt with one re-orthogonalization pass, skipping vectors that are
// numerically dependent on the earlier ones.
inline CMat orthonormal_basis(std::span<const CVec> vs, Eigen::Index n)
{
    CMat q(n, static_cast<Eigen::Index>(vs.size()));
    Eigen::Index rank = 0;
    for (const auto& src : vs) {
        CVec v = src;
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < rank; ++i)
                v -= q.col(i) * q.col(i).dot(v);
        const double norm = v.norm();
        if (norm > 1e-10 * src.norm())
            q.col(rank++) = v / norm;
    }
    q.conservativeResize(n, rank);
    return q;
}

} // namespace detail

inline PrecoderSet mu_steering(std::span<const CVec> h)
{
    detail::check_channels(h);
    PrecoderSet p;
    p.strategy = Strategy::Steering;
    for (const auto& hk : h)
        p.weights.push_back(hk / hk.norm());
    return p;
}

inline PrecoderSet mu_zeroforcing(std::span<const CVec> h)
{
    detail::check_channels(h);
    const std::size_t K = h.size();
    if (static_cast<Eigen::Index>(K) > h[0].size())
        throw RankDeficiencyError("zeroforcing: more users than antennas");

    // Users whose channel lies in the span of the others.
    std::vector<std::size_t> offending;
    std::vector<CMat> bases(K);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<CVec> others;
        for (std::size_t j = 0; j < K; ++j)
            if (j != k)
                others.push_back(h[j]);
        bases[k] = detail::orthonormal_basis(others, h[0].size());
        CVec r = h[k];
        for (int pass = 0; pass < 2; ++pass)
            r -= bases[k] * (bases[k].adjoint() * r);
        if (r.norm() <= 1e-10 * h[k].norm())
            offending.push_back(k);
    }
    if (!offending.empty()) {
        std::string who;
        for (std::size_t i = 0; i < offending.size(); ++i)
            who += (i ? ", " : "") + std::to_string(offending[i]);
        throw RankDeficiencyError("zeroforcing: linearly dependent channels (users " + who + ")");
    }

    PrecoderSet p;
    p.strategy = Strategy::Zeroforcing;
    for (std::size_t k = 0; k < K; ++k) {
        CVec r = h[k];
        for (int pass = 0; pass < 2; ++pass)
            r -= bases[k] * (bases[k].adjoint() * r);
        p.weights.push_back(r / r.norm());
    }
    return p;
}

// Dominant generalized eigenvector of (h_k h_k^H, noise I + sum_{j!=k} h_j h_j^H).
// With B = L L^H the problem becomes the Hermitian C = L^-1 A L^-H, whose
// dominant eigenvector y gives w = L^-H y.
inline PrecoderSet mu_gev(std::span<const CVec> h, double noise_power)
{
    detail::check_channels(h);
    if (!(noise_power > 0.0))
        throw std::invalid_argument("mu_gev: noise power must be > 0");
    const Eigen::Index N = h[0].size();
    PrecoderSet p;
    p.strategy = Strategy::GeneralizedEigenvector;
    for (std::size_t k = 0; k < h.size(); ++k) {
        CMat B = CMat::Identity(N, N) * noise_power;
        for (std::size_t j = 0; j < h.size(); ++j)
            if (j != k)
                B.noalias() += h[j] * h[j].adjoint();
        const Eigen::LLT<CMat> llt(B);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("mu_gev: interference covariance not positive definite");
        const CMat L = llt.matrixL();
        const CVec g = L.triangularView<Eigen::Lower>().solve(h[k]); // C = g g^H
        CVec y = CVec::Ones(N) / std::sqrt(static_cast<double>(N));
        double lambda = 0.0;
        for (int it = 0; it < 1000; ++it) {
            CVec next = g * g.dot(y);
            const double n = next.norm();
            if (n == 0.0) {
                next = g;
            }
            next /= next.norm();
            const double lambda_next = std::norm(g.dot(next));
            const bool done = std::abs(lambda_next - lambda) <= 1e-12 * std::abs(lambda_next);
            y = next;
            lambda = lambda_next;
            if (done)
                break;
        }
        CVec w = L.adjoint().triangularView<Eigen::Upper>().solve(y);
        w /= w.norm();
        p.weights.push_back(w);
    }
    return p;
}

// Signal-to-leakage-plus-noise ratio of weight w for user k (linear).
inline double slnr(std::span<const CVec> h, std::size_t k, const CVec& w, double noise_power)
{
    const double signal = std::norm(h[k].dot(w));
    double leak = noise_power * w.squaredNorm();
    for (std::size_t j = 0; j < h.size(); ++j)
        if (j != k)
            leak += std::norm(h[j].dot(w));
    return signal / leak;
}

inline double sum_rate(const PrecoderSet& p, std::span<const CVec> h, double noise_power)
{
    if (p.weights.size() != h.size())
        throw std::invalid_argument("sum_rate: precoder and channel counts differ");
    double rate = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double signal = std::norm(h[k].dot(p.weights[k]));
        double interference = noise_power;
        for (std::size_t j = 0; j < h.size(); ++j)
            if (j != k)
                interference += std::norm(h[k].dot(p.weights[j]));
        rate += std::log2(1.0 + signal / interference);
    }
    return rate;
}

// Phase-quantized, constant-modulus version of a precoder set (unit norm).
inline PrecoderSet quantize_precoders(const PrecoderSet& p, int bits)
{
    PrecoderSet q;
    q.strategy = p.strategy;
    for (const auto& w : p.weights) {
        CVec v = quantize_weights(w, bits).complex();
        q.weights.push_back(v / v.norm());
    }
    return q;
}

} // namespace mmw
