// SPDX-License-Identifier: Apache-2.0
//
// Trace, event-log and coverage-map writers. Output is byte-deterministic for
// equal inputs.

#pragma once

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mmw/coverage.hpp"
#include "mmw/simulation.hpp"

namespace mmw {

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_output_format(std::string_view s)
{
    if (s == "csv")
        return OutputFormat::Csv;
    if (s == "json")
        return OutputFormat::Json;
    throw std::invalid_argument("unknown output format '" + std::string(s) + "' (expected csv or json)");
}

inline constexpr const char* kTraceHeader = "t,x,y,z,gnb,txbeam,subarr,rxbeam,snr_db,fsnr_db,mcs,dl_mbps,ul_mbps,event";
inline constexpr const char* kCoverageHeader = "x,y,se_bpshz,best_gnb";

namespace detail {

inline std::string event_list(const std::vector<EventType>& events)
{
    std::string s;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i)
            s += '|';
        s += to_string(events[i]);
    }
    return s;
}

inline nlohmann::json num(double x)
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json tuple_json(const BeamTuple& t)
{
    if (!t.valid())
        return nullptr;
    return {{"gnb", t.gnb}, {"txbeam", t.tx_beam}, {"subarr", t.rx_subarray}, {"rxbeam", t.rx_beam}};
}

inline std::string tuple_text(const BeamTuple& t)
{
    if (!t.valid())
        return "-";
    return fmt::format("{}/{}/{}/{}", t.gnb, t.tx_beam, t.rx_subarray, t.rx_beam);
}

} // namespace detail

inline void write_trace(std::ostream& os, const SimResult& r, OutputFormat f = OutputFormat::Csv)
{
    if (f == OutputFormat::Csv) {
        os << kTraceHeader << '\n';
        for (const auto& row : r.rows)
            os << fmt::format("{:.3f},{:.3f},{:.3f},{:.3f},{},{},{},{},{:.2f},{:.2f},{},{:.1f},{:.1f},{}\n", row.t_s,
                              row.position.x, row.position.y, row.position.z, row.serving.gnb, row.serving.tx_beam,
                              row.serving.rx_subarray, row.serving.rx_beam, row.snr_db, row.fsnr_db, row.mcs,
                              row.dl_mbps, row.ul_mbps, detail::event_list(row.events));
        return;
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"t", row.t_s},
                        {"x", row.position.x},
                        {"y", row.position.y},
                        {"z", row.position.z},
                        {"gnb", row.serving.gnb},
                        {"txbeam", row.serving.tx_beam},
                        {"subarr", row.serving.rx_subarray},
                        {"rxbeam", row.serving.rx_beam},
                        {"snr_db", detail::num(row.snr_db)},
                        {"fsnr_db", detail::num(row.fsnr_db)},
                        {"mcs", row.mcs},
                        {"dl_mbps", row.dl_mbps},
                        {"ul_mbps", row.ul_mbps},
                        {"event", detail::event_list(row.events)}});
    os << nlohmann::json{{"gnbs", r.gnb_ids}, {"rows", rows}}.dump(1) << '\n';
}

// One event per line: time, type, serving tuple before and after (gnb/tx/sub/rx)
// and the SNRs on either side.
inline void write_events(std::ostream& os, const SimResult& r, OutputFormat f = OutputFormat::Csv)
{
    for (const auto& e : r.events) {
        if (f == OutputFormat::Json) {
            os << nlohmann::json{{"t_ms", e.t_ms},
                                 {"type", to_string(e.type)},
                                 {"from", detail::tuple_json(e.from)},
                                 {"to", detail::tuple_json(e.to)},
                                 {"snr_from_db", detail::num(e.snr_from_db)},
                                 {"snr_to_db", detail::num(e.snr_to_db)}}
                      .dump()
               << '\n';
        } else {
            os << fmt::format("{:.1f} ms {} {} -> {} snr {:.2f} -> {:.2f}\n", e.t_ms, to_string(e.type),
                              detail::tuple_text(e.from), detail::tuple_text(e.to), e.snr_from_db, e.snr_to_db);
        }
    }
}

inline void write_coverage(std::ostream& os, const CoverageMap& m, OutputFormat f = OutputFormat::Csv)
{
    if (f == OutputFormat::Csv) {
        os << kCoverageHeader << '\n';
        for (const auto& p : m.points)
            os << fmt::format("{:.3f},{:.3f},{:.2f},{}\n", p.x, p.y, p.se_bpshz, p.best_gnb);
        return;
    }
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : m.points)
        pts.push_back({{"x", p.x}, {"y", p.y}, {"se_bpshz", p.se_bpshz}, {"best_gnb", p.best_gnb}});
    os << nlohmann::json{{"nx", m.nx}, {"ny", m.ny}, {"step_m", m.step_m}, {"points", pts}}.dump(1) << '\n';
}

// Opens `path` for writing, runs `fn` on the stream and surfaces failures
// with the path in the message.
template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    fn(os);
    os.flush();
    if (!os)
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

} // namespace mmw
