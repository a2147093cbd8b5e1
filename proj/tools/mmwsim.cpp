// SPDX-License-Identifier: Apache-2.0
//
// mmwsim: command-line driver.
//   mmwsim simulate <scenario> [--events FILE]
//   mmwsim coverage <scenario> [--step M]
//   mmwsim fit (--input FILE --carrier GHZ | --use-case U --link L --carrier GHZ)
//   mmwsim codebook [<scenario> --gnb I | --rows R --cols C ...]
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmw/mmw.hpp"

namespace {

struct Global {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::optional<double> timestep_ms;
};

template <class Fn>
void emit(const std::string& out, Fn&& fn)
{
    if (out.empty() || out == "-") {
        fn(std::cout);
        std::cout.flush();
    } else {
        mmw::write_file(out, fn);
    }
}

mmw::Scenario load(const std::string& name, const Global& g)
{
    const auto path = mmw::resolve_scenario(name);
    mmw::Scenario s = mmw::load_scenario(path);
    if (g.seed)
        s.seed = *g.seed;
    for (const auto& d : s.defaults_applied)
        fmt::print(stderr, "default applied: {}\n", d);
    return s;
}

std::vector<mmw::PathLossSample> read_samples(const std::string& path, double carrier_ghz)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::vector<mmw::PathLossSample> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || (lineno == 1 && !std::isdigit(static_cast<unsigned char>(line[0]))))
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        mmw::PathLossSample s;
        if (!(ss >> s.distance_m >> s.path_loss_db))
            throw mmw::ValidationError(path + ":" + std::to_string(lineno), "expected 'distance_m,path_loss_db'");
        s.carrier_ghz = carrier_ghz;
        out.push_back(s);
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deterministic millimeter-wave link and mobility simulator"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--seed", g.seed, "Master seed (overrides the scenario)");
    app.add_option("--out", g.out, "Output file (default: stdout)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--timestep", g.timestep_ms, "Simulation timestep in ms")->check(CLI::PositiveNumber);
    app.fallthrough();

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write the trace");
    std::string scenario;
    std::string events_path;
    sim->add_option("scenario", scenario, "Scenario file or bundled name")->required();
    sim->add_option("--events", events_path, "Also write the event log here");

    auto* cov = app.add_subcommand("coverage", "Compute the coverage map of a scenario");
    std::optional<double> step;
    cov->add_option("scenario", scenario, "Scenario file or bundled name")->required();
    cov->add_option("--step", step, "Grid step in m (default: scenario coverage.step_m)")->check(CLI::PositiveNumber);

    auto* fit = app.add_subcommand("fit", "Fit the close-in path loss model");
    std::string input, use_case = "IndoorOffice", link = "LOS";
    double carrier = 29.0;
    int samples = 500;
    fit->add_option("--input", input, "CSV of distance_m,path_loss_db (default: synthetic samples)");
    fit->add_option("--use-case", use_case, "Use case for synthetic samples");
    fit->add_option("--link", link, "LOS or NLOS for synthetic samples");
    fit->add_option("--carrier", carrier, "Carrier in GHz")->check(CLI::PositiveNumber);
    fit->add_option("--samples", samples, "Synthetic sample count")->check(CLI::PositiveNumber);

    auto* cbk = app.add_subcommand("codebook", "Export a gNB beam codebook table");
    std::string cb_scenario;
    int gnb_index = 0, rows = 8, cols = 16, levels = 3, bits = 4;
    double sector_az = 60.0, sector_el = 30.0;
    cbk->add_option("scenario", cb_scenario, "Take the array and codebook settings from this scenario");
    cbk->add_option("--gnb", gnb_index, "gNB index within the scenario");
    cbk->add_option("--rows", rows)->check(CLI::PositiveNumber);
    cbk->add_option("--cols", cols)->check(CLI::PositiveNumber);
    cbk->add_option("--levels", levels)->check(CLI::PositiveNumber);
    cbk->add_option("--bits", bits)->check(CLI::Range(1, 15));
    cbk->add_option("--sector-az", sector_az, "Sector half-width in azimuth, degrees");
    cbk->add_option("--sector-el", sector_el, "Sector half-width in elevation, degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const auto fmt_out = mmw::parse_output_format(g.format);
        if (sim->parsed()) {
            const mmw::Scenario s = load(scenario, g);
            mmw::Simulator simulator(s, {g.timestep_ms, std::nullopt});
            const mmw::SimResult r = simulator.run();
            emit(g.out, [&](std::ostream& os) { mmw::write_trace(os, r, fmt_out); });
            if (!events_path.empty())
                mmw::write_file(events_path, [&](std::ostream& os) { mmw::write_events(os, r, fmt_out); });
        } else if (cov->parsed()) {
            const mmw::Scenario s = load(scenario, g);
            const mmw::CoverageMap m = mmw::coverage_map(s, step);
            emit(g.out, [&](std::ostream& os) { mmw::write_coverage(os, m, fmt_out); });
        } else if (fit->parsed()) {
            std::vector<mmw::PathLossSample> data;
            if (!input.empty()) {
                data = read_samples(input, carrier);
            } else {
                mmw::PathLossParams p;
                try {
                    p = mmw::nearest_measured_params(mmw::parse_use_case(use_case), mmw::parse_link_type(link), carrier);
                } catch (const std::invalid_argument& e) {
                    throw mmw::ValidationError("fit", e.what());
                }
                data = mmw::synthetic_path_loss_samples(p, samples, g.seed.value_or(1));
            }
            const auto f = mmw::fit_path_loss(data);
            emit(g.out, [&](std::ostream& os) { mmw::write_fit(os, f); });
        } else if (cbk->parsed()) {
            mmw::ArrayGeometry geom{rows, cols, 0.5, 0.0, mmw::ElementPattern::Cosine, 20.0, {}};
            mmw::Sector sector{sector_az, sector_el};
            if (!cb_scenario.empty()) {
                const mmw::Scenario s = load(cb_scenario, g);
                if (gnb_index < 0 || gnb_index >= static_cast<int>(s.gnbs.size()))
                    throw mmw::ValidationError("--gnb", "index out of range");
                const auto& gc = s.gnbs[static_cast<std::size_t>(gnb_index)];
                geom = gc.array;
                sector = gc.sector;
                levels = gc.codebook_levels;
                bits = gc.codebook_bits;
            }
            const auto cb = mmw::cached_codebook(geom, sector, levels, bits);
            emit(g.out, [&](std::ostream& os) { mmw::write_codebook_table(os, *cb); });
        }
    } catch (const mmw::ValidationError& e) {
        fmt::print(stderr, "validation error: {}\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "validation error: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
