// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <string>

#include "mmw/scenario.hpp"

using namespace mmw;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kMinimal = R"(
use_case: UMiStreetCanyon
ue:
  trajectory:
    waypoints: [[10, 0, 1.5], [20, 0, 1.5]]
    speed_mps: 2
gnbs:
  - position: [0, 0, 6]
)";

std::string field_of(const std::string& text)
{
    try {
        load_scenario_text(text);
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<no error>";
}

bool defaulted(const Scenario& s, const std::string& field)
{
    return std::find(s.defaults_applied.begin(), s.defaults_applied.end(), field) != s.defaults_applied.end();
}

} // namespace

TEST_CASE("minimal scenario gets defaults")
{
    const auto s = load_scenario_text(kMinimal);
    CHECK(s.env.use_case == UseCase::UMiStreetCanyon);
    CHECK(s.env.carrier_ghz == 28.0);
    CHECK(s.timestep_ms == 10.0);
    CHECK(s.duration_s == 5.0); // 10 m at 2 m/s
    REQUIRE(s.gnbs.size() == 1);
    CHECK(s.gnbs[0].id == "gnb0");
    CHECK(s.gnbs[0].array.rows == 8);
    CHECK(s.gnbs[0].array.cols == 16);
    CHECK(s.gnbs[0].codebook_levels == 3);
    CHECK(s.gnbs[0].max_eirp_dbm == 55.0);
    CHECK(s.ue.grip == GripMode::Freespace);
    CHECK(s.budget.noise_figure_db == 7.0);
    CHECK(s.duplex.dl_fraction == 0.75);
    CHECK(s.bm.handover_hysteresis_db == 3.0);
    CHECK(s.bm.dwell_ms == 100.0);
    CHECK(s.mcs.entries.size() == default_mcs_table().entries.size());
    for (const char* f : {"carrier_ghz", "timestep_ms", "gnbs[0].id", "gnbs[0].array", "link", "beam_management",
                          "duration_s", "ue.grip"})
        CHECK(defaulted(s, f));
    CHECK_FALSE(defaulted(s, "use_case"));
}

TEST_CASE("explicit values override defaults")
{
    const auto s = load_scenario_text(kMinimal + R"(
carrier_ghz: 61
duration_s: 2
link:
  noise_figure_db: 9
  dl_fraction: 0.5
  ul_fraction: 0.5
beam_management:
  dwell_ms: 250
)");
    CHECK(s.env.carrier_ghz == 61.0);
    CHECK(s.duration_s == 2.0);
    CHECK(s.budget.noise_figure_db == 9.0);
    CHECK(s.duplex.ul_fraction == 0.5);
    CHECK(s.bm.dwell_ms == 250.0);
    CHECK_FALSE(defaulted(s, "duration_s"));
}

TEST_CASE("validation names the offending field")
{
    {
        const std::string text = R"(
use_case: IndoorOffice
duration_s: 1
ue:
  trajectory:
    waypoints: [[1, 1, 1]]
)";
        try {
            load_scenario_text(text);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "gnbs");
            CHECK_THAT(std::string(e.what()), ContainsSubstring("gnb"));
        }
    }
    {
        const std::string text = kMinimal + R"(
materials:
  - {id: glass, base_loss_db: 3}
obstacles:
  - {type: box, min: [4, -1, 0], max: [5, 1, 3], material: concrete}
)";
        try {
            load_scenario_text(text);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "obstacles[0].material");
            CHECK_THAT(std::string(e.what()), ContainsSubstring("concrete"));
        }
    }
    CHECK(field_of(kMinimal + "colour: red\n") == "colour");
    CHECK(field_of(kMinimal + "link:\n  bandwith_mhz: 100\n") == "link.bandwith_mhz");
    CHECK(field_of(kMinimal + "timestep_ms: 0\n") == "timestep_ms");
    CHECK(field_of(kMinimal + "timestep_ms: fast\n") == "timestep_ms");
    CHECK(field_of(kMinimal + "carrier_ghz: -3\n") == "carrier_ghz");
    CHECK(field_of(R"(
use_case: Moon
ue: {trajectory: {waypoints: [[1, 1, 1], [2, 1, 1]]}}
gnbs: [{position: [0, 0, 5]}]
)") == "use_case");
    CHECK(field_of(R"(
use_case: IndoorOffice
ue: {trajectory: {waypoints: [[1, 1, 1]]}}
gnbs: [{position: [0, 0, 5]}]
)") == "duration_s");
    CHECK(field_of(R"(
use_case: IndoorOffice
world: {min: [0, 0, 0], max: [10, 10, 3]}
duration_s: 1
ue: {trajectory: {waypoints: [[1, 1, 1]]}}
gnbs: [{position: [20, 0, 2]}]
)") == "gnbs[0].position");
    CHECK(field_of(R"(
use_case: IndoorOffice
duration_s: 1
ue: {trajectory: {waypoints: [[1, 1, 1]]}}
gnbs: [{id: a, position: [0, 0, 2]}, {id: a, position: [5, 0, 2]}]
)") == "gnbs[1].id");
    CHECK(field_of(kMinimal + "beam_management:\n  dwell_ms: 10\n") == "beam_management");
    CHECK(field_of(kMinimal + "link:\n  dl_fraction: 0.9\n") == "link");
    CHECK(field_of(kMinimal + "coverage:\n  region: [5, 0, 1, 10]\n") == "coverage.region");
    CHECK(field_of("use_case: [") == "<text>");
}

TEST_CASE("missing scenario file")
{
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.yaml"), std::runtime_error);
    CHECK(resolve_scenario("/nonexistent/x.yaml") == std::filesystem::path("/nonexistent/x.yaml"));
}

TEST_CASE("bundled scenarios load")
{
    for (const char* name : {"los-short", "fig4", "fig5", "fig6a", "fig6b", "indoor-floor"}) {
        INFO(name);
        const auto path = resolve_scenario(name);
        REQUIRE(std::filesystem::exists(path));
        const auto s = load_scenario(path);
        CHECK(s.name == name);
        CHECK(s.duration_s > 0.0);
        CHECK_FALSE(s.gnbs.empty());
    }
}
