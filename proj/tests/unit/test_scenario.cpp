#include <doctest.h>

#include <algorithm>
#include <string>

#include "qring/error.hpp"
#include "qring/scenario.hpp"

using namespace qring;
using nlohmann::json;

namespace {
json minimal() {
  return json::parse(R"({
    "name": "t",
    "stack": {"rings": [{"calibration": "oscillator", "radius": 150, "width": 40, "hbar_omega0": 2.5}]},
    "pulse": {"kind": "laguerre_gauss", "m_oam": 2, "photon_energy": 2.5, "peak_intensity": 1e10}
  })");
}

std::string message_of(const json& doc) {
  try {
    (void)parse_scenario(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}
}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("defaults fill a minimal document") {
    const auto sc = parse_scenario(minimal());
    CHECK(sc.grid.nx == 256);
    CHECK(sc.grid.dt == doctest::Approx(0.5));
    CHECK(sc.analysis.window == doctest::Approx(1.5));
    CHECK(sc.material.relaxation_time == doctest::Approx(25.0));
    CHECK(sc.build_stack().rings.size() == 1);
  }

  TEST_CASE("missing and unknown keys are all reported") {
    auto doc = minimal();
    doc["pulse"].erase("m_oam");
    doc["pulse"]["colour"] = "red";
    doc["grid"] = {{"nx", 128}, {"spacing", 2}};
    const auto msg = message_of(doc);
    CHECK(msg.find("pulse.m_oam") != std::string::npos);
    CHECK(msg.find("pulse.colour") != std::string::npos);
    CHECK(msg.find("grid.spacing") != std::string::npos);
  }

  TEST_CASE("invalid values are rejected") {
    auto doc = minimal();
    doc["pulse"]["peak_intensity"] = -1.0;
    CHECK_THROWS_AS((void)parse_scenario(doc), ValidationError);
    doc = minimal();
    doc["pulse"]["kind"] = "bessel";
    CHECK_THROWS_AS((void)parse_scenario(doc), ValidationError);
    doc = minimal();
    doc["stack"]["rings"].push_back(doc["stack"]["rings"][0]);
    CHECK_THROWS_WITH_AS((void)parse_scenario(doc), doctest::Contains("strictly decreasing"), ValidationError);
  }

  TEST_CASE("canonical form round trips and hashes stably") {
    const auto sc = parse_scenario(minimal());
    const auto canon = to_json(sc);
    const auto again = parse_scenario(canon);
    CHECK(to_json(again) == canon);
    CHECK(scenario_hash(sc) == scenario_hash(again));
    CHECK(scenario_hash(sc).size() == 64);
    auto renamed = sc;
    renamed.name = "other";
    CHECK(scenario_hash(renamed) == scenario_hash(sc));
    auto changed = sc;
    changed.pulse.m_oam = 4;
    CHECK(scenario_hash(changed) != scenario_hash(sc));
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("dotted overrides") {
    auto doc = minimal();
    apply_override(doc, "pulse.m_oam=4");
    apply_override(doc, "stack.rings[0].radius=140.5");
    apply_override(doc, "pulse.polarization=circular_plus");
    apply_override(doc, "analysis.snapshot_times=[0.5, 1.0]");
    CHECK(doc["pulse"]["m_oam"] == 4);
    CHECK(doc["stack"]["rings"][0]["radius"] == 140.5);
    CHECK(doc["pulse"]["polarization"] == "circular_plus");
    CHECK(doc["analysis"]["snapshot_times"].size() == 2);
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ValidationError);
  }

  TEST_CASE("ci scaling") {
    auto doc = minimal();
    doc["ci"] = {{"grid.nx", 128}, {"grid.dt_fs", 10.0}};
    const auto sc = parse_scenario(apply_ci_scale(doc));
    CHECK(sc.grid.nx == 128);
    CHECK(sc.grid.dt == doctest::Approx(10.0));
    CHECK(sc.resolution == "ci");
  }

  TEST_CASE("bundled scenarios load at both resolutions") {
    const auto names = list_bundled_scenarios();
    for (const char* want : {"fig1", "fig2a", "fig2b", "fig2c", "fig4", "fig5a", "fig5b", "fig6"})
      CHECK(std::find(names.begin(), names.end(), want) != names.end());
    for (const auto& n : names) {
      CAPTURE(n);
      CHECK_NOTHROW((void)load_scenario(n));
      CHECK_NOTHROW((void)load_scenario(n, true));
    }
    const auto fig4 = load_scenario("fig4", true);
    CHECK(fig4.stack.rings.size() == 3);
    CHECK(fig4.comparison.enabled);
    CHECK_THROWS_AS((void)load_scenario("no_such_scenario"), ValidationError);
  }
}
