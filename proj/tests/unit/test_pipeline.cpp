#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "qring/array_io.hpp"
#include "qring/error.hpp"
#include "qring/pipeline.hpp"
#include "qring/units.hpp"

using namespace qring;
namespace fs = std::filesystem;

namespace {
Scenario tiny(int m_oam = 2) {
  auto sc = load_scenario("fig2a", true,
                          {"grid.nx=64", "grid.ny=64", "grid.duration=0.6", "analysis.snapshot_times=[0.3]",
                           "pulse.m_oam=" + std::to_string(m_oam)});
  return sc;
}

std::vector<double> lobed_density(const Grid2D& g, int lobes, double depth) {
  std::vector<double> rho(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.rho()[k];
    rho[k] = std::exp(-std::pow((r - 150.0) / 15.0, 2)) * (1.0 + depth * std::cos(lobes * g.phi()[k]));
  }
  return rho;
}
}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("stage names") {
    for (auto s : {Stage::Eigensolve, Stage::Simulate, Stage::Spectrum, Stage::Stokes, Stage::Oracle, Stage::Scan})
      CHECK(parse_stage(to_string(s)) == s);
    CHECK_THROWS_AS((void)parse_stage("render"), ValidationError);
  }

  TEST_CASE("angular analysis counts lobes") {
    GridSpec gs;
    gs.nx = gs.ny = 128;
    Grid2D g(gs);
    const auto three = angular_analysis(lobed_density(g, 3, 0.2), g, 130.0, 170.0);
    CHECK(three.minima == 3);
    for (int k = 1; k < static_cast<int>(three.magnitude.size()); ++k)
      if (k != 3) CHECK(three.magnitude[k] < three.magnitude[3]);
    const auto flat = angular_analysis(lobed_density(g, 3, 0.0), g, 130.0, 170.0);
    CHECK(flat.minima == 0);
    const auto five = angular_analysis(lobed_density(g, 5, 0.1), g, 130.0, 170.0);
    CHECK(five.minima == 5);
  }

  TEST_CASE("linear fit quality") {
    CHECK(linear_r2({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(linear_r2({1, 2, 3, 4}, {1, 8, 27, 64}) < 0.95);
    CHECK_THROWS_AS((void)linear_r2({1}, {1}), ValidationError);
  }

  TEST_CASE("eigensolve covers the occupied levels") {
    const auto sc = load_scenario("fig2a", true);
    const auto orbitals = eigensolve(sc);
    REQUIRE(!orbitals.empty());
    int occupied = 0;
    for (const auto& o : orbitals) occupied += o.occupation >= sc.propagation.occupation_cutoff;
    CHECK(occupied > 20);
    // Degenerate +-m pairs.
    for (const auto& a : orbitals)
      for (const auto& b : orbitals)
        if (a.n0 == b.n0 && a.m0 == -b.m0) CHECK(std::abs(a.energy - b.energy) < 1e-10 * 2.5);
  }

  TEST_CASE("short run writes the artifact tree") {
    const auto sc = tiny();
    const auto out = fs::temp_directory_path() / "qring-unit-pipeline";
    fs::remove_all(out);
    const auto manifest_path = run_stage(Stage::Stokes, sc, out);
    std::ifstream in(manifest_path);
    const auto manifest = nlohmann::json::parse(in);
    CHECK(manifest["status"] == "complete");
    CHECK(manifest["scenario_hash"] == scenario_hash(sc));
    const auto dip = read_array(out / "simulate" / "dipoles");
    CHECK(dip.meta.dims.size() == 3);
    CHECK(dip.meta.scenario_hash == scenario_hash(sc));
    for (const char* a : {"spectrum/s0_total", "stokes/s1_ring1", "stokes/s3_total"})
      CHECK(fs::exists(out / (std::string(a) + ".f64")));
    CHECK(fs::exists(out / "stokes" / "line_report.csv"));
    CHECK(fs::exists(out / "eigen" / "orbitals.csv"));

    // A second spectral pass reuses the stored dipoles.
    const auto before = fs::last_write_time(out / "simulate" / "dipoles.f64");
    (void)run_stage(Stage::Spectrum, sc, out);
    CHECK(fs::last_write_time(out / "simulate" / "dipoles.f64") == before);
  }

  TEST_CASE("odd charge emits no dipole") {
    const auto sc = tiny(3);
    const auto orbitals = eigensolve(sc);
    const auto res = simulate(sc, sc.pulse, orbitals);
    const auto& total = res.dipoles;
    double mx = 0.0;
    for (std::size_t c = 0; c < total.channels(); ++c)
      for (std::size_t i = 0; i < total.samples(); ++i)
        mx = std::max({mx, std::abs(total.mx[c][i]), std::abs(total.my[c][i])});
    CHECK(mx < 1e-8);
    REQUIRE(res.snapshots.size() == 1);
    CHECK(res.snapshots[0].time == doctest::Approx(0.3));
  }

  TEST_CASE("oracle stage lists lines") {
    const auto sc = tiny();
    const auto out = fs::temp_directory_path() / "qring-unit-oracle";
    fs::remove_all(out);
    (void)run_stage(Stage::Oracle, sc, out);
    std::ifstream in(out / "oracle" / "lines.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("m_from") != std::string::npos);
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows > 0);
  }
}
