#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "qring/array_io.hpp"
#include "qring/error.hpp"
#include "qring/fft.hpp"
#include "qring/grid.hpp"
#include "qring/units.hpp"

using namespace qring;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("qring-unit-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("cell centred nodes avoid the origin") {
    GridSpec s;
    s.nx = s.ny = 64;
    s.extent = 100.0;
    Grid2D g(s);
    CHECK(g.size() == 64u * 64u);
    CHECK(s.x(0) == doctest::Approx(-100.0 + 0.5 * s.dx()));
    for (double r : g.rho()) CHECK(r > 0.0);
  }

  TEST_CASE("time stepping") {
    GridSpec s;
    s.dt = 0.5;
    s.duration = 15.0;
    CHECK(s.dt_ps() == doctest::Approx(5e-4));
    CHECK(s.n_steps() == 30000);
    s.nx = 3;
    CHECK_THROWS_AS(s.validate(), ValidationError);
  }

  TEST_CASE("annulus weights approximate the area") {
    GridSpec s;
    s.nx = s.ny = 128;
    s.extent = 250.0;
    Grid2D g(s);
    const auto w = g.annulus_weights(130.0, 170.0);
    const double area = std::accumulate(w.begin(), w.end(), 0.0) * g.cell_area();
    CHECK(area == doctest::Approx(units::pi * (170.0 * 170.0 - 130.0 * 130.0)).epsilon(2e-3));
  }

  TEST_CASE("absorber mask") {
    GridSpec s;
    s.nx = s.ny = 64;
    Grid2D g(s);
    for (double v : g.absorber_mask()) CHECK(v == 1.0);
    s.absorber_width = 30.0;
    Grid2D h(s);
    const auto m = h.absorber_mask();
    CHECK(m[32 * 64 + 32] == 1.0);
    CHECK(m[0] > 0.0);
    CHECK(m[0] < m[32 * 64 + 2]);
    CHECK(m[32 * 64 + 2] < 1.0);
  }
}

TEST_SUITE("fft") {
  TEST_CASE("2D round trip and plane wave") {
    const int nx = 32, ny = 16;
    Fft2D plan(nx, ny);
    ComplexField f(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) f[j * nx + i] = std::polar(1.0, 2.0 * units::pi * (3.0 * i / nx + 2.0 * j / ny));
    auto g = f;
    plan.forward(g.data());
    // All energy in bin (kx, ky) = (3, 2).
    CHECK(std::abs(g[2 * nx + 3]) == doctest::Approx(nx * ny));
    plan.backward(g.data());
    double err = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(g[k] / double(nx * ny) - f[k]));
    CHECK(err < 1e-12);
  }

  TEST_CASE("1D transform of a real sequence") {
    const auto y = fft_real({1.0, 0.0, -1.0, 0.0});
    CHECK(std::abs(y[1] - cplx(2.0, 0.0)) < 1e-12);
    CHECK(std::abs(y[0]) < 1e-12);
  }
}

TEST_SUITE("array_io") {
  TEST_CASE("round trip with sidecar") {
    const auto dir = scratch_dir("io");
    ArrayMeta meta;
    meta.dims = {2, 3};
    meta.axes = {{"time", "ps", 0.0, 1.0, 2}, {"frequency", "THz", 0.0, 2.0, 3}};
    meta.quantity = "S0";
    meta.units = "W s";
    meta.ring_index = 1;
    meta.window_dt = 1.5;
    meta.scenario_hash = "abc";
    const std::vector<double> data{1, 2, 3, 4, 5, 6.5};
    write_array(dir / "s0", data, meta);
    CHECK(fs::file_size(dir / "s0.f64") == 6 * sizeof(double));
    const auto back = read_array(dir / "s0");
    CHECK(back.data == data);
    CHECK(back.meta.dims == meta.dims);
    CHECK(back.meta.axes[1].name == "frequency");
    CHECK(back.meta.ring_index == 1);
    CHECK(back.meta.scenario_hash == "abc");
    meta.dims = {4, 4};
    CHECK_THROWS_AS(write_array(dir / "bad", data, meta), ValidationError);
  }

  TEST_CASE("csv and number formatting") {
    CsvWriter w({"a", "b"});
    w.row({"1", format_double(0.1)});
    CHECK(w.str() == "a,b\n1,0.1\n");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  }
}
