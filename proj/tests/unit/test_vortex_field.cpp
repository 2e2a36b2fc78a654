#include <doctest.h>

#include <cmath>
#include <complex>

#include "frozen_values.hpp"
#include "qring/error.hpp"
#include "qring/units.hpp"
#include "qring/vortex_field.hpp"

using namespace qring;

TEST_SUITE("vortex_field") {
  TEST_CASE("amplitude from intensity") {
    CHECK(amplitude_from_intensity(1e10, 2.5) == doctest::Approx(frozen::kA0_1e10_2p5).epsilon(1e-12));
    // A0 scales as sqrt(I) / omega.
    CHECK(amplitude_from_intensity(4e10, 5.0) == doctest::Approx(frozen::kA0_1e10_2p5).epsilon(1e-12));
    CHECK_THROWS_AS((void)amplitude_from_intensity(0.0, 2.5), DomainError);
  }

  TEST_CASE("radial profiles peak at one") {
    PulseSpec lg;
    lg.m_oam = 2;
    lg.waist = 150.0;
    CHECK(radial_profile(lg, 100.0) == doctest::Approx(frozen::kLg_m2_w150_r100).epsilon(1e-12));
    CHECK(radial_profile(lg, 150.0) == doctest::Approx(1.0).epsilon(1e-12));
    lg.m_oam = -4;
    lg.waist = 106.066;
    CHECK(radial_profile(lg, 60.0) == doctest::Approx(frozen::kLg_m4_w106_r60).epsilon(1e-12));

    PulseSpec pv;
    pv.kind = BeamKind::PerfectVortex;
    pv.spot_radius = 150.0;
    pv.waist = 10.0;
    CHECK(radial_profile(pv, 150.0) == doctest::Approx(1.0));
    CHECK(radial_profile(pv, 160.0) == doctest::Approx(std::exp(-1.0)));
  }

  TEST_CASE("spatial mode carries the winding") {
    PulseSpec p;
    p.m_oam = 3;
    const auto a = spatial_mode(p, 100.0, 0.0);
    const auto b = spatial_mode(p, 0.0, 100.0);
    CHECK(std::arg(b / a) == doctest::Approx(std::remainder(3.0 * units::pi / 2.0, 2.0 * units::pi)));
    CHECK(std::abs(a) == doctest::Approx(std::abs(b)));
  }

  TEST_CASE("envelope and duration") {
    PulseSpec p;
    p.photon_energy = 2.5;
    p.n_cycles = 2.0;
    const double T = p.duration();
    CHECK(T == doctest::Approx(2.0 * 2.0 * units::pi * units::hbar / 2.5));
    CHECK(envelope(p, 0.5 * T) == doctest::Approx(1.0));
    CHECK(envelope(p, -0.1) == 0.0);
    CHECK(envelope(p, T + 0.1) == 0.0);
  }

  TEST_CASE("polarization vectors") {
    for (auto pol : {Polarization::LinearX, Polarization::LinearY, Polarization::CircularPlus,
                     Polarization::CircularMinus}) {
      const auto [ex, ey] = polarization_vector(pol);
      CHECK(std::norm(ex) + std::norm(ey) == doctest::Approx(1.0));
      CHECK(parse_polarization(to_string(pol)) == pol);
    }
    CHECK_THROWS_AS((void)parse_polarization("elliptic"), ValidationError);
  }

  TEST_CASE("vector potential at the ring") {
    PulseSpec p;
    p.m_oam = 2;
    const double T = p.duration();
    const auto a = vector_potential(p, 150.0, 0.0, 0.5 * T);
    const double a0 = amplitude_from_intensity(p.peak_intensity, p.photon_energy);
    // Mid-pulse phase is -omega T/2 = -2 pi for two cycles.
    CHECK(a.ax == doctest::Approx(a0).epsilon(1e-9));
    CHECK(a.ay == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("gaussian forces zero charge") {
    PulseSpec p;
    p.kind = BeamKind::Gaussian;
    p.m_oam = 3;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.normalize();
    CHECK(p.m_oam == 0);
    CHECK(parse_beam_kind(to_string(BeamKind::PerfectVortex)) == BeamKind::PerfectVortex);
  }

  TEST_CASE("photon number matching") {
    PulseSpec pv;
    pv.kind = BeamKind::PerfectVortex;
    pv.m_oam = 4;
    pv.spot_radius = 150.0;
    pv.waist = 10.0;
    GridSpec g;
    g.nx = g.ny = 96;
    const auto gauss = photon_number_match(pv, BeamKind::Gaussian, g);
    CHECK(gauss.kind == BeamKind::Gaussian);
    CHECK(gauss.waist == doctest::Approx(150.0));
    CHECK(photon_number(gauss, g) == doctest::Approx(photon_number(pv, g)).epsilon(1e-6));
    // The broad beam spreads the same photons: lower peak intensity.
    CHECK(gauss.peak_intensity < pv.peak_intensity);
  }
}
