#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "frozen_values.hpp"
#include "qring/ring_model.hpp"
#include "qring/selection_oracle.hpp"
#include "qring/units.hpp"

using namespace qring;

TEST_SUITE("selection_oracle") {
  TEST_CASE("angular integral table") {
    for (int m0 = -10; m0 <= 10; ++m0)
      for (int mp = -25; mp <= 25; ++mp)
        for (int mo = 0; mo <= 10; ++mo) {
          const auto v = angular_integral(m0, mp, mo);
          const bool allowed = mp == m0 + mo + 1 || mp == m0 + mo - 1;
          CHECK(v.imag() == 0.0);
          CHECK(v.real() == (allowed ? std::numbers::pi : 0.0));
        }
  }

  TEST_CASE("envelope transform against quadrature") {
    const double T = 3.3;
    auto check = [&](double nu, double re, double im) {
      const auto v = envelope_transform(T, nu);
      CHECK(v.real() == doctest::Approx(re).epsilon(1e-10).scale(1.0));
      CHECK(v.imag() == doctest::Approx(im).epsilon(1e-10).scale(1.0));
    };
    check(0.0, frozen::kEnvelopeRe_0, frozen::kEnvelopeIm_0);
    check(1.0, frozen::kEnvelopeRe_1, frozen::kEnvelopeIm_1);
    check(2.0 * units::pi / T, frozen::kEnvelopeRe_w, frozen::kEnvelopeIm_w);
    check(7.5, frozen::kEnvelopeRe_7p5, frozen::kEnvelopeIm_7p5);
    // Both sides of the small-argument branch agree with the Taylor expansion
    // T/2 + i nu T^2/4 - nu^2 T^3 (1/6 - 1/(4 pi^2)) / 2.
    for (double nu : {0.99e-4 / T, 1.01e-4 / T}) {
      const std::complex<double> taylor{T / 2 - 0.5 * nu * nu * T * T * T * (1.0 / 6 - 0.25 / (units::pi * units::pi)),
                                        nu * T * T / 4};
      CHECK(std::abs(envelope_transform(T, nu) - taylor) < 1e-12);
    }
  }

  TEST_CASE("first-order amplitudes against 2D quadrature") {
    Material mat;
    RingStack stack;
    stack.rings = {RingSpec::from_oscillator_energy(150.0, 2.5, 40.0, mat)};
    const auto orbitals = solve_stationary(stack, mat, -4, 4, 2, {0.05, 320.0});
    auto find = [&](int n, int m) -> const Orbital& {
      for (const auto& o : orbitals)
        if (o.n0 == n && o.m0 == m) return o;
      throw std::runtime_error("missing orbital");
    };
    PulseSpec p;
    p.m_oam = 2;
    p.waist = 150.0;
    p.coupling_scale = 1e-4;
    auto amp = [&](int ni, int mi, int nf, int mf) {
      return std::abs(transition_amplitude(find(ni, mi), find(nf, mf), p, mat));
    };
    CHECK(amp(0, 0, 0, 3) == doctest::Approx(frozen::kAmplitude_0_0_0_3).epsilon(2e-3));
    CHECK(amp(0, 0, 0, 1) == doctest::Approx(frozen::kAmplitude_0_0_0_1).epsilon(2e-3));
    CHECK(amp(0, 2, 0, -1) == doctest::Approx(frozen::kAmplitude_0_2_0_neg1).epsilon(2e-3));
    CHECK(amp(0, 0, 1, 3) == doctest::Approx(frozen::kAmplitude_0_0_1_3).epsilon(2e-3));
    // Forbidden by the angular rule.
    CHECK(amp(0, 0, 0, 2) == 0.0);
  }

  TEST_CASE("predicted lines obey the selection rule and are ranked") {
    Material mat;
    RingStack stack;
    stack.rings = {RingSpec::from_transition(150.0, 2.5, 0, 3, 40.0, mat)};
    const auto orbitals = occupy(solve_stationary(stack, mat, -12, 12, 2, {0.1, 250.0}), mat);
    PulseSpec p;
    p.m_oam = 2;
    p.coupling_scale = 1e-4;
    const auto lines = predict_lines(orbitals, p, mat, {1e-4, 0.0, 10});
    REQUIRE(lines.size() == 10);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const int dm = lines[i].m_to - lines[i].m_from;
      CHECK((std::abs(dm - 2) == 1 || std::abs(dm + 2) == 1));
      if (i > 0) CHECK(lines[i].weight <= lines[i - 1].weight);
    }
    // The calibrated resonance dominates.
    CHECK(std::abs(lines[0].delta_e) == doctest::Approx(2.5).epsilon(0.05));
  }
}
