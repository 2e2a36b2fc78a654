#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "qring/error.hpp"
#include "qring/propagator.hpp"

using namespace qring;

namespace {
struct Setup {
  Material mat;
  RingStack stack;
  GridSpec grid;
  PulseSpec pulse;
  std::vector<Orbital> orbitals;

  explicit Setup(int n = 128) {
    stack.rings = {RingSpec::from_transition(150.0, 2.5, 0, 3, 40.0, mat)};
    grid.nx = grid.ny = n;
    grid.extent = 250.0;
    grid.dt = 10.0;
    grid.duration = 1.0;
    pulse.m_oam = 2;
    pulse.coupling_scale = 1e-4;
    orbitals = occupy(solve_stationary(stack, mat, -1, 1, 1, {0.1, 250.0}), mat);
  }
};
}  // namespace

TEST_SUITE("propagator") {
  TEST_CASE("relaxation update is exact exponential") {
    CHECK(relax_occupation(1.0, 0.0, 25.0, 25.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(relax_occupation(0.3, 0.3, 1.0, 25.0) == doctest::Approx(0.3));
  }

  TEST_CASE("embedded orbitals keep their quantum numbers") {
    Setup s;
    PropagatorOptions opt;
    opt.threads = 1;
    Propagator prop(s.grid, s.stack, s.mat, s.pulse, opt);
    auto state = prop.initialize(s.orbitals);
    REQUIRE(state.orbitals.size() == 3);
    for (const auto& o : state.orbitals) {
      CHECK(prop.norm_squared(o.psi) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(prop.angular_momentum(o.psi) == doctest::Approx(o.m0).epsilon(1e-3).scale(1.0));
      CHECK(prop.field_free_energy(o.psi) == doctest::Approx(o.energy).epsilon(1e-2));
    }
  }

  TEST_CASE("field-free propagation is stationary") {
    Setup s;
    PropagatorOptions opt;
    opt.threads = 1;
    opt.schedule = RelaxationSchedule::Off;
    Propagator prop(s.grid, s.stack, s.mat, s.pulse, opt);
    auto state = prop.initialize(s.orbitals);
    state.time = s.pulse.duration() + 0.1;
    const auto start = state.orbitals[0].psi;
    prop.run_until(state, state.time + 1.0);
    const double fid = std::abs(prop.overlap(start, state.orbitals[0].psi));
    CHECK(fid > 1.0 - 1e-5);
  }

  TEST_CASE("pulse propagation conserves every orbital norm") {
    Setup s(64);
    PropagatorOptions opt;
    opt.threads = 2;
    opt.schedule = RelaxationSchedule::Off;
    Propagator prop(s.grid, s.stack, s.mat, s.pulse, opt);
    auto state = prop.initialize(s.orbitals);
    prop.run_until(state, 1.0);
    for (const auto& o : state.orbitals) {
      CHECK(prop.norm_squared(o.psi) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(o.max_norm_drift < 1e-6);
    }
    std::vector<double> kx, ky;
    CHECK(prop.wavevector_field(0.5 * s.pulse.duration(), kx, ky));
    CHECK_FALSE(prop.wavevector_field(s.pulse.duration() + 1.0, kx, ky));
  }

  TEST_CASE("unresolved field is refused") {
    Setup s(64);
    s.pulse.coupling_scale = 1.0;
    CHECK_THROWS_AS(Propagator(s.grid, s.stack, s.mat, s.pulse), AccuracyError);
  }

  TEST_CASE("results do not depend on the thread count") {
    Setup s(64);
    PropagatorOptions a, b;
    a.threads = 1;
    b.threads = 3;
    Propagator pa(s.grid, s.stack, s.mat, s.pulse, a), pb(s.grid, s.stack, s.mat, s.pulse, b);
    auto sa = pa.initialize(s.orbitals), sb = pb.initialize(s.orbitals);
    pa.run_until(sa, 0.5);
    pb.run_until(sb, 0.5);
    for (std::size_t i = 0; i < sa.orbitals.size(); ++i) CHECK(sa.orbitals[i].psi == sb.orbitals[i].psi);
  }

  TEST_CASE("relaxation drives occupations toward equilibrium") {
    Setup s(64);
    PropagatorOptions opt;
    opt.threads = 1;
    opt.relaxation = RelaxationModel::Literal;
    Propagator prop(s.grid, s.stack, s.mat, s.pulse, opt);
    auto state = prop.initialize(s.orbitals);
    state.orbitals[0].occupation = 0.0;
    relax_occupations(state, s.mat, 25.0, RelaxationModel::Literal);
    CHECK(state.orbitals[0].occupation ==
          doctest::Approx(state.orbitals[0].equilibrium * (1.0 - std::exp(-1.0))));
  }

  TEST_CASE("checkpoint round trip") {
    Setup s(64);
    PropagatorOptions opt;
    opt.threads = 1;
    Propagator prop(s.grid, s.stack, s.mat, s.pulse, opt);
    auto state = prop.initialize(s.orbitals);
    prop.step(state);
    const auto dir = std::filesystem::temp_directory_path() / "qring-unit-checkpoint";
    std::filesystem::remove_all(dir);
    save_checkpoint(state, s.grid, dir.string(), "hash");
    const auto back = load_checkpoint(dir.string());
    CHECK(back.time == state.time);
    CHECK(back.step_index == state.step_index);
    REQUIRE(back.orbitals.size() == state.orbitals.size());
    CHECK(back.orbitals[1].psi == state.orbitals[1].psi);
    CHECK(back.orbitals[1].m0 == state.orbitals[1].m0);
  }
}
