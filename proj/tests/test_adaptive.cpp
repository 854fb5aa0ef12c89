#include <doctest.h>

#include <cmath>

#include "mbe/adaptive.hpp"

using namespace mbe;

namespace {
constexpr double kTwoPi = 6.283185307179586;
}

TEST_CASE("tau_ada") {
  ControllerConfig c;
  c.tol = 1e-3;
  CHECK(tau_ada(1e-3, 0.01, c) == doctest::Approx(0.009));
  CHECK(tau_ada(0.25e-3, 0.01, c) == doctest::Approx(0.018));
  CHECK(tau_ada(4e-3, 0.01, c) == doctest::Approx(0.0045));
  CHECK(std::isinf(tau_ada(0.0, 0.01, c)));
}

TEST_CASE("controller config validation") {
  ControllerConfig c;
  CHECK_NOTHROW(c.validate());
  c.tau_max = c.tau_min / 2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.rho = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.ratio_cap = 5.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.tol = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("stationary data ramps up by the ratio cap") {
  const GridSpec g(kTwoPi, 16);
  const ModelParams p(0.1, g);
  ControllerConfig c;
  c.tau_min = 1e-3;
  c.tau_max = 0.1;
  const AdaptiveResult r = run_adaptive(FieldD(g), 2.0, c, SolverConfig{}, p);
  CHECK(r.rejections == 0);
  CHECK(r.mesh.tau(1) == c.tau_min);
  CHECK(r.mesh.tau(2) == c.tau_min);
  CHECK(r.mesh.tau(3) == doctest::Approx(c.ratio_cap * c.tau_min));
  CHECK(r.mesh.tau(4) == doctest::Approx(c.ratio_cap * c.ratio_cap * c.tau_min));
  CHECK(r.tau_max_seen == doctest::Approx(c.tau_max));
  CHECK(r.mesh.t(r.mesh.steps()) == 2.0);
  CHECK(r.max_ratio <= c.ratio_cap + 1e-12);
}

TEST_CASE("accept and reject follow the controller rule") {
  const GridSpec g(kTwoPi, 32);
  const ModelParams p(0.1, g);
  ControllerConfig c;
  c.tol = 2e-3;
  c.tau_min = 1e-4;
  c.tau_max = 0.5;
  const FieldD u0 = initial_data(coarsening_initial_data(g), p, c.tau_min);
  const AdaptiveResult r = run_adaptive(u0, 3.0, c, SolverConfig{}, p);
  CHECK(r.mesh.t(r.mesh.steps()) == 3.0);
  CHECK(r.max_ratio <= c.ratio_cap + 1e-12);
  CHECK(r.energy_increases == 0);
  int accepted = 0, rejected = 0;
  for (const TrialRecord& t : r.trials) {
    if (t.record.step == 0) continue;
    if (t.accepted) {
      ++accepted;
      CHECK((t.change < c.tol || t.record.tau <= c.tau_min));
    } else {
      ++rejected;
      CHECK(t.change >= c.tol);
      CHECK(t.record.tau > c.tau_min);
    }
  }
  CHECK(accepted == r.accepted_steps);
  CHECK(rejected == r.rejections);
  CHECK(r.trace.size() == static_cast<std::size_t>(r.accepted_steps) + 1);
  CHECK(r.tau_min_seen >= c.tau_min);
  CHECK(r.tau_max_seen <= c.tau_max);
}

TEST_CASE("advance lands on t_final and reports residuals") {
  const GridSpec g(kTwoPi, 16);
  const ModelParams p(0.1, g);
  ControllerConfig c;
  c.tau_min = 0.03;
  c.tau_max = 0.03;
  AdaptiveStepper st(p, SolverConfig{}, c, initial_data(coarsening_initial_data(g), p, c.tau_min));
  AdvanceRecord last;
  while (st.stepper().time() < 0.1) last = st.advance(0.1, {}, true);
  CHECK(st.stepper().time() == 0.1);
  CHECK(st.stepper().level() == 4);
  CHECK(last.tau == doctest::Approx(0.01));
  CHECK(last.residual >= 0.0);
  CHECK(last.residual <= 10 * 1e-12 * last.stats.b0);
}
