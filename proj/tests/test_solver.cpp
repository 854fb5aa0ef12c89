#include <doctest.h>

#include <cmath>
#include <random>

#include "mbe/solver.hpp"
#include "mbe/spectral.hpp"

using namespace mbe;

namespace {
constexpr double kTwoPi = 6.283185307179586;

FieldD random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  FieldD u(g);
  for (std::size_t k = 0; k < u.size(); ++k) u.data()[k] = n(rng);
  return u;
}
}  // namespace

TEST_CASE("spectral solve inverts b0 + delta Lap^2") {
  const GridSpec g(kTwoPi, 32);
  SpectralSolver s(g);
  const FieldD c = FieldD::constant(g, 2.0);
  CHECK(norm_max(s.solve(c, 4.0, 0.1) - FieldD::constant(g, 0.5)) < 1e-14);

  const FieldD sx = FieldD::sample(g, [](double x, double) { return std::sin(x); });
  const double lam = laplacian_symbol_1d(1, g);
  CHECK(lam == doctest::Approx(-(4 / (g.h() * g.h())) * std::pow(std::sin(M_PI / 32), 2)));
  CHECK(norm_max(s.solve(sx, 3.0, 0.1) - (1.0 / (3.0 + 0.1 * lam * lam)) * sx) < 1e-14);

  for (unsigned k = 0; k < 5; ++k) {
    const FieldD rhs = random_field(g, k);
    const FieldD x = s.solve(rhs, 7.5, 0.1);
    CHECK(norm_l2(7.5 * x + 0.1 * bilaplacian(x) - rhs) < 1e-11 * norm_l2(rhs));
  }
  // Odd grid size goes through the same transforms.
  const GridSpec odd(kTwoPi, 15);
  const FieldD r = random_field(odd, 9);
  const FieldD x = spectral_solve(r, 2.0, 0.3);
  CHECK(norm_l2(2.0 * x + 0.3 * bilaplacian(x) - r) < 1e-11 * norm_l2(r));
  CHECK_THROWS_AS(s.solve(r, 2.0, 0.3), std::invalid_argument);
}

TEST_CASE("stepper: steady states converge at once") {
  const GridSpec g(kTwoPi, 16);
  const ModelParams p(0.1, g);
  for (double c : {0.0, 1.25}) {
    Bdf2Stepper st(p, SolverConfig{}, FieldD::constant(g, c));
    const StepResult r = st.trial(0.01);
    CHECK(r.stats.iterations <= 2);
    CHECK(r.stats.increment < 1e-12);
    CHECK(norm_max(r.u - FieldD::constant(g, c)) < 1e-13);
  }
}

TEST_CASE("stepper: trial does not commit, accept does") {
  const GridSpec g(kTwoPi, 16);
  const ModelParams p(0.1, g);
  Bdf2Stepper st(p, SolverConfig{}, coarsening_initial_data(g));
  const StepResult a = st.trial(1e-3);
  const StepResult b = st.trial(1e-3);
  CHECK((a.u.array() == b.u.array()).all());
  CHECK(st.level() == 0);
  CHECK(st.previous() == nullptr);
  st.accept(a);
  CHECK(st.level() == 1);
  CHECK(st.time() == 1e-3);
  CHECK(st.previous() != nullptr);
  CHECK(a.stats.b0 == doctest::Approx(2.0 / 1e-3));
  CHECK(a.stats.solvability_ok);
}

TEST_CASE("stepper: local truncation error is third order") {
  const GridSpec g(kTwoPi, 32);
  const ModelParams p(0.1, g);
  auto local_error = [&](double tau) {
    Bdf2Stepper st(p, SolverConfig{}, manufactured(0.3, g));
    StepResult exact1;
    exact1.u = manufactured(0.3 + tau, g);
    exact1.tau = tau;
    st.accept(exact1);
    const FieldD f = manufactured_forcing(0.3 + 2 * tau, p, ForcingMode::discrete);
    return norm_l2(st.trial(tau, &f).u - manufactured(0.3 + 2 * tau, g));
  };
  const double ratio = local_error(0.02) / local_error(0.01);
  CHECK(ratio == doctest::Approx(8.0).epsilon(0.1));
}

TEST_CASE("stepper: failure modes") {
  const GridSpec g(kTwoPi, 16);
  const ModelParams p(0.1, g);
  SolverConfig tight;
  tight.max_picard = 1;
  Bdf2Stepper st(p, tight, coarsening_initial_data(g));
  CHECK_THROWS_AS(st.trial(1e-3), SolverError);

  SolverConfig bad;
  bad.relaxation = 1.5;
  CHECK_THROWS_AS(Bdf2Stepper(p, bad, FieldD(g)), std::invalid_argument);
  bad = SolverConfig{};
  bad.picard_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(Bdf2Stepper(p, SolverConfig{}, FieldD(GridSpec(kTwoPi, 8))), std::invalid_argument);

  // A large step with a big initial slope diverges to non-finite values or stalls.
  SolverConfig loose;
  loose.max_picard = 200;
  Bdf2Stepper wild(p, loose, 5.0 * coarsening_initial_data(g));
  CHECK_THROWS_AS(wild.trial(5.0), SolverError);
}

TEST_CASE("relaxed iteration reaches the same solution") {
  const GridSpec g(kTwoPi, 16);
  const ModelParams p(0.1, g);
  SolverConfig relaxed;
  relaxed.relaxation = 0.7;
  Bdf2Stepper a(p, SolverConfig{}, coarsening_initial_data(g));
  Bdf2Stepper b(p, relaxed, coarsening_initial_data(g));
  const StepResult ra = a.trial(1e-3), rb = b.trial(1e-3);
  CHECK(norm_l2(ra.u - rb.u) < 1e-10);
  CHECK(rb.stats.iterations > ra.stats.iterations);
}

TEST_CASE("march: zero data stays at equilibrium") {
  const GridSpec g(kTwoPi, 16);
  const ModelParams p(0.1, g);
  const MarchResult r = march(FieldD(g), TimeMesh::uniform(0.01, 20), SolverConfig{}, p);
  CHECK(norm_max(r.final) == 0.0);
  for (const EnergyRecord& rec : r.trace) CHECK(rec.E == doctest::Approx(kTwoPi * kTwoPi / 4).epsilon(1e-14));
  CHECK(r.trace.size() == 21u);
}

TEST_CASE("march: energy law, residual bound and snapshots") {
  const GridSpec g(kTwoPi, 64);
  const ModelParams p(0.1, g);
  std::vector<double> taus;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ratio(0.5, 2.0);
  double tau = 1e-3;
  for (int n = 0; n < 120; ++n) {
    taus.push_back(tau);
    tau = std::clamp(tau * ratio(rng), 1e-3, 2e-2);
  }
  const TimeMesh mesh = TimeMesh::from_steps(taus);
  const FieldD u0 = initial_data(coarsening_initial_data(g), p, mesh.tau(1));
  MarchOptions opts;
  opts.check_residual = true;
  opts.snapshot_times = {0.0, 0.1, 0.5, 100.0};
  const MarchResult r = march(u0, mesh, SolverConfig{}, p, {}, opts);
  CHECK(r.energy_restriction_warnings == 0);
  CHECK(r.solvability_warnings == 0);
  CHECK(r.max_residual_ratio <= 1.0);
  for (std::size_t n = 1; n < r.trace.size(); ++n) {
    CHECK(r.trace[n].E_mod <= r.trace[n - 1].E_mod + 1e-10);
    CHECK(r.trace[n].E <= r.trace[0].E);
    CHECK(r.trace[n].E_mod >= r.trace[n].E);
  }
  REQUIRE(r.snapshots.size() == 3u);
  CHECK(r.snapshots[0].t == 0.0);
  CHECK(r.snapshots[1].t >= 0.1);
  CHECK(r.snapshots[1].t < 0.1 + 2e-2);
}

TEST_CASE("march: second-order convergence on graded meshes") {
  const GridSpec g(kTwoPi, 32);
  const ModelParams p(0.1, g);
  auto error = [&](int N) {
    const TimeMesh mesh = TimeMesh::graded(1.0, N, 2.0);
    const FieldD g0 = manufactured_forcing(0.0, p, ForcingMode::discrete);
    const FieldD u0 = initial_data(manufactured(0.0, g), p, mesh.tau(1), &g0);
    const MarchResult r = march(u0, mesh, SolverConfig{}, p,
                                [&](double t) { return manufactured_forcing(t, p, ForcingMode::discrete); });
    return norm_l2(r.final - manufactured(1.0, g));
  };
  const double e20 = error(20), e40 = error(40), e80 = error(80);
  CHECK(e40 < e20);
  CHECK(e80 < e40);
  CHECK(std::log2(e40 / e80) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("march is bit-reproducible") {
  const GridSpec g(kTwoPi, 32);
  const ModelParams p(0.1, g);
  const TimeMesh mesh = TimeMesh::uniform(1e-2, 30);
  const FieldD u0 = initial_data(coarsening_initial_data(g), p, mesh.tau(1));
  const MarchResult a = march(u0, mesh, SolverConfig{}, p);
  const MarchResult b = march(u0, mesh, SolverConfig{}, p);
  CHECK((a.final.array() == b.final.array()).all());
  for (std::size_t n = 0; n < a.trace.size(); ++n) CHECK(a.trace[n].E_mod == b.trace[n].E_mod);
}

TEST_CASE("energy step bound and residual inputs") {
  const TimeMesh u = TimeMesh::uniform(0.01, 3);
  // Uniform interior step: 4 delta min{R_L(1,1), 3/2} = 4 * 0.1 * 1.5.
  CHECK(energy_step_bound(u, 2, 0.1) == doctest::Approx(0.6));
  const GridSpec g(kTwoPi, 8);
  CHECK_THROWS_AS(step_residual(FieldD(g), FieldD(g), nullptr, u, 2, 0.1), std::invalid_argument);
  CHECK(step_residual(FieldD(g), FieldD(g), nullptr, u, 1, 0.1) == 0.0);
}
