#include "mbe/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mbe/solver.hpp"

namespace mbe {

bool CheckReport::record(double slack) {
  if (trials == 0 || slack < worst_slack) worst_slack = slack;
  ++trials;
  const bool ok = slack >= -tolerance;
  if (!ok) {
    ++violations;
    pass = false;
  }
  return ok;
}

std::string format_report(const CheckReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %s trials=%ld worst_slack=%.6e tol=%.1e violations=%ld", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.trials, r.worst_slack, r.tolerance, r.violations);
  std::string line = buf;
  if (!r.detail.empty()) line += " " + r.detail;
  return line;
}

namespace {

double pow32(double x) { return x * std::sqrt(x); }

double safe_scale(double s) { return std::max(s, std::numeric_limits<double>::min()); }

std::mt19937_64 trial_rng(std::uint64_t seed, long trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

std::string sweep_detail(const SweepOptions& o) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "seed=%llu ratio_bound=%g max_levels=%d", static_cast<unsigned long long>(o.seed),
                o.ratio_bound, o.max_levels);
  std::string s = buf;
  if (o.fault != 0.0) s += " fault=" + std::to_string(o.fault);
  return s;
}

std::vector<double> random_sequence(std::mt19937_64& rng, int n) {
  std::vector<double> w(n);
  std::normal_distribution<double> normal;
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: std::fill(w.begin(), w.end(), 1.0); break;
    case 1:
      for (int k = 0; k < n; ++k) w[k] = (k % 2 == 0) ? 1.0 : -1.0;
      break;
    default:
      for (double& x : w) x = normal(rng);
  }
  return w;
}

std::vector<Eigen::Vector2d> random_vectors(std::mt19937_64& rng, int n) {
  const std::vector<double> a = random_sequence(rng, n);
  const std::vector<double> b = random_sequence(rng, n);
  std::vector<Eigen::Vector2d> v(n);
  for (int k = 0; k < n; ++k) v[k] = {a[k], b[k]};
  return v;
}

int random_levels(std::mt19937_64& rng, int max_levels) {
  return std::uniform_int_distribution<int>(1, max_levels)(rng);
}

}  // namespace

// ---------------------------------------------------------------------------

ForceMargins force_margins(const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
  const Eigen::Vector2d z = u - v;
  const double u2 = u.squaredNorm();
  const double v2 = v.squaredNorm();
  const double z2 = z.squaredNorm();
  const double uz = u.dot(z);
  ForceMargins m;
  const double lhs1 = z.dot(force(u));
  const double rhs1 = 0.25 * (u2 * u2 - v2 * v2) - 0.5 * (u2 - v2) - 0.5 * z2;
  m.first = lhs1 - rhs1;
  m.scale_first = std::max(1.0, std::abs(lhs1) + 0.25 * (u2 * u2 + v2 * v2) + 0.5 * (u2 + v2 + z2));
  const double lhs2 = z.dot(force(u) - force(v));
  const double rhs2 = 0.5 * v2 * z2 + 0.5 * uz * uz - z2;
  m.second = lhs2 - rhs2;
  m.scale_second = std::max(1.0, std::abs(lhs2) + 0.5 * v2 * z2 + 0.5 * uz * uz + z2);
  return m;
}

double bdf2_quadratic_form(const TimeMesh& mesh, std::span<const double> w) {
  double s = 0.0;
  for (int k = 1; k <= static_cast<int>(w.size()); ++k) {
    const Bdf2Coeffs c = bdf2_coeffs(mesh, k);
    double inner = c.b0 * w[k - 1];
    if (k >= 2) inner += c.b1 * w[k - 2];
    s += w[k - 1] * inner;
  }
  return s;
}

double bdf2_lower_bound(const TimeMesh& mesh, std::span<const double> w) {
  const int n = static_cast<int>(w.size());
  double s = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double next = k < n ? mesh.ratio(k + 1) : 0.0;
    s += r_L(mesh.ratio(k), next) * w[k - 1] * w[k - 1] / mesh.tau(k);
  }
  return 0.5 * s;
}

double doc_bilinear_form(const DocTable& theta, std::span<const Eigen::Vector2d> v,
                         std::span<const Eigen::Vector2d> w) {
  double s = 0.0;
  for (int k = 1; k <= static_cast<int>(w.size()); ++k) {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int l = 1; l <= k; ++l) acc += theta(k, l) * v[l - 1];
    s += acc.dot(w[k - 1]);
  }
  return s;
}

EmbeddingReport check_l6_chain(const FieldD& u) {
  const VecFieldD g = gradient(u);
  const double g6 = norm_lq(g, 6);
  const double g4 = norm_lq(g, 4);
  const double g2 = norm_l2(g);
  const double lap = norm_l2(laplacian(u));
  const double L = u.grid().L;
  EmbeddingReport r;
  r.lhs = std::pow(g6, 6);
  r.rhs = 40.0 * std::pow(g4, 4) * (4.0 * lap * lap + g2 * g2 / (L * L));
  r.slack = r.rhs - r.lhs;
  r.violated = r.slack < -1e-12 * std::max(r.lhs, r.rhs);
  return r;
}

double l4_embedding_ratio(const FieldD& u) {
  const VecFieldD g = gradient(u);
  const double g2 = norm_l2(g);
  if (g2 == 0.0) return 0.0;
  const double lap = norm_l2(laplacian(u));
  const double L = u.grid().L;
  return norm_lq(g, 4) / (std::sqrt(g2) * std::pow(2.0 * lap * lap + g2 * g2 / (L * L), 0.25));
}

double solution_bound(double E0, double delta, double L) {
  const double K1 = (4.0 * E0 + 2.0 * L * L) / std::min(2.0 * delta, 0.25);
  return std::max(std::sqrt(K1), std::sqrt(std::sqrt(K1)));
}

// ---------------------------------------------------------------------------

TimeMesh random_mesh(std::mt19937_64& rng, int levels, double ratio_bound) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lr = std::log(ratio_bound);
  TimeMesh mesh;
  double tau = std::exp(std::log(1e-3) + unit(rng) * std::log(100.0));
  for (int n = 1; n <= levels; ++n) {
    if (n >= 2) {
      const double pick = unit(rng);
      double r;
      if (pick < 0.1)
        r = ratio_bound;
      else if (pick < 0.15)
        r = std::exp(std::log(1e-4) + unit(rng) * std::log(100.0));
      else
        r = std::exp(lr * (2.0 * unit(rng) - 1.0));
      tau *= r;
    }
    mesh.append(tau);
  }
  return mesh;
}

FieldD random_field(std::mt19937_64& rng, const GridSpec& grid) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const double amp = std::exp(std::log(1e-2) + unit(rng) * std::log(1e4));
  FieldD u(grid);
  const int M = grid.M;
  const double k0 = 2.0 * M_PI / grid.L;
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0:
      for (std::size_t k = 0; k < u.size(); ++k) u.data()[k] = normal(rng);
      break;
    case 1: {
      for (int p = 0; p <= 6; ++p)
        for (int q = 0; q <= 6; ++q) {
          const double a = normal(rng) / (1.0 + p * p + q * q);
          const double ph = 2.0 * M_PI * unit(rng);
          u += FieldD::sample(grid, [=](double x, double y) { return a * std::cos(k0 * (p * x + q * y) + ph); });
        }
      break;
    }
    case 2: {
      const int p = std::uniform_int_distribution<int>(0, M / 2)(rng);
      const int q = std::uniform_int_distribution<int>(0, M / 2)(rng);
      u = FieldD::sample(grid, [=](double x, double y) { return std::sin(k0 * p * x) * std::cos(k0 * q * y); });
      break;
    }
    default: {
      const int i = std::uniform_int_distribution<int>(0, M - 1)(rng);
      const int j = std::uniform_int_distribution<int>(0, M - 1)(rng);
      u(i, j) = 1.0;
      break;
    }
  }
  return amp * u;
}

// ---------------------------------------------------------------------------

CheckReport check_force_inequalities(long trials, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "force_inequalities";
  rep.tolerance = 1e-12;
  rep.detail = "seed=" + std::to_string(seed) + " box=[-3,3]^2";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-3.0, 3.0);
  for (long t = 0; t < trials; ++t) {
    const Eigen::Vector2d u(box(rng), box(rng));
    Eigen::Vector2d v(box(rng), box(rng));
    // Near-equality directions of the second inequality: v = -u and v close to u.
    if (t % 10 == 7) v = -u;
    if (t % 10 == 9) v = u + 1e-3 * v;
    const ForceMargins m = force_margins(u, v);
    rep.record(std::min(m.first / m.scale_first, m.second / m.scale_second));
  }
  return rep;
}

CheckReport check_positive_definiteness(const SweepOptions& o) {
  CheckReport rep;
  rep.name = "bdf2_positive_definiteness";
  rep.tolerance = 1e-10;
  rep.detail = sweep_detail(o);
  for (long t = 0; t < o.trials; ++t) {
    std::mt19937_64 rng = trial_rng(o.seed, t);
    const int n = random_levels(rng, o.max_levels);
    const TimeMesh mesh = random_mesh(rng, n, o.ratio_bound);
    const std::vector<double> w = random_sequence(rng, n);
    const double q = bdf2_quadratic_form(mesh, w);
    const double lb = bdf2_lower_bound(mesh, w);
    double scale = 0.0;
    for (int k = 1; k <= n; ++k) {
      const Bdf2Coeffs c = bdf2_coeffs(mesh, k);
      scale += std::abs(c.b0) * w[k - 1] * w[k - 1];
      if (k >= 2) scale += std::abs(c.b1 * w[k - 1] * w[k - 2]);
    }
    rep.record((q - lb) / safe_scale(scale));
  }
  return rep;
}

std::vector<CheckReport> check_kernel_identities(const SweepOptions& o) {
  CheckReport orth{"doc_orthogonality", 0, 0.0, 1e-12};
  CheckReport rows{"doc_row_sum", 0, 0.0, 1e-12};
  CheckReport prod{"doc_product_formula", 0, 0.0, 1e-12};
  orth.detail = rows.detail = prod.detail = sweep_detail(o);
  for (long t = 0; t < o.trials; ++t) {
    std::mt19937_64 rng = trial_rng(o.seed, t);
    const int n = random_levels(rng, o.max_levels);
    const TimeMesh mesh = random_mesh(rng, n, o.ratio_bound);
    KernelSet ks(mesh);
    if (o.fault != 0.0) ks.inject_fault(o.fault);
    const DocTable rec = doc_table_recursive(mesh, n);

    double worst_orth = std::numeric_limits<double>::infinity();
    double worst_row = worst_orth;
    double worst_prod = worst_orth;
    for (int m = 1; m <= n; ++m) {
      for (int k = 1; k <= m; ++k) {
        // sum_{j=k}^m theta_{m-j}^(m) b_{j-k}^(j); only j = k and j = k+1 contribute.
        double s = ks.theta(m, k) * ks.b(k).b0;
        double scale = std::abs(s);
        if (k < m) {
          const double term = ks.theta(m, k + 1) * ks.b(k + 1).b1;
          s += term;
          scale += std::abs(term);
        }
        const double target = (k == m) ? 1.0 : 0.0;
        worst_orth = std::min(worst_orth, -std::abs(s - target) / std::max(1.0, scale));

        const double a = ks.theta(m, k);
        const double b = rec(m, k);
        const double mag = std::max({std::abs(a), std::abs(b), 1e-300});
        worst_prod = std::min(worst_prod, -std::abs(a - b) / mag);
      }
      double row = 0.0;
      for (int k = 1; k <= m; ++k) row += ks.theta(m, k);
      worst_row = std::min(worst_row, (mesh.tau(m) - row) / mesh.tau(m));
    }
    orth.record(worst_orth);
    rows.record(worst_row);
    prod.record(worst_prod);
  }
  return {orth, rows, prod};
}

std::vector<CheckReport> check_doc_kernel_bounds(const SweepOptions& o) {
  const StabilityConstants sc = stability_constants(o.ratio_bound);
  const std::vector<double> eps{0.1, 1.0, 10.0};
  CheckReport pos{"doc_positive_definiteness", 0, 0.0, 1e-10};
  CheckReport lower{"doc_quadratic_lower_bound", 0, 0.0, 1e-10};
  CheckReport upper{"doc_quadratic_upper_bound", 0, 0.0, 1e-10};
  CheckReport bil{"doc_bilinear_bound", 0, 0.0, 1e-10};
  char buf[128];
  std::snprintf(buf, sizeof buf, " m1=%.6g m2=%.6g m3=%.6g eps=0.1,1,10", sc.m1, sc.m2, sc.m3);
  pos.detail = lower.detail = upper.detail = bil.detail = sweep_detail(o) + buf;

  for (long t = 0; t < o.trials; ++t) {
    std::mt19937_64 rng = trial_rng(o.seed, t);
    const int n = random_levels(rng, o.max_levels);
    const TimeMesh mesh = random_mesh(rng, n, o.ratio_bound);
    KernelSet ks(mesh);
    if (o.fault != 0.0) ks.inject_fault(o.fault);
    const DocTable& theta = ks.theta_table();

    const std::vector<Eigen::Vector2d> v = random_vectors(rng, n);
    const std::vector<Eigen::Vector2d> w = random_vectors(rng, n);
    double tv = 0.0, tw = 0.0, abs_form = 0.0, abs_cross = 0.0;
    for (int k = 1; k <= n; ++k) {
      tv += mesh.tau(k) * v[k - 1].squaredNorm();
      tw += mesh.tau(k) * w[k - 1].squaredNorm();
      for (int l = 1; l <= k; ++l) {
        abs_form += std::abs(theta(k, l)) * v[l - 1].norm() * v[k - 1].norm();
        abs_cross += std::abs(theta(k, l)) * v[l - 1].norm() * w[k - 1].norm();
      }
    }
    const double q = doc_bilinear_form(theta, v, v);
    const double scale = safe_scale(abs_form + tv);
    pos.record(q / scale);
    lower.record((q - sc.m1 / (2.0 * sc.m2) * tv) / scale);
    upper.record((sc.m3 / 2.0 * tv - q) / scale);

    const double c = doc_bilinear_form(theta, v, w);
    double worst = std::numeric_limits<double>::infinity();
    for (double e : eps) {
      const double rhs = e * tv + sc.m3 / (4.0 * sc.m1 * e) * tw;
      worst = std::min(worst, (rhs - c) / safe_scale(abs_cross + rhs));
    }
    bil.record(worst);
  }
  return {pos, lower, upper, bil};
}

CheckReport check_embedding_h1(long trials, std::uint64_t seed, const GridSpec& grid) {
  CheckReport rep{"embedding_h1", 0, 0.0, 1e-12};
  rep.detail = "seed=" + std::to_string(seed) + " M=" + std::to_string(grid.M);
  for (long t = 0; t < trials; ++t) {
    std::mt19937_64 rng = trial_rng(seed, t);
    const EmbeddingReport e = check_embedding(random_field(rng, grid));
    rep.record(e.slack / safe_scale(std::max(e.lhs, e.rhs)));
  }
  return rep;
}

CheckReport check_embedding_l6(long trials, std::uint64_t seed, const GridSpec& grid) {
  CheckReport rep{"embedding_l6_constant_40", 0, 0.0, 1e-12};
  double worst_l4 = 0.0;
  double worst_l6 = 0.0;
  for (long t = 0; t < trials; ++t) {
    std::mt19937_64 rng = trial_rng(seed, t);
    const FieldD u = random_field(rng, grid);
    const EmbeddingReport e = check_l6_chain(u);
    rep.record(e.slack / safe_scale(std::max(e.lhs, e.rhs)));
    if (e.rhs > 0.0) worst_l6 = std::max(worst_l6, e.lhs / e.rhs);
    worst_l4 = std::max(worst_l4, l4_embedding_ratio(u));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "seed=%llu M=%d max_lhs_over_rhs=%.4g max_l4_ratio=%.4g",
                static_cast<unsigned long long>(seed), grid.M, worst_l6, worst_l4);
  rep.detail = buf;
  return rep;
}

std::vector<CheckReport> check_energy_law(const EnergyLawOptions& o) {
  const GridSpec grid{o.L, o.M};
  const ModelParams params(o.delta, grid);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Random walk of step sizes with ratios in [1/2, 2], kept inside [tau_lo, tau_hi].
  // The run stops at the first level at or past T.
  TimeMesh mesh;
  double tau = o.tau_lo;
  mesh.append(tau);
  while (mesh.t(mesh.steps()) < o.T) {
    tau = std::clamp(tau * std::exp(std::log(2.0) * (2.0 * unit(rng) - 1.0)), o.tau_lo, o.tau_hi);
    mesh.append(tau);
  }

  FieldD phi0 = coarsening_initial_data(grid);
  std::mt19937_64 frng(o.seed + 1);
  FieldD pert = random_field(frng, grid);
  const double pn = norm_max(pert);
  if (pn > 0.0) phi0 += (0.01 / pn) * pert;
  const FieldD u0 = initial_data(phi0, params, mesh.tau(1));

  SolverConfig solver;
  solver.picard_tol = o.picard_tol;
  MarchOptions opts;
  opts.snapshot_times = mesh.levels();
  const MarchResult run = march(u0, mesh, solver, params, {}, opts);

  CheckReport law{"energy_law", 0, 0.0, 1e-10};
  CheckReport bound{"solution_bound", 0, 0.0, 1e-12};
  const double C0 = solution_bound(run.trace.front().E, o.delta, o.L);
  int restricted = 0;
  for (int n = 1; n <= mesh.steps(); ++n) {
    // Absolute tolerance per step, as the law is stated; only steps obeying the restriction count.
    if (mesh.tau(n) < energy_step_bound(mesh, n, o.delta))
      law.record(run.trace[n - 1].E_mod - run.trace[n].E_mod);
    else
      ++restricted;
    const FieldD& u = run.snapshots.at(n).field;
    const VecFieldD g = gradient(u);
    const double worst = std::max({norm_l2(g), norm_lq(g, 4), norm_l2(laplacian(u))});
    bound.record((C0 - worst) / C0);
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "seed=%llu M=%d delta=%g T=%g steps=%d max_ratio=%.3f restricted=%d",
                static_cast<unsigned long long>(o.seed), o.M, o.delta, o.T, mesh.steps(), mesh.max_ratio(),
                restricted);
  law.detail = buf;
  bound.detail = std::string(buf) + " C0=" + std::to_string(C0);
  return {law, bound};
}

std::vector<CheckReport> run_verification(const VerifyConfig& c) {
  SweepOptions sweep;
  sweep.trials = c.mesh_trials;
  sweep.seed = c.seed;
  sweep.ratio_bound = c.ratio_bound;
  sweep.max_levels = c.max_levels;
  sweep.fault = c.fault;
  const GridSpec grid{6.283185307179586, c.field_M};

  std::vector<CheckReport> out;
  out.push_back(check_force_inequalities(c.force_trials, c.seed));
  out.push_back(check_positive_definiteness(sweep));
  for (CheckReport& r : check_kernel_identities(sweep)) out.push_back(std::move(r));
  for (CheckReport& r : check_doc_kernel_bounds(sweep)) out.push_back(std::move(r));
  out.push_back(check_embedding_h1(c.field_trials, c.seed, grid));
  out.push_back(check_embedding_l6(c.field_trials, c.seed, grid));
  EnergyLawOptions energy = c.energy;
  energy.seed = c.seed;
  for (CheckReport& r : check_energy_law(energy)) out.push_back(std::move(r));
  return out;
}

}  // namespace mbe
