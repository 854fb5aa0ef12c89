#include "mbe/timekernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mbe {

namespace {

double pow32(double x) { return x * std::sqrt(x); }

void check_step(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("TimeMesh: steps must be positive and finite, got " + std::to_string(tau));
}

}  // namespace

// ---------------------------------------------------------------------------
// TimeMesh

TimeMesh TimeMesh::uniform(double tau, int steps) {
  if (steps < 0) throw std::invalid_argument("TimeMesh::uniform: negative step count");
  TimeMesh mesh;
  for (int n = 1; n <= steps; ++n) {
    check_step(tau);
    mesh.levels_.push_back(n * tau);
    mesh.steps_.push_back(tau);
  }
  return mesh;
}

TimeMesh TimeMesh::graded(double T, int N, double r) {
  if (!(T > 0.0) || N < 1 || !(r >= 1.0))
    throw std::invalid_argument("TimeMesh::graded: need T > 0, N >= 1, r >= 1");
  std::vector<double> levels(N + 1);
  for (int k = 0; k <= N; ++k) levels[k] = T * std::pow(static_cast<double>(k) / N, r);
  levels[N] = T;
  return from_levels(levels);
}

TimeMesh TimeMesh::from_steps(std::span<const double> taus) {
  TimeMesh mesh;
  for (double tau : taus) mesh.append(tau);
  return mesh;
}

TimeMesh TimeMesh::from_levels(std::span<const double> levels) {
  if (levels.empty() || levels.front() != 0.0)
    throw std::invalid_argument("TimeMesh::from_levels: first level must be 0");
  TimeMesh mesh;
  for (std::size_t n = 1; n < levels.size(); ++n) {
    const double tau = levels[n] - levels[n - 1];
    check_step(tau);
    mesh.levels_.push_back(levels[n]);
    mesh.steps_.push_back(tau);
  }
  return mesh;
}

void TimeMesh::append(double tau) {
  check_step(tau);
  levels_.push_back(levels_.back() + tau);
  steps_.push_back(tau);
}

void TimeMesh::pop_back() {
  if (steps() == 0) throw std::logic_error("TimeMesh::pop_back: mesh has no steps");
  levels_.pop_back();
  steps_.pop_back();
}

double TimeMesh::tau(int n) const {
  if (n < 1 || n > steps()) throw std::out_of_range("TimeMesh::tau: level " + std::to_string(n) + " out of range");
  return steps_[n];
}

double TimeMesh::ratio(int n) const {
  if (n < 2 || n > steps()) return 0.0;
  return steps_[n] / steps_[n - 1];
}

double TimeMesh::max_ratio() const {
  double r = 0.0;
  for (int n = 2; n <= steps(); ++n) r = std::max(r, ratio(n));
  return r;
}

// ---------------------------------------------------------------------------
// BDF2 kernels

Bdf2Coeffs bdf2_coeffs(const TimeMesh& mesh, int n) {
  if (n < 1 || n > mesh.steps())
    throw std::out_of_range("bdf2_coeffs: level " + std::to_string(n) + " out of range");
  const double tau = mesh.tau(n);
  if (n == 1) return {2.0 / tau, 0.0};
  const double r = mesh.ratio(n);
  return {(1.0 + 2.0 * r) / (tau * (1.0 + r)), -r * r / (tau * (1.0 + r))};
}

Bdf2Coeffs scaled_bdf2_coeffs(const TimeMesh& mesh, int n) {
  if (n < 1 || n > mesh.steps())
    throw std::out_of_range("scaled_bdf2_coeffs: level " + std::to_string(n) + " out of range");
  if (n == 1) return {2.0, 0.0};
  const double r = mesh.ratio(n);
  return {(1.0 + 2.0 * r) / (1.0 + r), -pow32(r) / (1.0 + r)};
}

// ---------------------------------------------------------------------------
// DOC kernels

DocTable::DocTable(int levels) : levels_(levels), data_(static_cast<std::size_t>(levels) * (levels + 1) / 2, 0.0) {}

double DocTable::row_sum(int n) const {
  double s = 0.0;
  for (int k = 1; k <= n; ++k) s += (*this)(n, k);
  return s;
}

void DocTable::add_row(std::span<const double> row) {
  if (static_cast<int>(row.size()) != levels_ + 1)
    throw std::invalid_argument("DocTable::add_row: row length must equal the new level");
  data_.insert(data_.end(), row.begin(), row.end());
  ++levels_;
}

DocTable doc_table_recursive(const TimeMesh& mesh, int n) {
  if (n > mesh.steps()) throw std::out_of_range("doc_table_recursive: not enough levels");
  std::vector<Bdf2Coeffs> b(n + 1);
  for (int j = 1; j <= n; ++j) b[j] = bdf2_coeffs(mesh, j);
  DocTable table(n);
  for (int m = 1; m <= n; ++m) {
    table(m, m) = 1.0 / b[m].b0;
    for (int k = m - 1; k >= 1; --k) {
      // b_j^(n) = 0 for j >= 2, so only the j = k+1 term of the sum survives.
      table(m, k) = -table(m, k + 1) * b[k + 1].b1 / b[k].b0;
    }
  }
  return table;
}

namespace {

// Scaled DOC row n: theta~_{n-j}^(n) = (1/b~_0^(j)) prod_{i=j+1}^n r_i^{3/2}/(1+2 r_i).
void scaled_doc_row(const TimeMesh& mesh, int n, std::vector<double>& row) {
  row.assign(n, 0.0);
  double prod = 1.0;
  for (int j = n; j >= 1; --j) {
    row[j - 1] = prod / scaled_bdf2_coeffs(mesh, j).b0;
    if (j >= 2) {
      const double r = mesh.ratio(j);
      prod *= pow32(r) / (1.0 + 2.0 * r);
    }
  }
}

}  // namespace

DocTable doc_table_product(const TimeMesh& mesh, int n) {
  if (n > mesh.steps()) throw std::out_of_range("doc_table_product: not enough levels");
  DocTable table;
  std::vector<double> row;
  for (int m = 1; m <= n; ++m) {
    scaled_doc_row(mesh, m, row);
    for (int j = 1; j <= m; ++j) row[j - 1] *= std::sqrt(mesh.tau(m) * mesh.tau(j));
    table.add_row(row);
  }
  return table;
}

double doc_row_sum(const TimeMesh& mesh, int n) {
  if (n < 1 || n > mesh.steps()) throw std::out_of_range("doc_row_sum: level out of range");
  std::vector<double> row;
  scaled_doc_row(mesh, n, row);
  double s = 0.0;
  for (int j = 1; j <= n; ++j) s += row[j - 1] * std::sqrt(mesh.tau(n) * mesh.tau(j));
  return s;
}

// ---------------------------------------------------------------------------
// Stability constants

double r_L(double z, double s) {
  return (2.0 + 4.0 * z - pow32(z)) / (1.0 + z) - pow32(s) / (1.0 + s);
}

double gerschgorin_R(double u, double v) {
  const double a = (1.0 + 2.0 * u) * (1.0 + 2.0 * u + pow32(u)) / ((1.0 + u) * (1.0 + u));
  const double b = pow32(v) * (1.0 + 2.0 * v + pow32(v)) / ((1.0 + v) * (1.0 + v));
  return a + b;
}

StabilityConstants stability_constants(double rs) {
  if (!(rs > 0.0) || !std::isfinite(rs))
    throw std::invalid_argument("stability_constants: ratio bound must be positive");
  StabilityConstants c;
  c.m1 = (2.0 + 2.0 * rs * (2.0 - std::sqrt(rs))) / (1.0 + rs);
  c.m2 = 3.0 + gerschgorin_R(rs, rs);
  c.m_star = pow32(rs) / (1.0 + 2.0 * rs);
  c.m3 = 2.0 / (1.0 - c.m_star);
  c.admissible = rs < kRatioStabilityBound && c.m1 > 0.0 && c.m_star < 1.0;
  return c;
}

// ---------------------------------------------------------------------------
// KernelSet

void KernelSet::extend(const TimeMesh& mesh) {
  std::vector<double> row;
  for (int n = levels() + 1; n <= mesh.steps(); ++n) {
    b_.push_back(bdf2_coeffs(mesh, n));
    b_scaled_.push_back(scaled_bdf2_coeffs(mesh, n));
    scaled_doc_row(mesh, n, row);
    theta_scaled_.add_row(row);
    for (int j = 1; j <= n; ++j) row[j - 1] *= std::sqrt(mesh.tau(n) * mesh.tau(j));
    theta_.add_row(row);
  }
}

void KernelSet::inject_fault(double rel) {
  for (int n = 2; n <= theta_.levels(); ++n)
    for (int k = 1; k < n; ++k) {
      theta_(n, k) *= 1.0 + rel;
      theta_scaled_(n, k) *= 1.0 + rel;
    }
}

}  // namespace mbe
