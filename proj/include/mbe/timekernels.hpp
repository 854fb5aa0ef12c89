#ifndef MBE_TIMEKERNELS_HPP
#define MBE_TIMEKERNELS_HPP

#include <span>
#include <stdexcept>
#include <vector>

namespace mbe {

/// Step-ratio bound below which the BDF2 kernels stay positive definite.
inline constexpr double kRatioStabilityBound = 4.864;
/// Ratio cap used by the adaptive controller (1 + sqrt 2, rounded).
inline constexpr double kAdaptiveRatioCap = 2.414;

/// Time levels 0 = t_0 < t_1 < ... < t_N. Steps and ratios are 1-based:
/// tau(n) = t_n - t_{n-1}, ratio(n) = tau(n)/tau(n-1) for n >= 2.
class TimeMesh {
 public:
  TimeMesh() : levels_{0.0}, steps_{0.0} {}

  static TimeMesh uniform(double tau, int steps);
  /// t_k = T (k/N)^r.
  static TimeMesh graded(double T, int N, double r);
  static TimeMesh from_steps(std::span<const double> taus);
  static TimeMesh from_levels(std::span<const double> levels);

  void append(double tau);
  /// Replaces the last step; used when a trial step is re-sized.
  void pop_back();

  int steps() const { return static_cast<int>(steps_.size()) - 1; }
  double t(int n) const { return levels_.at(n); }
  double tau(int n) const;
  /// r_n for 2 <= n <= N. Outside that range the ratio is taken as 0:
  /// r_1 = 0 by convention, and r_{N+1} = 0 when no next step exists.
  double ratio(int n) const;
  double max_ratio() const;
  bool admissible(double ratio_bound = kRatioStabilityBound) const { return max_ratio() <= ratio_bound; }

  const std::vector<double>& levels() const { return levels_; }

 private:
  std::vector<double> levels_;
  std::vector<double> steps_;  // steps_[0] unused
};

struct Bdf2Coeffs {
  double b0 = 0.0;
  double b1 = 0.0;
};

/// b_0^(n), b_1^(n) of the variable-step BDF2 formula; b_1^(1) = 0.
Bdf2Coeffs bdf2_coeffs(const TimeMesh& mesh, int n);
/// Step-scaled kernels sqrt(tau_n tau_{n-j}) b_j^(n) (dimensionless).
Bdf2Coeffs scaled_bdf2_coeffs(const TimeMesh& mesh, int n);

/// Lower-triangular table of DOC kernels theta_{n-k}^(n), 1 <= k <= n <= N.
class DocTable {
 public:
  DocTable() = default;
  explicit DocTable(int levels);

  int levels() const { return levels_; }
  double& operator()(int n, int k) { return data_[index(n, k)]; }
  double operator()(int n, int k) const { return data_[index(n, k)]; }
  double row_sum(int n) const;

  void add_row(std::span<const double> row);

 private:
  std::size_t index(int n, int k) const {
    if (n < 1 || n > levels_ || k < 1 || k > n) throw std::out_of_range("DocTable: index out of range");
    return static_cast<std::size_t>(n - 1) * n / 2 + (k - 1);
  }
  int levels_ = 0;
  std::vector<double> data_;
};

/// DOC kernels by the O(n^2) recursion theta_0 = 1/b_0, theta_{n-k} = -(1/b_0^(k)) sum ...
DocTable doc_table_recursive(const TimeMesh& mesh, int n);
/// DOC kernels by the closed product form (O(n) per row).
DocTable doc_table_product(const TimeMesh& mesh, int n);
inline DocTable doc_table(const TimeMesh& mesh, int n) { return doc_table_product(mesh, n); }

/// sum_{l=1}^n theta_{n-l}^(n).
double doc_row_sum(const TimeMesh& mesh, int n);

/// R_L(z,s) = (2 + 4z - z^{3/2})/(1+z) - s^{3/2}/(1+s).
double r_L(double z, double s);
/// R(u,v) used in the bound on lambda_max(B^T B) of the scaled BDF2 matrix.
double gerschgorin_R(double u, double v);

struct StabilityConstants {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m_star = 0.0;
  bool admissible = false;
};

StabilityConstants stability_constants(double ratio_bound);

/// Per-level BDF2 and DOC kernels, extended incrementally as levels are appended.
class KernelSet {
 public:
  KernelSet() = default;
  explicit KernelSet(const TimeMesh& mesh) { extend(mesh); }

  /// Computes rows for levels levels()+1 .. mesh.steps().
  void extend(const TimeMesh& mesh);

  int levels() const { return static_cast<int>(b_.size()); }
  const Bdf2Coeffs& b(int n) const { return b_.at(n - 1); }
  const Bdf2Coeffs& b_scaled(int n) const { return b_scaled_.at(n - 1); }
  double theta(int n, int k) const { return theta_(n, k); }
  double theta_scaled(int n, int k) const { return theta_scaled_(n, k); }
  const DocTable& theta_table() const { return theta_; }

  /// Test hook: scales every off-diagonal DOC entry by (1 + rel).
  void inject_fault(double rel);

 private:
  std::vector<Bdf2Coeffs> b_;
  std::vector<Bdf2Coeffs> b_scaled_;
  DocTable theta_;
  DocTable theta_scaled_;
};

/// D_2 u^n from history u^0..u^n. For n = 1 this is (2/tau_1)(u^1 - u^0),
/// where u^0 already carries the second-order start correction.
template <typename V>
V d2_apply(std::span<const V> history, const TimeMesh& mesh, int n) {
  if (n < 1 || static_cast<int>(history.size()) < n + 1)
    throw std::invalid_argument("d2_apply: history must hold u^0..u^n");
  const Bdf2Coeffs c = bdf2_coeffs(mesh, n);
  if (n == 1) return (history[1] - history[0]) * c.b0;
  return (history[n] - history[n - 1]) * c.b0 + (history[n - 1] - history[n - 2]) * c.b1;
}

}  // namespace mbe

#endif  // MBE_TIMEKERNELS_HPP
