#ifndef MBE_GRID_HPP
#define MBE_GRID_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mbe {

/// Uniform periodic M x M grid on (0,L)^2 with spacing h = L/M.
struct GridSpec {
  double L = 0.0;
  int M = 0;

  GridSpec() = default;
  GridSpec(double length, int points) : L(length), M(points) {
    if (!(length > 0.0) || !std::isfinite(length))
      throw std::invalid_argument("GridSpec: L must be positive and finite");
    if (points < 4)
      throw std::invalid_argument("GridSpec: M must be at least 4");
  }

  double h() const { return L / M; }
  double area() const { return L * L; }
  std::size_t size() const { return static_cast<std::size_t>(M) * M; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Sum of n terms term(k), k in [0,n), added in a fixed pairwise tree so
/// that the result depends only on the input values, never on threading.
template <typename Scalar, typename Term>
Scalar pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
  constexpr std::size_t kLeaf = 16;
  if (end - begin <= kLeaf) {
    Scalar acc(0);
    for (std::size_t k = begin; k < end; ++k) acc += term(k);
    return acc;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum<Scalar>(begin, mid, term) + pairwise_sum<Scalar>(mid, end, term);
}

/// Grid function in the periodic space V_h. Storage is row-major with
/// (i,j) -> i*M + j, where i indexes x and j indexes y.
template <typename Scalar>
class Field {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Field() = default;
  explicit Field(const GridSpec& grid) : grid_(grid), values_(Array::Zero(grid.M, grid.M)) {}
  Field(const GridSpec& grid, Array values) : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != grid.M || values_.cols() != grid.M)
      throw std::invalid_argument("Field: value array does not match grid");
  }

  static Field constant(const GridSpec& grid, Scalar c) {
    return Field(grid, Array::Constant(grid.M, grid.M, c));
  }

  /// Samples fn(x_i, y_j) at x_i = i*h, y_j = j*h.
  template <typename Fn>
  static Field sample(const GridSpec& grid, Fn&& fn) {
    Field out(grid);
    const Scalar h = Scalar(grid.L) / Scalar(grid.M);
    for (int i = 0; i < grid.M; ++i)
      for (int j = 0; j < grid.M; ++j) out(i, j) = fn(h * Scalar(i), h * Scalar(j));
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  int M() const { return grid_.M; }
  Scalar h() const { return Scalar(grid_.L) / Scalar(grid_.M); }

  Array& array() { return values_; }
  const Array& array() const { return values_; }
  Scalar* data() { return values_.data(); }
  const Scalar* data() const { return values_.data(); }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  Scalar& operator()(int i, int j) { return values_(i, j); }
  Scalar operator()(int i, int j) const { return values_(i, j); }

  bool all_finite() const { return values_.isFinite().all(); }

  template <typename Other>
  Field<Other> cast() const {
    return Field<Other>(grid_, values_.template cast<Other>());
  }

  Field& operator+=(const Field& o) { check_same(o); values_ += o.values_; return *this; }
  Field& operator-=(const Field& o) { check_same(o); values_ -= o.values_; return *this; }
  Field& operator*=(Scalar s) { values_ *= s; return *this; }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, Scalar s) { return a *= s; }
  friend Field operator*(Scalar s, Field a) { return a *= s; }
  friend Field operator-(Field a) { a.values_ = -a.values_; return a; }

  void check_same(const Field& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("Field: grid mismatch");
  }

 private:
  GridSpec grid_;
  Array values_;
};

/// Discrete vector field, e.g. the gradient (Delta_x v, Delta_y v).
template <typename Scalar>
struct VecField {
  Field<Scalar> x;
  Field<Scalar> y;

  VecField() = default;
  explicit VecField(const GridSpec& grid) : x(grid), y(grid) {}
  VecField(Field<Scalar> fx, Field<Scalar> fy) : x(std::move(fx)), y(std::move(fy)) { x.check_same(y); }

  const GridSpec& grid() const { return x.grid(); }
};

using FieldD = Field<double>;
using VecFieldD = VecField<double>;

namespace detail {
inline int wrap(int i, int M) { return i < 0 ? i + M : (i >= M ? i - M : i); }
}  // namespace detail

/// Five-point Laplacian delta_x^2 + delta_y^2 with periodic wrap.
template <typename Scalar>
Field<Scalar> laplacian(const Field<Scalar>& v) {
  const int M = v.M();
  const Scalar inv_h2 = Scalar(1) / (v.h() * v.h());
  Field<Scalar> out(v.grid());
  for (int i = 0; i < M; ++i) {
    const int ip = detail::wrap(i + 1, M), im = detail::wrap(i - 1, M);
    for (int j = 0; j < M; ++j) {
      const int jp = detail::wrap(j + 1, M), jm = detail::wrap(j - 1, M);
      out(i, j) = (v(ip, j) + v(im, j) + v(i, jp) + v(i, jm) - Scalar(4) * v(i, j)) * inv_h2;
    }
  }
  return out;
}

/// Centered gradient (Delta_x v, Delta_y v).
template <typename Scalar>
VecField<Scalar> gradient(const Field<Scalar>& v) {
  const int M = v.M();
  const Scalar inv_2h = Scalar(1) / (Scalar(2) * v.h());
  VecField<Scalar> out(v.grid());
  for (int i = 0; i < M; ++i) {
    const int ip = detail::wrap(i + 1, M), im = detail::wrap(i - 1, M);
    for (int j = 0; j < M; ++j) {
      const int jp = detail::wrap(j + 1, M), jm = detail::wrap(j - 1, M);
      out.x(i, j) = (v(ip, j) - v(im, j)) * inv_2h;
      out.y(i, j) = (v(i, jp) - v(i, jm)) * inv_2h;
    }
  }
  return out;
}

/// Delta_x(w.x) + Delta_y(w.y); the negative adjoint of gradient().
template <typename Scalar>
Field<Scalar> divergence(const VecField<Scalar>& w) {
  const int M = w.x.M();
  const Scalar inv_2h = Scalar(1) / (Scalar(2) * w.x.h());
  Field<Scalar> out(w.grid());
  for (int i = 0; i < M; ++i) {
    const int ip = detail::wrap(i + 1, M), im = detail::wrap(i - 1, M);
    for (int j = 0; j < M; ++j) {
      const int jp = detail::wrap(j + 1, M), jm = detail::wrap(j - 1, M);
      out(i, j) = ((w.x(ip, j) - w.x(im, j)) + (w.y(i, jp) - w.y(i, jm))) * inv_2h;
    }
  }
  return out;
}

template <typename Scalar>
Field<Scalar> bilaplacian(const Field<Scalar>& v) {
  return laplacian(laplacian(v));
}

// ---------------------------------------------------------------------------
// Inner products and norms. All reductions go through pairwise_sum.

template <typename Scalar>
Scalar inner(const Field<Scalar>& v, const Field<Scalar>& w) {
  v.check_same(w);
  const Scalar* a = v.data();
  const Scalar* b = w.data();
  const Scalar s = pairwise_sum<Scalar>(0, v.size(), [&](std::size_t k) { return a[k] * b[k]; });
  return v.h() * v.h() * s;
}

template <typename Scalar>
Scalar inner(const VecField<Scalar>& v, const VecField<Scalar>& w) {
  return inner(v.x, w.x) + inner(v.y, w.y);
}

template <typename Scalar>
Scalar norm_l2(const Field<Scalar>& v) {
  using std::sqrt;
  return sqrt(inner(v, v));
}

template <typename Scalar>
Scalar norm_l2(const VecField<Scalar>& w) {
  using std::sqrt;
  return sqrt(inner(w, w));
}

namespace detail {
template <typename Scalar>
Scalar int_power(Scalar a, int q) {
  switch (q) {
    case 2: return a * a;
    case 3: return a * a * a;
    case 4: { const Scalar s = a * a; return s * s; }
    case 6: { const Scalar s = a * a * a; return s * s; }
    default: throw std::invalid_argument("norm_lq: q must be one of 2, 3, 4, 6");
  }
}
template <typename Scalar>
Scalar qth_root(Scalar s, int q) {
  using std::cbrt;
  using std::sqrt;
  switch (q) {
    case 2: return sqrt(s);
    case 3: return cbrt(s);
    case 4: return sqrt(sqrt(s));
    case 6: return sqrt(cbrt(s));
    default: throw std::invalid_argument("norm_lq: q must be one of 2, 3, 4, 6");
  }
}
}  // namespace detail

/// (h^2 sum |v|^q)^(1/q) for q in {2,3,4,6}.
template <typename Scalar>
Scalar norm_lq(const Field<Scalar>& v, int q) {
  using std::abs;
  (void)detail::int_power(Scalar(0), q);
  const Scalar* a = v.data();
  const Scalar s = pairwise_sum<Scalar>(0, v.size(), [&](std::size_t k) { return detail::int_power(abs(a[k]), q); });
  return detail::qth_root(v.h() * v.h() * s, q);
}

/// Pointwise Euclidean length |w_ij| raised to q, summed with weight h^2.
template <typename Scalar>
Scalar norm_lq(const VecField<Scalar>& w, int q) {
  using std::sqrt;
  (void)detail::int_power(Scalar(0), q);
  const Scalar* a = w.x.data();
  const Scalar* b = w.y.data();
  const Scalar t = pairwise_sum<Scalar>(0, w.x.size(), [&](std::size_t k) {
    const Scalar m2 = a[k] * a[k] + b[k] * b[k];
    switch (q) {
      case 2: return m2;
      case 4: return m2 * m2;
      case 6: return m2 * m2 * m2;
      default: return detail::int_power(sqrt(m2), q);
    }
  });
  const Scalar h = w.x.h();
  return detail::qth_root(h * h * t, q);
}

/// Discrete H^1 seminorm from forward differences, |v|_1^2 = |delta_x v|^2 + |delta_y v|^2.
template <typename Scalar>
Scalar h1_seminorm(const Field<Scalar>& v) {
  using std::sqrt;
  const int M = v.M();
  const Scalar h = v.h();
  const Scalar s = pairwise_sum<Scalar>(0, v.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k / M), j = static_cast<int>(k % M);
    const Scalar dx = (v(i, j) - v(detail::wrap(i - 1, M), j)) / h;
    const Scalar dy = (v(i, j) - v(i, detail::wrap(j - 1, M))) / h;
    return dx * dx + dy * dy;
  });
  return sqrt(h * h * s);
}

template <typename Scalar>
Scalar norm_max(const Field<Scalar>& v) {
  return v.array().abs().maxCoeff();
}

/// Both sides of ||grad_h v||^2 <= ||Delta_h v|| * ||v||.
struct EmbeddingReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool violated = false;
};

template <typename Scalar>
EmbeddingReport check_embedding(const Field<Scalar>& v, double rel_tol = 1e-12) {
  const Scalar g = norm_l2(gradient(v));
  EmbeddingReport r;
  r.lhs = static_cast<double>(g * g);
  r.rhs = static_cast<double>(norm_l2(laplacian(v)) * norm_l2(v));
  r.slack = r.rhs - r.lhs;
  r.violated = r.slack < -rel_tol * std::max(r.lhs, r.rhs);
  return r;
}

}  // namespace mbe

#endif  // MBE_GRID_HPP
