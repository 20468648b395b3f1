#pragma once

// Hermite and Gaussian-Hermite polynomials, sampling grids and the basis
// matrices used by every moment computation.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ghs/error.hpp"

namespace ghs {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Largest order accepted by hermite_series; p! and 2^p stay exact in a double.
inline constexpr int kSeriesMaxOrder = 20;

/// Physicists' Hermite polynomial H_p(x) from the explicit power series.
/// Slow and only exact for small p; kept as a reference for the recurrences.
inline double hermite_series(int p, double x) {
  if (p < 0) throw Error(ErrorKind::invalid_config, "negative polynomial order");
  if (p > kSeriesMaxOrder)
    throw Error(ErrorKind::order_too_large,
                "series evaluation supports p <= " + std::to_string(kSeriesMaxOrder));
  auto factorial = [](int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  double sum = 0.0;
  for (int k = 0; k <= p / 2; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sign * std::pow(2.0 * x, p - 2 * k) / (factorial(k) * factorial(p - 2 * k));
  }
  return factorial(p) * sum;
}

/// H_p(x) by the three-term recurrence H_p = 2x H_{p-1} - 2(p-1) H_{p-2}.
inline double hermite_recurrence(int p, double x) {
  if (p < 0) throw Error(ErrorKind::invalid_config, "negative polynomial order");
  double prev = 1.0;
  if (p == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 2; k <= p; ++k) {
    const double next = 2.0 * x * cur - 2.0 * (k - 1) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {

inline void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorKind::nonpositive_sigma, "sigma must be a positive finite real");
}

// Fills out[0..count) with the orthonormal Gaussian-Hermite values at x.
// The normalized recurrence never forms 2^p p!, so it is stable for any order.
template <typename Out>
void ghp_sequence(int count, double x, double sigma, Out&& out) {
  const double t = x / sigma;
  double prev = std::pow(std::numbers::pi, -0.25) / std::sqrt(sigma) * std::exp(-0.5 * t * t);
  if (count > 0) out(0, prev);
  if (count <= 1) return;
  double cur = std::numbers::sqrt2 * t * prev;
  out(1, cur);
  for (int p = 2; p < count; ++p) {
    const double next =
        t * std::sqrt(2.0 / p) * cur - std::sqrt(static_cast<double>(p - 1) / p) * prev;
    prev = cur;
    cur = next;
    out(p, cur);
  }
}

}  // namespace detail

/// Orthonormal Gaussian-Hermite polynomial value at x with scale sigma.
inline double ghp_value(int p, double x, double sigma) {
  if (p < 0) throw Error(ErrorKind::invalid_config, "negative polynomial order");
  detail::check_sigma(sigma);
  double result = 0.0;
  detail::ghp_sequence(p + 1, x, sigma, [&](int k, double v) {
    if (k == p) result = v;
  });
  return result;
}

/// Default Gaussian scale for a basis whose highest retained order is n_max.
inline double sigma_default(long long n_max) {
  if (n_max < 1) return 1.0;
  return 0.9 * std::pow(static_cast<double>(n_max), -0.52);
}

/// M equally spaced sample positions mapped onto [-1, 1].
class GridSpec {
 public:
  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<double>& positions() const noexcept { return positions_; }
  double position(std::size_t i) const { return positions_.at(i); }
  double spacing() const noexcept { return spacing_; }

 private:
  GridSpec(std::vector<double> positions, double spacing)
      : positions_(std::move(positions)), spacing_(spacing) {}

  std::vector<double> positions_;
  double spacing_;

  friend GridSpec make_grid(std::size_t);
  friend GridSpec make_sampling_grid(std::size_t);
};

/// Grid x_i = (2i - M + 1) / (M - 1), spacing 2 / (M - 1). Requires M >= 2.
inline GridSpec make_grid(std::size_t size) {
  if (size < 2) throw Error(ErrorKind::grid_too_small, "grid needs at least 2 points");
  const double denom = static_cast<double>(size - 1);
  std::vector<double> positions(size);
  for (std::size_t i = 0; i < size; ++i)
    positions[i] = (2.0 * static_cast<double>(i) - denom) / denom;
  return GridSpec(std::move(positions), 2.0 / denom);
}

/// As make_grid, but a single-pixel axis maps to one point at the origin with
/// spacing 2 instead of failing. Used by the moment and sampling pipelines.
inline GridSpec make_sampling_grid(std::size_t size) {
  if (size == 1) return GridSpec({0.0}, 2.0);
  return make_grid(size);
}

/// Gaussian-Hermite values sampled on a grid: values()(p, i) = Ĥ_p(x_i, sigma).
/// Rows are orders, columns grid positions, so A = dx^2 Q F Q^T.
class BasisMatrix {
 public:
  std::size_t orders() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  const GridSpec& grid() const noexcept { return grid_; }
  double sigma() const noexcept { return sigma_; }
  const Matrix& values() const noexcept { return values_; }

  /// Copy of the values with the position axis wrap-shifted by `offset`:
  /// result(p, i) = values(p, (i - offset) mod M).
  Matrix position_shifted(long long offset) const {
    const auto m = static_cast<long long>(grid_.size());
    const long long t = ((offset % m) + m) % m;
    if (t == 0) return values_;
    Matrix out(values_.rows(), values_.cols());
    for (long long i = 0; i < m; ++i) out.col((i + t) % m) = values_.col(i);
    return out;
  }

 private:
  BasisMatrix(GridSpec grid, double sigma, Matrix values)
      : grid_(std::move(grid)), sigma_(sigma), values_(std::move(values)) {}

  GridSpec grid_;
  double sigma_;
  Matrix values_;

  friend BasisMatrix build_basis(std::size_t, const GridSpec&, double);
};

inline BasisMatrix build_basis(std::size_t orders, const GridSpec& grid, double sigma) {
  if (orders < 1) throw Error(ErrorKind::invalid_config, "basis needs at least one order");
  detail::check_sigma(sigma);
  Matrix values(static_cast<Eigen::Index>(orders), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    detail::ghp_sequence(static_cast<int>(orders), grid.position(i), sigma,
                         [&](int p, double v) { values(p, col) = v; });
  }
  return BasisMatrix(grid, sigma, std::move(values));
}

}  // namespace ghs
