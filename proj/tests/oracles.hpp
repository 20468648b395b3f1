#pragma once

// Reference computations used only by tests. Each one follows a different
// route from the library code it checks: explicit sums instead of matrix
// products, factorial normalization instead of the normalized recurrence,
// direct index arithmetic instead of wrap_shift.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "ghs/ghs.hpp"

namespace ghs::testing {

/// Uniform [lo, hi) samples from a fixed-seed engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  long long integer(long long lo, long long hi) {
    return lo + static_cast<long long>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

inline Matrix random_matrix(std::size_t m, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Matrix out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = rng.uniform(lo, hi);
  return out;
}

inline FeatureTensor random_tensor(std::size_t channels, std::size_t m, Rng& rng) {
  std::vector<Matrix> c;
  for (std::size_t s = 0; s < channels; ++s) c.push_back(random_matrix(m, rng));
  return FeatureTensor(std::move(c));
}

/// Direct evaluation of the Gaussian-Hermite definition with factorials.
inline double ghp_naive(int p, double x, double sigma) {
  double fact = 1.0;
  for (int k = 2; k <= p; ++k) fact *= k;
  const double norm = 1.0 / std::sqrt(std::pow(2.0, p) * fact * sigma * std::sqrt(std::numbers::pi));
  return norm * std::exp(-x * x / (2.0 * sigma * sigma)) * hermite_series(p, x / sigma);
}

/// Composite trapezoid rule on n equally spaced points over [a, b].
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / (n - 1);
  double sum = 0.5 * (f(a) + f(b));
  for (int k = 1; k < n - 1; ++k) sum += f(a + k * h);
  return sum * h;
}

/// Moment A_pq as the explicit double sum over pixels with naive basis values.
inline double moment_elementwise(const Matrix& image, int p, int q, double sigma) {
  const auto m = image.rows();
  const double denom = static_cast<double>(m - 1);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double xi = (2.0 * static_cast<double>(i) - denom) / denom;
      const double xj = (2.0 * static_cast<double>(j) - denom) / denom;
      sum += ghp_naive(p, xi, sigma) * ghp_naive(q, xj, sigma) * image(i, j);
    }
  return 4.0 / (denom * denom) * sum;
}

/// X^[c,r](i, j) = X(i - r, j - c) by explicit modular indexing.
template <typename M>
M shifted(const M& x, long long c, long long r) {
  const auto n = static_cast<long long>(x.rows());
  M out(x.rows(), x.cols());
  for (long long i = 0; i < n; ++i)
    for (long long j = 0; j < n; ++j) out(i, j) = x(((i - r) % n + n) % n, ((j - c) % n + n) % n);
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const FeatureTensor& a, const FeatureTensor& b) {
  double d = 0.0;
  for (std::size_t s = 0; s < a.channels(); ++s) d = std::max(d, max_abs_diff(a.channel(s), b.channel(s)));
  return d;
}

/// Tensor whose channel-aggregated saliency has a single strict maximum.
inline bool has_unique_pivot(const FeatureTensor& t) { return find_pivot(t).unique; }

}  // namespace ghs::testing
