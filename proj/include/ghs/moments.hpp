#pragma once

// Discrete Gaussian-Hermite moments, wrap-shifts, pivot-shifted and
// max-centered moments, and reconstruction.
//
// Index convention: a matrix X is addressed X(i, j) with i the row and j the
// column. A Shift {cols = c, rows = r} moves content c columns right and r rows
// down with wrap-around: X^[c,r](i, j) = X(i - r mod M, j - c mod M).
// Pivots use the same coordinates, so a maximum at row i, column j is the
// pivot {cols = j, rows = i}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ghs/basis.hpp"
#include "ghs/error.hpp"

namespace ghs {

struct Shift {
  long long cols = 0;
  long long rows = 0;

  /// Representative with both components in [0, size).
  Shift reduced(std::size_t size) const {
    const auto m = static_cast<long long>(size);
    return {((cols % m) + m) % m, ((rows % m) + m) % m};
  }

  friend bool operator==(const Shift&, const Shift&) = default;
};

/// Wrap-shift of a square matrix of any scalar type.
template <typename Derived>
auto wrap_shift(const Eigen::MatrixBase<Derived>& matrix, Shift shift) {
  using Scalar = typename Derived::Scalar;
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (matrix.rows() != matrix.cols())
    throw Error(ErrorKind::non_square_input, "wrap_shift needs a square matrix");
  const auto m = static_cast<std::size_t>(matrix.rows());
  Result out(matrix.rows(), matrix.cols());
  if (m == 0) return out;
  const Shift s = shift.reduced(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t src_i = (i + m - static_cast<std::size_t>(s.rows)) % m;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t src_j = (j + m - static_cast<std::size_t>(s.cols)) % m;
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          matrix(static_cast<Eigen::Index>(src_i), static_cast<Eigen::Index>(src_j));
    }
  }
  return out;
}

/// P x P moment matrix; coeffs(p, q) pairs order p along rows with order q
/// along columns.
struct MomentMatrix {
  Matrix coeffs;
  std::size_t source_size = 0;
  double sigma = 1.0;
  std::optional<Shift> pivot;

  std::size_t orders() const noexcept { return static_cast<std::size_t>(coeffs.rows()); }
};

/// S channels of square M x M real samples.
class FeatureTensor {
 public:
  FeatureTensor() = default;

  explicit FeatureTensor(std::vector<Matrix> channels) : channels_(std::move(channels)) {
    if (channels_.empty()) throw Error(ErrorKind::shape_mismatch, "tensor needs a channel");
    const auto m = channels_.front().rows();
    for (const auto& c : channels_) {
      if (c.rows() != c.cols()) throw Error(ErrorKind::non_square_input, "channel not square");
      if (c.rows() != m) throw Error(ErrorKind::shape_mismatch, "channel sizes differ");
      if (!c.allFinite()) throw Error(ErrorKind::invalid_config, "non-finite sample");
    }
  }

  static FeatureTensor zeros(std::size_t channels, std::size_t size) {
    const auto m = static_cast<Eigen::Index>(size);
    return FeatureTensor(std::vector<Matrix>(channels, Matrix::Zero(m, m)));
  }

  std::size_t channels() const noexcept { return channels_.size(); }
  std::size_t size() const noexcept {
    return channels_.empty() ? 0 : static_cast<std::size_t>(channels_.front().rows());
  }
  std::size_t element_count() const noexcept { return channels() * size() * size(); }

  const Matrix& channel(std::size_t s) const { return channels_.at(s); }
  std::span<const Matrix> data() const noexcept { return channels_; }

 private:
  std::vector<Matrix> channels_;
};

inline FeatureTensor wrap_shift(const FeatureTensor& tensor, Shift shift) {
  std::vector<Matrix> out;
  out.reserve(tensor.channels());
  for (const auto& c : tensor.data()) out.push_back(wrap_shift(c, shift));
  return FeatureTensor(std::move(out));
}

namespace detail {

inline void check_moment_dims(const Matrix& image, const BasisMatrix& basis) {
  if (image.rows() != image.cols())
    throw Error(ErrorKind::non_square_input, "moments need a square image");
  if (static_cast<std::size_t>(image.rows()) != basis.grid().size())
    throw Error(ErrorKind::dimension_mismatch,
                "image size " + std::to_string(image.rows()) + " vs basis grid " +
                    std::to_string(basis.grid().size()));
}

inline double moment_scale(const BasisMatrix& basis) {
  const double dx = basis.grid().spacing();
  return dx * dx;
}

}  // namespace detail

/// A = dx^2 Q F Q^T.
inline MomentMatrix ghm(const Matrix& image, const BasisMatrix& basis) {
  detail::check_moment_dims(image, basis);
  const Matrix& q = basis.values();
  Matrix coeffs = detail::moment_scale(basis) * (q * image * q.transpose());
  return {std::move(coeffs), basis.grid().size(), basis.sigma(), std::nullopt};
}

/// Moments with the basis re-anchored at `pivot` (left factor shifted by
/// pivot.rows, right by pivot.cols). Computed as ghm of the image moved back by
/// the pivot, so ghm_pivot(F^[c,r], Q, {c,r}) reproduces ghm(F, Q) bit for bit.
inline MomentMatrix ghm_pivot(const Matrix& image, const BasisMatrix& basis, Shift pivot) {
  detail::check_moment_dims(image, basis);
  const Shift p = pivot.reduced(basis.grid().size());
  MomentMatrix out = ghm(wrap_shift(image, Shift{-p.cols, -p.rows}), basis);
  out.pivot = p;
  return out;
}

enum class PivotAggregation { absolute, signed_sum };

struct PivotOptions {
  PivotAggregation aggregation = PivotAggregation::absolute;
  /// Box size (1, 3 or 5) summed circularly over the saliency map before argmax.
  int window = 1;
};

struct PivotResult {
  Shift location;
  bool unique = true;
};

/// Saliency map Y(i, j) = sum_s |F_s(i, j)| (or the signed sum), optionally
/// box-filtered with wrap-around.
inline Matrix pivot_saliency(const FeatureTensor& tensor, const PivotOptions& options = {}) {
  if (options.window != 1 && options.window != 3 && options.window != 5)
    throw Error(ErrorKind::invalid_config, "pivot window must be 1, 3 or 5");
  const auto m = static_cast<Eigen::Index>(tensor.size());
  Matrix y = Matrix::Zero(m, m);
  for (const auto& c : tensor.data()) {
    if (options.aggregation == PivotAggregation::absolute)
      y += c.cwiseAbs();
    else
      y += c;
  }
  if (options.window == 1) return y;
  const Eigen::Index h = options.window / 2;
  Matrix boxed = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      double acc = 0.0;
      for (Eigen::Index di = -h; di <= h; ++di)
        for (Eigen::Index dj = -h; dj <= h; ++dj)
          acc += y(((i + di) % m + m) % m, ((j + dj) % m + m) % m);
      boxed(i, j) = acc;
    }
  return boxed;
}

/// Location of the saliency maximum; first occurrence in row-major order wins
/// ties and clears the uniqueness flag.
inline PivotResult find_pivot(const FeatureTensor& tensor, const PivotOptions& options = {}) {
  if (tensor.channels() == 0 || tensor.size() == 0)
    throw Error(ErrorKind::shape_mismatch, "empty tensor");
  const Matrix y = pivot_saliency(tensor, options);
  Eigen::Index best_i = 0;
  Eigen::Index best_j = 0;
  double best = y(0, 0);
  int hits = 1;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (i == 0 && j == 0) continue;
      if (y(i, j) > best) {
        best = y(i, j);
        best_i = i;
        best_j = j;
        hits = 1;
      } else if (y(i, j) == best) {
        ++hits;
      }
    }
  return {{static_cast<long long>(best_j), static_cast<long long>(best_i)}, hits == 1};
}

struct MaxCenteredMoments {
  std::vector<MomentMatrix> channels;
  PivotResult pivot;
};

/// Max-centered moments: one shared pivot from find_pivot applied to every
/// channel. Invariant to wrap-shifts of the tensor when the pivot is unique.
inline MaxCenteredMoments ghm_max_centered(const FeatureTensor& tensor, const BasisMatrix& basis,
                                           const PivotOptions& options = {}) {
  if (tensor.size() != basis.grid().size())
    throw Error(ErrorKind::dimension_mismatch, "tensor size does not match basis grid");
  MaxCenteredMoments out;
  out.pivot = find_pivot(tensor, options);
  out.channels.reserve(tensor.channels());
  for (const auto& c : tensor.data()) out.channels.push_back(ghm_pivot(c, basis, out.pivot.location));
  return out;
}

/// N x N image Q_syn^T A Q_syn, where Q_syn may live on a coarser grid.
inline Matrix reconstruct(const MomentMatrix& moments, const BasisMatrix& synthesis) {
  if (moments.coeffs.rows() != moments.coeffs.cols() ||
      moments.orders() != synthesis.orders())
    throw Error(ErrorKind::dimension_mismatch,
                "moment orders " + std::to_string(moments.orders()) + " vs synthesis orders " +
                    std::to_string(synthesis.orders()));
  const Matrix& q = synthesis.values();
  return q.transpose() * moments.coeffs * q;
}

}  // namespace ghs
