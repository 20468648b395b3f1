#pragma once

// Downsampling operators over FeatureTensors: Gaussian-Hermite sampling and
// the max-pool, blur-pool and adaptive polyphase baselines.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "ghs/basis.hpp"
#include "ghs/error.hpp"
#include "ghs/moments.hpp"

namespace ghs {

enum class Method { ghs, maxpool, lpf, aps };

inline constexpr std::array<Method, 4> kAllMethods{Method::ghs, Method::maxpool, Method::lpf,
                                                  Method::aps};

constexpr std::string_view to_string(Method method) {
  switch (method) {
    case Method::ghs: return "ghs";
    case Method::maxpool: return "maxpool";
    case Method::lpf: return "lpf";
    case Method::aps: return "aps";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  throw Error(ErrorKind::invalid_config, "unknown method '" + std::string(name) + "'");
}

struct DownsampleConfig {
  Method method = Method::ghs;
  std::size_t output_size = 0;
  /// Gaussian scale; sigma_default(orders - 1) when empty.
  std::optional<double> sigma;
  /// Keep only the first N orders instead of all M.
  bool order_truncation = false;
  int pivot_window = 1;
  PivotAggregation pivot_aggregation = PivotAggregation::absolute;
  /// Skip pivot detection and re-anchor the basis here instead.
  std::optional<Shift> pivot_override;
  double aps_norm_exponent = 2.0;
  std::vector<double> lpf_taps{0.25, 0.5, 0.25};
};

/// Checks `config` against an input of spatial size `input_size`.
inline void validate(const DownsampleConfig& config, std::size_t input_size) {
  if (input_size == 0) throw Error(ErrorKind::shape_mismatch, "empty input");
  if (config.method == Method::ghs) {
    if (config.output_size < 1 || config.output_size > input_size)
      throw Error(ErrorKind::invalid_config,
                  fmt::format("ghs output size {} must be in [1, {}]", config.output_size,
                              input_size));
    if (config.sigma && !(*config.sigma > 0.0 && std::isfinite(*config.sigma)))
      throw Error(ErrorKind::nonpositive_sigma, "sigma must be a positive finite real");
    if (config.pivot_window != 1 && config.pivot_window != 3 && config.pivot_window != 5)
      throw Error(ErrorKind::invalid_config, "pivot window must be 1, 3 or 5");
    return;
  }
  if (input_size % 2 != 0)
    throw Error(ErrorKind::odd_size_input,
                fmt::format("{} needs an even input size, got {}", to_string(config.method),
                            input_size));
  if (config.output_size != input_size / 2)
    throw Error(ErrorKind::invalid_config,
                fmt::format("{} only supports output size {} for input {}",
                            to_string(config.method), input_size / 2, input_size));
  if (config.method == Method::aps && !(config.aps_norm_exponent > 0.0))
    throw Error(ErrorKind::invalid_config, "aps norm exponent must be positive");
}

struct DownsampleResult {
  FeatureTensor output;
  std::optional<PivotResult> pivot;
  std::vector<std::string> warnings;
};

/// GHS with its analysis and synthesis bases built once for a fixed input and
/// output size, for reuse across channels, tensors and shift sweeps.
class GhsSampler {
 public:
  GhsSampler(std::size_t input_size, DownsampleConfig config)
      : config_(std::move(config)),
        analysis_(make_analysis(input_size, config_)),
        synthesis_(build_basis(analysis_.orders(), make_sampling_grid(config_.output_size),
                               analysis_.sigma())) {}

  std::size_t input_size() const noexcept { return analysis_.grid().size(); }
  std::size_t output_size() const noexcept { return synthesis_.grid().size(); }
  const BasisMatrix& analysis() const noexcept { return analysis_; }
  const BasisMatrix& synthesis() const noexcept { return synthesis_; }

  DownsampleResult operator()(const FeatureTensor& tensor) const {
    if (tensor.size() != input_size())
      throw Error(ErrorKind::dimension_mismatch,
                  fmt::format("sampler built for size {}, got {}", input_size(), tensor.size()));
    PivotResult pivot;
    if (config_.pivot_override) {
      pivot = {config_.pivot_override->reduced(input_size()), true};
    } else {
      pivot = find_pivot(tensor, {config_.pivot_aggregation, config_.pivot_window});
    }
    DownsampleResult result;
    std::vector<Matrix> out;
    out.reserve(tensor.channels());
    for (const auto& c : tensor.data())
      out.push_back(reconstruct(ghm_pivot(c, analysis_, pivot.location), synthesis_));
    result.output = FeatureTensor(std::move(out));
    result.pivot = pivot;
    if (!pivot.unique)
      result.warnings.push_back(fmt::format("non-unique pivot; using first maximum at ({},{})",
                                            pivot.location.cols, pivot.location.rows));
    return result;
  }

 private:
  static BasisMatrix make_analysis(std::size_t input_size, const DownsampleConfig& config) {
    DownsampleConfig checked = config;
    checked.method = Method::ghs;
    validate(checked, input_size);
    const std::size_t orders = config.order_truncation ? config.output_size : input_size;
    const double sigma = config.sigma.value_or(sigma_default(static_cast<long long>(orders) - 1));
    return build_basis(orders, make_sampling_grid(input_size), sigma);
  }

  DownsampleConfig config_;
  BasisMatrix analysis_;
  BasisMatrix synthesis_;
};

inline DownsampleResult ghs_downsample(const FeatureTensor& tensor, const DownsampleConfig& config) {
  return GhsSampler(tensor.size(), config)(tensor);
}

namespace detail {

inline void require_even(const FeatureTensor& tensor) {
  if (tensor.size() == 0 || tensor.size() % 2 != 0)
    throw Error(ErrorKind::odd_size_input,
                fmt::format("stride-2 pooling needs an even size, got {}", tensor.size()));
}

inline Eigen::Index wrap(Eigen::Index i, Eigen::Index m) { return ((i % m) + m) % m; }

}  // namespace detail

/// 2x2 stride-2 max pooling per channel.
inline FeatureTensor maxpool_downsample(const FeatureTensor& tensor) {
  detail::require_even(tensor);
  const auto n = static_cast<Eigen::Index>(tensor.size() / 2);
  std::vector<Matrix> out;
  out.reserve(tensor.channels());
  for (const auto& c : tensor.data()) {
    Matrix pooled(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) pooled(i, j) = c.block<2, 2>(2 * i, 2 * j).maxCoeff();
    out.push_back(std::move(pooled));
  }
  return FeatureTensor(std::move(out));
}

/// Throws bad-filter unless `taps` has odd length, nonnegative entries and unit sum.
inline void check_taps(const std::vector<double>& taps) {
  if (taps.empty() || taps.size() % 2 == 0)
    throw Error(ErrorKind::bad_filter, "filter needs an odd number of taps");
  double sum = 0.0;
  for (double t : taps) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw Error(ErrorKind::bad_filter, "filter taps must be nonnegative");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorKind::bad_filter, "filter taps must sum to 1");
}

/// Circular separable convolution of one channel with a centered 1-D filter.
inline Matrix circular_blur(const Matrix& image, const std::vector<double>& taps) {
  const Eigen::Index m = image.rows();
  const auto half = static_cast<Eigen::Index>(taps.size() / 2);
  Matrix horizontal = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(taps.size()); ++k)
        horizontal(i, j) += taps[k] * image(i, detail::wrap(j + k - half, m));
  Matrix out = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(taps.size()); ++k)
        out(i, j) += taps[k] * horizontal(detail::wrap(i + k - half, m), j);
  return out;
}

/// Blur-pool: dense 2x2 max (stride 1, wrap padding), circular low-pass
/// filter, then keep even rows and columns.
inline FeatureTensor lpf_downsample(const FeatureTensor& tensor, const std::vector<double>& taps) {
  detail::require_even(tensor);
  check_taps(taps);
  const auto m = static_cast<Eigen::Index>(tensor.size());
  const Eigen::Index n = m / 2;
  std::vector<Matrix> out;
  out.reserve(tensor.channels());
  for (const auto& c : tensor.data()) {
    Matrix dense(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index i1 = detail::wrap(i + 1, m);
        const Eigen::Index j1 = detail::wrap(j + 1, m);
        dense(i, j) = std::max({c(i, j), c(i, j1), c(i1, j), c(i1, j1)});
      }
    const Matrix blurred = circular_blur(dense, taps);
    Matrix sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = blurred(2 * i, 2 * j);
    out.push_back(std::move(sub));
  }
  return FeatureTensor(std::move(out));
}

/// Index of the polyphase component (row parity, column parity) in the fixed
/// order (0,0), (0,1), (1,0), (1,1) with the largest l_p energy over all channels.
inline int aps_select_component(const FeatureTensor& tensor, double norm_exponent) {
  detail::require_even(tensor);
  if (!(norm_exponent > 0.0)) throw Error(ErrorKind::invalid_config, "norm exponent must be > 0");
  std::array<double, 4> energy{};
  const auto m = static_cast<Eigen::Index>(tensor.size());
  for (const auto& c : tensor.data())
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        energy[static_cast<std::size_t>(2 * (i % 2) + (j % 2))] +=
            std::pow(std::abs(c(i, j)), norm_exponent);
  int best = 0;
  for (int k = 1; k < 4; ++k)
    if (energy[static_cast<std::size_t>(k)] > energy[static_cast<std::size_t>(best)]) best = k;
  return best;
}

/// Adaptive polyphase sampling: subsample every channel on the max-energy grid.
inline FeatureTensor aps_downsample(const FeatureTensor& tensor, double norm_exponent) {
  const int component = aps_select_component(tensor, norm_exponent);
  const Eigen::Index di = component / 2;
  const Eigen::Index dj = component % 2;
  const auto n = static_cast<Eigen::Index>(tensor.size() / 2);
  std::vector<Matrix> out;
  out.reserve(tensor.channels());
  for (const auto& c : tensor.data()) {
    Matrix sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = c(2 * i + di, 2 * j + dj);
    out.push_back(std::move(sub));
  }
  return FeatureTensor(std::move(out));
}

/// Config-driven dispatcher. Builds the GHS bases once; reuse it across a sweep.
class Downsampler {
 public:
  Downsampler(std::size_t input_size, DownsampleConfig config)
      : config_(std::move(config)), input_size_(input_size) {
    validate(config_, input_size_);
    if (config_.method == Method::ghs) ghs_.emplace(input_size_, config_);
    if (config_.method == Method::lpf) check_taps(config_.lpf_taps);
  }

  const DownsampleConfig& config() const noexcept { return config_; }
  std::size_t input_size() const noexcept { return input_size_; }

  DownsampleResult operator()(const FeatureTensor& tensor) const {
    if (tensor.size() != input_size_)
      throw Error(ErrorKind::dimension_mismatch,
                  fmt::format("downsampler built for size {}, got {}", input_size_, tensor.size()));
    switch (config_.method) {
      case Method::ghs: return (*ghs_)(tensor);
      case Method::maxpool: return {maxpool_downsample(tensor), std::nullopt, {}};
      case Method::lpf: return {lpf_downsample(tensor, config_.lpf_taps), std::nullopt, {}};
      case Method::aps:
        return {aps_downsample(tensor, config_.aps_norm_exponent), std::nullopt, {}};
    }
    throw Error(ErrorKind::invalid_config, "unknown method");
  }

 private:
  DownsampleConfig config_;
  std::size_t input_size_;
  std::optional<GhsSampler> ghs_;
};

inline DownsampleResult downsample(const FeatureTensor& tensor, const DownsampleConfig& config) {
  return Downsampler(tensor.size(), config)(tensor);
}

}  // namespace ghs
