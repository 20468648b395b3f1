#pragma once

// Shift-consistency evaluation: absolute differences between downsampled
// outputs of a tensor and its wrap-shifts, and a fixed-weight two-stage
// feature stack used as a small classification-consistency analog.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "ghs/error.hpp"
#include "ghs/moments.hpp"
#include "ghs/sampler.hpp"

namespace ghs {

inline constexpr double kDefaultTolerance = 1e-9;

struct AbsDiff {
  double sum = 0.0;
  double mean = 0.0;
};

inline AbsDiff absolute_difference(const FeatureTensor& a, const FeatureTensor& b) {
  if (a.channels() != b.channels() || a.size() != b.size())
    throw Error(ErrorKind::shape_mismatch,
                fmt::format("{}x{}x{} vs {}x{}x{}", a.channels(), a.size(), a.size(), b.channels(),
                            b.size(), b.size()));
  AbsDiff d;
  for (std::size_t s = 0; s < a.channels(); ++s) d.sum += (a.channel(s) - b.channel(s)).cwiseAbs().sum();
  const auto count = a.element_count();
  d.mean = count == 0 ? 0.0 : d.sum / static_cast<double>(count);
  return d;
}

/// Every wrap-shift of an M x M input in row-major order of (rows, cols).
inline std::vector<Shift> all_shifts(std::size_t size) {
  std::vector<Shift> shifts;
  shifts.reserve(size * size);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c)
      shifts.push_back({static_cast<long long>(c), static_cast<long long>(r)});
  return shifts;
}

struct ShiftRecord {
  Shift shift;
  AbsDiff ad;
  bool invariant = false;
};

struct ConsistencyReport {
  Method method = Method::ghs;
  std::string input_id;
  std::size_t shifts_evaluated = 0;
  double ad_sum_max = 0.0;
  double ad_sum_mean = 0.0;
  double ad_mean_max = 0.0;
  double ad_mean_mean = 0.0;
  double invariant_fraction = 0.0;
  double tolerance = kDefaultTolerance;
  std::vector<std::string> warnings;
  std::vector<ShiftRecord> per_shift;
};

/// Downsamples the unshifted tensor once as reference, then every shifted
/// copy, and aggregates the absolute differences.
inline ConsistencyReport shift_sweep(const FeatureTensor& tensor, const DownsampleConfig& config,
                                     const std::vector<Shift>& shifts, std::string input_id = {},
                                     double tolerance = kDefaultTolerance) {
  const Downsampler sampler(tensor.size(), config);
  ConsistencyReport report;
  report.method = config.method;
  report.input_id = std::move(input_id);
  report.tolerance = tolerance;

  std::size_t non_unique = 0;
  const DownsampleResult reference = sampler(tensor);
  if (reference.pivot && !reference.pivot->unique) ++non_unique;

  std::size_t invariant = 0;
  double ad_sum_total = 0.0;
  double ad_mean_total = 0.0;
  report.per_shift.reserve(shifts.size());
  for (const Shift& shift : shifts) {
    const DownsampleResult shifted = sampler(wrap_shift(tensor, shift));
    if (shifted.pivot && !shifted.pivot->unique) ++non_unique;
    const AbsDiff ad = absolute_difference(shifted.output, reference.output);
    const bool ok = ad.sum <= tolerance;
    invariant += ok ? 1 : 0;
    report.ad_sum_max = std::max(report.ad_sum_max, ad.sum);
    report.ad_mean_max = std::max(report.ad_mean_max, ad.mean);
    ad_sum_total += ad.sum;
    ad_mean_total += ad.mean;
    report.per_shift.push_back({shift.reduced(tensor.size()), ad, ok});
  }
  report.shifts_evaluated = shifts.size();
  if (!shifts.empty()) {
    const auto n = static_cast<double>(shifts.size());
    report.ad_sum_mean = ad_sum_total / n;
    report.ad_mean_mean = ad_mean_total / n;
    report.invariant_fraction = static_cast<double>(invariant) / n;
  }
  if (non_unique > 0)
    report.warnings.push_back(
        fmt::format("non-unique pivot in {} of {} evaluations", non_unique, shifts.size() + 1));
  return report;
}

inline ConsistencyReport shift_sweep_all(const FeatureTensor& tensor, const DownsampleConfig& config,
                                         std::string input_id = {},
                                         double tolerance = kDefaultTolerance) {
  return shift_sweep(tensor, config, all_shifts(tensor.size()), std::move(input_id), tolerance);
}

/// Seeded 64-bit LCG (Knuth's MMIX constants) mapped to uniform [-1, 1).
class WeightGenerator {
 public:
  explicit WeightGenerator(std::uint64_t seed) : engine_(seed) {}

  double next() {
    const std::uint64_t bits = engine_() >> 11;
    return 2.0 * (static_cast<double>(bits) * 0x1.0p-53) - 1.0;
  }

 private:
  std::linear_congruential_engine<std::uint64_t, 6364136223846793005ULL,
                                  1442695040888963407ULL, 0ULL>
      engine_;
};

inline constexpr std::size_t kFeatureStackChannels = 8;

/// weights[out][in] is a 3x3 kernel applied with wrap-around.
struct ConvLayer {
  std::vector<std::vector<Eigen::Matrix3d>> weights;

  static ConvLayer random(std::size_t in_channels, std::size_t out_channels,
                          WeightGenerator& gen) {
    ConvLayer layer;
    layer.weights.assign(out_channels, std::vector<Eigen::Matrix3d>(in_channels));
    for (auto& row : layer.weights)
      for (auto& k : row)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) k(a, b) = gen.next();
    return layer;
  }

  /// Circular 3x3 convolution followed by max(0, .).
  FeatureTensor forward_relu(const FeatureTensor& in) const {
    if (weights.empty() || weights.front().size() != in.channels())
      throw Error(ErrorKind::shape_mismatch, "conv layer channel mismatch");
    const auto m = static_cast<Eigen::Index>(in.size());
    std::vector<Matrix> out;
    out.reserve(weights.size());
    for (const auto& kernels : weights) {
      Matrix acc = Matrix::Zero(m, m);
      for (std::size_t s = 0; s < in.channels(); ++s) {
        const Matrix& x = in.channel(s);
        const Eigen::Matrix3d& k = kernels[s];
        for (Eigen::Index i = 0; i < m; ++i)
          for (Eigen::Index j = 0; j < m; ++j) {
            double v = 0.0;
            for (int a = -1; a <= 1; ++a)
              for (int b = -1; b <= 1; ++b)
                v += k(a + 1, b + 1) * x(((i + a) % m + m) % m, ((j + b) % m + m) % m);
            acc(i, j) += v;
          }
      }
      out.push_back(acc.cwiseMax(0.0));
    }
    return FeatureTensor(std::move(out));
  }
};

/// Two [conv 3x3 -> relu -> downsample] stages, then per-channel spatial sums
/// as class scores.
class FeatureStack {
 public:
  FeatureStack(std::size_t in_channels, std::size_t input_size, const DownsampleConfig& config,
               std::uint64_t seed) {
    if (input_size < 4 || input_size % 4 != 0)
      throw Error(ErrorKind::size_not_divisible,
                  fmt::format("feature stack needs a size divisible by 4, got {}", input_size));
    WeightGenerator gen(seed);
    conv1_ = ConvLayer::random(in_channels, kFeatureStackChannels, gen);
    conv2_ = ConvLayer::random(kFeatureStackChannels, kFeatureStackChannels, gen);
    DownsampleConfig stage = config;
    stage.output_size = input_size / 2;
    stage.pivot_override.reset();
    down1_.emplace(input_size, stage);
    stage.output_size = input_size / 4;
    down2_.emplace(input_size / 2, stage);
  }

  std::vector<double> scores(const FeatureTensor& image) const {
    const FeatureTensor h1 = (*down1_)(conv1_.forward_relu(image)).output;
    const FeatureTensor h2 = (*down2_)(conv2_.forward_relu(h1)).output;
    std::vector<double> out;
    out.reserve(h2.channels());
    for (const auto& c : h2.data()) out.push_back(c.sum());
    return out;
  }

  std::size_t predict(const FeatureTensor& image) const {
    const auto s = scores(image);
    return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  }

 private:
  ConvLayer conv1_;
  ConvLayer conv2_;
  std::optional<Downsampler> down1_;
  std::optional<Downsampler> down2_;
};

/// Fraction of `shifts` whose predicted class matches the unshifted prediction.
inline double feature_stack_consistency(const FeatureTensor& image, const DownsampleConfig& config,
                                        std::uint64_t seed, const std::vector<Shift>& shifts) {
  const FeatureStack stack(image.channels(), image.size(), config, seed);
  if (shifts.empty()) return 1.0;
  const std::size_t reference = stack.predict(image);
  std::size_t agree = 0;
  for (const Shift& s : shifts) agree += stack.predict(wrap_shift(image, s)) == reference ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(shifts.size());
}

inline double feature_stack_consistency(const FeatureTensor& image, const DownsampleConfig& config,
                                        std::uint64_t seed) {
  return feature_stack_consistency(image, config, seed, all_shifts(image.size()));
}

}  // namespace ghs
