#include <gtest/gtest.h>

#include "ghs/harness.hpp"
#include "ghs/io.hpp"
#include "oracles.hpp"

using namespace ghs;
using ghs::testing::random_tensor;
using ghs::testing::Rng;

namespace {

FeatureTensor bundled_image() { return read_pgm(GHS_DATA_DIR "/cameraman32.pgm").decoded; }

DownsampleConfig config_for(Method m, std::size_t n) {
  DownsampleConfig c;
  c.method = m;
  c.output_size = n;
  return c;
}

}  // namespace

TEST(AbsoluteDifference, Examples) {
  Rng rng(41);
  const auto x = random_tensor(2, 5, rng);
  const auto same = absolute_difference(x, x);
  EXPECT_EQ(same.sum, 0.0);
  EXPECT_EQ(same.mean, 0.0);
  const FeatureTensor zeros({Matrix::Zero(2, 2)});
  const FeatureTensor ones({Matrix::Ones(2, 2)});
  const auto d = absolute_difference(zeros, ones);
  EXPECT_EQ(d.sum, 4.0);
  EXPECT_EQ(d.mean, 1.0);
}

TEST(AbsoluteDifference, Pseudometric) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_tensor(3, 4, rng);
    const auto b = random_tensor(3, 4, rng);
    const auto ab = absolute_difference(a, b);
    const auto ba = absolute_difference(b, a);
    EXPECT_EQ(ab.sum, ba.sum);
    EXPECT_GT(ab.sum, 0.0);
    EXPECT_NEAR(ab.mean, ab.sum / 48.0, 1e-15);
  }
}

TEST(AbsoluteDifference, ShapeMismatch) {
  try {
    absolute_difference(FeatureTensor::zeros(1, 4), FeatureTensor::zeros(2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape_mismatch);
  }
  EXPECT_THROW(absolute_difference(FeatureTensor::zeros(1, 4), FeatureTensor::zeros(1, 2)), Error);
}

TEST(ShiftSweep, GhsIsFullyInvariant) {
  Rng rng(43);
  const auto t = random_tensor(3, 8, rng);
  const auto r = shift_sweep_all(t, config_for(Method::ghs, 4), "random");
  EXPECT_EQ(r.shifts_evaluated, 64u);
  EXPECT_EQ(r.per_shift.size(), 64u);
  EXPECT_EQ(r.invariant_fraction, 1.0);
  EXPECT_LE(r.ad_sum_max, 1e-9);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.input_id, "random");
}

TEST(ShiftSweep, ZeroShiftOnlyIsExact) {
  Rng rng(44);
  const auto t = random_tensor(2, 8, rng);
  for (Method m : kAllMethods) {
    const auto r = shift_sweep(t, config_for(m, 4), {Shift{0, 0}});
    EXPECT_EQ(r.shifts_evaluated, 1u);
    EXPECT_EQ(r.ad_sum_max, 0.0) << to_string(m);
    EXPECT_EQ(r.ad_mean_max, 0.0);
    EXPECT_EQ(r.invariant_fraction, 1.0);
  }
}

TEST(ShiftSweep, MaxpoolOnBundledImageVaries) {
  const auto r = shift_sweep_all(bundled_image(), config_for(Method::maxpool, 16));
  EXPECT_EQ(r.shifts_evaluated, 1024u);
  EXPECT_GT(r.ad_sum_max, 1e-3);
  EXPECT_LT(r.invariant_fraction, 1.0);
  EXPECT_GE(r.invariant_fraction, 0.0);
}

TEST(ShiftSweep, AggregatesAreConsistent) {
  Rng rng(45);
  const auto t = random_tensor(1, 8, rng);
  const auto r = shift_sweep(t, config_for(Method::lpf, 4), {{1, 0}, {0, 3}, {2, 2}, {8, 8}});
  double sum = 0.0, max = 0.0;
  std::size_t ok = 0;
  for (const auto& rec : r.per_shift) {
    sum += rec.ad.sum;
    max = std::max(max, rec.ad.sum);
    ok += rec.invariant ? 1 : 0;
  }
  EXPECT_EQ(r.ad_sum_max, max);
  EXPECT_NEAR(r.ad_sum_mean, sum / 4, 1e-12);
  EXPECT_EQ(r.invariant_fraction, ok / 4.0);
  EXPECT_EQ(r.per_shift[3].shift, (Shift{0, 0}));
  EXPECT_TRUE(r.per_shift[3].invariant);
}

TEST(ShiftSweep, ReportsNonUniquePivots) {
  const FeatureTensor flat({Matrix::Constant(8, 8, 0.5)});
  const auto r = shift_sweep_all(flat, config_for(Method::ghs, 4));
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("non-unique pivot"), std::string::npos);
  EXPECT_LE(r.ad_sum_max, 1e-9);
}

TEST(ShiftSweep, PropagatesConfigErrors) {
  EXPECT_THROW(shift_sweep_all(FeatureTensor::zeros(1, 9), config_for(Method::aps, 4)), Error);
}

TEST(WeightGenerator, MatchesReferenceSequence) {
  // Reference values from an independent big-integer evaluation of the LCG.
  WeightGenerator g0(0);
  EXPECT_EQ(g0.next(), -0.8435826902434123);
  EXPECT_EQ(g0.next(), -0.7966024794064139);
  EXPECT_EQ(g0.next(), 0.21064664525046695);
  WeightGenerator g1(1);
  EXPECT_EQ(g1.next(), -0.15358165825457348);
  EXPECT_EQ(g1.next(), 0.01881488576744128);
}

TEST(FeatureStack, GhsIsFullyConsistent) {
  Rng rng(46);
  const auto t = random_tensor(2, 8, rng);
  EXPECT_EQ(feature_stack_consistency(t, config_for(Method::ghs, 4), 7), 1.0);
}

TEST(FeatureStack, ZeroShiftIsConsistentForEveryMethod) {
  Rng rng(47);
  const auto t = random_tensor(1, 8, rng);
  for (Method m : kAllMethods)
    EXPECT_EQ(feature_stack_consistency(t, config_for(m, 4), 3, {Shift{0, 0}}), 1.0);
}

TEST(FeatureStack, Deterministic) {
  Rng rng(48);
  const auto t = random_tensor(1, 8, rng);
  const FeatureStack a(1, 8, config_for(Method::maxpool, 4), 11);
  const FeatureStack b(1, 8, config_for(Method::maxpool, 4), 11);
  EXPECT_EQ(a.scores(t), b.scores(t));
  const FeatureStack c(1, 8, config_for(Method::maxpool, 4), 12);
  EXPECT_NE(a.scores(t), c.scores(t));
}

TEST(FeatureStack, RequiresSizeDivisibleByFour) {
  try {
    feature_stack_consistency(FeatureTensor::zeros(1, 6), config_for(Method::ghs, 3), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size_not_divisible);
  }
}

TEST(FeatureStack, ConvolutionIsShiftEquivariant) {
  Rng rng(49);
  const auto t = random_tensor(2, 8, rng);
  WeightGenerator gen(5);
  const auto layer = ConvLayer::random(2, 3, gen);
  const auto base = layer.forward_relu(t);
  for (const auto& s : all_shifts(8))
    EXPECT_EQ(ghs::testing::max_abs_diff(layer.forward_relu(wrap_shift(t, s)), wrap_shift(base, s)), 0.0);
}

TEST(ReportFormats, JsonIsCanonical) {
  ConsistencyReport r;
  r.method = Method::lpf;
  r.input_id = "x";
  r.shifts_evaluated = 4;
  r.ad_sum_max = 0.1;
  r.tolerance = 1e-9;
  const std::string json = canonical_json(report_to_json(r));
  EXPECT_NE(json.find("\"ad_sum_max\": 0.10000000000000001"), std::string::npos) << json;
  EXPECT_NE(json.find("\"tolerance\": 1.0000000000000001e-09"), std::string::npos) << json;
  EXPECT_LT(json.find("\"ad_mean_max\""), json.find("\"ad_sum_max\""));
  EXPECT_LT(json.find("\"method\""), json.find("\"warnings\""));
  const auto parsed = nlohmann::json::parse(json);
  EXPECT_EQ(parsed["method"], "lpf");
  EXPECT_EQ(parsed["shifts_evaluated"], 4);
  EXPECT_EQ(parsed["ad_sum_max"].get<double>(), 0.1);
}

TEST(ReportFormats, CsvHasOneRowPerShift) {
  Rng rng(50);
  const auto t = random_tensor(1, 4, rng);
  const auto r = shift_sweep_all(t, config_for(Method::maxpool, 2), "t");
  const std::string csv = report_to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);
  EXPECT_EQ(csv.rfind("method,input_id,shift_cols,shift_rows,ad_sum,ad_mean,invariant\n", 0), 0u);
}
