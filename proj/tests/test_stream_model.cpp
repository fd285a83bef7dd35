#include "petrels/rng.hpp"
#include "petrels/stream_model.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <set>

using namespace petrels;

TEST(Rng, DerivedSeedsDependOnEveryComponent) {
  const auto base = derive_seed(1, 2, 3);
  EXPECT_EQ(base, derive_seed(1, 2, 3));
  EXPECT_NE(base, derive_seed(2, 2, 3));
  EXPECT_NE(base, derive_seed(1, 3, 3));
  EXPECT_NE(base, derive_seed(1, 2, 4));
}

TEST(Rng, ChooseReturnsSortedDistinctIndices) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto idx = rng.choose(40, 13);
    ASSERT_EQ(idx.size(), 13u);
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    EXPECT_EQ(std::set<Index>(idx.begin(), idx.end()).size(), 13u);
    EXPECT_GE(idx.front(), 0);
    EXPECT_LT(idx.back(), 40);
  }
  EXPECT_EQ(rng.choose(5, 5).size(), 5u);
  EXPECT_TRUE(rng.choose(5, 0).empty());
  EXPECT_THROW(rng.choose(5, 6), std::invalid_argument);
}

TEST(Rng, ComplexNormalHasUnitPower) {
  Rng rng(3);
  double power = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) power += std::norm(rng.complex_normal());
  EXPECT_NEAR(power / n, 1.0, 0.05);
}

TEST(LowRankStream, ObservesExactlyKEntries) {
  StreamScenario sc;
  sc.horizon = 50;
  LowRankStream<Real> stream(sc);
  for (const auto& s : stream.generate()) {
    EXPECT_EQ(s.observed_count(), 50);
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(LowRankStream, NoiseFreeFullMaskIsInSpan) {
  StreamScenario sc;
  sc.ambient_dim = 30;
  sc.true_rank = 4;
  sc.observed_per_step = 30;
  sc.horizon = 10;
  LowRankStream<Real> stream(sc);
  const Mat<Real>& u = stream.subspace_at(1);
  for (const auto& s : stream.generate()) {
    EXPECT_TRUE(s.mask.all());
    const Vec<Real> a = u.colPivHouseholderQr().solve(s.values);
    EXPECT_LT((u * a - s.values).norm(), 1e-10 * s.values.norm());
  }
}

TEST(LowRankStream, FixedSeedIsBitwiseReproducible) {
  StreamScenario sc;
  sc.noise_std = 0.1;
  sc.horizon = 20;
  sc.seed = 42;
  const auto a = gen_lowrank_stream<Real>(sc);
  const auto b = gen_lowrank_stream<Real>(sc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE((a[i].mask == b[i].mask).all());
    EXPECT_TRUE(a[i].values == b[i].values);
  }
  sc.seed = 43;
  EXPECT_FALSE(gen_lowrank_stream<Real>(sc)[0].values == a[0].values);
}

TEST(LowRankStream, SamplesDoNotDependOnDrawOrder) {
  StreamScenario sc;
  sc.horizon = 10;
  LowRankStream<Complex> stream([&] {
    StreamScenario c = sc;
    c.scalar_field = ScalarField::complex;
    return c;
  }());
  const auto late = stream.sample(9);
  stream.sample(3);
  EXPECT_TRUE(stream.sample(9).values == late.values);
}

TEST(LowRankStream, ChangeTakesEffectAfterItsIndex) {
  StreamScenario sc;
  sc.horizon = 100;
  sc.change_schedule = {{40, std::nullopt}};
  LowRankStream<Real> stream(sc);
  EXPECT_TRUE(stream.subspace_at(40) == stream.subspace_at(1));
  EXPECT_FALSE(stream.subspace_at(41) == stream.subspace_at(40));
}

TEST(LowRankStream, PartialRotationMixesWithPreviousSubspace) {
  StreamScenario sc;
  sc.horizon = 100;
  sc.change_schedule = {{10, 0.0}};
  LowRankStream<Real> stream(sc);
  EXPECT_LT((stream.subspace_at(11) - stream.subspace_at(10)).norm(), 1e-12);
}

TEST(LowRankStream, RejectsInvalidScenarios) {
  StreamScenario sc;
  sc.observed_per_step = 501;
  EXPECT_THROW(LowRankStream<Real>{sc}, std::invalid_argument);
  sc = {};
  sc.ambient_dim = 0;
  EXPECT_THROW(LowRankStream<Real>{sc}, std::invalid_argument);
  sc = {};
  sc.change_schedule = {{5, std::nullopt}, {5, std::nullopt}};
  EXPECT_THROW(LowRankStream<Real>{sc}, std::invalid_argument);
  sc = {};
  sc.column_scales = {1.0, 2.0};
  EXPECT_THROW(LowRankStream<Real>{sc}, std::invalid_argument);
  sc = {};
  EXPECT_THROW(LowRankStream<Complex>{sc}, std::invalid_argument);
}

TEST(LowRankStream, StrongWeakScalesApplyPerColumn) {
  const auto scales = strong_weak_scales(5, 5, 0.01, 3);
  ASSERT_EQ(scales.size(), 10u);
  for (std::size_t i = 5; i < 10; ++i) EXPECT_LT(std::abs(scales[i]), 0.1);
  StreamScenario sc;
  sc.column_scales = scales;
  StreamScenario plain;
  const Mat<Real> scaled = LowRankStream<Real>(sc).subspace_at(1);
  const Mat<Real> base = LowRankStream<Real>(plain).subspace_at(1);
  for (Index j = 0; j < 10; ++j) {
    EXPECT_LT((scaled.col(j) - scales[static_cast<std::size_t>(j)] * base.col(j)).norm(), 1e-12);
  }
}

TEST(DoaStream, ReferenceSceneMatchesStageOne) {
  const DoaScenario scene = reference_doa_scene(1);
  EXPECT_EQ(scene.sensors, 256);
  EXPECT_EQ(scene.observed_per_step, 30);
  EXPECT_DOUBLE_EQ(scene.noise_std, 0.1);
  const std::vector<double> freqs{0.1769, 0.1992, 0.2116, 0.6776, 0.7599};
  const std::vector<double> amps{0.3, 0.8, 0.5, 1.0, 0.1};
  EXPECT_EQ(scene.initial.frequencies, freqs);
  EXPECT_EQ(scene.initial.amplitudes, amps);
}

TEST(DoaStream, StageTwoChangesTwoFrequencies) {
  const DoaStream stream(reference_doa_scene(1));
  EXPECT_DOUBLE_EQ(stream.modes_at(1000).frequencies[2], 0.2116);
  const ModeSet& stage2 = stream.modes_at(1001);
  EXPECT_DOUBLE_EQ(stage2.frequencies[2], 0.4116);
  EXPECT_DOUBLE_EQ(stage2.frequencies[4], 0.8599);
  EXPECT_EQ(stage2.amplitudes, stream.modes_at(1000).amplitudes);
  EXPECT_EQ(stream.modes_at(2001).size(), 6u);
  EXPECT_EQ(stream.modes_at(3001).size(), 5u);
}

TEST(DoaStream, ZeroFrequencyModeGivesConstantVector) {
  DoaScenario sc;
  sc.sensors = 16;
  sc.observed_per_step = 16;
  sc.noise_std = 0.0;
  sc.initial = {{0.0}, {1.0}};
  sc.horizon = 5;
  for (const auto& s : gen_doa_stream(sc)) {
    const Complex first = s.values(0);
    EXPECT_NEAR(first.imag(), 0.0, 1e-15);
    for (Index i = 0; i < 16; ++i) EXPECT_LT(std::abs(s.values(i) - first), 1e-14);
  }
}

TEST(DoaStream, RejectsFrequencyOutsideUnitInterval) {
  DoaScenario sc;
  sc.initial = {{1.0}, {1.0}};
  EXPECT_THROW(DoaStream{sc}, std::invalid_argument);
  sc.initial = {{-0.1}, {1.0}};
  EXPECT_THROW(DoaStream{sc}, std::invalid_argument);
}

TEST(Vandermonde, ColumnsArePureExponentials) {
  const Mat<Complex> v = vandermonde({0.25}, 4);
  EXPECT_LT(std::abs(v(1, 0) - Complex(0.0, 1.0)), 1e-15);
  EXPECT_LT(std::abs(v(2, 0) - Complex(-1.0, 0.0)), 1e-15);
}

TEST(McDataset, ReferenceInstanceShape) {
  const McDataset ds = gen_mc_dataset(1000, 2000, 10, EntryDistribution::gaussian, 0.05, 1);
  EXPECT_EQ(ds.matrix.rows(), 1000);
  EXPECT_EQ(ds.matrix.cols(), 2000);
  const double rate = static_cast<double>(ds.mask.count()) / 2e6;
  EXPECT_NEAR(rate, 0.05, 0.002);
}

TEST(McDataset, FullSamplingMasksEverything) {
  const McDataset ds = gen_mc_dataset(10, 12, 2, EntryDistribution::uniform01, 1.0, 1);
  EXPECT_TRUE(ds.mask.all());
  EXPECT_GE(ds.matrix.minCoeff(), 0.0);
}

TEST(McDataset, GeneratedMatrixHasExactRank) {
  const McDataset ds = gen_mc_dataset(20, 30, 3, EntryDistribution::gaussian, 0.5, 9);
  const Eigen::JacobiSVD<Mat<Real>> svd(ds.matrix);
  const auto& sv = svd.singularValues();
  EXPECT_GT(sv(2), 1e-8 * sv(0));
  EXPECT_LT(sv(3), 1e-12 * sv(0));
}
