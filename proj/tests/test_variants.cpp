#include "petrels/metrics.hpp"
#include "petrels/petrels.hpp"
#include "petrels/variants.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <omp.h>

using namespace petrels;
using namespace petrels::testing_support;

namespace {

TrackerConfig base_config(Index m, Index r, double lambda, double delta = 1e3) {
  TrackerConfig c;
  c.ambient_dim = m;
  c.rank = r;
  c.discount = lambda;
  c.init_scale = delta;
  return c;
}

RegularizedConfig reg_config(Index m, Index r, double lambda, double mu, double delta = 1e3) {
  RegularizedConfig c;
  c.base = base_config(m, r, lambda, delta);
  c.mu = mu;
  return c;
}

std::vector<ObservedSample<Real>> full_samples(const Mat<Real>& u, std::int64_t n,
                                               std::uint64_t seed) {
  return random_samples<Real>(u, n, 1.0, 0.05, seed);
}

}  // namespace

TEST(Simplified, FullMaskMatchesPetrels) {
  const Mat<Real> u = gaussian<Real>(20, 3, 1);
  const TrackerConfig c = base_config(20, 3, 0.95, 10.0);
  auto a = init_state<Real>(c, std::nullopt, 1);
  auto b = init_simplified<Real>(c, std::nullopt, 1);
  for (const auto& s : full_samples(u, 100, 1)) {
    petrels_step(a, c, s);
    simplified_step(b, c, s);
    ASSERT_LT(rel_diff(b.subspace, a.subspace), 1e-10) << "t=" << s.t;
  }
  for (const auto& p : a.rinv) EXPECT_LT(rel_diff(p, b.rinv), 1e-10);
}

TEST(Simplified, UnobservedRowIsUnchanged) {
  const Mat<Real> u = gaussian<Real>(10, 2, 2);
  const TrackerConfig c = base_config(10, 2, 0.9);
  auto state = init_simplified<Real>(c, std::nullopt, 2);
  for (const auto& s : random_samples<Real>(u, 20, 0.5, 0.0, 2)) {
    const Mat<Real> before = state.subspace;
    simplified_step(state, c, s);
    for (Index i = 0; i < 10; ++i) {
      if (!s.mask(i)) EXPECT_TRUE(state.subspace.row(i) == before.row(i));
    }
  }
}

TEST(Simplified, SkippedStepDecaysSharedRinv) {
  const TrackerConfig c = base_config(5, 2, 0.5, 1.0);
  auto state = init_simplified<Real>(c, std::nullopt, 1);
  ObservedSample<Real> s;
  s.t = 1;
  s.values = Vec<Real>::Zero(5);
  s.mask = MaskVec::Constant(5, false);
  const auto out = simplified_step(state, c, s);
  EXPECT_TRUE(out.skipped);
  EXPECT_TRUE(state.rinv.isApprox(2.0 * Mat<Real>::Identity(2, 2)));
}

TEST(Simplified, SerialAndParallelAgreeBitwise) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  const Mat<Complex> u = gaussian<Complex>(120, 3, 3);
  const auto samples = random_samples<Complex>(u, 60, 0.3, 0.1, 3);
  TrackerConfig par = base_config(120, 3, 0.9);
  par.scalar_field = ScalarField::complex;
  TrackerConfig ser = par;
  ser.execution = Execution::serial;
  auto a = init_simplified<Complex>(par, std::nullopt, 1);
  auto b = init_simplified<Complex>(ser, std::nullopt, 1);
  for (const auto& s : samples) {
    simplified_step(a, par, s);
    simplified_step(b, ser, s);
  }
  EXPECT_TRUE(a.subspace == b.subspace);
  EXPECT_TRUE(a.rinv == b.rinv);
  omp_set_num_threads(saved);
}

TEST(Simplified, RejectsOutOfOrderSamples) {
  const TrackerConfig c = base_config(4, 2, 0.9);
  auto state = init_simplified<Real>(c, std::nullopt, 1);
  EXPECT_THROW(simplified_step(state, c, full_sample<Real>(Vec<Real>::Ones(4), 3)),
               std::invalid_argument);
}

TEST(Regularized, SingleEquationIsRidgeSolution) {
  RegularizedConfig c = reg_config(3, 2, 1.0, 0.7);
  c.t0_scale = 0.0;
  auto state = init_regularized<Real>(c, std::nullopt, 4);
  ObservedSample<Real> s;
  s.t = 1;
  s.mask = MaskVec::Constant(3, false);
  s.mask(1) = true;
  s.values = Vec<Real>::Zero(3);
  s.values(1) = 2.5;
  const auto out = regularized_step(state, c, s);
  const Vec<Real>& a = out.coefficient;
  const RowVec<Real> want = 2.5 * a.transpose() / (a.squaredNorm() + 0.7);
  EXPECT_LT((state.subspace.row(1) - want).norm(), 1e-14 * want.norm());
  // Rows with no observation have only the ridge term: d = 0.
  EXPECT_TRUE(state.subspace.row(0).isZero(0.0));
}

TEST(Regularized, ZeroMuCoincidesWithPetrels) {
  const Mat<Real> u = gaussian<Real>(25, 3, 5);
  const auto samples = random_samples<Real>(u, 100, 0.4, 0.05, 5);
  const RegularizedConfig c = reg_config(25, 3, 0.95, 0.0, 10.0);
  auto a = init_state<Real>(c.base, std::nullopt, 1);
  auto b = init_regularized<Real>(c, std::nullopt, 1);
  for (const auto& s : samples) {
    petrels_step(a, c.base, s);
    regularized_step(b, c, s);
  }
  EXPECT_LT(rel_diff(b.subspace, a.subspace), 1e-8);
}

TEST(Regularized, VanishingMuApproachesPetrels) {
  const Mat<Real> u = gaussian<Real>(25, 3, 6);
  const auto samples = random_samples<Real>(u, 100, 0.4, 0.05, 6);
  const RegularizedConfig c = reg_config(25, 3, 0.95, 1e-10, 10.0);
  auto a = init_state<Real>(c.base, std::nullopt, 1);
  auto b = init_regularized<Real>(c, std::nullopt, 1);
  for (const auto& s : samples) {
    petrels_step(a, c.base, s);
    regularized_step(b, c, s);
  }
  EXPECT_LT(rel_diff(b.subspace, a.subspace), 1e-6);
}

TEST(Regularized, HugeMuShrinksSubspaceTowardZero) {
  // The ridge pulls d_m toward 0, not toward its initial value, so a huge mu
  // collapses the scale of D while the span is still learned.
  const Mat<Real> u = gaussian<Real>(30, 3, 2);
  const RegularizedConfig c = reg_config(30, 3, 0.98, 1e9);
  auto state = init_regularized<Real>(c, std::nullopt, 1);
  const double initial_norm = state.subspace.norm();
  for (const auto& s : random_samples<Real>(u, 100, 0.5, 0.0, 2)) regularized_step(state, c, s);
  EXPECT_LT(state.subspace.norm(), 1e-6 * initial_norm);
  EXPECT_LT(subspace_error(state.subspace, u), 1e-2);
}

TEST(Regularized, ScheduleIsEvaluatedPerStep) {
  RegularizedConfig c = reg_config(6, 2, 0.9, 0.0);
  c.mu_schedule = [](std::int64_t t) { return t == 3 ? -1.0 : 0.1; };
  auto state = init_regularized<Real>(c, std::nullopt, 1);
  const auto samples = random_samples<Real>(gaussian<Real>(6, 2, 1), 3, 0.8, 0.0, 1);
  regularized_step(state, c, samples[0]);
  EXPECT_DOUBLE_EQ(state.mu_prev, 0.1);
  regularized_step(state, c, samples[1]);
  EXPECT_THROW(regularized_step(state, c, samples[2]), std::invalid_argument);
}

TEST(Regularized, RejectsInvalidConfig) {
  RegularizedConfig c = reg_config(6, 2, 0.9, -1.0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = reg_config(6, 2, 0.9, 1.0);
  c.t0_scale = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Regularized, IndefiniteGramThrows) {
  // mu = 0 with t0 = 0 leaves T_m singular for rows that were never observed.
  RegularizedConfig c = reg_config(4, 2, 1.0, 0.0);
  c.t0_scale = 0.0;
  auto state = init_regularized<Real>(c, std::nullopt, 1);
  ObservedSample<Real> s;
  s.t = 1;
  s.mask = MaskVec::Constant(4, false);
  s.mask(0) = true;
  s.values = Vec<Real>::Zero(4);
  s.values(0) = 1.0;
  EXPECT_THROW(regularized_step(state, c, s), ConditioningError);
}

TEST(Regularized, SerialAndParallelAgreeBitwise) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  const Mat<Real> u = gaussian<Real>(90, 3, 9);
  const auto samples = random_samples<Real>(u, 50, 0.3, 0.1, 9);
  RegularizedConfig par = reg_config(90, 4, 0.95, 1e-3);
  RegularizedConfig ser = par;
  ser.base.execution = Execution::serial;
  auto a = init_regularized<Real>(par, std::nullopt, 1);
  auto b = init_regularized<Real>(ser, std::nullopt, 1);
  for (const auto& s : samples) {
    regularized_step(a, par, s);
    regularized_step(b, ser, s);
  }
  EXPECT_TRUE(a.subspace == b.subspace);
  omp_set_num_threads(saved);
}
