#pragma once

#include "petrels/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace petrels {

enum class Execution { serial, parallel };

struct TrackerConfig {
  Index ambient_dim = 0;
  Index rank = 0;
  double discount = 0.98;   // lambda
  double init_scale = 1e3;  // delta: Rinv starts at delta * I
  ScalarField scalar_field = ScalarField::real;
  // Overrides `discount` when set: lambda_n for time index n.
  std::function<double(std::int64_t)> discount_schedule;
  // Re-invert the maintained R_m every `refresh_period` steps (0 = never).
  Index refresh_period = 0;
  // Re-express the state on an orthonormal basis every `rebalance_period`
  // steps (0 = never). See rebalance_basis.
  Index rebalance_period = 0;
  Execution execution = Execution::parallel;

  void validate() const;
  double discount_at(std::int64_t t) const;
};

/// PETRELS state: the subspace estimate D (M x r) and one inverse correlation
/// matrix per row.
template <typename S>
struct TrackerState {
  Mat<S> subspace;
  std::vector<Mat<S>> rinv;
  std::vector<Mat<S>> correlation;  // populated only when refresh_period > 0
  std::int64_t t = 0;
};

template <typename S>
Mat<S> random_subspace(Index rows, Index cols, std::uint64_t seed);

template <typename S>
TrackerState<S> init_state(const TrackerConfig& config, const std::optional<Mat<S>>& initial,
                           std::uint64_t seed);

/// Minimum-norm minimizer of ||P (x - D a)||_2 over the observed rows.
/// Throws EmptyObservationError when nothing is observed.
template <typename S>
Vec<S> estimate_coefficient(const Mat<S>& subspace, const ObservedSample<S>& sample);

template <typename S>
Vec<S> reconstruct(const Mat<S>& subspace, const Vec<S>& coeff) {
  return subspace * coeff;
}

/// sqrt(sum over observed m of |values_m - xhat_m|^2)
template <typename S>
double observed_residual(const ObservedSample<S>& sample, const Vec<S>& xhat);

template <typename S>
struct RowUpdate {
  RowVec<S> row;
  Mat<S> rinv;
};

/// Functional form of one row's recursive update (see kernels::update_row_inplace).
template <typename S>
RowUpdate<S> update_row(const RowVec<S>& row, const Mat<S>& rinv, const Vec<S>& coeff, S value,
                        bool observed, double lambda);

/// Reparametrizes the state on an orthonormal basis of the same span:
/// with D = Q R (thin QR), D' = Q, Rinv_m' = R^{-H} Rinv_m R^{-1} and
/// R_m' = R R_m R^H. Each row's discounted objective is the same function of
/// the new coordinates, so span(D) evolves exactly as before in exact
/// arithmetic; the point is to keep the basis, and with it the conditioning of
/// Rinv, from degenerating when the rank is overestimated. Returns false (and
/// changes nothing) when D is numerically rank deficient.
template <typename S>
bool rebalance_basis(TrackerState<S>& state, Execution execution = Execution::parallel);

/// One iteration of the tracker: coefficient, reconstruction, then all rows.
/// An all-false mask leaves D unchanged, decays every Rinv by 1/lambda and
/// returns a skipped output with an empty coefficient.
template <typename S>
StepOutput<S> petrels_step(TrackerState<S>& state, const TrackerConfig& config,
                           const ObservedSample<S>& sample);

}  // namespace petrels
