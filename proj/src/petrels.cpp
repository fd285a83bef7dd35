#include "petrels/petrels.hpp"

#include "petrels/linalg.hpp"
#include "petrels/rng.hpp"
#include "petrels/row_kernels.hpp"

#include <cmath>
#include <string>

namespace petrels {

void TrackerConfig::validate() const {
  if (ambient_dim <= 0 || rank <= 0 || rank > ambient_dim) {
    throw std::invalid_argument("TrackerConfig: need 1 <= rank <= ambient_dim");
  }
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw std::invalid_argument("TrackerConfig: discount must lie in (0, 1]");
  }
  if (!(init_scale > 0.0)) throw std::invalid_argument("TrackerConfig: init_scale must be > 0");
  if (refresh_period < 0) throw std::invalid_argument("TrackerConfig: negative refresh_period");
  if (rebalance_period < 0) {
    throw std::invalid_argument("TrackerConfig: negative rebalance_period");
  }
}

double TrackerConfig::discount_at(std::int64_t t) const {
  if (!discount_schedule) return discount;
  const double lambda = discount_schedule(t);
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("discount schedule returned a value outside (0, 1] at t=" +
                                std::to_string(t));
  }
  return lambda;
}

template <typename S>
Mat<S> random_subspace(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed, rng_stream::kInit, 0);
  return rng.template gaussian<S>(rows, cols);
}

template <typename S>
TrackerState<S> init_state(const TrackerConfig& config, const std::optional<Mat<S>>& initial,
                           std::uint64_t seed) {
  config.validate();
  TrackerState<S> state;
  if (initial) {
    if (initial->rows() != config.ambient_dim || initial->cols() != config.rank) {
      throw std::invalid_argument("init_state: initial subspace must be ambient_dim x rank");
    }
    state.subspace = *initial;
  } else {
    state.subspace = random_subspace<S>(config.ambient_dim, config.rank, seed);
  }
  const auto m = static_cast<std::size_t>(config.ambient_dim);
  state.rinv.assign(m, config.init_scale * Mat<S>::Identity(config.rank, config.rank));
  if (config.refresh_period > 0) {
    state.correlation.assign(m, (1.0 / config.init_scale) *
                                    Mat<S>::Identity(config.rank, config.rank));
  }
  return state;
}

template <typename S>
Vec<S> estimate_coefficient(const Mat<S>& subspace, const ObservedSample<S>& sample) {
  if (sample.size() != subspace.rows()) {
    throw std::invalid_argument("estimate_coefficient: sample length differs from ambient_dim");
  }
  const auto rows = observed_indices(sample.mask);
  if (rows.empty()) throw EmptyObservationError("estimate_coefficient: empty mask");
  Vec<S> y(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Index>(i)) = sample.values(rows[i]);
  return min_norm_solve<S>(gather_rows(subspace, rows), y);
}

template <typename S>
double observed_residual(const ObservedSample<S>& sample, const Vec<S>& xhat) {
  double acc = 0.0;
  for (Index m = 0; m < sample.size(); ++m) {
    if (sample.mask(m)) acc += std::norm(sample.values(m) - xhat(m));
  }
  return std::sqrt(acc);
}

template <typename S>
RowUpdate<S> update_row(const RowVec<S>& row, const Mat<S>& rinv, const Vec<S>& coeff, S value,
                        bool observed, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("update_row: lambda must lie in (0, 1]");
  }
  Mat<S> d = row;
  RowUpdate<S> out{RowVec<S>(), rinv};
  if (!kernels::update_row_inplace<S>(d, 0, out.rinv, nullptr, coeff, value, observed, lambda)) {
    throw ConditioningError("update_row: beta fell below machine epsilon");
  }
  out.row = d.row(0);
  return out;
}

template <typename S>
bool rebalance_basis(TrackerState<S>& state, Execution execution) {
  const Index r = state.subspace.cols();
  Eigen::HouseholderQR<Mat<S>> qr(state.subspace);
  const Mat<S> upper = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
  const double largest = upper.diagonal().cwiseAbs().maxCoeff();
  if (!(largest > 0.0) || !std::isfinite(largest) ||
      upper.diagonal().cwiseAbs().minCoeff() <= 1e-12 * largest) {
    return false;
  }
  state.subspace = qr.householderQ() * Mat<S>::Identity(state.subspace.rows(), r);
  // C = R^{-1}: Rinv <- R^{-H} Rinv R^{-1}, R_m <- R R_m R^H.
  const Mat<S> c = upper.template triangularView<Eigen::Upper>().solve(Mat<S>::Identity(r, r));
  const auto rows = static_cast<std::int64_t>(state.rinv.size());
  const bool has_direct = !state.correlation.empty();
#pragma omp parallel for schedule(static) if (execution == Execution::parallel)
  for (std::int64_t m = 0; m < rows; ++m) {
    auto& p = state.rinv[static_cast<std::size_t>(m)];
    p = c.adjoint() * p * c;
    kernels::symmetrize(p);
    if (has_direct) {
      auto& q = state.correlation[static_cast<std::size_t>(m)];
      q = upper * q * upper.adjoint();
      kernels::symmetrize(q);
    }
  }
  return true;
}

template <typename S>
StepOutput<S> petrels_step(TrackerState<S>& state, const TrackerConfig& config,
                           const ObservedSample<S>& sample) {
  if (sample.t != state.t + 1) {
    throw std::invalid_argument("petrels_step: expected t=" + std::to_string(state.t + 1) +
                                ", got t=" + std::to_string(sample.t));
  }
  if (sample.size() != state.subspace.rows() || sample.mask.size() != sample.size()) {
    throw std::invalid_argument("petrels_step: sample length differs from ambient_dim");
  }
  const double lambda = config.discount_at(sample.t);
  auto* correlation = state.correlation.empty() ? nullptr : &state.correlation;

  StepOutput<S> out;
  if (sample.observed_count() == 0) {
    for (auto& r : state.rinv) r *= 1.0 / lambda;
    if (correlation != nullptr) {
      for (auto& r : *correlation) r *= lambda;
    }
    out.skipped = true;
    out.reconstruction = Vec<S>::Zero(sample.size());
    state.t = sample.t;
    return out;
  }

  out.coefficient = estimate_coefficient(state.subspace, sample);
  out.reconstruction = reconstruct(state.subspace, out.coefficient);
  out.observed_residual = observed_residual(sample, out.reconstruction);

  if (config.execution == Execution::parallel) {
    kernels::update_rows<S>(state.subspace, state.rinv, correlation, out.coefficient,
                            sample.values, sample.mask, lambda);
  } else {
    kernels::update_rows_reference<S>(state.subspace, state.rinv, correlation, out.coefficient,
                                      sample.values, sample.mask, lambda);
  }
  state.t = sample.t;

  if (config.refresh_period > 0 && state.t % config.refresh_period == 0) {
    for (std::size_t m = 0; m < state.rinv.size(); ++m) {
      Mat<S> fresh = state.correlation[m].ldlt().solve(
          Mat<S>::Identity(config.rank, config.rank));
      kernels::symmetrize(fresh);
      state.rinv[m] = std::move(fresh);
    }
  }
  if (config.rebalance_period > 0 && state.t % config.rebalance_period == 0) {
    rebalance_basis(state, config.execution);
  }
  return out;
}

#define PETRELS_INSTANTIATE(S)                                                                 \
  template Mat<S> random_subspace<S>(Index, Index, std::uint64_t);                             \
  template TrackerState<S> init_state<S>(const TrackerConfig&, const std::optional<Mat<S>>&,   \
                                         std::uint64_t);                                       \
  template Vec<S> estimate_coefficient<S>(const Mat<S>&, const ObservedSample<S>&);            \
  template double observed_residual<S>(const ObservedSample<S>&, const Vec<S>&);               \
  template RowUpdate<S> update_row<S>(const RowVec<S>&, const Mat<S>&, const Vec<S>&, S, bool, \
                                      double);                                                 \
  template bool rebalance_basis<S>(TrackerState<S>&, Execution);                                \
  template StepOutput<S> petrels_step<S>(TrackerState<S>&, const TrackerConfig&,               \
                                         const ObservedSample<S>&);

PETRELS_INSTANTIATE(Real)
PETRELS_INSTANTIATE(Complex)
#undef PETRELS_INSTANTIATE

}  // namespace petrels
