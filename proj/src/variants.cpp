#include "petrels/variants.hpp"

#include "petrels/row_kernels.hpp"

#include <Eigen/Cholesky>

#include <atomic>
#include <limits>
#include <string>

namespace petrels {

namespace {

template <typename S>
void check_sample(std::int64_t state_t, Index rows, const ObservedSample<S>& sample,
                  const char* who) {
  if (sample.t != state_t + 1) {
    throw std::invalid_argument(std::string(who) + ": expected t=" + std::to_string(state_t + 1) +
                                ", got t=" + std::to_string(sample.t));
  }
  if (sample.size() != rows || sample.mask.size() != rows) {
    throw std::invalid_argument(std::string(who) + ": sample length differs from ambient_dim");
  }
}

template <typename S>
Mat<S> initial_subspace(const TrackerConfig& config, const std::optional<Mat<S>>& initial,
                        std::uint64_t seed) {
  config.validate();
  if (!initial) return random_subspace<S>(config.ambient_dim, config.rank, seed);
  if (initial->rows() != config.ambient_dim || initial->cols() != config.rank) {
    throw std::invalid_argument("initial subspace must be ambient_dim x rank");
  }
  return *initial;
}

}  // namespace

template <typename S>
SimplifiedState<S> init_simplified(const TrackerConfig& config,
                                   const std::optional<Mat<S>>& initial, std::uint64_t seed) {
  SimplifiedState<S> state;
  state.subspace = initial_subspace(config, initial, seed);
  state.rinv = config.init_scale * Mat<S>::Identity(config.rank, config.rank);
  return state;
}

template <typename S>
StepOutput<S> simplified_step(SimplifiedState<S>& state, const TrackerConfig& config,
                              const ObservedSample<S>& sample) {
  check_sample(state.t, state.subspace.rows(), sample, "simplified_step");
  const double lambda = config.discount_at(sample.t);
  StepOutput<S> out;
  if (sample.observed_count() == 0) {
    state.rinv *= 1.0 / lambda;
    out.skipped = true;
    out.reconstruction = Vec<S>::Zero(sample.size());
    state.t = sample.t;
    return out;
  }
  out.coefficient = estimate_coefficient(state.subspace, sample);
  out.reconstruction = reconstruct(state.subspace, out.coefficient);
  out.observed_residual = observed_residual(sample, out.reconstruction);

  const Vec<S>& a = out.coefficient;
  const Vec<S> v = (1.0 / lambda) * (state.rinv * a);
  const double beta = 1.0 + Eigen::numext::real(a.dot(v));
  if (!(beta > std::numeric_limits<double>::epsilon())) {
    throw ConditioningError("simplified_step: beta fell below machine epsilon");
  }
  state.rinv *= 1.0 / lambda;
  state.rinv.noalias() -= (1.0 / beta) * (v * v.adjoint());
  kernels::symmetrize(state.rinv);

  const Vec<S> gain = state.rinv * a;
  if (config.execution == Execution::parallel) {
    kernels::add_masked_rank_one<S>(state.subspace, gain, a, sample.values, sample.mask);
  } else {
    kernels::add_masked_rank_one_reference<S>(state.subspace, gain, a, sample.values, sample.mask);
  }
  state.t = sample.t;
  return out;
}

// ---------------------------------------------------------------------------

void RegularizedConfig::validate() const {
  base.validate();
  if (!mu_schedule && !(mu >= 0.0)) throw std::invalid_argument("RegularizedConfig: mu < 0");
  if (t0_scale && !(*t0_scale >= 0.0)) {
    throw std::invalid_argument("RegularizedConfig: t0_scale < 0");
  }
}

double RegularizedConfig::mu_at(std::int64_t t) const {
  const double value = mu_schedule ? mu_schedule(t) : mu;
  if (!(value >= 0.0)) {
    throw std::invalid_argument("regularization schedule negative at t=" + std::to_string(t));
  }
  return value;
}

template <typename S>
RegularizedState<S> init_regularized(const RegularizedConfig& config,
                                     const std::optional<Mat<S>>& initial, std::uint64_t seed) {
  config.validate();
  RegularizedState<S> state;
  state.subspace = initial_subspace(config.base, initial, seed);
  const Index r = config.base.rank;
  const double t0 = config.t0_scale.value_or(1.0 / config.base.init_scale);
  const auto rows = static_cast<std::size_t>(config.base.ambient_dim);
  state.gram.assign(rows, t0 * Mat<S>::Identity(r, r));
  state.rhs.resize(rows);
  for (std::size_t m = 0; m < rows; ++m) {
    state.rhs[m] = t0 * state.subspace.row(static_cast<Index>(m)).adjoint();
  }
  return state;
}

template <typename S>
StepOutput<S> regularized_step(RegularizedState<S>& state, const RegularizedConfig& config,
                               const ObservedSample<S>& sample) {
  check_sample(state.t, state.subspace.rows(), sample, "regularized_step");
  const double lambda = config.base.discount_at(sample.t);
  const double mu = config.mu_at(sample.t);
  const double shift = mu - lambda * state.mu_prev;
  const Index r = state.subspace.cols();

  StepOutput<S> out;
  Vec<S> a;
  if (sample.observed_count() == 0) {
    out.skipped = true;
    out.reconstruction = Vec<S>::Zero(sample.size());
    a = Vec<S>::Zero(r);
  } else {
    out.coefficient = estimate_coefficient(state.subspace, sample);
    out.reconstruction = reconstruct(state.subspace, out.coefficient);
    out.observed_residual = observed_residual(sample, out.reconstruction);
    a = out.coefficient;
  }

  const Index rows = state.subspace.rows();
  std::atomic<Index> failed{-1};
  const bool parallel = config.base.execution == Execution::parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (Index m = 0; m < rows; ++m) {
    auto& gram = state.gram[static_cast<std::size_t>(m)];
    auto& rhs = state.rhs[static_cast<std::size_t>(m)];
    gram *= lambda;
    rhs *= lambda;
    if (sample.mask(m)) {
      gram.noalias() += a * a.adjoint();
      rhs += Eigen::numext::conj(sample.values(m)) * a;
    }
    gram.diagonal().array() += shift;
    kernels::symmetrize(gram);
    Eigen::LLT<Mat<S>> llt(gram);
    if (llt.info() != Eigen::Success) {
      failed.store(m, std::memory_order_relaxed);
      continue;
    }
    state.subspace.row(m) = llt.solve(rhs).adjoint();
  }
  if (const Index m = failed.load(); m >= 0) {
    throw ConditioningError("regularized_step: T_m not positive definite at row " +
                            std::to_string(m));
  }
  state.mu_prev = mu;
  state.t = sample.t;
  return out;
}

#define PETRELS_INSTANTIATE(S)                                                                 \
  template SimplifiedState<S> init_simplified<S>(const TrackerConfig&,                         \
                                                 const std::optional<Mat<S>>&, std::uint64_t); \
  template StepOutput<S> simplified_step<S>(SimplifiedState<S>&, const TrackerConfig&,         \
                                            const ObservedSample<S>&);                         \
  template RegularizedState<S> init_regularized<S>(                                            \
      const RegularizedConfig&, const std::optional<Mat<S>>&, std::uint64_t);                  \
  template StepOutput<S> regularized_step<S>(RegularizedState<S>&, const RegularizedConfig&,   \
                                             const ObservedSample<S>&);

PETRELS_INSTANTIATE(Real)
PETRELS_INSTANTIATE(Complex)
#undef PETRELS_INSTANTIATE

}  // namespace petrels
