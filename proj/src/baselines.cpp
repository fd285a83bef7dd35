#include "petrels/baselines.hpp"

#include "petrels/linalg.hpp"
#include "petrels/row_kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace petrels {

void GrouseConfig::validate() const {
  if (ambient_dim <= 0 || rank <= 0 || rank > ambient_dim) {
    throw std::invalid_argument("GrouseConfig: need 1 <= rank <= ambient_dim");
  }
  if (!(step.scale > 0.0)) throw std::invalid_argument("GrouseConfig: step scale must be > 0");
}

template <typename S>
GrouseState<S> init_grouse(const GrouseConfig& config, const std::optional<Mat<S>>& initial,
                           std::uint64_t seed) {
  config.validate();
  GrouseState<S> state;
  if (initial) {
    if (initial->rows() != config.ambient_dim || initial->cols() != config.rank) {
      throw std::invalid_argument("init_grouse: initial subspace must be ambient_dim x rank");
    }
    state.subspace = orthonormalize<S>(*initial);
  } else {
    state.subspace = orthonormalize<S>(random_subspace<S>(config.ambient_dim, config.rank, seed));
  }
  return state;
}

template <typename S>
StepOutput<S> grouse_step(GrouseState<S>& state, const GrouseConfig& config,
                          const ObservedSample<S>& sample) {
  if (sample.t != state.t + 1) {
    throw std::invalid_argument("grouse_step: expected t=" + std::to_string(state.t + 1));
  }
  if (sample.size() != state.subspace.rows()) {
    throw std::invalid_argument("grouse_step: sample length differs from ambient_dim");
  }
  StepOutput<S> out;
  if (sample.observed_count() == 0) {
    out.skipped = true;
    out.reconstruction = Vec<S>::Zero(sample.size());
    state.t = sample.t;
    return out;
  }
  out.coefficient = estimate_coefficient(state.subspace, sample);
  out.reconstruction = reconstruct(state.subspace, out.coefficient);

  Vec<S> residual = Vec<S>::Zero(sample.size());
  for (Index m = 0; m < sample.size(); ++m) {
    if (sample.mask(m)) residual(m) = sample.values(m) - out.reconstruction(m);
  }
  const double r_norm = residual.norm();
  const double x_norm = out.reconstruction.norm();
  const double a_norm = out.coefficient.norm();
  out.observed_residual = r_norm;
  state.t = sample.t;

  constexpr double kTiny = 1e-300;
  if (r_norm <= kTiny || x_norm <= kTiny || a_norm <= kTiny) return out;

  const double angle = x_norm * r_norm * config.step.at(sample.t);
  const Vec<S> direction = (std::cos(angle) - 1.0) / x_norm * out.reconstruction +
                           std::sin(angle) / r_norm * residual;
  state.subspace.noalias() += direction * (out.coefficient.adjoint() / a_norm);

  const Index r = state.subspace.cols();
  const double drift = (state.subspace.adjoint() * state.subspace - Mat<S>::Identity(r, r)).norm();
  if (drift > config.reorthonormalize_tol) state.subspace = orthonormalize<S>(state.subspace);
  return out;
}

template <typename S>
PastState<S> init_past(const TrackerConfig& config, const std::optional<Mat<S>>& initial,
                       std::uint64_t seed) {
  config.validate();
  PastState<S> state;
  if (initial) {
    if (initial->rows() != config.ambient_dim || initial->cols() != config.rank) {
      throw std::invalid_argument("init_past: initial subspace must be ambient_dim x rank");
    }
    state.subspace = *initial;
  } else {
    state.subspace = orthonormalize<S>(random_subspace<S>(config.ambient_dim, config.rank, seed));
  }
  state.rinv = config.init_scale * Mat<S>::Identity(config.rank, config.rank);
  return state;
}

template <typename S>
StepOutput<S> past_step(PastState<S>& state, const Vec<S>& x, double lambda) {
  if (x.size() != state.subspace.rows()) {
    throw std::invalid_argument("past_step: sample length differs from ambient_dim");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("past_step: lambda must lie in (0, 1]");
  }
  StepOutput<S> out;
  out.coefficient = state.subspace.adjoint() * x;
  out.reconstruction = state.subspace * out.coefficient;
  const Vec<S> err = x - out.reconstruction;
  out.observed_residual = err.norm();

  const Vec<S>& a = out.coefficient;
  const Vec<S> v = (1.0 / lambda) * (state.rinv * a);
  const double beta = 1.0 + Eigen::numext::real(a.dot(v));
  if (!(beta > std::numeric_limits<double>::epsilon())) {
    throw ConditioningError("past_step: beta fell below machine epsilon");
  }
  state.rinv *= 1.0 / lambda;
  state.rinv.noalias() -= (1.0 / beta) * (v * v.adjoint());
  kernels::symmetrize(state.rinv);
  const Vec<S> gain = state.rinv * a;
  state.subspace.noalias() += err * gain.adjoint();
  ++state.t;
  return out;
}

#define PETRELS_INSTANTIATE(S)                                                                   \
  template GrouseState<S> init_grouse<S>(const GrouseConfig&, const std::optional<Mat<S>>&,      \
                                         std::uint64_t);                                         \
  template StepOutput<S> grouse_step<S>(GrouseState<S>&, const GrouseConfig&,                    \
                                        const ObservedSample<S>&);                               \
  template PastState<S> init_past<S>(const TrackerConfig&, const std::optional<Mat<S>>&,         \
                                     std::uint64_t);                                             \
  template StepOutput<S> past_step<S>(PastState<S>&, const Vec<S>&, double);

PETRELS_INSTANTIATE(Real)
PETRELS_INSTANTIATE(Complex)
#undef PETRELS_INSTANTIATE

}  // namespace petrels
