#pragma once

#include "petrels/petrels.hpp"

namespace petrels {

// ---------------------------------------------------------------------------
// GROUSE: first-order descent on the orthonormal Grassmannian. Each step
// rotates D along the geodesic spanned by the normalized reconstruction
// xhat/||xhat|| and the normalized observed residual r/||r||:
//   D <- D + [(cos(sigma eta) - 1) xhat/||xhat|| + sin(sigma eta) r/||r||] a^H/||a||
// with sigma = ||xhat|| ||r||.

struct GrouseStepRule {
  enum class Kind { diminishing, constant } kind = Kind::diminishing;
  double scale = 1.0;  // C for eta_t = C / t, or the constant eta

  double at(std::int64_t t) const {
    return kind == Kind::constant ? scale : scale / static_cast<double>(t);
  }
};

struct GrouseConfig {
  Index ambient_dim = 0;
  Index rank = 0;
  GrouseStepRule step;
  double reorthonormalize_tol = 1e-10;  // on ||D^H D - I||_F

  void validate() const;
};

template <typename S>
struct GrouseState {
  Mat<S> subspace;  // orthonormal columns
  std::int64_t t = 0;
};

template <typename S>
GrouseState<S> init_grouse(const GrouseConfig& config, const std::optional<Mat<S>>& initial,
                           std::uint64_t seed);

template <typename S>
StepOutput<S> grouse_step(GrouseState<S>& state, const GrouseConfig& config,
                          const ObservedSample<S>& sample);

// ---------------------------------------------------------------------------
// PAST: full-observation RLS subspace tracker with a_n = W^H x_n and a single
// shared inverse correlation matrix.

template <typename S>
struct PastState {
  Mat<S> subspace;  // W
  Mat<S> rinv;
  std::int64_t t = 0;
};

template <typename S>
PastState<S> init_past(const TrackerConfig& config, const std::optional<Mat<S>>& initial,
                       std::uint64_t seed);

template <typename S>
StepOutput<S> past_step(PastState<S>& state, const Vec<S>& x, double lambda);

}  // namespace petrels
