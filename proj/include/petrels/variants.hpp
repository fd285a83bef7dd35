#pragma once

#include "petrels/petrels.hpp"

#include <functional>

namespace petrels {

// ---------------------------------------------------------------------------
// Simplified PETRELS: every row shares one correlation matrix
// R_n = lambda R_{n-1} + a a^H, and
//   D_n = D_{n-1} + P_n (x_n - D_{n-1} a_n) a_n^H R_n^{-1}.
// Storage is O(M r).

template <typename S>
struct SimplifiedState {
  Mat<S> subspace;
  Mat<S> rinv;
  std::int64_t t = 0;
};

template <typename S>
SimplifiedState<S> init_simplified(const TrackerConfig& config,
                                   const std::optional<Mat<S>>& initial, std::uint64_t seed);

template <typename S>
StepOutput<S> simplified_step(SimplifiedState<S>& state, const TrackerConfig& config,
                              const ObservedSample<S>& sample);

// ---------------------------------------------------------------------------
// Frobenius-regularized PETRELS:
//   d_m^n = argmin sum_t lambda^{n-t} p_mt |x_mt - d_m a_t|^2 + mu_n ||d_m||^2
// solved directly each step through T_m^n d = s_m^n with
//   T_m^n = lambda T_m^{n-1} + p a a^H + (mu_n - lambda mu_{n-1}) I.

struct RegularizedConfig {
  TrackerConfig base;
  std::function<double(std::int64_t)> mu_schedule;  // mu_n; constant `mu` when unset
  double mu = 1e-3;
  // T_m^0 = t0_scale * I. Defaults to 1/init_scale, which makes the mu = 0
  // case coincide with plain PETRELS.
  std::optional<double> t0_scale;

  void validate() const;
  double mu_at(std::int64_t t) const;
};

template <typename S>
struct RegularizedState {
  Mat<S> subspace;
  std::vector<Mat<S>> gram;    // T_m
  std::vector<Vec<S>> rhs;     // s_m, stored so that T_m d_m^H = s_m
  double mu_prev = 0.0;        // mu_0 = 0
  std::int64_t t = 0;
};

template <typename S>
RegularizedState<S> init_regularized(const RegularizedConfig& config,
                                     const std::optional<Mat<S>>& initial, std::uint64_t seed);

template <typename S>
StepOutput<S> regularized_step(RegularizedState<S>& state, const RegularizedConfig& config,
                               const ObservedSample<S>& sample);

}  // namespace petrels
