#pragma once

// Brute-force reference computations. Nothing here calls into the tracker
// implementations; each routine solves its problem from scratch with dense
// linear algebra so it can be used to check the recursive code paths.

#include "petrels/types.hpp"

#include <functional>
#include <vector>

namespace petrels::oracle {

/// One observation of a single row: coefficient a_t, value x_mt, indicator p_mt.
template <typename S>
struct RowObservation {
  Vec<S> coeff;
  S value{};
  bool observed = false;
};

/// Direct solve of the discounted ridge normal equations
///   (lambda^n/delta I + sum lambda^{n-t} p a a^H) d^H
///       = lambda^n/delta d0^H + sum lambda^{n-t} p conj(x) a
/// returned as a row vector.
template <typename S>
RowVec<S> discounted_row_solve(const std::vector<RowObservation<S>>& history, double lambda,
                               double delta, const RowVec<S>& initial_row);

/// sum_t lambda^{n-t} p a a^H
template <typename S>
Mat<S> discounted_gram(const std::vector<RowObservation<S>>& history, double lambda);

/// Least-squares fit restricted to the observed rows, via a full SVD
/// pseudo-inverse of the masked system.
template <typename S>
Vec<S> masked_least_squares(const Mat<S>& basis, const Vec<S>& values, const MaskVec& mask);

/// Central-difference Hessian of a real function of a real vector.
Mat<Real> finite_difference_hessian(const std::function<double(const Vec<Real>&)>& f,
                                    const Vec<Real>& at, double step);

/// Subspace error from principal angles: with orthonormal bases Qe, Qt of the
/// estimate and truth, truth = Qt Rt and Qe^H Qt = Y cos(theta) Z^H,
///   error = sum_i sin^2(theta_i) ||(Z^H Rt)_i||^2 / ||truth||_F^2.
template <typename S>
double principal_angle_subspace_error(const Mat<S>& estimate, const Mat<S>& truth);

/// Top-k eigenvectors of the sample covariance of `samples` (columns).
template <typename S>
Mat<S> principal_subspace(const Mat<S>& samples, Index k);

/// Numerical rank with a relative singular-value cutoff.
template <typename S>
Index numerical_rank(const Mat<S>& a, double rel_tol);

}  // namespace petrels::oracle
