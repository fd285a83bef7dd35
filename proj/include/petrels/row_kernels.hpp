#pragma once

// Per-row discounted RLS kernels. Each row of the subspace owns its own
// inverse correlation matrix, so once the coefficient of the current step is
// known, all rows update independently. `update_rows_reference` is the plain
// serial loop kept for testing; `update_rows` distributes rows with OpenMP and
// must agree with it bitwise.

#include "petrels/types.hpp"

#include <vector>

namespace petrels::kernels {

/// Row m of the discounted RLS recursion, in place. Returns false when the
/// conditioning guard on beta trips (state of row m is then left untouched).
///
///   v    = Rinv a / lambda
///   beta = 1 + a^H v
///   Rinv = Rinv / lambda - v v^H / beta        (observed rows)
///   d_m += (x_m - d_m a) (Rinv a)^H
///
/// Unobserved rows only see Rinv <- Rinv / lambda. `direct`, when non-null, is
/// the maintained correlation matrix R_m used for periodic re-inversion.
template <typename S>
bool update_row_inplace(Mat<S>& subspace, Index m, Mat<S>& rinv, Mat<S>* direct,
                        const Vec<S>& coeff, S value, bool observed, double lambda);

/// Forces exact Hermitian symmetry: (A + A^H) / 2, real diagonal.
template <typename S>
void symmetrize(Mat<S>& a);

/// Serial reference. Throws ConditioningError if any row trips the guard.
template <typename S>
void update_rows_reference(Mat<S>& subspace, std::vector<Mat<S>>& rinv,
                           std::vector<Mat<S>>* direct, const Vec<S>& coeff,
                           const Vec<S>& values, const MaskVec& mask, double lambda);

/// OpenMP version of update_rows_reference.
template <typename S>
void update_rows(Mat<S>& subspace, std::vector<Mat<S>>& rinv, std::vector<Mat<S>>* direct,
                 const Vec<S>& coeff, const Vec<S>& values, const MaskVec& mask, double lambda);

/// Shared-correlation row additions: D_m += p_m (x_m - d_m a) g^H for a fixed
/// gain g. Serial and OpenMP flavours.
template <typename S>
void add_masked_rank_one_reference(Mat<S>& subspace, const Vec<S>& gain, const Vec<S>& coeff,
                                   const Vec<S>& values, const MaskVec& mask);
template <typename S>
void add_masked_rank_one(Mat<S>& subspace, const Vec<S>& gain, const Vec<S>& coeff,
                         const Vec<S>& values, const MaskVec& mask);

int max_threads();

}  // namespace petrels::kernels
