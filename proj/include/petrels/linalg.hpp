#pragma once

#include "petrels/types.hpp"

#include <vector>

namespace petrels {

/// Indices of the true entries of a mask, ascending.
std::vector<Index> observed_indices(const MaskVec& mask);

/// Rows `rows` of `a`, in order.
template <typename S>
Mat<S> gather_rows(const Mat<S>& a, const std::vector<Index>& rows);

/// Minimum-norm solution of min_x ||a x - b||_2 via a complete orthogonal
/// decomposition (handles rank-deficient and underdetermined systems).
template <typename S>
Vec<S> min_norm_solve(const Mat<S>& a, const Vec<S>& b);

/// Orthonormal basis for range(a): left singular vectors whose singular value
/// exceeds `rel_tol` times the largest one.
template <typename S>
Mat<S> range_basis(const Mat<S>& a, double rel_tol = 1e-12);

/// Thin Q factor of a Householder QR.
template <typename S>
Mat<S> orthonormalize(const Mat<S>& a);

template <typename S>
void make_hermitian(Mat<S>& a) {
  a = (0.5 * (a + a.adjoint())).eval();
}

/// ||A - A^H||_F / max(1, ||A||_F)
template <typename S>
double hermitian_defect(const Mat<S>& a) {
  return (a - a.adjoint()).norm() / std::max(1.0, a.norm());
}

/// Smallest eigenvalue of the Hermitian part of a.
template <typename S>
double min_hermitian_eigenvalue(const Mat<S>& a);

}  // namespace petrels
