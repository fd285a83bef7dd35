#include "petrels/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace petrels {

std::vector<Index> observed_indices(const MaskVec& mask) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(mask.count()));
  for (Index m = 0; m < mask.size(); ++m) {
    if (mask(m)) out.push_back(m);
  }
  return out;
}

template <typename S>
Mat<S> gather_rows(const Mat<S>& a, const std::vector<Index>& rows) {
  Mat<S> out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = a.row(rows[i]);
  return out;
}

template <typename S>
Vec<S> min_norm_solve(const Mat<S>& a, const Vec<S>& b) {
  Eigen::CompleteOrthogonalDecomposition<Mat<S>> cod(a);
  return cod.solve(b);
}

template <typename S>
Mat<S> range_basis(const Mat<S>& a, double rel_tol) {
  if (a.cols() == 0 || a.rows() == 0) return Mat<S>(a.rows(), 0);
  Eigen::JacobiSVD<Mat<S>> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Mat<S>(a.rows(), 0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

template <typename S>
Mat<S> orthonormalize(const Mat<S>& a) {
  Eigen::HouseholderQR<Mat<S>> qr(a);
  return qr.householderQ() * Mat<S>::Identity(a.rows(), a.cols());
}

template <typename S>
double min_hermitian_eigenvalue(const Mat<S>& a) {
  const Mat<S> h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat<S>> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

#define PETRELS_INSTANTIATE(S)                                                     \
  template Mat<S> gather_rows<S>(const Mat<S>&, const std::vector<Index>&);        \
  template Vec<S> min_norm_solve<S>(const Mat<S>&, const Vec<S>&);                 \
  template Mat<S> range_basis<S>(const Mat<S>&, double);                           \
  template Mat<S> orthonormalize<S>(const Mat<S>&);                                \
  template double min_hermitian_eigenvalue<S>(const Mat<S>&);

PETRELS_INSTANTIATE(Real)
PETRELS_INSTANTIATE(Complex)
#undef PETRELS_INSTANTIATE

}  // namespace petrels
