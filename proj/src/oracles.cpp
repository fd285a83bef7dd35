#include "petrels/oracles.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace petrels::oracle {

template <typename S>
Mat<S> discounted_gram(const std::vector<RowObservation<S>>& history, double lambda) {
  if (history.empty()) throw std::invalid_argument("discounted_gram: empty history");
  const Index r = history.front().coeff.size();
  Mat<S> gram = Mat<S>::Zero(r, r);
  const auto n = static_cast<double>(history.size());
  for (std::size_t t = 0; t < history.size(); ++t) {
    if (!history[t].observed) continue;
    const double w = std::pow(lambda, n - static_cast<double>(t + 1));
    gram += w * history[t].coeff * history[t].coeff.adjoint();
  }
  return gram;
}

template <typename S>
RowVec<S> discounted_row_solve(const std::vector<RowObservation<S>>& history, double lambda,
                               double delta, const RowVec<S>& initial_row) {
  const Index r = initial_row.size();
  const auto n = static_cast<double>(history.size());
  const double ridge = std::pow(lambda, n) / delta;
  Mat<S> lhs = ridge * Mat<S>::Identity(r, r);
  Vec<S> rhs = ridge * initial_row.adjoint();
  if (!history.empty()) lhs += discounted_gram(history, lambda);
  for (std::size_t t = 0; t < history.size(); ++t) {
    if (!history[t].observed) continue;
    const double w = std::pow(lambda, n - static_cast<double>(t + 1));
    rhs += w * Eigen::numext::conj(history[t].value) * history[t].coeff;
  }
  const Vec<S> sol = lhs.fullPivLu().solve(rhs);
  return sol.adjoint();
}

template <typename S>
Vec<S> masked_least_squares(const Mat<S>& basis, const Vec<S>& values, const MaskVec& mask) {
  Index k = 0;
  Mat<S> a(mask.count(), basis.cols());
  Vec<S> y(mask.count());
  for (Index m = 0; m < basis.rows(); ++m) {
    if (!mask(m)) continue;
    a.row(k) = basis.row(m);
    y(k) = values(m);
    ++k;
  }
  Eigen::JacobiSVD<Mat<S>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-12 * sv(0) : 0.0;
  Vec<S> out = Vec<S>::Zero(basis.cols());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= cutoff) continue;
    const S proj = svd.matrixU().col(i).dot(y);
    out += (proj / sv(i)) * svd.matrixV().col(i);
  }
  return out;
}

Mat<Real> finite_difference_hessian(const std::function<double(const Vec<Real>&)>& f,
                                    const Vec<Real>& at, double step) {
  const Index n = at.size();
  Mat<Real> h(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      Vec<Real> pp = at, pm = at, mp = at, mm = at;
      pp(i) += step; pp(j) += step;
      pm(i) += step; pm(j) -= step;
      mp(i) -= step; mp(j) += step;
      mm(i) -= step; mm(j) -= step;
      h(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step);
    }
  }
  return h;
}

namespace {
template <typename S>
Mat<S> orth(const Mat<S>& a) {
  Eigen::JacobiSVD<Mat<S>> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-12 * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}
}  // namespace

template <typename S>
double principal_angle_subspace_error(const Mat<S>& estimate, const Mat<S>& truth) {
  const Mat<S> qe = orth(estimate);
  Eigen::HouseholderQR<Mat<S>> qr(truth);
  const Index k = truth.cols();
  const Mat<S> qt = qr.householderQ() * Mat<S>::Identity(truth.rows(), k);
  const Mat<S> rt = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();

  Eigen::JacobiSVD<Mat<S>> svd(qe.adjoint() * qt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat<S> weights = svd.matrixV().adjoint() * rt;  // rows aligned with angles
  const auto& cosines = svd.singularValues();
  double err = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double c = i < cosines.size() ? std::min(1.0, cosines(i)) : 0.0;
    err += (1.0 - c * c) * weights.row(i).squaredNorm();
  }
  return err / truth.squaredNorm();
}

template <typename S>
Mat<S> principal_subspace(const Mat<S>& samples, Index k) {
  const Mat<S> cov = samples * samples.adjoint() / static_cast<double>(samples.cols());
  Eigen::SelfAdjointEigenSolver<Mat<S>> es(cov);
  return es.eigenvectors().rightCols(k);
}

template <typename S>
Index numerical_rank(const Mat<S>& a, double rel_tol) {
  Eigen::JacobiSVD<Mat<S>> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) ++rank;
  return rank;
}

#define PETRELS_INSTANTIATE(S)                                                                  \
  template Mat<S> discounted_gram<S>(const std::vector<RowObservation<S>>&, double);            \
  template RowVec<S> discounted_row_solve<S>(const std::vector<RowObservation<S>>&, double,     \
                                             double, const RowVec<S>&);                         \
  template Vec<S> masked_least_squares<S>(const Mat<S>&, const Vec<S>&, const MaskVec&);        \
  template double principal_angle_subspace_error<S>(const Mat<S>&, const Mat<S>&);              \
  template Mat<S> principal_subspace<S>(const Mat<S>&, Index);                                  \
  template Index numerical_rank<S>(const Mat<S>&, double);

PETRELS_INSTANTIATE(Real)
PETRELS_INSTANTIATE(Complex)
#undef PETRELS_INSTANTIATE

}  // namespace petrels::oracle
