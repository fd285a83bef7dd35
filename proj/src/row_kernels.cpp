#include "petrels/row_kernels.hpp"

#include <atomic>
#include <complex>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace petrels::kernels {

namespace {

template <typename S>
S row_times(const Mat<S>& subspace, Index m, const Vec<S>& coeff) {
  S acc(0);
  for (Index k = 0; k < coeff.size(); ++k) acc += subspace(m, k) * coeff(k);
  return acc;
}

constexpr double kBetaFloor = std::numeric_limits<double>::epsilon();

[[noreturn]] void throw_conditioning(Index row) {
  throw ConditioningError("RLS update: beta fell below machine epsilon at row " +
                          std::to_string(row));
}

}  // namespace

template <typename S>
void symmetrize(Mat<S>& a) {
  const Index n = a.rows();
  for (Index j = 0; j < n; ++j) {
    a(j, j) = S(Eigen::numext::real(a(j, j)));
    for (Index i = j + 1; i < n; ++i) {
      const S avg = 0.5 * (a(i, j) + Eigen::numext::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = Eigen::numext::conj(avg);
    }
  }
}

template <typename S>
bool update_row_inplace(Mat<S>& subspace, Index m, Mat<S>& rinv, Mat<S>* direct,
                        const Vec<S>& coeff, S value, bool observed, double lambda) {
  const double inv_lambda = 1.0 / lambda;
  if (!observed) {
    rinv *= inv_lambda;
    if (direct != nullptr) *direct *= lambda;
    return true;
  }
  const Vec<S> v = inv_lambda * (rinv * coeff);
  const double beta = 1.0 + Eigen::numext::real(coeff.dot(v));
  if (!(beta > kBetaFloor)) return false;

  rinv *= inv_lambda;
  rinv.noalias() -= (1.0 / beta) * (v * v.adjoint());
  symmetrize(rinv);
  if (direct != nullptr) {
    *direct *= lambda;
    direct->noalias() += coeff * coeff.adjoint();
  }

  const S err = value - row_times(subspace, m, coeff);
  const Vec<S> gain = rinv * coeff;
  for (Index k = 0; k < gain.size(); ++k) subspace(m, k) += err * Eigen::numext::conj(gain(k));
  return true;
}

template <typename S>
void update_rows_reference(Mat<S>& subspace, std::vector<Mat<S>>& rinv,
                           std::vector<Mat<S>>* direct, const Vec<S>& coeff,
                           const Vec<S>& values, const MaskVec& mask, double lambda) {
  const Index rows = subspace.rows();
  for (Index m = 0; m < rows; ++m) {
    Mat<S>* dm = direct != nullptr ? &(*direct)[static_cast<std::size_t>(m)] : nullptr;
    if (!update_row_inplace(subspace, m, rinv[static_cast<std::size_t>(m)], dm, coeff, values(m),
                            mask(m), lambda)) {
      throw_conditioning(m);
    }
  }
}

template <typename S>
void update_rows(Mat<S>& subspace, std::vector<Mat<S>>& rinv, std::vector<Mat<S>>* direct,
                 const Vec<S>& coeff, const Vec<S>& values, const MaskVec& mask, double lambda) {
  const Index rows = subspace.rows();
  std::atomic<Index> failed{-1};
#pragma omp parallel for schedule(static)
  for (Index m = 0; m < rows; ++m) {
    Mat<S>* dm = direct != nullptr ? &(*direct)[static_cast<std::size_t>(m)] : nullptr;
    if (!update_row_inplace(subspace, m, rinv[static_cast<std::size_t>(m)], dm, coeff, values(m),
                            mask(m), lambda)) {
      failed.store(m, std::memory_order_relaxed);
    }
  }
  if (const Index m = failed.load(); m >= 0) throw_conditioning(m);
}

template <typename S>
void add_masked_rank_one_reference(Mat<S>& subspace, const Vec<S>& gain, const Vec<S>& coeff,
                                   const Vec<S>& values, const MaskVec& mask) {
  for (Index m = 0; m < subspace.rows(); ++m) {
    if (!mask(m)) continue;
    const S err = values(m) - row_times(subspace, m, coeff);
    for (Index k = 0; k < gain.size(); ++k) subspace(m, k) += err * Eigen::numext::conj(gain(k));
  }
}

template <typename S>
void add_masked_rank_one(Mat<S>& subspace, const Vec<S>& gain, const Vec<S>& coeff,
                         const Vec<S>& values, const MaskVec& mask) {
  const Index rows = subspace.rows();
#pragma omp parallel for schedule(static)
  for (Index m = 0; m < rows; ++m) {
    if (!mask(m)) continue;
    const S err = values(m) - row_times(subspace, m, coeff);
    for (Index k = 0; k < gain.size(); ++k) subspace(m, k) += err * Eigen::numext::conj(gain(k));
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

#define PETRELS_INSTANTIATE(S)                                                              \
  template void symmetrize<S>(Mat<S>&);                                                     \
  template bool update_row_inplace<S>(Mat<S>&, Index, Mat<S>&, Mat<S>*, const Vec<S>&, S,   \
                                      bool, double);                                        \
  template void update_rows_reference<S>(Mat<S>&, std::vector<Mat<S>>&,                     \
                                         std::vector<Mat<S>>*, const Vec<S>&, const Vec<S>&, \
                                         const MaskVec&, double);                           \
  template void update_rows<S>(Mat<S>&, std::vector<Mat<S>>&, std::vector<Mat<S>>*,         \
                               const Vec<S>&, const Vec<S>&, const MaskVec&, double);       \
  template void add_masked_rank_one_reference<S>(Mat<S>&, const Vec<S>&, const Vec<S>&,     \
                                                 const Vec<S>&, const MaskVec&);            \
  template void add_masked_rank_one<S>(Mat<S>&, const Vec<S>&, const Vec<S>&, const Vec<S>&, \
                                       const MaskVec&);

PETRELS_INSTANTIATE(Real)
PETRELS_INSTANTIATE(Complex)
#undef PETRELS_INSTANTIATE

}  // namespace petrels::kernels
