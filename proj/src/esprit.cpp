#include "petrels/esprit.hpp"

#include "petrels/linalg.hpp"
#include "petrels/metrics.hpp"
#include "petrels/stream_model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace petrels {

EspritResult esprit(const Mat<Complex>& basis) {
  const Index n = basis.rows();
  const Index r = basis.cols();
  if (r < 1 || n < r + 1) throw std::invalid_argument("esprit: need rows >= cols + 1");
  const Mat<Complex> upper = basis.topRows(n - 1);
  const Mat<Complex> lower = basis.bottomRows(n - 1);

  EspritResult out;
  Eigen::JacobiSVD<Mat<Complex>> svd(upper);
  const auto& sv = svd.singularValues();
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                          : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.condition > 1e8;

  Eigen::CompleteOrthogonalDecomposition<Mat<Complex>> cod(upper);
  const Mat<Complex> shift = cod.solve(lower);
  Eigen::ComplexEigenSolver<Mat<Complex>> es(shift, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw std::runtime_error("esprit: eigen-decomposition failed");

  out.frequencies.reserve(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) {
    double w = std::arg(es.eigenvalues()(i)) / (2.0 * std::numbers::pi);
    w -= std::floor(w);
    if (w >= 1.0) w = 0.0;
    out.frequencies.push_back(w);
  }
  std::sort(out.frequencies.begin(), out.frequencies.end());
  return out;
}

double frequency_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

std::vector<double> estimate_amplitudes(const std::vector<double>& frequencies,
                                        const std::vector<ObservedSample<Complex>>& window) {
  if (window.empty()) throw std::invalid_argument("estimate_amplitudes: empty window");
  constexpr double kMergeTol = 1e-6;

  // representative[i]: index into `distinct` that mode i is fitted by
  std::vector<double> distinct;
  std::vector<std::size_t> representative(frequencies.size());
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    std::size_t k = 0;
    while (k < distinct.size() && frequency_distance(distinct[k], frequencies[i]) > kMergeTol) ++k;
    if (k == distinct.size()) distinct.push_back(frequencies[i]);
    representative[i] = k;
  }
  if (distinct.empty()) return {};

  const Index n = window.front().size();
  const Mat<Complex> basis = vandermonde(distinct, n);
  Eigen::VectorXd power = Eigen::VectorXd::Zero(static_cast<Index>(distinct.size()));
  for (const auto& sample : window) {
    if (sample.size() != n) throw std::invalid_argument("estimate_amplitudes: ragged window");
    const auto rows = observed_indices(sample.mask);
    if (rows.empty()) continue;
    Vec<Complex> y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Index>(i)) = sample.values(rows[i]);
    const Vec<Complex> c = min_norm_solve<Complex>(gather_rows(basis, rows), y);
    power += c.cwiseAbs2();
  }
  power /= static_cast<double>(window.size());

  std::vector<double> out(frequencies.size());
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    out[i] = std::sqrt(power(static_cast<Index>(representative[i])));
  }
  return out;
}

ModeEstimate threshold_modes(const ModeEstimate& estimate, double level) {
  if (!(level >= 0.0)) throw std::invalid_argument("threshold_modes: level must be >= 0");
  ModeEstimate out;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    if (estimate.amplitudes[i] > level) {
      out.frequencies.push_back(estimate.frequencies[i]);
      out.amplitudes.push_back(estimate.amplitudes[i]);
    }
  }
  return out;
}

void write_mode_track_header(std::ostream& os) {
  os << "t,mode_index,frequency,amplitude,kept_after_threshold\n";
}

void write_mode_track_rows(std::ostream& os, std::int64_t t, const ModeEstimate& estimate,
                           double level) {
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    os << t << ',' << i << ',' << format_double(estimate.frequencies[i]) << ','
       << format_double(estimate.amplitudes[i]) << ','
       << (estimate.amplitudes[i] > level ? 1 : 0) << '\n';
  }
}

}  // namespace petrels
