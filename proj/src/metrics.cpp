#include "petrels/metrics.hpp"

#include "petrels/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace petrels {

template <typename S>
double subspace_error(const Mat<S>& estimate, const Mat<S>& truth) {
  if (estimate.rows() != truth.rows()) {
    throw std::invalid_argument("subspace_error: ambient dimensions differ");
  }
  if (estimate.cols() > estimate.rows() || truth.cols() > truth.rows()) {
    throw std::invalid_argument("subspace_error: more columns than ambient dimension");
  }
  const double total = truth.squaredNorm();
  if (total == 0.0) throw std::invalid_argument("subspace_error: zero reference subspace");
  const Mat<S> basis = range_basis<S>(estimate, 1e-12);
  const Mat<S> outside = truth - basis * (basis.adjoint() * truth);
  return std::clamp(outside.squaredNorm() / total, 0.0, 1.0);
}

template <typename S>
double residual_error(const ObservedSample<S>& sample, const Vec<S>& xhat) {
  if (xhat.size() != sample.size()) throw std::invalid_argument("residual_error: length mismatch");
  if (sample.observed_count() == 0) throw std::invalid_argument("residual_error: empty mask");
  double num = 0.0;
  double den = 0.0;
  for (Index m = 0; m < sample.size(); ++m) {
    if (!sample.mask(m)) continue;
    num += std::norm(sample.values(m) - xhat(m));
    den += std::norm(sample.values(m));
  }
  if (den == 0.0) return kUndefinedResidual;
  return std::sqrt(num / den);
}

template <typename S>
double matrix_error(const Mat<S>& estimate, const Mat<S>& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("matrix_error: shape mismatch");
  }
  const double den = truth.norm();
  if (den == 0.0) throw std::invalid_argument("matrix_error: zero reference matrix");
  return (estimate - truth).norm() / den;
}

template double subspace_error<Real>(const Mat<Real>&, const Mat<Real>&);
template double subspace_error<Complex>(const Mat<Complex>&, const Mat<Complex>&);
template double residual_error<Real>(const ObservedSample<Real>&, const Vec<Real>&);
template double residual_error<Complex>(const ObservedSample<Complex>&, const Vec<Complex>&);
template double matrix_error<Real>(const Mat<Real>&, const Mat<Real>&);
template double matrix_error<Complex>(const Mat<Complex>&, const Mat<Complex>&);

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    // subnormal or overflow: from_chars leaves value untouched, fall back to strtod
    return std::strtod(text.c_str(), nullptr);
  }
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return value;
}

void MetricTrace::push(std::int64_t t, double value) {
  if (!points_.empty() && t <= points_.back().first) {
    throw std::invalid_argument("MetricTrace: time indices must be strictly increasing");
  }
  points_.emplace_back(t, value);
}

double MetricTrace::at(std::int64_t t) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](std::int64_t v, const auto& p) { return v < p.first; });
  if (it == points_.begin()) throw std::out_of_range("MetricTrace::at: before first point");
  return std::prev(it)->second;
}

void MetricTrace::write_csv(std::ostream& os) const {
  os << "t," << name_ << '\n';
  for (const auto& [t, v] : points_) os << t << ',' << format_double(v) << '\n';
}

MetricTrace MetricTrace::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("MetricTrace: missing header");
  const auto comma = line.find(',');
  if (comma == std::string::npos || line.substr(0, comma) != "t") {
    throw std::runtime_error("MetricTrace: malformed header '" + line + "'");
  }
  MetricTrace trace(line.substr(comma + 1));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = line.find(',');
    if (c == std::string::npos) throw std::runtime_error("MetricTrace: malformed row '" + line + "'");
    trace.push(std::stoll(line.substr(0, c)), parse_double(line.substr(c + 1)));
  }
  return trace;
}

}  // namespace petrels
