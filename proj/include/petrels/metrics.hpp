#pragma once

#include "petrels/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace petrels {

/// ||P_{span(estimate)^perp} truth||_F^2 / ||truth||_F^2, in [0, 1].
/// `estimate` need not be orthonormal; its range is taken with a relative
/// singular-value cutoff of 1e-12.
template <typename S>
double subspace_error(const Mat<S>& estimate, const Mat<S>& truth);

inline constexpr double kUndefinedResidual = std::numeric_limits<double>::infinity();

/// ||P (y - xhat)|| / ||P y||; kUndefinedResidual when the observed signal is 0.
template <typename S>
double residual_error(const ObservedSample<S>& sample, const Vec<S>& xhat);

/// ||Xhat - X||_F / ||X||_F
template <typename S>
double matrix_error(const Mat<S>& estimate, const Mat<S>& truth);

/// Named (t, value) series with strictly increasing t.
class MetricTrace {
 public:
  MetricTrace() = default;
  explicit MetricTrace(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::vector<std::pair<std::int64_t, double>>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  void push(std::int64_t t, double value);
  double last() const { return points_.back().second; }
  /// Value at the last point with time <= t.
  double at(std::int64_t t) const;

  void write_csv(std::ostream& os) const;
  static MetricTrace read_csv(std::istream& is);

 private:
  std::string name_;
  std::vector<std::pair<std::int64_t, double>> points_;
};

/// Formats a double so that reading it back gives the same value.
std::string format_double(double value);
/// Inverse of format_double; accepts any from_chars general-format number.
double parse_double(const std::string& text);

}  // namespace petrels
