#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace petrels {

using Index = Eigen::Index;
using Real = double;
using Complex = std::complex<double>;

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

using MaskVec = Eigen::Array<bool, Eigen::Dynamic, 1>;
using MaskMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class ScalarField { real, complex };

template <typename S>
inline constexpr bool is_complex_v = !std::is_same_v<S, Real>;

template <typename S>
constexpr ScalarField field_of() {
  return is_complex_v<S> ? ScalarField::complex : ScalarField::real;
}

std::string to_string(ScalarField field);
ScalarField parse_scalar_field(const std::string& text);

/// Raised when a step cannot produce a meaningful estimate, e.g. an empty mask.
class EmptyObservationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the finite-precision guards of the recursive updates.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One time step of a stream. Unobserved positions of `values` hold zero.
template <typename S>
struct ObservedSample {
  std::int64_t t = 0;
  Vec<S> values;
  MaskVec mask;
  std::optional<Vec<S>> truth;

  Index size() const { return values.size(); }
  Index observed_count() const { return mask.count(); }

  /// Checks the mask/values invariants; throws std::invalid_argument.
  void validate() const;
};

/// Per-step output shared by all trackers.
template <typename S>
struct StepOutput {
  Vec<S> coefficient;     // empty when the step was skipped
  Vec<S> reconstruction;  // D_{n-1} a_n
  double observed_residual = 0.0;
  bool skipped = false;
};

template <typename S>
void ObservedSample<S>::validate() const {
  if (mask.size() != values.size()) {
    throw std::invalid_argument("ObservedSample: mask and values lengths differ");
  }
  for (Index m = 0; m < values.size(); ++m) {
    if (!mask(m) && values(m) != S(0)) {
      throw std::invalid_argument("ObservedSample: unobserved entry " + std::to_string(m) +
                                  " holds a nonzero value");
    }
  }
  if (truth && truth->size() != values.size()) {
    throw std::invalid_argument("ObservedSample: truth length differs from values");
  }
}

}  // namespace petrels
