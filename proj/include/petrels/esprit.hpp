#pragma once

#include "petrels/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace petrels {

struct EspritResult {
  std::vector<double> frequencies;  // ascending, each in [0, 1)
  double condition = 1.0;           // 2-norm condition number of the leading block
  bool ill_conditioned = false;     // condition > 1e8
};

/// Shift-invariance frequency estimation: with D1 = rows 0..n-2 and D2 =
/// rows 1..n-1 of the basis, the eigenvalues z_i of pinv(D1) D2 give
/// w_i = arg(z_i) / (2 pi) mod 1.
EspritResult esprit(const Mat<Complex>& basis);

struct ModeEstimate {
  std::vector<double> frequencies;
  std::vector<double> amplitudes;

  std::size_t size() const { return frequencies.size(); }
};

/// Fits per-sample mode coefficients over the window by masked least squares
/// on the Vandermonde of `frequencies`, and reports the RMS coefficient
/// magnitude per mode. Frequencies within 1e-6 of an earlier one (circularly)
/// share that mode's fit.
std::vector<double> estimate_amplitudes(const std::vector<double>& frequencies,
                                        const std::vector<ObservedSample<Complex>>& window);

/// Keeps modes whose amplitude strictly exceeds `level`.
ModeEstimate threshold_modes(const ModeEstimate& estimate, double level);

/// Circular distance between two frequencies in [0, 1).
double frequency_distance(double a, double b);

/// One row per mode: t,mode_index,frequency,amplitude,kept_after_threshold
void write_mode_track_header(std::ostream& os);
void write_mode_track_rows(std::ostream& os, std::int64_t t, const ModeEstimate& estimate,
                           double level);

}  // namespace petrels
