#pragma once

#include "petrels/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace petrels {

/// A scheduled replacement of the generating subspace. The new subspace is in
/// effect for samples with t > at.
struct SubspaceChange {
  std::int64_t at = 0;
  // Unset: full i.i.d. redraw. Set: U <- cos(angle) U + sin(angle) G with a
  // fresh Gaussian G (partial rotation).
  std::optional<double> rotation_angle;
};

struct StreamScenario {
  Index ambient_dim = 500;
  Index true_rank = 10;
  double noise_std = 0.0;
  Index observed_per_step = 50;
  std::int64_t horizon = 2000;
  std::vector<SubspaceChange> change_schedule;
  std::uint64_t seed = 1;
  ScalarField scalar_field = ScalarField::real;
  // Optional per-column scaling of the generating subspace (U <- U diag(s)).
  std::vector<double> column_scales;

  void validate() const;
};

/// Per-column scales with `strong` N(0,1) entries followed by `weak` entries
/// drawn from weak_level * N(0,1).
std::vector<double> strong_weak_scales(Index strong, Index weak, double weak_level,
                                       std::uint64_t seed);

/// Low-rank stream x_t = U_t a_t + n_t observed on K uniformly random entries.
/// Pure function of (scenario, t): samples may be drawn in any order.
template <typename S>
class LowRankStream {
 public:
  explicit LowRankStream(StreamScenario scenario);

  const StreamScenario& scenario() const { return scenario_; }
  /// Generating subspace in effect at time t (t >= 1).
  const Mat<S>& subspace_at(std::int64_t t) const;
  ObservedSample<S> sample(std::int64_t t) const;
  /// Samples 1..horizon.
  std::vector<ObservedSample<S>> generate() const;

 private:
  StreamScenario scenario_;
  std::vector<Mat<S>> epochs_;
};

template <typename S>
std::vector<ObservedSample<S>> gen_lowrank_stream(const StreamScenario& scenario) {
  return LowRankStream<S>(scenario).generate();
}

// ---------------------------------------------------------------------------
// Direction-of-arrival sensor array

struct ModeSet {
  std::vector<double> frequencies;
  std::vector<double> amplitudes;

  std::size_t size() const { return frequencies.size(); }
  void validate() const;
};

/// Scene in effect for samples with t > at.
struct ModeChange {
  std::int64_t at = 0;
  ModeSet modes;
};

struct DoaScenario {
  Index sensors = 256;
  double noise_std = 0.1;
  Index observed_per_step = 30;
  ModeSet initial;
  std::vector<ModeChange> mode_schedule;
  std::int64_t horizon = 4000;
  std::uint64_t seed = 1;
  bool complex_coefficients = false;

  void validate() const;
};

/// n x p matrix with columns [1, e^{j 2 pi w}, ..., e^{j 2 pi w (n-1)}]^T.
Mat<Complex> vandermonde(const std::vector<double>& frequencies, Index n);

/// The four-stage scene: modify two modes at 1000, add one at 2000, drop the
/// weakest at 3000; 256 sensors, 30 observed, noise 0.1.
DoaScenario reference_doa_scene(std::uint64_t seed);

class DoaStream {
 public:
  explicit DoaStream(DoaScenario scenario);

  const DoaScenario& scenario() const { return scenario_; }
  const ModeSet& modes_at(std::int64_t t) const;
  ObservedSample<Complex> sample(std::int64_t t) const;
  std::vector<ObservedSample<Complex>> generate() const;

 private:
  DoaScenario scenario_;
  std::vector<Mat<Complex>> scaled_bases_;  // V diag(d) per stage
};

std::vector<ObservedSample<Complex>> gen_doa_stream(const DoaScenario& scenario);

// ---------------------------------------------------------------------------
// Matrix-completion dataset

enum class EntryDistribution { gaussian, uniform01 };

struct McDataset {
  Mat<Real> matrix;  // X = U V^T
  MaskMat mask;
  Index rank = 0;
};

McDataset gen_mc_dataset(Index rows, Index cols, Index rank, EntryDistribution dist,
                         double sampling_rate, std::uint64_t seed);

}  // namespace petrels
