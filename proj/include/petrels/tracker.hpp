#pragma once

#include "petrels/baselines.hpp"
#include "petrels/checkpoint.hpp"
#include "petrels/petrels.hpp"
#include "petrels/variants.hpp"

#include <memory>
#include <optional>
#include <string>

namespace petrels {

enum class TrackerKind { petrels, simplified, regularized, grouse, past };

std::string to_string(TrackerKind kind);
TrackerKind parse_tracker_kind(const std::string& text);
/// PAST needs every entry of every sample.
inline bool requires_full_observation(TrackerKind kind) { return kind == TrackerKind::past; }

struct TrackerOptions {
  TrackerKind kind = TrackerKind::petrels;
  TrackerConfig config;        // dims, lambda, delta, execution
  GrouseStepRule grouse_step;  // GROUSE only
  double mu = 1e-3;            // regularized only (constant mu_n)
};

/// Uniform streaming interface over every tracker variant.
template <typename S>
class SubspaceTracker {
 public:
  virtual ~SubspaceTracker() = default;

  virtual TrackerKind kind() const = 0;
  virtual StepOutput<S> step(const ObservedSample<S>& sample) = 0;
  virtual const Mat<S>& subspace() const = 0;
  virtual std::int64_t time() const = 0;
  virtual Checkpoint<S> checkpoint() const = 0;
};

template <typename S>
std::unique_ptr<SubspaceTracker<S>> make_tracker(const TrackerOptions& options,
                                                 std::uint64_t seed,
                                                 const std::optional<Mat<S>>& initial = {});

/// Rebuilds a tracker from a checkpoint written by SubspaceTracker::checkpoint.
/// Execution policy and schedules are not stored; `execution` is applied.
template <typename S>
std::unique_ptr<SubspaceTracker<S>> restore_tracker(const Checkpoint<S>& ckpt,
                                                    Execution execution = Execution::parallel);

}  // namespace petrels
