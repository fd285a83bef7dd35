#include "petrels/tracker.hpp"

#include <stdexcept>

namespace petrels {

std::string to_string(TrackerKind kind) {
  switch (kind) {
    case TrackerKind::petrels: return "petrels";
    case TrackerKind::simplified: return "simplified";
    case TrackerKind::regularized: return "regularized";
    case TrackerKind::grouse: return "grouse";
    case TrackerKind::past: return "past";
  }
  return "unknown";
}

TrackerKind parse_tracker_kind(const std::string& text) {
  for (auto kind : {TrackerKind::petrels, TrackerKind::simplified, TrackerKind::regularized,
                    TrackerKind::grouse, TrackerKind::past}) {
    if (to_string(kind) == text) return kind;
  }
  throw std::invalid_argument("unknown tracker '" + text + "'");
}

namespace {

template <typename S>
void push_common(Checkpoint<S>& ckpt, const TrackerConfig& cfg, std::int64_t t) {
  ckpt.scalars = {{"ambient_dim", static_cast<double>(cfg.ambient_dim)},
                  {"rank", static_cast<double>(cfg.rank)},
                  {"lambda", cfg.discount},
                  {"delta", cfg.init_scale},
                  {"t", static_cast<double>(t)}};
}

template <typename S>
TrackerConfig common_config(const Checkpoint<S>& ckpt, Execution execution) {
  TrackerConfig cfg;
  cfg.ambient_dim = static_cast<Index>(ckpt.scalar("ambient_dim"));
  cfg.rank = static_cast<Index>(ckpt.scalar("rank"));
  cfg.discount = ckpt.scalar("lambda");
  cfg.init_scale = ckpt.scalar("delta");
  cfg.scalar_field = field_of<S>();
  cfg.execution = execution;
  return cfg;
}

template <typename S>
const Mat<S>& single(const Checkpoint<S>& ckpt, const std::string& name) {
  const auto& b = ckpt.block(name);
  if (b.size() != 1) throw std::runtime_error("checkpoint: block '" + name + "' must hold 1 matrix");
  return b.front();
}

template <typename S>
class PetrelsTracker final : public SubspaceTracker<S> {
 public:
  PetrelsTracker(TrackerConfig cfg, TrackerState<S> st) : cfg_(std::move(cfg)), st_(std::move(st)) {}

  TrackerKind kind() const override { return TrackerKind::petrels; }
  StepOutput<S> step(const ObservedSample<S>& s) override { return petrels_step(st_, cfg_, s); }
  const Mat<S>& subspace() const override { return st_.subspace; }
  std::int64_t time() const override { return st_.t; }
  Checkpoint<S> checkpoint() const override {
    Checkpoint<S> ckpt;
    ckpt.variant = "petrels";
    push_common(ckpt, cfg_, st_.t);
    ckpt.scalars.emplace_back("refresh_period", static_cast<double>(cfg_.refresh_period));
    ckpt.scalars.emplace_back("rebalance_period", static_cast<double>(cfg_.rebalance_period));
    ckpt.blocks.emplace_back("D", std::vector<Mat<S>>{st_.subspace});
    ckpt.blocks.emplace_back("Rinv", st_.rinv);
    if (!st_.correlation.empty()) ckpt.blocks.emplace_back("R", st_.correlation);
    return ckpt;
  }

  const TrackerState<S>& state() const { return st_; }

 private:
  TrackerConfig cfg_;
  TrackerState<S> st_;
};

template <typename S>
class SimplifiedTracker final : public SubspaceTracker<S> {
 public:
  SimplifiedTracker(TrackerConfig cfg, SimplifiedState<S> st)
      : cfg_(std::move(cfg)), st_(std::move(st)) {}

  TrackerKind kind() const override { return TrackerKind::simplified; }
  StepOutput<S> step(const ObservedSample<S>& s) override { return simplified_step(st_, cfg_, s); }
  const Mat<S>& subspace() const override { return st_.subspace; }
  std::int64_t time() const override { return st_.t; }
  Checkpoint<S> checkpoint() const override {
    Checkpoint<S> ckpt;
    ckpt.variant = "simplified";
    push_common(ckpt, cfg_, st_.t);
    ckpt.blocks.emplace_back("D", std::vector<Mat<S>>{st_.subspace});
    ckpt.blocks.emplace_back("Rinv", std::vector<Mat<S>>{st_.rinv});
    return ckpt;
  }

 private:
  TrackerConfig cfg_;
  SimplifiedState<S> st_;
};

template <typename S>
class RegularizedTracker final : public SubspaceTracker<S> {
 public:
  RegularizedTracker(RegularizedConfig cfg, RegularizedState<S> st)
      : cfg_(std::move(cfg)), st_(std::move(st)) {}

  TrackerKind kind() const override { return TrackerKind::regularized; }
  StepOutput<S> step(const ObservedSample<S>& s) override { return regularized_step(st_, cfg_, s); }
  const Mat<S>& subspace() const override { return st_.subspace; }
  std::int64_t time() const override { return st_.t; }
  Checkpoint<S> checkpoint() const override {
    Checkpoint<S> ckpt;
    ckpt.variant = "regularized";
    push_common(ckpt, cfg_.base, st_.t);
    ckpt.scalars.emplace_back("mu", cfg_.mu);
    ckpt.scalars.emplace_back("mu_prev", st_.mu_prev);
    ckpt.blocks.emplace_back("D", std::vector<Mat<S>>{st_.subspace});
    ckpt.blocks.emplace_back("T", st_.gram);
    std::vector<Mat<S>> rhs(st_.rhs.begin(), st_.rhs.end());
    ckpt.blocks.emplace_back("s", std::move(rhs));
    return ckpt;
  }

 private:
  RegularizedConfig cfg_;
  RegularizedState<S> st_;
};

template <typename S>
class GrouseTracker final : public SubspaceTracker<S> {
 public:
  GrouseTracker(GrouseConfig cfg, GrouseState<S> st) : cfg_(cfg), st_(std::move(st)) {}

  TrackerKind kind() const override { return TrackerKind::grouse; }
  StepOutput<S> step(const ObservedSample<S>& s) override { return grouse_step(st_, cfg_, s); }
  const Mat<S>& subspace() const override { return st_.subspace; }
  std::int64_t time() const override { return st_.t; }
  Checkpoint<S> checkpoint() const override {
    Checkpoint<S> ckpt;
    ckpt.variant = "grouse";
    ckpt.scalars = {{"ambient_dim", static_cast<double>(cfg_.ambient_dim)},
                    {"rank", static_cast<double>(cfg_.rank)},
                    {"t", static_cast<double>(st_.t)},
                    {"step_constant", cfg_.step.kind == GrouseStepRule::Kind::constant ? 1.0 : 0.0},
                    {"step_scale", cfg_.step.scale}};
    ckpt.blocks.emplace_back("D", std::vector<Mat<S>>{st_.subspace});
    return ckpt;
  }

 private:
  GrouseConfig cfg_;
  GrouseState<S> st_;
};

template <typename S>
class PastTracker final : public SubspaceTracker<S> {
 public:
  PastTracker(TrackerConfig cfg, PastState<S> st) : cfg_(std::move(cfg)), st_(std::move(st)) {}

  TrackerKind kind() const override { return TrackerKind::past; }
  StepOutput<S> step(const ObservedSample<S>& s) override {
    if (s.observed_count() != s.size()) {
      throw std::invalid_argument("PAST requires fully observed samples");
    }
    if (s.t != st_.t + 1) throw std::invalid_argument("past: non-consecutive time index");
    return past_step(st_, s.values, cfg_.discount_at(s.t));
  }
  const Mat<S>& subspace() const override { return st_.subspace; }
  std::int64_t time() const override { return st_.t; }
  Checkpoint<S> checkpoint() const override {
    Checkpoint<S> ckpt;
    ckpt.variant = "past";
    push_common(ckpt, cfg_, st_.t);
    ckpt.blocks.emplace_back("D", std::vector<Mat<S>>{st_.subspace});
    ckpt.blocks.emplace_back("Rinv", std::vector<Mat<S>>{st_.rinv});
    return ckpt;
  }

 private:
  TrackerConfig cfg_;
  PastState<S> st_;
};

GrouseConfig grouse_config_from(const TrackerOptions& options) {
  GrouseConfig g;
  g.ambient_dim = options.config.ambient_dim;
  g.rank = options.config.rank;
  g.step = options.grouse_step;
  return g;
}

}  // namespace

template <typename S>
std::unique_ptr<SubspaceTracker<S>> make_tracker(const TrackerOptions& options,
                                                 std::uint64_t seed,
                                                 const std::optional<Mat<S>>& initial) {
  TrackerConfig cfg = options.config;
  cfg.scalar_field = field_of<S>();
  switch (options.kind) {
    case TrackerKind::petrels:
      return std::make_unique<PetrelsTracker<S>>(cfg, init_state<S>(cfg, initial, seed));
    case TrackerKind::simplified:
      return std::make_unique<SimplifiedTracker<S>>(cfg, init_simplified<S>(cfg, initial, seed));
    case TrackerKind::regularized: {
      RegularizedConfig rc;
      rc.base = cfg;
      rc.mu = options.mu;
      return std::make_unique<RegularizedTracker<S>>(rc, init_regularized<S>(rc, initial, seed));
    }
    case TrackerKind::grouse: {
      const GrouseConfig g = grouse_config_from(options);
      return std::make_unique<GrouseTracker<S>>(g, init_grouse<S>(g, initial, seed));
    }
    case TrackerKind::past:
      return std::make_unique<PastTracker<S>>(cfg, init_past<S>(cfg, initial, seed));
  }
  throw std::invalid_argument("make_tracker: unknown kind");
}

template <typename S>
std::unique_ptr<SubspaceTracker<S>> restore_tracker(const Checkpoint<S>& ckpt,
                                                    Execution execution) {
  const auto t = static_cast<std::int64_t>(ckpt.scalar("t"));
  const TrackerKind kind = parse_tracker_kind(ckpt.variant);
  if (kind == TrackerKind::grouse) {
    GrouseConfig g;
    g.ambient_dim = static_cast<Index>(ckpt.scalar("ambient_dim"));
    g.rank = static_cast<Index>(ckpt.scalar("rank"));
    g.step.kind = ckpt.scalar("step_constant") != 0.0 ? GrouseStepRule::Kind::constant
                                                      : GrouseStepRule::Kind::diminishing;
    g.step.scale = ckpt.scalar("step_scale");
    g.validate();
    GrouseState<S> st{single(ckpt, "D"), t};
    return std::make_unique<GrouseTracker<S>>(g, std::move(st));
  }

  TrackerConfig cfg = common_config(ckpt, execution);
  cfg.validate();
  const Mat<S>& d = single(ckpt, "D");
  if (d.rows() != cfg.ambient_dim || d.cols() != cfg.rank) {
    throw std::runtime_error("checkpoint: D has the wrong shape");
  }
  switch (kind) {
    case TrackerKind::petrels: {
      cfg.refresh_period =
          ckpt.has_scalar("refresh_period") ? static_cast<Index>(ckpt.scalar("refresh_period")) : 0;
      cfg.rebalance_period = ckpt.has_scalar("rebalance_period")
                                 ? static_cast<Index>(ckpt.scalar("rebalance_period"))
                                 : 0;
      TrackerState<S> st;
      st.subspace = d;
      st.rinv = ckpt.block("Rinv");
      if (ckpt.has_block("R")) st.correlation = ckpt.block("R");
      st.t = t;
      if (static_cast<Index>(st.rinv.size()) != cfg.ambient_dim) {
        throw std::runtime_error("checkpoint: Rinv count differs from ambient_dim");
      }
      if (cfg.refresh_period > 0 && st.correlation.size() != st.rinv.size()) {
        throw std::runtime_error("checkpoint: refresh enabled but R blocks missing");
      }
      return std::make_unique<PetrelsTracker<S>>(cfg, std::move(st));
    }
    case TrackerKind::simplified:
      return std::make_unique<SimplifiedTracker<S>>(
          cfg, SimplifiedState<S>{d, single(ckpt, "Rinv"), t});
    case TrackerKind::regularized: {
      RegularizedConfig rc;
      rc.base = cfg;
      rc.mu = ckpt.scalar("mu");
      RegularizedState<S> st;
      st.subspace = d;
      st.gram = ckpt.block("T");
      for (const auto& s : ckpt.block("s")) st.rhs.emplace_back(s.col(0));
      st.mu_prev = ckpt.scalar("mu_prev");
      st.t = t;
      return std::make_unique<RegularizedTracker<S>>(rc, std::move(st));
    }
    case TrackerKind::past:
      return std::make_unique<PastTracker<S>>(cfg, PastState<S>{d, single(ckpt, "Rinv"), t});
    case TrackerKind::grouse:
      break;
  }
  throw std::runtime_error("restore_tracker: unsupported variant");
}

template std::unique_ptr<SubspaceTracker<Real>> make_tracker<Real>(const TrackerOptions&,
                                                                   std::uint64_t,
                                                                   const std::optional<Mat<Real>>&);
template std::unique_ptr<SubspaceTracker<Complex>> make_tracker<Complex>(
    const TrackerOptions&, std::uint64_t, const std::optional<Mat<Complex>>&);
template std::unique_ptr<SubspaceTracker<Real>> restore_tracker<Real>(const Checkpoint<Real>&,
                                                                      Execution);
template std::unique_ptr<SubspaceTracker<Complex>> restore_tracker<Complex>(
    const Checkpoint<Complex>&, Execution);

}  // namespace petrels
