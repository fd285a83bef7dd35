#include "petrels/stream_model.hpp"

#include "petrels/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace petrels {

void StreamScenario::validate() const {
  if (ambient_dim <= 0 || true_rank <= 0 || observed_per_step <= 0 || horizon <= 0) {
    throw std::invalid_argument("StreamScenario: dimensions must be positive");
  }
  if (observed_per_step > ambient_dim) {
    throw std::invalid_argument("StreamScenario: observed_per_step K exceeds ambient_dim M");
  }
  if (true_rank > observed_per_step) {
    throw std::invalid_argument("StreamScenario: need true_rank <= observed_per_step");
  }
  if (noise_std < 0.0) throw std::invalid_argument("StreamScenario: negative noise_std");
  std::int64_t prev = 0;
  for (const auto& change : change_schedule) {
    if (change.at <= prev || change.at > horizon) {
      throw std::invalid_argument(
          "StreamScenario: change times must be strictly increasing within [1, horizon]");
    }
    prev = change.at;
  }
  if (!column_scales.empty() && static_cast<Index>(column_scales.size()) != true_rank) {
    throw std::invalid_argument("StreamScenario: column_scales length must equal true_rank");
  }
}

std::vector<double> strong_weak_scales(Index strong, Index weak, double weak_level,
                                       std::uint64_t seed) {
  Rng rng(seed, rng_stream::kScales, 0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(strong + weak));
  for (Index i = 0; i < strong; ++i) out.push_back(rng.normal());
  for (Index i = 0; i < weak; ++i) out.push_back(weak_level * rng.normal());
  return out;
}

template <typename S>
LowRankStream<S>::LowRankStream(StreamScenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  if (scenario_.scalar_field != field_of<S>()) {
    throw std::invalid_argument("LowRankStream: scenario scalar field does not match stream type");
  }
  const Index m = scenario_.ambient_dim;
  const Index r = scenario_.true_rank;
  Rng first(scenario_.seed, rng_stream::kSubspace, 0);
  epochs_.push_back(first.template gaussian<S>(m, r));
  for (std::size_t k = 0; k < scenario_.change_schedule.size(); ++k) {
    Rng rng(scenario_.seed, rng_stream::kSubspace, k + 1);
    Mat<S> fresh = rng.template gaussian<S>(m, r);
    if (const auto& angle = scenario_.change_schedule[k].rotation_angle) {
      fresh = std::cos(*angle) * epochs_.back() + std::sin(*angle) * fresh;
    }
    epochs_.push_back(std::move(fresh));
  }
  if (!scenario_.column_scales.empty()) {
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(scenario_.column_scales.data(), r);
    for (auto& u : epochs_) u = u * s.cast<S>().asDiagonal();
  }
}

template <typename S>
const Mat<S>& LowRankStream<S>::subspace_at(std::int64_t t) const {
  std::size_t epoch = 0;
  while (epoch < scenario_.change_schedule.size() && t > scenario_.change_schedule[epoch].at) {
    ++epoch;
  }
  return epochs_[epoch];
}

template <typename S>
ObservedSample<S> LowRankStream<S>::sample(std::int64_t t) const {
  if (t < 1) throw std::invalid_argument("LowRankStream: time index starts at 1");
  const Index m = scenario_.ambient_dim;
  Rng rng(scenario_.seed, rng_stream::kSample, static_cast<std::uint64_t>(t));
  Vec<S> coeff = rng.template gaussian<S>(scenario_.true_rank, 1);
  Vec<S> x = subspace_at(t) * coeff;
  if (scenario_.noise_std > 0.0) {
    for (Index i = 0; i < m; ++i) x(i) += scenario_.noise_std * rng.template standard<S>();
  }
  ObservedSample<S> out;
  out.t = t;
  out.mask = MaskVec::Constant(m, false);
  out.values = Vec<S>::Zero(m);
  for (Index idx : rng.choose(m, scenario_.observed_per_step)) {
    out.mask(idx) = true;
    out.values(idx) = x(idx);
  }
  out.truth = std::move(x);
  return out;
}

template <typename S>
std::vector<ObservedSample<S>> LowRankStream<S>::generate() const {
  std::vector<ObservedSample<S>> out;
  out.reserve(static_cast<std::size_t>(scenario_.horizon));
  for (std::int64_t t = 1; t <= scenario_.horizon; ++t) out.push_back(sample(t));
  return out;
}

template class LowRankStream<Real>;
template class LowRankStream<Complex>;

// ---------------------------------------------------------------------------

void ModeSet::validate() const {
  if (frequencies.size() != amplitudes.size()) {
    throw std::invalid_argument("ModeSet: frequencies and amplitudes differ in length");
  }
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    if (!(frequencies[i] >= 0.0 && frequencies[i] < 1.0)) {
      throw std::invalid_argument("ModeSet: frequency " + std::to_string(frequencies[i]) +
                                  " outside [0,1)");
    }
    if (!(amplitudes[i] >= 0.0)) throw std::invalid_argument("ModeSet: negative amplitude");
    for (std::size_t j = 0; j < i; ++j) {
      if (frequencies[i] == frequencies[j]) {
        throw std::invalid_argument("ModeSet: duplicate frequency");
      }
    }
  }
}

void DoaScenario::validate() const {
  if (sensors < 2) throw std::invalid_argument("DoaScenario: need at least 2 sensors");
  if (observed_per_step <= 0 || observed_per_step > sensors) {
    throw std::invalid_argument("DoaScenario: need 0 < K <= sensors");
  }
  if (noise_std < 0.0) throw std::invalid_argument("DoaScenario: negative noise_std");
  if (initial.size() == 0) throw std::invalid_argument("DoaScenario: no modes");
  initial.validate();
  std::int64_t prev = 0;
  for (const auto& change : mode_schedule) {
    if (change.at <= prev || change.at > horizon) {
      throw std::invalid_argument("DoaScenario: mode schedule must be strictly increasing");
    }
    if (change.modes.size() == 0) throw std::invalid_argument("DoaScenario: empty scene");
    change.modes.validate();
    prev = change.at;
  }
}

Mat<Complex> vandermonde(const std::vector<double>& frequencies, Index n) {
  Mat<Complex> v(n, static_cast<Index>(frequencies.size()));
  for (Index j = 0; j < v.cols(); ++j) {
    const double w = frequencies[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      // reduce the phase before evaluating to keep large i exact
      const double phase = 2.0 * std::numbers::pi * std::fmod(w * static_cast<double>(i), 1.0);
      v(i, j) = std::polar(1.0, phase);
    }
  }
  return v;
}

DoaScenario reference_doa_scene(std::uint64_t seed) {
  DoaScenario s;
  s.sensors = 256;
  s.noise_std = 0.1;
  s.observed_per_step = 30;
  s.horizon = 4000;
  s.seed = seed;
  s.initial = {{0.1769, 0.1992, 0.2116, 0.6776, 0.7599}, {0.3, 0.8, 0.5, 1.0, 0.1}};
  s.mode_schedule = {
      {1000, {{0.1769, 0.1992, 0.4116, 0.6776, 0.8599}, {0.3, 0.8, 0.5, 1.0, 0.1}}},
      {2000, {{0.1769, 0.1992, 0.4116, 0.6776, 0.8599, 0.9513}, {0.3, 0.8, 0.5, 1.0, 0.1, 0.6}}},
      {3000, {{0.1769, 0.1992, 0.4116, 0.6776, 0.9513}, {0.3, 0.8, 0.5, 1.0, 0.6}}},
  };
  return s;
}

DoaStream::DoaStream(DoaScenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  auto build = [&](const ModeSet& modes) {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(modes.amplitudes.data(),
                                                          static_cast<Index>(modes.size()));
    return Mat<Complex>(vandermonde(modes.frequencies, scenario_.sensors) *
                        d.cast<Complex>().asDiagonal());
  };
  scaled_bases_.push_back(build(scenario_.initial));
  for (const auto& change : scenario_.mode_schedule) scaled_bases_.push_back(build(change.modes));
}

const ModeSet& DoaStream::modes_at(std::int64_t t) const {
  const ModeSet* current = &scenario_.initial;
  for (const auto& change : scenario_.mode_schedule) {
    if (t > change.at) current = &change.modes;
  }
  return *current;
}

ObservedSample<Complex> DoaStream::sample(std::int64_t t) const {
  if (t < 1) throw std::invalid_argument("DoaStream: time index starts at 1");
  std::size_t stage = 0;
  while (stage < scenario_.mode_schedule.size() && t > scenario_.mode_schedule[stage].at) ++stage;
  const Mat<Complex>& basis = scaled_bases_[stage];
  const Index n = scenario_.sensors;

  Rng rng(scenario_.seed, rng_stream::kSample, static_cast<std::uint64_t>(t));
  Vec<Complex> coeff(basis.cols());
  for (Index i = 0; i < coeff.size(); ++i) {
    coeff(i) = scenario_.complex_coefficients ? rng.complex_normal() : Complex(rng.normal(), 0.0);
  }
  Vec<Complex> x = basis * coeff;
  if (scenario_.noise_std > 0.0) {
    for (Index i = 0; i < n; ++i) x(i) += scenario_.noise_std * rng.complex_normal();
  }
  ObservedSample<Complex> out;
  out.t = t;
  out.mask = MaskVec::Constant(n, false);
  out.values = Vec<Complex>::Zero(n);
  for (Index idx : rng.choose(n, scenario_.observed_per_step)) {
    out.mask(idx) = true;
    out.values(idx) = x(idx);
  }
  out.truth = std::move(x);
  return out;
}

std::vector<ObservedSample<Complex>> DoaStream::generate() const {
  std::vector<ObservedSample<Complex>> out;
  out.reserve(static_cast<std::size_t>(scenario_.horizon));
  for (std::int64_t t = 1; t <= scenario_.horizon; ++t) out.push_back(sample(t));
  return out;
}

std::vector<ObservedSample<Complex>> gen_doa_stream(const DoaScenario& scenario) {
  return DoaStream(scenario).generate();
}

// ---------------------------------------------------------------------------

McDataset gen_mc_dataset(Index rows, Index cols, Index rank, EntryDistribution dist,
                         double sampling_rate, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0 || rank <= 0) {
    throw std::invalid_argument("gen_mc_dataset: dimensions must be positive");
  }
  if (rank > std::min(rows, cols)) throw std::invalid_argument("gen_mc_dataset: rank too large");
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    throw std::invalid_argument("gen_mc_dataset: sampling rate must lie in (0, 1]");
  }
  Rng rng(seed, rng_stream::kMatrix, 0);
  auto draw = [&](Index r, Index c) {
    Mat<Real> out(r, c);
    for (Index j = 0; j < c; ++j) {
      for (Index i = 0; i < r; ++i) {
        out(i, j) = dist == EntryDistribution::gaussian ? rng.normal() : rng.uniform01();
      }
    }
    return out;
  };
  const Mat<Real> u = draw(rows, rank);
  const Mat<Real> v = draw(cols, rank);
  McDataset out;
  out.rank = rank;
  out.matrix = u * v.transpose();
  out.mask = MaskMat::Constant(rows, cols, true);
  if (sampling_rate < 1.0) {
    Rng mask_rng(seed, rng_stream::kMatrix, 1);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) out.mask(i, j) = mask_rng.uniform01() < sampling_rate;
    }
  }
  return out;
}

}  // namespace petrels
