#include "petrels/selftest.hpp"

#include "petrels/baselines.hpp"
#include "petrels/checkpoint.hpp"
#include "petrels/esprit.hpp"
#include "petrels/linalg.hpp"
#include "petrels/metrics.hpp"
#include "petrels/oracles.hpp"
#include "petrels/petrels.hpp"
#include "petrels/rng.hpp"
#include "petrels/stream_model.hpp"
#include "petrels/tracker.hpp"
#include "petrels/variants.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

namespace petrels {

namespace {

constexpr std::uint64_t kSelftestStream = 0x53454c4654455354ULL;

// Random partially observed samples from a fixed low-rank model.
template <typename S>
std::vector<ObservedSample<S>> random_samples(Index m, Index r_true, std::int64_t n, double rate,
                                              double noise, std::uint64_t seed) {
  Rng rng(seed, kSelftestStream, 0);
  const Mat<S> u = rng.gaussian<S>(m, r_true);
  std::vector<ObservedSample<S>> out;
  for (std::int64_t t = 1; t <= n; ++t) {
    ObservedSample<S> s;
    s.t = t;
    Vec<S> x = u * rng.gaussian<S>(r_true, 1);
    for (Index i = 0; i < m; ++i) x(i) += noise * rng.standard<S>();
    s.mask = MaskVec::Constant(m, false);
    for (Index i = 0; i < m; ++i) s.mask(i) = rng.uniform01() < rate;
    if (!s.mask.any()) s.mask(static_cast<Index>(rng.below(static_cast<std::uint64_t>(m)))) = true;
    s.values = Vec<S>::Zero(m);
    for (Index i = 0; i < m; ++i) {
      if (s.mask(i)) s.values(i) = x(i);
    }
    s.truth = x;
    out.push_back(std::move(s));
  }
  return out;
}

template <typename S>
std::vector<ObservedSample<S>> full_mask(std::vector<ObservedSample<S>> samples) {
  for (auto& s : samples) {
    s.mask.setConstant(true);
    s.values = *s.truth;
  }
  return samples;
}

TrackerConfig small_config(Index m, Index r, double lambda, Execution exec = Execution::parallel) {
  TrackerConfig c;
  c.ambient_dim = m;
  c.rank = r;
  c.discount = lambda;
  c.init_scale = 1e3;
  c.execution = exec;
  return c;
}

CheckResult make(const std::string& name, double value, double tol, const std::string& detail = {}) {
  return {name, value <= tol, value, tol, detail};
}

template <typename S>
double rel(const Mat<S>& a, const Mat<S>& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// Runs PETRELS and returns the worst relative deviation of any row from the
// direct discounted ridge solve.
template <typename S>
double oracle_deviation(std::uint64_t seed, double lambda) {
  const Index m = 10, r = 3;
  const auto samples = random_samples<S>(m, r, 40, 0.6, 0.1, seed);
  const TrackerConfig cfg = small_config(m, r, lambda);
  TrackerState<S> st = init_state<S>(cfg, std::nullopt, seed);
  const Mat<S> d0 = st.subspace;
  std::vector<std::vector<oracle::RowObservation<S>>> hist(static_cast<std::size_t>(m));
  for (const auto& s : samples) {
    const auto out = petrels_step(st, cfg, s);
    for (Index i = 0; i < m; ++i) {
      hist[static_cast<std::size_t>(i)].push_back({out.coefficient, s.values(i), s.mask(i)});
    }
  }
  double worst = 0.0;
  for (Index i = 0; i < m; ++i) {
    const RowVec<S> o =
        oracle::discounted_row_solve<S>(hist[static_cast<std::size_t>(i)], lambda, 1e3, d0.row(i));
    worst = std::max(worst, (st.subspace.row(i) - o).norm() / std::max(o.norm(), 1e-300));
  }
  return worst;
}

CheckResult check_oracle(std::uint64_t seed) {
  const double e = std::max({oracle_deviation<Real>(seed, 0.9), oracle_deviation<Real>(seed, 1.0),
                             oracle_deviation<Complex>(seed, 0.9)});
  return make("core_oracle_equivalence", e, 1e-8);
}

CheckResult check_masked_ls(std::uint64_t seed) {
  Rng rng(seed, kSelftestStream, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Mat<Real> d = rng.gaussian<Real>(6, 2);
    ObservedSample<Real> s;
    s.t = 1;
    s.mask = MaskVec::Constant(6, false);
    for (Index i : rng.choose(6, 3)) s.mask(i) = true;
    s.values = rng.gaussian<Real>(6, 1).cwiseProduct(s.mask.cast<Real>().matrix());
    const Vec<Real> a = estimate_coefficient(d, s);
    const Vec<Real> o = oracle::masked_least_squares<Real>(d, s.values, s.mask);
    worst = std::max(worst, rel<Real>(a, o));
  }
  return make("masked_coefficient_oracle", worst, 1e-10);
}

CheckResult check_hessian(std::uint64_t seed) {
  Rng rng(seed, kSelftestStream, 2);
  const Index r = 3;
  const double lambda = 0.95;
  std::vector<oracle::RowObservation<Real>> hist;
  for (int t = 0; t < 25; ++t) {
    hist.push_back({rng.gaussian<Real>(r, 1), rng.normal(), rng.uniform01() < 0.7});
  }
  const auto n = static_cast<double>(hist.size());
  auto objective = [&](const Vec<Real>& d) {
    double f = 0.0;
    for (std::size_t t = 0; t < hist.size(); ++t) {
      if (!hist[t].observed) continue;
      const double e = hist[t].value - d.dot(hist[t].coeff);
      f += std::pow(lambda, n - static_cast<double>(t + 1)) * e * e;
    }
    return f;
  };
  const Mat<Real> fd = oracle::finite_difference_hessian(objective, rng.gaussian<Real>(r, 1), 1e-3);
  const Mat<Real> analytic = 2.0 * oracle::discounted_gram<Real>(hist, lambda);
  return make("hessian_identity", rel<Real>(fd, analytic), 1e-5);
}

CheckResult check_rinv(std::uint64_t seed, bool inject) {
  const Index m = 20, r = 4;
  const auto samples = random_samples<Real>(m, r, 3000, 0.5, 1e-2, seed);
  const TrackerConfig cfg = small_config(m, r, 0.98);
  TrackerState<Real> st = init_state<Real>(cfg, std::nullopt, seed);
  for (const auto& s : samples) petrels_step(st, cfg, s);
  if (inject) st.rinv[0](0, 1) += 1e-3 * std::max(1.0, st.rinv[0].norm());
  double asym = 0.0, neg = 0.0;
  for (const auto& p : st.rinv) {
    asym = std::max(asym, hermitian_defect(p));
    neg = std::max(neg, -min_hermitian_eigenvalue(p) / std::max(1.0, p.norm()));
  }
  std::ostringstream detail;
  detail << "max asymmetry " << asym << ", max negative eigenvalue " << neg;
  return make("rinv_hermitian_psd", std::max(asym / 1e-10, neg / 1e-8), 1.0, detail.str());
}

CheckResult check_unobserved_rows(std::uint64_t seed) {
  const Index m = 12, r = 3;
  auto samples = random_samples<Real>(m, r, 200, 0.5, 0.0, seed);
  for (auto& s : samples) {
    s.mask(0) = false;
    s.values(0) = 0.0;
    if (!s.mask.any()) {
      s.mask(1) = true;
      s.values(1) = (*s.truth)(1);
    }
  }
  const TrackerConfig cfg = small_config(m, r, 0.9);
  TrackerState<Real> st = init_state<Real>(cfg, std::nullopt, seed);
  SimplifiedState<Real> ss = init_simplified<Real>(cfg, std::nullopt, seed);
  const RowVec<Real> d0 = st.subspace.row(0);
  for (const auto& s : samples) {
    petrels_step(st, cfg, s);
    simplified_step(ss, cfg, s);
  }
  const bool same = st.subspace.row(0) == d0 && ss.subspace.row(0) == d0;
  return make("unobserved_row_invariance", same ? 0.0 : 1.0, 0.0);
}

CheckResult check_simplified_full(std::uint64_t seed) {
  const Index m = 15, r = 3;
  const auto samples = full_mask(random_samples<Real>(m, r, 60, 1.0, 1e-2, seed));
  const TrackerConfig cfg = small_config(m, r, 0.95);
  TrackerState<Real> st = init_state<Real>(cfg, std::nullopt, seed);
  SimplifiedState<Real> ss = init_simplified<Real>(cfg, std::nullopt, seed);
  double worst = 0.0;
  for (const auto& s : samples) {
    petrels_step(st, cfg, s);
    simplified_step(ss, cfg, s);
    worst = std::max(worst, rel<Real>(ss.subspace, st.subspace));
  }
  return make("simplified_full_mask_equivalence", worst, 1e-10);
}

CheckResult check_regularized_limit(std::uint64_t seed) {
  const Index m = 12, r = 3;
  const auto samples = random_samples<Real>(m, r, 80, 0.6, 1e-2, seed);
  RegularizedConfig rc;
  rc.base = small_config(m, r, 0.95);
  rc.mu = 0.0;
  TrackerState<Real> st = init_state<Real>(rc.base, std::nullopt, seed);
  RegularizedState<Real> rs = init_regularized<Real>(rc, std::nullopt, seed);
  double worst = 0.0;
  for (const auto& s : samples) {
    petrels_step(st, rc.base, s);
    regularized_step(rs, rc, s);
    worst = std::max(worst, rel<Real>(rs.subspace, st.subspace));
  }
  return make("regularized_mu_zero_equivalence", worst, 1e-8);
}

std::vector<CheckResult> check_grouse(std::uint64_t seed) {
  const Index m = 30, r = 3;
  const auto samples = random_samples<Real>(m, r, 300, 0.4, 1e-3, seed);
  GrouseConfig g;
  g.ambient_dim = m;
  g.rank = r;
  g.step = {GrouseStepRule::Kind::constant, 0.5};
  GrouseState<Real> st = init_grouse<Real>(g, std::nullopt, seed);
  double ortho = 0.0, rank_one = 0.0;
  for (const auto& s : samples) {
    const Mat<Real> before = st.subspace;
    grouse_step(st, g, s);
    ortho = std::max(ortho, (st.subspace.transpose() * st.subspace - Mat<Real>::Identity(r, r)).norm());
    const Eigen::JacobiSVD<Mat<Real>> svd(st.subspace - before);
    const auto& sv = svd.singularValues();
    if (sv(0) > 1e-14) rank_one = std::max(rank_one, sv(1) / sv(0));
  }
  return {make("grouse_orthonormality", ortho, 1e-8), make("grouse_rank_one_update", rank_one, 1e-10)};
}

std::vector<CheckResult> check_full_observation(std::uint64_t seed) {
  const Index m = 15, r = 3;
  const auto samples = full_mask(random_samples<Real>(m, r, 50, 1.0, 1e-2, seed));
  const TrackerConfig cfg = small_config(m, r, 1.0);
  TrackerState<Real> st = init_state<Real>(cfg, std::nullopt, seed);
  double worst = 0.0, past = 0.0;
  for (const auto& s : samples) {
    const Mat<Real> d = st.subspace;
    const Mat<Real> gram = d.transpose() * d;
    const Vec<Real> expected = gram.ldlt().solve(d.transpose() * s.values);
    const auto out = petrels_step(st, cfg, s);
    worst = std::max(worst, rel<Real>(out.coefficient, expected));
    // PAST estimates D^T x, which differs by exactly the factor (D^T D)^{-1}.
    PastState<Real> ps = init_past<Real>(cfg, d, seed);
    const auto pout = past_step(ps, s.values, 1.0);
    past = std::max(past, rel<Real>(Vec<Real>(gram * out.coefficient), pout.coefficient));
  }
  return {make("full_observation_coefficient", worst, 1e-10),
          make("past_coefficient_relation", past, 1e-10)};
}

std::vector<CheckResult> check_metrics(std::uint64_t seed) {
  Rng rng(seed, kSelftestStream, 3);
  double basis = 0.0, angles = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Mat<Real> d = rng.gaussian<Real>(10, 3);
    const Mat<Real> u = rng.gaussian<Real>(10, 3);
    const Mat<Real> q = rng.gaussian<Real>(3, 3);
    const double e = subspace_error<Real>(d, u);
    basis = std::max(basis, std::abs(subspace_error<Real>(Mat<Real>(d * q), u) - e));
    angles = std::max(angles, std::abs(oracle::principal_angle_subspace_error<Real>(d, u) - e));
  }
  return {make("subspace_error_basis_invariance", basis, 1e-10),
          make("subspace_error_principal_angles", angles, 1e-12)};
}

CheckResult check_esprit(std::uint64_t seed) {
  Rng rng(seed, kSelftestStream, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> freqs;
    while (freqs.size() < 5) {
      const double f = rng.uniform01();
      bool far = true;
      for (double g : freqs) far = far && frequency_distance(f, g) > 0.02;
      if (far) freqs.push_back(f);
    }
    const Mat<Complex> basis = vandermonde(freqs, 64) * rng.gaussian<Complex>(5, 5);
    const auto est = esprit(basis).frequencies;
    std::sort(freqs.begin(), freqs.end());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      worst = std::max(worst, frequency_distance(est[i], freqs[i]));
    }
  }
  return make("esprit_exactness", worst, 1e-8);
}

CheckResult check_serial_parallel(std::uint64_t seed) {
  const Index m = 64, r = 4;
  const auto samples = random_samples<Real>(m, r, 100, 0.3, 1e-2, seed);
  const TrackerConfig ser = small_config(m, r, 0.98, Execution::serial);
  const TrackerConfig par = small_config(m, r, 0.98, Execution::parallel);
  TrackerState<Real> a = init_state<Real>(ser, std::nullopt, seed);
  TrackerState<Real> b = init_state<Real>(par, std::nullopt, seed);
  for (const auto& s : samples) {
    petrels_step(a, ser, s);
    petrels_step(b, par, s);
  }
  bool same = a.subspace == b.subspace;
  for (std::size_t i = 0; i < a.rinv.size(); ++i) same = same && a.rinv[i] == b.rinv[i];
  return make("serial_parallel_bitwise", same ? 0.0 : 1.0, 0.0);
}

CheckResult check_checkpoint(std::uint64_t seed) {
  const Index m = 10, r = 2;
  const auto samples = random_samples<Real>(m, r, 40, 0.5, 1e-2, seed);
  TrackerOptions opts;
  opts.config = small_config(m, r, 0.97);
  auto trk = make_tracker<Real>(opts, seed);
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) trk->step(samples[i]);
  std::stringstream buf;
  write_checkpoint(buf, trk->checkpoint());
  auto restored = restore_tracker<Real>(read_checkpoint<Real>(buf));
  trk->step(samples.back());
  restored->step(samples.back());
  return make("checkpoint_roundtrip", trk->subspace() == restored->subspace() ? 0.0 : 1.0, 0.0);
}

}  // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions& options) {
  const std::uint64_t seed = options.seed;
  std::vector<CheckResult> out;
  auto guarded = [&](const std::string& name, const std::function<std::vector<CheckResult>()>& fn) {
    try {
      for (auto& r : fn()) out.push_back(std::move(r));
    } catch (const std::exception& e) {
      out.push_back({name, false, 0.0, 0.0, std::string("exception: ") + e.what()});
    }
  };
  auto one = [](CheckResult r) { return std::vector<CheckResult>{std::move(r)}; };

  guarded("core_oracle_equivalence", [&] { return one(check_oracle(seed)); });
  guarded("masked_coefficient_oracle", [&] { return one(check_masked_ls(seed)); });
  guarded("hessian_identity", [&] { return one(check_hessian(seed)); });
  guarded("rinv_hermitian_psd", [&] { return one(check_rinv(seed, options.inject_asymmetry)); });
  guarded("unobserved_row_invariance", [&] { return one(check_unobserved_rows(seed)); });
  guarded("simplified_full_mask_equivalence", [&] { return one(check_simplified_full(seed)); });
  guarded("regularized_mu_zero_equivalence", [&] { return one(check_regularized_limit(seed)); });
  guarded("grouse", [&] { return check_grouse(seed); });
  guarded("full_observation", [&] { return check_full_observation(seed); });
  guarded("metrics", [&] { return check_metrics(seed); });
  guarded("esprit_exactness", [&] { return one(check_esprit(seed)); });
  guarded("serial_parallel_bitwise", [&] { return one(check_serial_parallel(seed)); });
  guarded("checkpoint_roundtrip", [&] { return one(check_checkpoint(seed)); });
  return out;
}

void write_selftest_report(std::ostream& os, const std::vector<CheckResult>& results) {
  os << "check,status,value,tolerance,detail\n";
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    os << r.name << ',' << (r.passed ? "pass" : "fail") << ',' << format_double(r.value) << ','
       << format_double(r.tolerance) << ',' << detail << '\n';
  }
}

}  // namespace petrels
