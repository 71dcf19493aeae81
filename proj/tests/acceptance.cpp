// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Criteria that need threshold constants calibrate them on seed
// ranges disjoint from the evaluation seeds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "modcb/harness.hpp"

using namespace modcb;

namespace {

int g_workers = 1;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

Eigen::VectorXd gaussian_vector(int dim, RngStream& rng) {
  Eigen::VectorXd x(dim);
  for (int j = 0; j < dim; ++j) x[j] = rng.next_gaussian();
  return x;
}

Eigen::MatrixXd random_psd(int dim, RngStream& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.next_gaussian();
  return g * g.transpose() / static_cast<double>(dim);
}

double operator_norm(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// 1. Thresholding operator: idempotence, floor, proximal non-expansiveness.
// Caveat: eigenvalue clipping is the Frobenius-norm projection onto
// {X >= gamma I}, and prox non-expansiveness holds in that norm.  The
// operator-norm form checked here is false in general (the absolute-value
// map is not operator-Lipschitz with constant 1) and fails for roughly 2.5%
// of random Wishart pairs; the check is kept at its stated tolerance rather
// than weakened, so this criterion is expected to report the violations.
// ---------------------------------------------------------------------------
CriterionResult criterion_1() {
  int failures = 0;
  double worst_expansion = 0.0;
  for (int pair = 0; pair < 200; ++pair) {
    RngStream rng = derive_substream(pair, "accept-c1");
    const int dim = 1 + static_cast<int>(rng.next_below(8));
    const double gamma = 0.05 + 0.95 * rng.next_uniform();
    const Eigen::MatrixXd a = random_psd(dim, rng);
    const Eigen::MatrixXd b = random_psd(dim, rng);
    const Eigen::MatrixXd ta = threshold_eigenvalues(a, gamma);
    const Eigen::MatrixXd tb = threshold_eigenvalues(b, gamma);
    const bool idem =
        (threshold_eigenvalues(ta, gamma) - ta).cwiseAbs().maxCoeff() <= 1e-10;
    const bool floor = min_eigenvalue(ta) >= gamma - 1e-10 &&
                       min_eigenvalue(tb) >= gamma - 1e-10;
    const double expansion = operator_norm(ta - tb) - operator_norm(a - b);
    worst_expansion = std::max(worst_expansion, expansion);
    if (!idem || !floor || expansion > 1e-10) ++failures;
  }
  CriterionResult result;
  result.pass = failures == 0;
  result.detail = "200 PSD pairs, " + std::to_string(failures) +
                  " violations, worst expansion " +
                  std::to_string(worst_expansion);
  return result;
}

// ---------------------------------------------------------------------------
// 2. Fast U-statistic path equals the naive O(n^2) double sum.
// ---------------------------------------------------------------------------
CriterionResult criterion_2() {
  int failures = 0;
  double worst_rel = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    RngStream rng = derive_substream(inst, "accept-c2");
    const int dim = 1 + static_cast<int>(rng.next_below(10));
    const long n = 2 + static_cast<long>(rng.next_below(49));
    const double gamma = 0.1 + 0.9 * rng.next_uniform();
    const ThresholdedCovariance cov =
        ThresholdedCovariance::from_matrix(random_psd(dim, rng), gamma, n);
    std::vector<LabeledSample> samples(n);
    for (auto& s : samples) {
      s.x = gaussian_vector(dim, rng);
      s.y = rng.next_gaussian();
    }
    const double fast = estimate_residual(samples, cov);
    const double naive = estimate_residual_naive(samples, cov);
    const double rel =
        std::abs(fast - naive) / std::max(1.0, std::abs(naive));
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-8) ++failures;
  }
  CriterionResult result;
  result.pass = failures == 0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "100 instances, worst relative gap %.3g",
                worst_rel);
  result.detail = buf;
  return result;
}

// ---------------------------------------------------------------------------
// 3. Estimator mean: d=5, Sigma=I, ||theta*||^2 = 0.36, n=5000, m=20000.
// ---------------------------------------------------------------------------
CriterionResult criterion_3() {
  const int kReps = 500, kDim = 5;
  const long kLabeled = 5000, kUnlabeled = 20000;
  const double kGamma = 0.1, kTarget = 0.36;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(kDim);
  theta[0] = 0.6;

  std::vector<double> estimates(kReps, 0.0);
  parallel_for(kReps, g_workers, [&](long rep) {
    RngStream rng = derive_substream(static_cast<std::uint64_t>(rep),
                                     "accept-c3");
    CovarianceAccumulator acc(kDim);
    for (long i = 0; i < kUnlabeled; ++i) acc.add(gaussian_vector(kDim, rng));
    const ThresholdedCovariance cov =
        ThresholdedCovariance::from_accumulator(acc, kGamma);
    Eigen::VectorXd moment_vec = Eigen::VectorXd::Zero(kDim);
    Eigen::MatrixXd moment_sq = Eigen::MatrixXd::Zero(kDim, kDim);
    for (long i = 0; i < kLabeled; ++i) {
      const Eigen::VectorXd x = gaussian_vector(kDim, rng);
      const double y = x.dot(theta) + rng.next_gaussian();
      const Eigen::VectorXd u = x * y;
      moment_vec += u;
      moment_sq += u * u.transpose();
    }
    estimates[rep] = estimate_residual_from_moments(moment_vec, moment_sq,
                                                    kLabeled, cov);
  });

  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= kReps;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  const double se = std::sqrt(var / (kReps - 1) / kReps);

  CriterionResult result;
  const double err = std::abs(mean - kTarget);
  result.pass = err <= 3.0 * se && err <= 0.05 * kTarget;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mean E_hat %.5f vs %.2f (|err| %.3g, 3 SE %.3g, 5%% band %.3g)",
                mean, kTarget, err, 3.0 * se, 0.05 * kTarget);
  result.detail = buf;
  return result;
}

// ---------------------------------------------------------------------------
// 4. Error scaling: log-log slope of mean |E_hat - E| vs n in [-1.25, -0.75].
//    theta* = 0 so E = 0 and the degenerate 1/n term dominates.
// ---------------------------------------------------------------------------
CriterionResult criterion_4() {
  const int kReps = 500, kDim = 5;
  const std::vector<long> kSizes = {100, 200, 400, 800, 1600, 3200, 6400};
  const ThresholdedCovariance cov = ThresholdedCovariance::from_matrix(
      Eigen::MatrixXd::Identity(kDim, kDim), 0.1, 1);

  std::vector<std::pair<double, double>> points;
  for (std::size_t k = 0; k < kSizes.size(); ++k) {
    const long n = kSizes[k];
    std::vector<double> abs_err(kReps, 0.0);
    parallel_for(kReps, g_workers, [&](long rep) {
      RngStream rng = derive_substream(
          static_cast<std::uint64_t>(rep) * 100 + k, "accept-c4");
      Eigen::VectorXd moment_vec = Eigen::VectorXd::Zero(kDim);
      Eigen::MatrixXd moment_sq = Eigen::MatrixXd::Zero(kDim, kDim);
      for (long i = 0; i < n; ++i) {
        const Eigen::VectorXd u =
            gaussian_vector(kDim, rng) * rng.next_gaussian();
        moment_vec += u;
        moment_sq += u * u.transpose();
      }
      abs_err[rep] = std::abs(
          estimate_residual_from_moments(moment_vec, moment_sq, n, cov));
    });
    double mean = 0.0;
    for (double e : abs_err) mean += e;
    points.emplace_back(static_cast<double>(n), mean / kReps);
  }

  const double slope = fit_slope(points);
  CriterionResult result;
  result.pass = slope >= -1.25 && slope <= -0.75;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "slope %.4f (target [-1.25, -0.75])", slope);
  result.detail = buf;
  return result;
}

// ---------------------------------------------------------------------------
// 5 & 6 share a config family: d=20, K=5, T=2e4, delta=0.05, gamma=(d/T)^{1/3}.
// ---------------------------------------------------------------------------
RunConfig flat_u_config() {
  RunConfig cfg;
  cfg.horizon = 20000;
  cfg.num_arms = 5;
  cfg.dim = 20;
  cfg.failure_prob = 0.05;
  cfg.selector = SelectorKind::ModCB_U;
  cfg.kappa = default_kappa(SelectorKind::ModCB_U);
  cfg.gamma = default_gamma_u(20, 20000);
  return cfg;
}

Instance null_rank_deficient_instance(std::uint64_t seed) {
  RngStream rng = derive_substream(seed, "instance");
  return generate_instance(InstanceKind::SimpleMAB,
                           SpectrumSpec::rank_deficient(10), 5, 20, {}, rng);
}

CriterionResult criterion_5(CalibrationResult& calibration, bool& calibrated) {
  RunConfig cfg = flat_u_config();
  CriterionResult result;
  try {
    calibration = calibrate_constants(cfg, null_rank_deficient_instance, 40,
                                      10000, default_calibration_grid(),
                                      g_workers);
    calibrated = true;
  } catch (const std::exception& e) {
    result.detail = std::string("calibration failed: ") + e.what();
    return result;
  }
  cfg.c1 = calibration.c1;
  cfg.c2 = calibration.c2;
  cfg.c3 = calibration.c3;
  const double rate =
      switch_rate(cfg, null_rank_deficient_instance, 100, 0, g_workers);
  result.pass = rate <= 0.10;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "false-switch rate %.2f over 100 seeds (target <= 0.10; "
                "c1=%.4g c2=%.4g c3=%.4g)",
                rate, calibration.c1, calibration.c2, calibration.c3);
  result.detail = buf;
  return result;
}

CriterionResult criterion_6(const CalibrationResult& calibration,
                            bool calibrated) {
  CriterionResult result;
  if (!calibrated) {
    result.detail = "skipped: constants were not calibrated (criterion 5)";
    return result;
  }
  RunConfig cfg = flat_u_config();
  cfg.c1 = calibration.c1;
  cfg.c2 = calibration.c2;
  cfg.c3 = calibration.c3;
  const int kSeeds = 100;
  const long quarter = cfg.horizon / 4;

  std::vector<int> early_switch(kSeeds, 0);
  std::vector<double> rc_full(kSeeds, 0.0), rc_quarter(kSeeds, 0.0);
  parallel_for(kSeeds, g_workers, [&](long seed) {
    RunConfig local = cfg;
    local.master_seed = static_cast<std::uint64_t>(seed);
    RngStream rng = derive_substream(local.master_seed, "instance");
    const Instance inst = generate_instance(
        InstanceKind::LinearCB, SpectrumSpec::identity(), 5, 20, {}, rng);
    const RegretTrace trace = run_episode(local, inst);
    early_switch[seed] =
        trace.switch_time && *trace.switch_time <= cfg.horizon / 2;
    rc_full[seed] = trace.cum_complex.back();
    rc_quarter[seed] = trace.cum_complex[quarter - 1];
  });

  int early = 0;
  double mean_full = 0.0, mean_quarter = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    early += early_switch[s];
    mean_full += rc_full[s];
    mean_quarter += rc_quarter[s];
  }
  mean_full /= kSeeds;
  mean_quarter /= kSeeds;
  const double rate_full = mean_full / cfg.horizon;
  const double rate_quarter = mean_quarter / quarter;

  CriterionResult out;
  out.pass = early >= 90 && rate_full <= 0.5 * rate_quarter;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "switch before T/2 in %d/100; mean R^C(T)/T = %.4f vs 0.5 * "
                "R^C(T/4)/(T/4) = %.4f",
                early, rate_full, 0.5 * rate_quarter);
  out.detail = buf;
  return out;
}

// ---------------------------------------------------------------------------
// 7. Adaptivity: all arm covariances identity, gamma=0.5, T=5e4.
// ---------------------------------------------------------------------------
CriterionResult criterion_7() {
  RunConfig base;
  base.horizon = 50000;
  base.num_arms = 2;
  base.dim = 10;
  base.failure_prob = 0.05;
  base.gamma = 0.5;
  const int kSeeds = 50;

  const auto make_inst = [](std::uint64_t seed) {
    RngStream rng = derive_substream(seed, "instance");
    InstanceOptions opts;
    opts.bias_gap = 1.0;
    return generate_instance(InstanceKind::SimpleMAB, SpectrumSpec::identity(),
                             2, 10, opts, rng);
  };

  RunConfig adaptive = base;
  adaptive.selector = SelectorKind::ModCB_A;
  adaptive.kappa = default_kappa(SelectorKind::ModCB_A);
  const double tau = tau_min(adaptive);

  std::vector<int> no_late_forced(kSeeds, 0);
  std::vector<double> rs_adaptive(kSeeds, 0.0), rs_scheduled(kSeeds, 0.0);
  parallel_for(2 * kSeeds, g_workers, [&](long job) {
    const long seed = job % kSeeds;
    RunConfig cfg = job < kSeeds ? adaptive : base;
    if (job >= kSeeds) {
      cfg.selector = SelectorKind::ModCB;
      cfg.kappa = default_kappa(SelectorKind::ModCB);
    }
    cfg.master_seed = static_cast<std::uint64_t>(seed);
    const RegretTrace trace = run_episode(cfg, make_inst(cfg.master_seed));
    if (job < kSeeds) {
      int late_forced = 0;
      for (const RoundRecord& r : trace.rounds)
        if (r.forced && static_cast<double>(r.round) > tau) ++late_forced;
      no_late_forced[seed] = late_forced == 0;
      rs_adaptive[seed] = trace.cum_simple.back();
    } else {
      rs_scheduled[seed] = trace.cum_simple.back();
    }
  });

  int clean = 0;
  double mean_adaptive = 0.0, mean_scheduled = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    clean += no_late_forced[s];
    mean_adaptive += rs_adaptive[s];
    mean_scheduled += rs_scheduled[s];
  }
  mean_adaptive /= kSeeds;
  mean_scheduled /= kSeeds;

  CriterionResult result;
  result.pass = clean >= 45 && mean_adaptive <= 0.2 * mean_scheduled;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "zero forced beyond tau_min=%.0f in %d/50; mean R^S %.1f "
                "(adaptive) vs %.1f (scheduled), ratio %.3f (target <= 0.2)",
                tau, clean, mean_adaptive, mean_scheduled,
                mean_adaptive / mean_scheduled);
  result.detail = buf;
  return result;
}

// ---------------------------------------------------------------------------
// 8. Covariance sandwich under arm-averaged diversity: two arms covering
//    complementary halves of the axes, average spectrum 0.5 I.
// ---------------------------------------------------------------------------
RunConfig sandwich_config() {
  RunConfig cfg;
  // At the gamma = 0.3 boundary the W-set grows at roughly 2.5 t^{2/3}, so
  // the horizon must comfortably clear the |W| = 2000 checkpoint.
  cfg.horizon = 50000;
  cfg.num_arms = 2;
  cfg.dim = 10;
  cfg.failure_prob = 0.05;
  cfg.gamma = 0.3;
  cfg.selector = SelectorKind::ModCB_A;
  cfg.kappa = default_kappa(SelectorKind::ModCB_A);
  return cfg;
}

Instance split_spectrum_instance(std::uint64_t seed) {
  RngStream rng = derive_substream(seed, "instance");
  std::vector<double> low(10, 0.0), high(10, 0.0);
  for (int j = 0; j < 5; ++j) {
    low[j] = 1.0;
    high[9 - j] = 1.0;
  }
  const SpectrumSpec spec = SpectrumSpec::arm_heterogeneous(
      {SpectrumSpec::diagonal(low), SpectrumSpec::diagonal(high)});
  return generate_instance(InstanceKind::SimpleMAB, spec, 2, 10, {}, rng);
}

CriterionResult criterion_8() {
  const RunConfig cfg = sandwich_config();
  const int kSeeds = 50;
  const std::vector<long> kCheckpoints = {500, 2000};

  std::vector<int> seed_ok(kSeeds, 0);
  std::vector<double> worst_min(kSeeds, 0.0), worst_max(kSeeds, 0.0);
  parallel_for(kSeeds, g_workers, [&](long seed) {
    RunConfig local = cfg;
    local.master_seed = static_cast<std::uint64_t>(seed);
    const Instance inst = split_spectrum_instance(local.master_seed);
    Selector selector(local, derive_substream(local.master_seed, "explore"),
                      derive_substream(local.master_seed, "uniform-arm"));
    RngStream ctx = derive_substream(local.master_seed, "contexts");
    RngStream noise = derive_substream(local.master_seed, "noise");
    for (long t = 0; t < local.horizon; ++t) {
      const ContextSlate slate = draw_slate(inst, ctx);
      selector.step(slate, [&](int arm) {
        return sample_reward(inst, slate, arm, noise);
      });
    }
    const std::vector<LabeledSample>& w = selector.w_samples();
    bool ok = static_cast<long>(w.size()) >= kCheckpoints.back();
    double lo = 10.0, hi = 0.0;
    for (const long checkpoint : kCheckpoints) {
      if (static_cast<long>(w.size()) < checkpoint) break;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(cfg.dim, cfg.dim);
      for (long i = 0; i < checkpoint; ++i)
        cov += w[i].x * w[i].x.transpose();
      cov /= static_cast<double>(checkpoint);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          cov, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
      hi = std::max(hi, es.eigenvalues().maxCoeff());
      ok = ok && es.eigenvalues().minCoeff() >= 0.2 &&
           es.eigenvalues().maxCoeff() <= 1.1;
    }
    seed_ok[seed] = ok;
    worst_min[seed] = lo;
    worst_max[seed] = hi;
  });

  int good = 0;
  double lo = 10.0, hi = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    good += seed_ok[s];
    lo = std::min(lo, worst_min[s]);
    hi = std::max(hi, worst_max[s]);
  }
  CriterionResult result;
  result.pass = good >= 48;  // >= 95% of 50
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "sandwich held in %d/50 seeds (worst min eig %.3f, worst max "
                "eig %.3f; bands [0.2, 1.1])",
                good, lo, hi);
  result.detail = buf;
  return result;
}

// ---------------------------------------------------------------------------
// 9. Nested tester: d=16, dims (4,16), false-advance and detection.
// ---------------------------------------------------------------------------
RunConfig nested_config() {
  RunConfig cfg;
  cfg.horizon = 20000;
  cfg.num_arms = 2;
  cfg.dim = 16;
  cfg.failure_prob = 0.05;
  cfg.gamma = default_gamma_u(16, 20000);
  cfg.selector = SelectorKind::Nested;
  cfg.kappa = default_kappa(SelectorKind::Nested);
  cfg.nested_dims = {4, 16};
  return cfg;
}

Instance nested_order1_instance(std::uint64_t seed) {
  RngStream rng = derive_substream(seed, "instance");
  InstanceOptions opts;
  opts.bias_gap = 0.0;
  opts.nested_dims = {4, 16};
  opts.true_order = 1;
  return generate_instance(InstanceKind::NestedCB, SpectrumSpec::identity(), 2,
                           16, opts, rng);
}

Instance nested_order2_instance(std::uint64_t seed) {
  RngStream rng = derive_substream(seed, "instance");
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(16);
  theta.head(4) = 0.6 * gaussian_vector(4, rng).normalized();
  theta.tail(12) = 0.8 * gaussian_vector(12, rng).normalized();
  std::vector<Eigen::MatrixXd> covs(2, Eigen::MatrixXd::Identity(16, 16));
  return make_instance(Eigen::VectorXd::Zero(2), theta, covs, 1.0);
}

CriterionResult criterion_9() {
  RunConfig cfg = nested_config();
  CriterionResult result;
  CalibrationResult calibration;
  try {
    calibration = calibrate_constants(cfg, nested_order1_instance, 40, 20000,
                                      default_calibration_grid(), g_workers);
  } catch (const std::exception& e) {
    result.detail = std::string("calibration failed: ") + e.what();
    return result;
  }
  cfg.c1 = calibration.c1;
  cfg.c2 = calibration.c2;
  cfg.c3 = calibration.c3;

  const double false_advance =
      switch_rate(cfg, nested_order1_instance, 100, 0, g_workers);

  const int kSeeds = 100;
  std::vector<int> early_advance(kSeeds, 0);
  parallel_for(kSeeds, g_workers, [&](long seed) {
    RunConfig local = cfg;
    local.master_seed = static_cast<std::uint64_t>(seed);
    const RegretTrace trace =
        run_episode(local, nested_order2_instance(local.master_seed));
    early_advance[seed] =
        trace.switch_time && *trace.switch_time <= cfg.horizon / 2;
  });
  int early = 0;
  for (int ok : early_advance) early += ok;

  result.pass = false_advance <= 0.10 && early >= 90;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "false-advance rate %.2f (target <= 0.10); advance before T/2 "
                "in %d/100 (c1=%.4g c2=%.4g c3=%.4g)",
                false_advance, early, calibration.c1, calibration.c2,
                calibration.c3);
  result.detail = buf;
  return result;
}

// ---------------------------------------------------------------------------
// 10. Determinism: representative episodes from each family, run twice,
//     byte-identical CSV traces.
// ---------------------------------------------------------------------------
CriterionResult criterion_10(const CalibrationResult& calibration,
                             bool calibrated) {
  std::vector<std::pair<RunConfig, Instance>> episodes;

  RunConfig flat = flat_u_config();
  if (calibrated) {
    flat.c1 = calibration.c1;
    flat.c2 = calibration.c2;
    flat.c3 = calibration.c3;
  }
  flat.master_seed = 7;
  episodes.emplace_back(flat, null_rank_deficient_instance(7));
  {
    RunConfig cfg = flat;
    RngStream rng = derive_substream(cfg.master_seed, "instance");
    episodes.emplace_back(
        cfg, generate_instance(InstanceKind::LinearCB,
                               SpectrumSpec::identity(), 5, 20, {}, rng));
  }
  for (const SelectorKind kind : {SelectorKind::ModCB_A, SelectorKind::ModCB}) {
    RunConfig cfg;
    cfg.horizon = 5000;
    cfg.num_arms = 2;
    cfg.dim = 10;
    cfg.gamma = 0.5;
    cfg.selector = kind;
    cfg.kappa = default_kappa(kind);
    cfg.master_seed = 7;
    RngStream rng = derive_substream(cfg.master_seed, "instance");
    InstanceOptions opts;
    opts.bias_gap = 1.0;
    episodes.emplace_back(
        cfg, generate_instance(InstanceKind::SimpleMAB,
                               SpectrumSpec::identity(), 2, 10, opts, rng));
  }
  {
    RunConfig cfg = sandwich_config();
    cfg.horizon = 5000;
    cfg.master_seed = 7;
    episodes.emplace_back(cfg, split_spectrum_instance(7));
  }
  {
    RunConfig cfg = nested_config();
    cfg.master_seed = 7;
    episodes.emplace_back(cfg, nested_order2_instance(7));
  }

  int mismatches = 0;
  for (const auto& [cfg, inst] : episodes) {
    const std::string first = rows_to_csv(trace_rows(run_episode(cfg, inst)));
    const std::string second = rows_to_csv(trace_rows(run_episode(cfg, inst)));
    if (first != second) ++mismatches;
  }
  CriterionResult result;
  result.pass = mismatches == 0;
  result.detail = std::to_string(episodes.size()) +
                  " episode re-runs, byte mismatches: " +
                  std::to_string(mismatches);
  return result;
}

}  // namespace

int main() {
  g_workers = std::max(1u, std::thread::hardware_concurrency());
  std::printf("acceptance: %d worker threads\n", g_workers);

  CalibrationResult flat_calibration;
  bool flat_calibrated = false;

  struct Entry {
    const char* name;
    std::function<CriterionResult()> run;
  };
  const std::vector<Entry> entries = {
      {"1 thresholding operator", criterion_1},
      {"2 U-statistic fast path vs naive", criterion_2},
      {"3 estimator mean", criterion_3},
      {"4 error scaling slope", criterion_4},
      {"5 false-switch control",
       [&] { return criterion_5(flat_calibration, flat_calibrated); }},
      {"6 detection power",
       [&] { return criterion_6(flat_calibration, flat_calibrated); }},
      {"7 adaptivity", criterion_7},
      {"8 covariance sandwich", criterion_8},
      {"9 nested tester", criterion_9},
      {"10 determinism",
       [&] { return criterion_10(flat_calibration, flat_calibrated); }},
  };

  int failed = 0;
  for (const Entry& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = entry.run();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    if (!result.pass) ++failed;
    std::printf("[%s] criterion %s: %s (%.1fs)\n",
                result.pass ? "PASS" : "FAIL", entry.name,
                result.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  if (failed > 0) {
    std::printf("acceptance: %d criterion(s) failed\n", failed);
    return 1;
  }
  std::printf("acceptance: all criteria passed\n");
  return 0;
}
