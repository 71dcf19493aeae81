#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modcb/config.hpp"
#include "modcb/environment.hpp"
#include "modcb/selector.hpp"

namespace modcb {

/// Per-round log of one episode plus cumulative pseudo-regret under both
/// metrics: R^S against the best fixed arm's mean, R^C against the
/// realized-context per-round optimum of the true linear model.
struct RegretTrace {
  std::vector<RoundRecord> rounds;
  std::vector<double> cum_simple;   ///< R^S after each round
  std::vector<double> cum_complex;  ///< R^C after each round
  std::optional<long> switch_time;
  long w_count = 0;
  long forced_count = 0;
};

/// Regret increments of playing `arm` at `slate`:
/// {mu* - mu_arm, max_i(mu_i + <x_i, theta>) - (mu_arm + <x_arm, theta>)}.
std::pair<double, double> regret_increments(const Instance& inst,
                                            const ContextSlate& slate, int arm);

/// Runs the configured selector for cfg.horizon rounds.  Deterministic given
/// (cfg, inst): all randomness comes from substreams of cfg.master_seed.
RegretTrace run_episode(const RunConfig& cfg, const Instance& inst);

/// One CSV line of a trace; the on-disk schema.
struct TraceRow {
  long round = 0;
  int model = 0;
  int arm = 0;
  ActionSource source = ActionSource::WarmStart;
  bool in_w = false;
  bool forced = false;
  double gap_est = std::nan("");
  double alpha = std::nan("");
  double rs_cum = 0.0;
  double rc_cum = 0.0;

  bool operator==(const TraceRow& other) const;
};

std::vector<TraceRow> trace_rows(const RegretTrace& trace);
/// Columns exactly: round,model,arm,source,inW,forced,gap_est,alpha,rS_cum,rC_cum.
/// Numbers are printed with 17 significant digits and round-trip losslessly.
std::string rows_to_csv(const std::vector<TraceRow>& rows);
std::vector<TraceRow> rows_from_csv(const std::string& text);
void write_trace_csv(const RegretTrace& trace, const std::filesystem::path& path);

/// One grid cell of a sweep: a labeled (config, instance) pair.
struct SweepCell {
  std::string selector_label;
  std::string instance_label;
  RunConfig cfg;
  Instance instance;
};

struct CellOutcome {
  bool failed = false;
  std::string error;
  double final_rs = 0.0;
  double final_rc = 0.0;
  bool switched = false;
  long switch_time = -1;
  long w_count = 0;
  long forced_count = 0;
};

struct GroupAggregate {
  std::string selector_label;
  std::string instance_label;
  long horizon = 0;
  int cells = 0;
  double mean_rs = 0.0;
  double mean_rc = 0.0;
  double median_rs = 0.0;
  double median_rc = 0.0;
  double switch_rate = 0.0;
  double mean_w = 0.0;
  double mean_forced = 0.0;
};

struct SweepSummary {
  std::vector<SweepCell> cells;       ///< in submission order
  std::vector<CellOutcome> outcomes;  ///< aligned with cells
  std::vector<GroupAggregate> groups; ///< keyed by (selector, instance, T)
};

/// Runs every cell on a bounded worker pool.  Aggregation is an ordered fold
/// over the submission order, so the summary is independent of worker count.
/// A failed cell is recorded and the sweep continues.
SweepSummary run_sweep(const std::vector<SweepCell>& cells, int workers);

std::string summary_to_json(const SweepSummary& summary);
void write_summary_json(const SweepSummary& summary,
                        const std::filesystem::path& path);

/// Least-squares slope of log(value) vs log(scale); needs >= 3 positive points.
double fit_slope(const std::vector<std::pair<double, double>>& points);

struct CalibrationResult {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double measured_rate = 0.0;
};

/// Fraction of seeds (seed_base .. seed_base+seeds-1) on which the selector
/// switched away from the simple model (or advanced the nested order).
double switch_rate(const RunConfig& cfg_template,
                   const std::function<Instance(std::uint64_t)>& make_instance,
                   int seeds, std::uint64_t seed_base, int workers);

/// Smallest threshold constants (searched over the ascending grid, smallest
/// first) such that the empirical false-switch rate over the given seeds is
/// <= cfg.failure_prob.  c2 and c3 sit at the grid minimum — on null
/// instances the test is constrained only through the 1/n term — and c1 is
/// raised until the rate target is met.  Throws when the grid is exhausted.
CalibrationResult calibrate_constants(
    const RunConfig& cfg_template,
    const std::function<Instance(std::uint64_t)>& make_instance, int seeds,
    std::uint64_t seed_base, const std::vector<double>& grid, int workers);

/// Powers of two 2^-10 .. 2^4, the default calibration grid.
std::vector<double> default_calibration_grid();

/// Runs fn(0..n-1) on `workers` threads; results must be written to
/// pre-sized slots so that aggregation order is deterministic.
void parallel_for(long n, int workers, const std::function<void(long)>& fn);

}  // namespace modcb
