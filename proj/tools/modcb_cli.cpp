// Command-line front end: simulate one episode, sweep a grid, calibrate the
// test-threshold constants, or fit a regret exponent from a summary file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modcb/harness.hpp"

namespace {

using namespace modcb;

struct InstanceCliOptions {
  std::string kind = "simple";      // simple | linear | nested
  std::string spectrum = "identity";  // identity | scaled:<s> | rank:<r> | split
  double bias_gap = 0.5;
  double theta_norm = 1.0;
  double noise_std = 1.0;
  int true_order = 1;
  std::string instance_file;  // load instead of generating
};

SpectrumSpec parse_spectrum(const std::string& text, int num_arms, int dim) {
  if (text == "identity") return SpectrumSpec::identity();
  if (text.rfind("scaled:", 0) == 0)
    return SpectrumSpec::scaled(std::stod(text.substr(7)));
  if (text.rfind("rank:", 0) == 0)
    return SpectrumSpec::rank_deficient(std::stoi(text.substr(5)));
  if (text == "split") {
    // Arm-averaged diversity: each arm covers a different half of the axes.
    std::vector<SpectrumSpec> per_arm;
    for (int i = 0; i < num_arms; ++i) {
      std::vector<double> eigs(dim, 0.0);
      for (int j = 0; j < dim; ++j)
        if (j % num_arms == i) eigs[j] = 1.0;
      per_arm.push_back(SpectrumSpec::diagonal(eigs));
    }
    return SpectrumSpec::arm_heterogeneous(per_arm);
  }
  throw CLI::ValidationError("spectrum", "unknown spectrum: " + text);
}

Instance build_instance(const InstanceCliOptions& opts, const RunConfig& cfg) {
  if (!opts.instance_file.empty()) return load_instance(opts.instance_file);
  InstanceKind kind;
  if (opts.kind == "simple") kind = InstanceKind::SimpleMAB;
  else if (opts.kind == "linear") kind = InstanceKind::LinearCB;
  else if (opts.kind == "nested") kind = InstanceKind::NestedCB;
  else throw CLI::ValidationError("instance", "unknown instance kind: " + opts.kind);

  InstanceOptions gen;
  gen.bias_gap = opts.bias_gap;
  gen.theta_norm = opts.theta_norm;
  gen.noise_std = opts.noise_std;
  gen.true_order = opts.true_order;
  gen.nested_dims = cfg.nested_dims;
  RngStream rng = derive_substream(cfg.master_seed, "instance");
  return generate_instance(kind,
                           parse_spectrum(opts.spectrum, cfg.num_arms, cfg.dim),
                           cfg.num_arms, cfg.dim, gen, rng);
}

void add_config_flags(CLI::App* app, RunConfig& cfg, std::string& selector_name,
                      std::string& config_file) {
  app->add_option("--config", config_file, "JSON config file (flags override)");
  app->add_option("-T,--horizon", cfg.horizon, "number of rounds");
  app->add_option("-K,--num-arms", cfg.num_arms, "number of arms");
  app->add_option("-d,--dim", cfg.dim, "context dimension");
  app->add_option("--delta,--failure-prob", cfg.failure_prob, "failure probability");
  app->add_option("--gamma", cfg.gamma, "eigenvalue threshold");
  app->add_option("--kappa", cfg.kappa, "forced-exploration exponent");
  app->add_option("--selector", selector_name,
                  "modcb | modcb-u | modcb-a | nested");
  app->add_option("--c1", cfg.c1, "threshold constant c1");
  app->add_option("--c2", cfg.c2, "threshold constant c2");
  app->add_option("--c3", cfg.c3, "threshold constant c3");
  app->add_option("--seed,--master-seed", cfg.master_seed, "master seed");
  app->add_option("--nested-dims", cfg.nested_dims,
                  "ascending model dims (nested selector)")
      ->delimiter(',');
  app->add_flag("--tau-min-gate", cfg.tau_min_gate,
                "suppress adaptive test before tau_min");
}

void add_instance_flags(CLI::App* app, InstanceCliOptions& opts) {
  app->add_option("--instance", opts.kind, "simple | linear | nested");
  app->add_option("--spectrum", opts.spectrum,
                  "identity | scaled:<s> | rank:<r> | split");
  app->add_option("--bias-gap", opts.bias_gap, "top bias gap Delta");
  app->add_option("--theta-norm", opts.theta_norm, "norm of theta*");
  app->add_option("--noise-std", opts.noise_std, "reward noise sigma");
  app->add_option("--true-order", opts.true_order, "nested true model order");
  app->add_option("--instance-file", opts.instance_file,
                  "load a serialized instance instead of generating");
}

RunConfig finalize_config(RunConfig cfg, const std::string& selector_name,
                          const std::string& config_file, const CLI::App* app) {
  if (!config_file.empty()) {
    RunConfig from_file = load_config(config_file);
    // Flags explicitly set on the command line override file values.
    if (app->count("--horizon") == 0) cfg.horizon = from_file.horizon;
    if (app->count("--num-arms") == 0) cfg.num_arms = from_file.num_arms;
    if (app->count("--dim") == 0) cfg.dim = from_file.dim;
    if (app->count("--delta") == 0) cfg.failure_prob = from_file.failure_prob;
    if (app->count("--gamma") == 0) cfg.gamma = from_file.gamma;
    if (app->count("--kappa") == 0) cfg.kappa = from_file.kappa;
    if (app->count("--selector") == 0) cfg.selector = from_file.selector;
    if (app->count("--c1") == 0) cfg.c1 = from_file.c1;
    if (app->count("--c2") == 0) cfg.c2 = from_file.c2;
    if (app->count("--c3") == 0) cfg.c3 = from_file.c3;
    if (app->count("--seed") == 0) cfg.master_seed = from_file.master_seed;
    if (app->count("--nested-dims") == 0) cfg.nested_dims = from_file.nested_dims;
    if (app->count("--tau-min-gate") == 0) cfg.tau_min_gate = from_file.tau_min_gate;
  }
  if (app->count("--selector") > 0)
    cfg.selector = selector_kind_from_string(selector_name);
  if (app->count("--kappa") == 0 && config_file.empty())
    cfg.kappa = default_kappa(cfg.selector);
  return validated(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model selection between bandit and linear-contextual-bandit "
               "structure: simulation library CLI"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "run one episode");
  RunConfig sim_cfg;
  std::string sim_selector = "modcb";
  std::string sim_config_file;
  InstanceCliOptions sim_inst;
  std::string trace_out, summary_out, instance_out;
  add_config_flags(sim, sim_cfg, sim_selector, sim_config_file);
  add_instance_flags(sim, sim_inst);
  sim->add_option("--trace-out", trace_out, "write per-round CSV trace here");
  sim->add_option("--summary-out", summary_out, "write JSON summary here");
  sim->add_option("--instance-out", instance_out,
                  "serialize the generated instance here");

  // --- sweep ---
  auto* sweep = app.add_subcommand("sweep", "run a (selector x instance x seed) grid");
  RunConfig sweep_cfg;
  std::string sweep_selector = "modcb";
  std::string sweep_config_file;
  InstanceCliOptions sweep_inst;
  std::vector<std::string> sweep_selectors{"modcb"};
  std::vector<std::string> sweep_instances{"simple"};
  int sweep_seeds = 10;
  int sweep_workers = 1;
  std::string sweep_out;
  add_config_flags(sweep, sweep_cfg, sweep_selector, sweep_config_file);
  add_instance_flags(sweep, sweep_inst);
  sweep->add_option("--selectors", sweep_selectors, "selector kinds to sweep")
      ->delimiter(',');
  sweep->add_option("--instances", sweep_instances, "instance kinds to sweep")
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "seeds per cell group");
  sweep->add_option("--workers", sweep_workers, "worker threads");
  sweep->add_option("--out", sweep_out, "write JSON summary here");

  // --- calibrate ---
  auto* cal = app.add_subcommand("calibrate",
                                 "search threshold constants meeting the "
                                 "false-switch target on null instances");
  RunConfig cal_cfg;
  std::string cal_selector = "modcb-u";
  std::string cal_config_file;
  InstanceCliOptions cal_inst;
  int cal_seeds = 100;
  int cal_workers = 1;
  std::string cal_out;
  add_config_flags(cal, cal_cfg, cal_selector, cal_config_file);
  add_instance_flags(cal, cal_inst);
  cal->add_option("--seeds", cal_seeds, "seeds per grid point");
  cal->add_option("--workers", cal_workers, "worker threads");
  cal->add_option("--out", cal_out, "write the calibrated config here");

  // --- fit ---
  auto* fit = app.add_subcommand("fit",
                                 "least-squares log-log exponent from a sweep "
                                 "summary (mean R^C vs horizon)");
  std::string fit_in;
  std::string fit_metric = "mean_rc";
  fit->add_option("--in", fit_in, "sweep summary JSON")->required();
  fit->add_option("--metric", fit_metric, "group field to fit (default mean_rc)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const RunConfig cfg =
          finalize_config(sim_cfg, sim_selector, sim_config_file, sim);
      const Instance inst = build_instance(sim_inst, cfg);
      if (!instance_out.empty()) save_instance(inst, instance_out);
      const RegretTrace trace = run_episode(cfg, inst);
      if (!trace_out.empty()) write_trace_csv(trace, trace_out);
      SweepSummary summary;
      summary.cells.push_back(
          {to_string(cfg.selector), sim_inst.kind, cfg, inst});
      CellOutcome out;
      out.final_rs = trace.cum_simple.back();
      out.final_rc = trace.cum_complex.back();
      out.switched = trace.switch_time.has_value();
      out.switch_time = trace.switch_time.value_or(-1);
      out.w_count = trace.w_count;
      out.forced_count = trace.forced_count;
      summary.outcomes.push_back(out);
      if (!summary_out.empty()) write_summary_json(summary, summary_out);
      std::printf("rounds=%ld rS=%.6g rC=%.6g switched=%d switch_time=%ld "
                  "W=%ld forced=%ld\n",
                  cfg.horizon, out.final_rs, out.final_rc,
                  out.switched ? 1 : 0, out.switch_time, out.w_count,
                  out.forced_count);
    } else if (*sweep) {
      const RunConfig base =
          finalize_config(sweep_cfg, sweep_selector, sweep_config_file, sweep);
      std::vector<SweepCell> cells;
      for (const std::string& sel : sweep_selectors) {
        for (const std::string& inst_kind : sweep_instances) {
          for (int s = 0; s < sweep_seeds; ++s) {
            RunConfig cfg = base;
            cfg.selector = selector_kind_from_string(sel);
            if (sweep->count("--kappa") == 0)
              cfg.kappa = default_kappa(cfg.selector);
            cfg.master_seed = base.master_seed + static_cast<std::uint64_t>(s);
            InstanceCliOptions opts = sweep_inst;
            opts.kind = inst_kind;
            cells.push_back({sel, inst_kind, cfg, build_instance(opts, cfg)});
          }
        }
      }
      const SweepSummary summary = run_sweep(cells, sweep_workers);
      if (!sweep_out.empty())
        write_summary_json(summary, sweep_out);
      else
        std::cout << summary_to_json(summary) << "\n";
    } else if (*cal) {
      const RunConfig base =
          finalize_config(cal_cfg, cal_selector, cal_config_file, cal);
      InstanceCliOptions opts = cal_inst;
      const auto make_inst = [&](std::uint64_t seed) {
        RunConfig cfg = base;
        cfg.master_seed = seed;
        return build_instance(opts, cfg);
      };
      const CalibrationResult result =
          calibrate_constants(base, make_inst, cal_seeds, base.master_seed,
                              default_calibration_grid(), cal_workers);
      std::printf("c1=%.10g c2=%.10g c3=%.10g measured_rate=%.4f\n", result.c1,
                  result.c2, result.c3, result.measured_rate);
      if (!cal_out.empty()) {
        RunConfig cfg = base;
        cfg.c1 = result.c1;
        cfg.c2 = result.c2;
        cfg.c3 = result.c3;
        save_config(cfg, cal_out);
      }
    } else if (*fit) {
      std::ifstream in(fit_in);
      if (!in) throw std::runtime_error("cannot open summary: " + fit_in);
      const auto j = nlohmann::json::parse(in);
      std::vector<std::pair<double, double>> points;
      for (const auto& g : j.at("groups"))
        points.emplace_back(g.at("horizon").get<double>(),
                            g.at(fit_metric).get<double>());
      std::printf("slope=%.6f over %zu points\n", fit_slope(points),
                  points.size());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
