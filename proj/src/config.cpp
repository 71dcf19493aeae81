#include "modcb/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace modcb {

std::string to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::ModCB: return "modcb";
    case SelectorKind::ModCB_U: return "modcb-u";
    case SelectorKind::ModCB_A: return "modcb-a";
    case SelectorKind::Nested: return "nested";
  }
  throw std::logic_error("unknown SelectorKind");
}

SelectorKind selector_kind_from_string(const std::string& name) {
  if (name == "modcb") return SelectorKind::ModCB;
  if (name == "modcb-u") return SelectorKind::ModCB_U;
  if (name == "modcb-a") return SelectorKind::ModCB_A;
  if (name == "nested") return SelectorKind::Nested;
  throw std::invalid_argument("unknown selector kind: " + name);
}

double default_kappa(SelectorKind kind) {
  return kind == SelectorKind::ModCB_U || kind == SelectorKind::Nested
             ? 2.0 / 9.0
             : 1.0 / 3.0;
}

double default_gamma_u(int dim, long horizon) {
  return std::cbrt(static_cast<double>(dim) / static_cast<double>(horizon));
}

double tau_min(const RunConfig& cfg) {
  const double g = cfg.gamma;
  return (16.0 / (g * g) + 8.0 / (3.0 * g)) *
         std::log(2.0 * cfg.dim * static_cast<double>(cfg.horizon) /
                  cfg.failure_prob);
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.horizon <= 0) errors.push_back("horizon: must be positive");
  if (cfg.num_arms <= 0) errors.push_back("num_arms: must be positive");
  if (cfg.dim <= 0) errors.push_back("dim: must be positive");
  if (cfg.horizon < cfg.num_arms)
    errors.push_back("horizon: T < K (warm start plays each arm once)");
  if (!(cfg.failure_prob > 0.0 && cfg.failure_prob < 1.0))
    errors.push_back("failure_prob: must lie in (0,1)");
  if (cfg.gamma < 0.0) errors.push_back("gamma: must be nonnegative");
  if (!(cfg.kappa >= 0.0 && cfg.kappa < 1.0))
    errors.push_back("kappa: must lie in [0,1)");
  if (cfg.c1 <= 0.0) errors.push_back("c1: must be positive");
  if (cfg.c2 <= 0.0) errors.push_back("c2: must be positive");
  if (cfg.c3 <= 0.0) errors.push_back("c3: must be positive");
  if (cfg.selector == SelectorKind::Nested) {
    if (cfg.nested_dims.empty()) {
      errors.push_back("nested_dims: required when selector is nested");
    } else {
      bool ascending = cfg.nested_dims.front() > 0;
      for (std::size_t i = 1; i < cfg.nested_dims.size(); ++i)
        ascending = ascending && cfg.nested_dims[i - 1] < cfg.nested_dims[i];
      if (!ascending)
        errors.push_back("nested_dims: must be positive and strictly increasing");
      if (cfg.nested_dims.back() != cfg.dim)
        errors.push_back("nested_dims: last entry must equal dim");
    }
  } else if (!cfg.nested_dims.empty()) {
    errors.push_back("nested_dims: only allowed when selector is nested");
  }
  return errors;
}

RunConfig validated(RunConfig cfg) {
  const auto errors = validate_config(cfg);
  if (!errors.empty()) {
    std::ostringstream oss;
    oss << "invalid config:";
    for (const auto& e : errors) oss << "\n  - " << e;
    throw std::invalid_argument(oss.str());
  }
  return cfg;
}

namespace {

const std::set<std::string> kKnownKeys = {
    "horizon", "num_arms", "dim", "failure_prob", "gamma", "kappa",
    "selector", "c1", "c2", "c3", "master_seed", "nested_dims",
    "tau_min_gate"};

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["horizon"] = cfg.horizon;
  j["num_arms"] = cfg.num_arms;
  j["dim"] = cfg.dim;
  j["failure_prob"] = cfg.failure_prob;
  j["gamma"] = cfg.gamma;
  j["kappa"] = cfg.kappa;
  j["selector"] = to_string(cfg.selector);
  j["c1"] = cfg.c1;
  j["c2"] = cfg.c2;
  j["c3"] = cfg.c3;
  j["master_seed"] = cfg.master_seed;
  j["nested_dims"] = cfg.nested_dims;
  j["tau_min_gate"] = cfg.tau_min_gate;
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kKnownKeys.count(key))
      throw std::invalid_argument("config: unknown key \"" + key + "\"");
  }
  RunConfig cfg;
  if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<long>();
  if (j.contains("num_arms")) cfg.num_arms = j.at("num_arms").get<int>();
  if (j.contains("dim")) cfg.dim = j.at("dim").get<int>();
  if (j.contains("failure_prob")) cfg.failure_prob = j.at("failure_prob").get<double>();
  if (j.contains("selector"))
    cfg.selector = selector_kind_from_string(j.at("selector").get<std::string>());
  cfg.kappa = default_kappa(cfg.selector);
  if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
  if (j.contains("kappa")) cfg.kappa = j.at("kappa").get<double>();
  if (j.contains("c1")) cfg.c1 = j.at("c1").get<double>();
  if (j.contains("c2")) cfg.c2 = j.at("c2").get<double>();
  if (j.contains("c3")) cfg.c3 = j.at("c3").get<double>();
  if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("nested_dims"))
    cfg.nested_dims = j.at("nested_dims").get<std::vector<int>>();
  if (j.contains("tau_min_gate")) cfg.tau_min_gate = j.at("tau_min_gate").get<bool>();
  return validated(cfg);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::ostringstream oss;
  oss << in.rdbuf();
  return config_from_json(oss.str());
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path.string());
  out << config_to_json(cfg) << "\n";
}

}  // namespace modcb
