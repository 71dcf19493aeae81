#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace modcb {

/// Which meta-algorithm variant drives an episode.
enum class SelectorKind {
  ModCB,    ///< forced exploration at rate t^{-1/3}, raw-rate threshold
  ModCB_U,  ///< universal variant: rate t^{-2/9}, threshold with +c3*gamma bias term
  ModCB_A,  ///< data-adaptive exploration schedule (diversity indicator Y, coin Z)
  Nested,   ///< sequential model-order selection over nested linear models
};

std::string to_string(SelectorKind kind);
SelectorKind selector_kind_from_string(const std::string& name);

/// Full configuration of one episode / sweep cell.
struct RunConfig {
  long horizon = 1000;          ///< T, number of rounds
  int num_arms = 2;             ///< K
  int dim = 2;                  ///< d (for Nested this is d_M)
  double failure_prob = 0.05;   ///< delta
  double gamma = 0.1;           ///< eigenvalue threshold
  double kappa = 1.0 / 3.0;     ///< forced-exploration exponent (nu_t = t^-kappa)
  SelectorKind selector = SelectorKind::ModCB;
  double c1 = 1.0;              ///< scale of the 1/n threshold term
  double c2 = 1.0;              ///< scale of the 1/m threshold term
  double c3 = 1.0;              ///< scale of the +gamma bias term (ModCB_U)
  std::uint64_t master_seed = 0;
  std::vector<int> nested_dims; ///< ascending d_1 < ... < d_M = dim (Nested only)
  bool tau_min_gate = false;    ///< ModCB_A: suppress test/adaptive schedule for t < tau_min
};

/// Default forced-exploration exponent for each variant.
double default_kappa(SelectorKind kind);

/// Theory-suggested threshold for the universal variant: (d/T)^{1/3}.
double default_gamma_u(int dim, long horizon);

/// tau_min(delta, T) = (16/gamma^2 + 8/(3 gamma)) * ln(2 d T / delta); the
/// earliest round at which the adaptive schedule's diversity event is certified.
double tau_min(const RunConfig& cfg);

/// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate_config(const RunConfig& cfg);

/// Returns cfg if valid, otherwise throws std::invalid_argument listing every
/// violated field.
RunConfig validated(RunConfig cfg);

/// JSON-file round trip.  Unknown keys in the file are an error.
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

}  // namespace modcb
