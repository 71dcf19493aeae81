#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "modcb/environment.hpp"

namespace modcb {

/// Anytime UCB over K arms with a self-normalized confidence width.
struct UcbState {
  Eigen::VectorXd running_means;  ///< length K
  std::vector<long> pull_counts;  ///< length K
  long rounds_seen = 0;           ///< rounds credited to this policy
  double sigma = 1.0;
  double delta_prime = 0.0125;    ///< delta / 4 by default

  UcbState() = default;
  UcbState(int num_arms, double sigma, double delta_prime);

  int num_arms() const { return static_cast<int>(pull_counts.size()); }
  void update(int arm, double reward);
  /// width_i = sigma * sqrt((1+T_i)/T_i^2 * (1 + 2 ln(K sqrt(1+T_i)/delta'))).
  double width(int arm) const;
  double index(int arm) const { return running_means[arm] + width(arm); }
  /// Lowest-index unpulled arm if any, else argmax index (ties: lowest index).
  int recommend() const;
};

/// Applies optional feedback, then returns the recommended arm.
int ucb_step(UcbState& state, std::optional<std::pair<int, double>> feedback);

/// Optimistic ridge-regression linear CB (OFUL-style) on the leading
/// active_dim coordinates, ranking with externally supplied per-arm bias
/// estimates and regressing de-biased rewards.
struct LinUcbState {
  Eigen::MatrixXd gram;    ///< V = lambda I + sum x x^T
  Eigen::VectorXd moment;  ///< b = sum x (reward - bias estimate)
  double ridge = 1.0;
  double sigma = 1.0;
  double s_bound = 1.0;    ///< bound on ||theta*||
  double delta_prime = 0.0125;
  int active_dim = 0;

  LinUcbState() = default;
  LinUcbState(int dim, double ridge, double sigma, double s_bound,
              double delta_prime);

  void update(const Eigen::VectorXd& x, double debiased_reward);
  Eigen::VectorXd theta_hat() const;
  /// beta = sqrt(lambda) S + sigma sqrt(2 ln(1/delta') + ln det(V)/det(lambda I)).
  double beta() const;
  /// argmax_i bias[i] + <x_i, theta_hat> + beta ||x_i||_{V^-1}; ties: lowest
  /// index.  Rows of `contexts` are restricted to the leading active_dim
  /// coordinates by the caller or truncated here if wider.
  int recommend(const Eigen::MatrixXd& contexts,
                const Eigen::VectorXd& bias_estimates) const;
};

/// Applies optional feedback (context row already restricted), then recommends.
int oful_step(LinUcbState& state, const Eigen::MatrixXd& contexts,
              const Eigen::VectorXd& bias_estimates,
              std::optional<std::pair<Eigen::VectorXd, double>> feedback);

}  // namespace modcb
