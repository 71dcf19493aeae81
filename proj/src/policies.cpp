#include "modcb/policies.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace modcb {

UcbState::UcbState(int num_arms, double sigma, double delta_prime)
    : running_means(Eigen::VectorXd::Zero(num_arms)),
      pull_counts(num_arms, 0),
      sigma(sigma),
      delta_prime(delta_prime) {
  if (num_arms <= 0) throw std::invalid_argument("UcbState: need K >= 1");
  if (!(delta_prime > 0.0 && delta_prime < 1.0))
    throw std::invalid_argument("UcbState: delta' must lie in (0,1)");
}

void UcbState::update(int arm, double reward) {
  if (arm < 0 || arm >= num_arms())
    throw std::out_of_range("UcbState::update: arm out of range");
  ++pull_counts[arm];
  ++rounds_seen;
  running_means[arm] +=
      (reward - running_means[arm]) / static_cast<double>(pull_counts[arm]);
}

double UcbState::width(int arm) const {
  const double t_i = static_cast<double>(pull_counts[arm]);
  if (t_i == 0.0) return std::numeric_limits<double>::infinity();
  const double k = static_cast<double>(num_arms());
  const double inner =
      1.0 + 2.0 * std::log(k * std::sqrt(1.0 + t_i) / delta_prime);
  return sigma * std::sqrt((1.0 + t_i) / (t_i * t_i) * inner);
}

int UcbState::recommend() const {
  for (int i = 0; i < num_arms(); ++i)
    if (pull_counts[i] == 0) return i;
  int best = 0;
  double best_index = index(0);
  for (int i = 1; i < num_arms(); ++i) {
    const double idx = index(i);
    if (idx > best_index) {
      best = i;
      best_index = idx;
    }
  }
  return best;
}

int ucb_step(UcbState& state, std::optional<std::pair<int, double>> feedback) {
  if (feedback) state.update(feedback->first, feedback->second);
  return state.recommend();
}

LinUcbState::LinUcbState(int dim, double ridge, double sigma, double s_bound,
                         double delta_prime)
    : gram(ridge * Eigen::MatrixXd::Identity(dim, dim)),
      moment(Eigen::VectorXd::Zero(dim)),
      ridge(ridge),
      sigma(sigma),
      s_bound(s_bound),
      delta_prime(delta_prime),
      active_dim(dim) {
  if (dim <= 0) throw std::invalid_argument("LinUcbState: need dim >= 1");
  if (ridge <= 0.0) throw std::invalid_argument("LinUcbState: ridge must be > 0");
  if (!(delta_prime > 0.0 && delta_prime < 1.0))
    throw std::invalid_argument("LinUcbState: delta' must lie in (0,1)");
}

void LinUcbState::update(const Eigen::VectorXd& x, double debiased_reward) {
  if (x.size() != active_dim)
    throw std::invalid_argument("LinUcbState::update: dimension mismatch");
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
  gram = gram.selfadjointView<Eigen::Lower>();
  moment += x * debiased_reward;
}

Eigen::VectorXd LinUcbState::theta_hat() const {
  return gram.ldlt().solve(moment);
}

double LinUcbState::beta() const {
  // ln det(V) - ln det(lambda I) via the Cholesky factor of V.
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  double log_det = 0.0;
  for (int i = 0; i < active_dim; ++i)
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  log_det -= active_dim * std::log(ridge);
  return std::sqrt(ridge) * s_bound +
         sigma * std::sqrt(2.0 * std::log(1.0 / delta_prime) + log_det);
}

int LinUcbState::recommend(const Eigen::MatrixXd& contexts,
                           const Eigen::VectorXd& bias_estimates) const {
  if (contexts.cols() < active_dim)
    throw std::invalid_argument("LinUcbState::recommend: contexts too narrow");
  if (bias_estimates.size() != contexts.rows())
    throw std::invalid_argument(
        "LinUcbState::recommend: need one bias estimate per arm");
  const Eigen::VectorXd theta = theta_hat();
  const double b = beta();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  int best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < contexts.rows(); ++i) {
    const Eigen::VectorXd x = contexts.row(i).head(active_dim).transpose();
    const double ellipsoid = std::sqrt(x.dot(ldlt.solve(x)));
    const double idx = bias_estimates[i] + x.dot(theta) + b * ellipsoid;
    if (idx > best_index) {
      best = i;
      best_index = idx;
    }
  }
  return best;
}

int oful_step(LinUcbState& state, const Eigen::MatrixXd& contexts,
              const Eigen::VectorXd& bias_estimates,
              std::optional<std::pair<Eigen::VectorXd, double>> feedback) {
  if (feedback) state.update(feedback->first, feedback->second);
  return state.recommend(contexts, bias_estimates);
}

}  // namespace modcb
