#include "modcb/selector.hpp"

#include <stdexcept>

namespace modcb {

std::string to_string(ActionSource source) {
  switch (source) {
    case ActionSource::WarmStart: return "warm";
    case ActionSource::Greedy: return "greedy";
    case ActionSource::Uniform: return "uniform";
    case ActionSource::Complex: return "complex";
  }
  throw std::logic_error("unknown ActionSource");
}

ActionSource action_source_from_string(const std::string& name) {
  if (name == "warm") return ActionSource::WarmStart;
  if (name == "greedy") return ActionSource::Greedy;
  if (name == "uniform") return ActionSource::Uniform;
  if (name == "complex") return ActionSource::Complex;
  throw std::invalid_argument("unknown action source: " + name);
}

ExplorationDecision decide_scheduled(long round, double kappa, RngStream& rng) {
  const double nu = std::pow(static_cast<double>(round), -kappa);
  ExplorationDecision dec;
  dec.greedy = rng.next_bernoulli(1.0 - nu);
  dec.include_in_w = !dec.greedy;
  dec.forced = !dec.greedy;  // every scheduled uniform round is forced
  return dec;
}

ExplorationDecision decide_adaptive(bool y, bool z) {
  ExplorationDecision dec;
  dec.greedy = y || z;
  dec.include_in_w = (y == z);
  dec.forced = !y && !z;
  dec.y = y;
  dec.z = z;
  return dec;
}

Selector::Selector(const RunConfig& cfg, RngStream explore_rng,
                   RngStream uniform_rng)
    : cfg_(validated(cfg)),
      explore_rng_(explore_rng),
      uniform_rng_(uniform_rng),
      ucb_(cfg.num_arms, 1.0, cfg.failure_prob / 4.0),
      linucb_(cfg.selector == SelectorKind::Nested ? cfg.nested_dims.front()
                                                   : cfg.dim,
              1.0, 1.0, 1.0, cfg.failure_prob / 4.0),
      cov_(cfg.dim),
      adaptive_gram_(Eigen::MatrixXd::Zero(cfg.dim, cfg.dim)),
      bias_means_(Eigen::VectorXd::Zero(cfg.num_arms)),
      bias_counts_(cfg.num_arms, 0),
      moment_vec_(Eigen::VectorXd::Zero(cfg.dim)),
      moment_sq_(Eigen::MatrixXd::Zero(cfg.dim, cfg.dim)),
      tau_min_(tau_min(cfg)) {
  if (cfg_.gamma <= 0.0 && cfg_.selector != SelectorKind::Nested)
    throw std::invalid_argument("Selector: gamma must be > 0");
}

void Selector::record_w_sample(const Eigen::VectorXd& x, int arm, double reward,
                               bool forced) {
  // Label uses the bias estimate as held right now; never re-debiased later.
  const double label = reward - bias_means_[arm];
  w_samples_.push_back({x, label});
  const Eigen::VectorXd u = x * label;
  moment_vec_ += u;
  moment_sq_ += u * u.transpose();
  adaptive_gram_ += x * x.transpose();
  ++w_size_;
  if (forced) ++forced_size_;
  // Exploration rounds are the only ones feeding the bias means.
  ++bias_counts_[arm];
  bias_means_[arm] +=
      (reward - bias_means_[arm]) / static_cast<double>(bias_counts_[arm]);
}

std::optional<std::pair<double, double>> Selector::evaluate_test() const {
  return cfg_.selector == SelectorKind::Nested ? evaluate_nested_test()
                                               : evaluate_flat_test();
}

std::optional<std::pair<double, double>> Selector::evaluate_flat_test() const {
  if (complex_) return std::nullopt;
  if (round_ <= cfg_.num_arms + 1 || w_size_ < 2) return std::nullopt;
  if (cfg_.selector == SelectorKind::ModCB_A && cfg_.tau_min_gate &&
      static_cast<double>(round_) < tau_min_)
    return std::nullopt;
  const auto cov = ThresholdedCovariance::from_accumulator(cov_, cfg_.gamma);
  const double gap =
      estimate_residual_from_moments(moment_vec_, moment_sq_, w_size_, cov);
  const double alpha = alpha_threshold(threshold_variant_for(cfg_.selector),
                                       w_size_, round_, cfg_);
  return std::make_pair(gap, alpha);
}

double Selector::nested_gamma(int order) const {
  return std::cbrt(static_cast<double>(cfg_.nested_dims[order - 1]) /
                   static_cast<double>(cfg_.horizon));
}

std::optional<std::pair<double, double>> Selector::evaluate_nested_test() const {
  const int num_orders = static_cast<int>(cfg_.nested_dims.size());
  if (order_ >= num_orders) return std::nullopt;
  if (round_ <= cfg_.num_arms + 1 || w_size_ < 2) return std::nullopt;
  const double gamma_j = nested_gamma(order_);
  const int d_j = cfg_.nested_dims[order_ - 1];
  const Eigen::MatrixXd raw = cov_.mean();
  const auto full =
      ThresholdedCovariance::from_matrix(raw, gamma_j, cov_.count());
  const auto sub = ThresholdedCovariance::from_matrix(
      raw.topLeftCorner(d_j, d_j), gamma_j, cov_.count());
  const double gap = estimate_residual_nested_from_moments(
      moment_vec_, moment_sq_, w_size_, full, sub);
  const double alpha = alpha_threshold(ThresholdVariant::ModCB_U, w_size_,
                                       round_, cfg_.dim, cfg_.failure_prob,
                                       gamma_j, cfg_.c1, cfg_.c2, cfg_.c3);
  return std::make_pair(gap, alpha);
}

RoundRecord Selector::step(const ContextSlate& slate,
                           const std::function<double(int)>& reward_fn) {
  if (round_ >= cfg_.horizon)
    throw std::logic_error("Selector::step: past the configured horizon");
  if (slate.contexts.rows() != cfg_.num_arms ||
      slate.contexts.cols() != cfg_.dim)
    throw std::invalid_argument("Selector::step: slate dimension mismatch");
  ++round_;
  // Full-information covariance: all K contexts are observed every round.
  cov_.add_slate(slate);
  return cfg_.selector == SelectorKind::Nested ? step_nested(slate, reward_fn)
                                               : step_flat(slate, reward_fn);
}

RoundRecord Selector::step_flat(const ContextSlate& slate,
                                const std::function<double(int)>& reward_fn) {
  RoundRecord rec;
  rec.round = round_;
  const long t = round_;
  const int num_arms = cfg_.num_arms;

  // One-shot test, evaluated before acting (switch-then-play order).
  if (!complex_) {
    if (const auto test = evaluate_flat_test()) {
      rec.gap_estimate = test->first;
      rec.alpha = test->second;
      if (test->first > kTestThresholdInflation * test->second) {
        complex_ = true;
        switch_time_ = t;
        linucb_ =
            LinUcbState(cfg_.dim, 1.0, 1.0, 1.0, cfg_.failure_prob / 4.0);
        // Seed the complex phase's intercepts with the exploration-round
        // means; they keep refining from regression residuals below.
        complex_bias_means_ = bias_means_;
        complex_bias_counts_ = bias_counts_;
      }
    }
  }
  rec.model = complex_ ? 1 : 0;

  if (t <= num_arms) {
    const int arm = static_cast<int>(t) - 1;
    rec.source = ActionSource::WarmStart;
    rec.arm = arm;
    rec.reward = reward_fn(arm);
    ucb_.update(arm, rec.reward);
    return rec;
  }

  if (complex_) {
    const int arm = linucb_.recommend(slate.contexts, complex_bias_means_);
    rec.source = ActionSource::Complex;
    rec.arm = arm;
    rec.reward = reward_fn(arm);
    const Eigen::VectorXd x = slate.contexts.row(arm).transpose();
    // The label is de-biased with the intercept estimate held right now.
    linucb_.update(x, rec.reward - complex_bias_means_[arm]);
    // Exploration stops after the switch, so frozen intercepts would leave a
    // permanent ranking error; refine them from regression residuals instead.
    const double residual = rec.reward - x.dot(linucb_.theta_hat());
    ++complex_bias_counts_[arm];
    complex_bias_means_[arm] +=
        (residual - complex_bias_means_[arm]) /
        static_cast<double>(complex_bias_counts_[arm]);
    return rec;
  }

  const int greedy_arm = ucb_.recommend();
  ExplorationDecision dec;
  if (cfg_.selector == SelectorKind::ModCB_A) {
    if (cfg_.tau_min_gate && static_cast<double>(t) < tau_min_) {
      // Gated prefix: plain greedy, no exploration bookkeeping.
      dec.greedy = true;
    } else {
      const Eigen::VectorXd x_greedy =
          slate.contexts.row(greedy_arm).transpose();
      const Eigen::MatrixXd candidate =
          (adaptive_gram_ + x_greedy * x_greedy.transpose()) /
          static_cast<double>(w_size_ + 1);
      const bool y = min_eigenvalue(candidate) >= cfg_.gamma;
      const bool z = explore_rng_.next_bernoulli(
          1.0 - std::pow(static_cast<double>(t), -cfg_.kappa));
      dec = decide_adaptive(y, z);
    }
  } else {
    dec = decide_scheduled(t, cfg_.kappa, explore_rng_);
  }

  const int arm = dec.greedy
                      ? greedy_arm
                      : static_cast<int>(uniform_rng_.next_below(
                            static_cast<std::uint32_t>(num_arms)));
  rec.arm = arm;
  rec.source = dec.greedy ? ActionSource::Greedy : ActionSource::Uniform;
  rec.in_w = dec.include_in_w;
  rec.forced = dec.forced;
  rec.y = dec.y;
  rec.z = dec.z;
  rec.reward = reward_fn(arm);
  if (dec.include_in_w)
    record_w_sample(slate.contexts.row(arm).transpose(), arm, rec.reward,
                    dec.forced);
  if (dec.greedy) ucb_.update(greedy_arm, rec.reward);
  return rec;
}

RoundRecord Selector::step_nested(const ContextSlate& slate,
                                  const std::function<double(int)>& reward_fn) {
  RoundRecord rec;
  rec.round = round_;
  const long t = round_;
  const int num_arms = cfg_.num_arms;
  const int num_orders = static_cast<int>(cfg_.nested_dims.size());

  if (order_ < num_orders) {
    if (const auto test = evaluate_nested_test()) {
      rec.gap_estimate = test->first;
      rec.alpha = test->second;
      if (test->first > kTestThresholdInflation * test->second) {
        ++order_;
        switch_time_ = switch_time_ ? switch_time_ : std::optional<long>(t);
        linucb_ = LinUcbState(cfg_.nested_dims[order_ - 1], 1.0, 1.0, 1.0,
                              cfg_.failure_prob / 4.0);
      }
    }
  }
  rec.model = order_;

  if (t <= num_arms) {
    const int arm = static_cast<int>(t) - 1;
    rec.source = ActionSource::WarmStart;
    rec.arm = arm;
    rec.reward = reward_fn(arm);
    linucb_.update(slate.contexts.row(arm).head(linucb_.active_dim).transpose(),
                   rec.reward - bias_means_[arm]);
    return rec;
  }

  const ExplorationDecision dec =
      decide_scheduled(t, cfg_.kappa, explore_rng_);
  const int arm = dec.greedy
                      ? linucb_.recommend(slate.contexts, bias_means_)
                      : static_cast<int>(uniform_rng_.next_below(
                            static_cast<std::uint32_t>(num_arms)));
  rec.arm = arm;
  rec.source = dec.greedy ? ActionSource::Complex : ActionSource::Uniform;
  rec.in_w = dec.include_in_w;
  rec.forced = dec.forced;
  rec.reward = reward_fn(arm);
  const double debiased = rec.reward - bias_means_[arm];
  if (dec.include_in_w)
    record_w_sample(slate.contexts.row(arm).transpose(), arm, rec.reward,
                    dec.forced);
  linucb_.update(slate.contexts.row(arm).head(linucb_.active_dim).transpose(),
                 debiased);
  return rec;
}

}  // namespace modcb
