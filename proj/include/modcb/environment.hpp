#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modcb/rng.hpp"

namespace modcb {

/// Recipe for per-arm context covariances.  All eigenvalues must lie in [0,1]
/// so that contexts stay 1-sub-Gaussian.
struct SpectrumSpec {
  enum class Kind { Identity, Scaled, Diagonal, RankDeficient, ArmHeterogeneous };

  Kind kind = Kind::Identity;
  double scale = 1.0;                    ///< Scaled: Sigma_i = scale * I
  std::vector<double> eigenvalues;       ///< Diagonal: diag entries, length d
  int rank = 0;                          ///< RankDeficient: leading `rank` ones
  std::vector<SpectrumSpec> per_arm;     ///< ArmHeterogeneous: one spec per arm

  static SpectrumSpec identity();
  static SpectrumSpec scaled(double s);
  static SpectrumSpec diagonal(std::vector<double> eigs);
  static SpectrumSpec rank_deficient(int r);
  static SpectrumSpec arm_heterogeneous(std::vector<SpectrumSpec> specs);
};

/// Ground-truth problem: per-arm biases, shared linear parameter, per-arm
/// context covariances, and reward-noise scale.
struct Instance {
  Eigen::VectorXd biases;                    ///< length K, entries in [-1,1]
  Eigen::VectorXd theta;                     ///< length d, ||theta|| <= 1
  std::vector<Eigen::MatrixXd> covariances;  ///< K symmetric PSD, Sigma_i <= I
  std::vector<Eigen::MatrixXd> cov_sqrts;    ///< cached symmetric square roots
  double noise_std = 1.0;                    ///< sigma <= 1

  int num_arms() const { return static_cast<int>(biases.size()); }
  int dim() const { return static_cast<int>(theta.size()); }
};

/// The K context vectors revealed at one round; row i is x_{i,t}.
struct ContextSlate {
  Eigen::MatrixXd contexts;  ///< K x d
};

enum class InstanceKind { SimpleMAB, LinearCB, NestedCB };

struct InstanceOptions {
  double bias_gap = 0.5;     ///< top gap Delta; biases mu_i = Delta*(K-i)/(K-1)
  double theta_norm = 1.0;   ///< ||theta*|| for LinearCB / NestedCB
  double noise_std = 1.0;
  int true_order = 1;        ///< NestedCB: 1-based index into nested_dims
  std::vector<int> nested_dims;  ///< NestedCB only
};

/// Builds an Instance and caches covariance square roots; validates invariants.
Instance make_instance(Eigen::VectorXd biases, Eigen::VectorXd theta,
                       std::vector<Eigen::MatrixXd> covariances,
                       double noise_std);

/// Realizes a spectrum as K diagonal covariance matrices of size d.
std::vector<Eigen::MatrixXd> spectrum_matrices(const SpectrumSpec& spec, int num_arms,
                                               int dim);

/// Samples a problem instance.  SimpleMAB: theta*=0; LinearCB: theta* uniform
/// on the sphere scaled to opts.theta_norm; NestedCB: theta* supported on the
/// first nested_dims[true_order-1] coordinates.
Instance generate_instance(InstanceKind kind, const SpectrumSpec& spectrum,
                           int num_arms, int dim, const InstanceOptions& opts,
                           RngStream& rng);

/// Draws one round's contexts: row i ~ N(0, Sigma_i), independent across arms.
ContextSlate draw_slate(const Instance& inst, RngStream& rng);

/// Reward G = mu_arm + <x_arm, theta*> + N(0, sigma^2).
double sample_reward(const Instance& inst, const ContextSlate& slate, int arm,
                     RngStream& rng);

/// Mean reward of an arm at a given slate (no noise).
double mean_reward(const Instance& inst, const ContextSlate& slate, int arm);

/// Instance (de)serialization for replay.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

}  // namespace modcb
