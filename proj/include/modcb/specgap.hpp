#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "modcb/config.hpp"
#include "modcb/environment.hpp"

namespace modcb {

/// Largest matrix dimension accepted by the dense symmetric eigensolver paths.
inline constexpr int kMaxEigenDim = 512;

/// Exponent of gamma in the variance (1/n) term of the universal threshold.
/// The error bound carries 1/gamma here while the regret-level analysis uses
/// 1/sqrt(gamma); we keep the error-bound form and expose the knob.
inline constexpr double kVarianceGammaExponentU = 1.0;

/// Eigenvalue clipping: U diag(max(lambda_j, gamma)) U^T.  Requires a
/// symmetric input whose eigenvalues are >= -1e-8 (small FP negativity is
/// clamped to 0 before clipping).
Eigen::MatrixXd threshold_eigenvalues(const Eigen::MatrixXd& m, double gamma);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Running average of outer products x x^T over all context vectors seen.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int dim);

  void add(const Eigen::VectorXd& x);
  void add_slate(const ContextSlate& slate);

  long count() const { return count_; }
  int dim() const { return static_cast<int>(sum_.rows()); }
  /// (1/count) * sum x x^T; zero matrix when empty.
  Eigen::MatrixXd mean() const;

 private:
  Eigen::MatrixXd sum_;
  long count_ = 0;
};

/// Sample covariance together with its gamma-thresholded form, inverse, and
/// the square roots needed by the gap estimators.  All derived matrices come
/// from one shared eigendecomposition.
struct ThresholdedCovariance {
  Eigen::MatrixXd raw;           ///< sample covariance as accumulated
  double gamma = 0.0;
  Eigen::MatrixXd thresholded;   ///< T_gamma(raw)
  Eigen::MatrixXd inverse;       ///< T_gamma(raw)^{-1}
  Eigen::MatrixXd inverse_sqrt;  ///< T_gamma(raw)^{-1/2}
  Eigen::MatrixXd sqrt;          ///< T_gamma(raw)^{1/2}
  long sample_count = 0;         ///< number of context vectors aggregated

  static ThresholdedCovariance from_matrix(const Eigen::MatrixXd& raw,
                                           double gamma, long sample_count);
  static ThresholdedCovariance from_accumulator(const CovarianceAccumulator& acc,
                                                double gamma);
};

/// One de-biased observation feeding the gap estimator.
struct LabeledSample {
  Eigen::VectorXd x;
  double y = 0.0;
};

/// Square-loss-gap U-statistic:
///   E_hat = (1/C(n,2)) * sum_{i<j} <Omega^{1/2} x_i y_i, Omega^{1/2} x_j y_j>.
/// Computed via the O(n d + d^2) identity
///   C(n,2) E_hat = (||sum v_i||^2 - sum ||v_i||^2) / 2,  v_i = Omega^{1/2} x_i y_i.
double estimate_residual(std::span<const LabeledSample> samples,
                         const ThresholdedCovariance& cov);

/// Same statistic from running first/second moments of u_i = x_i y_i:
/// moment_vec = sum u_i, moment_sq = sum u_i u_i^T.
double estimate_residual_from_moments(const Eigen::VectorXd& moment_vec,
                                      const Eigen::MatrixXd& moment_sq, long n,
                                      const ThresholdedCovariance& cov);

/// Reference O(n^2) double sum; used as the oracle for the fast path.
double estimate_residual_naive(std::span<const LabeledSample> samples,
                               const ThresholdedCovariance& cov);

/// Nested-model residual between a sub-model of dimension d1 and the full
/// model: with R = [[Omega_1, 0],[0,0]] - Omega,
///   E_hat = (1/C(n,2)) * sum_{s<t} <S^{1/2} R x_s y_s, S^{1/2} R x_t y_t>,
/// where S = thresholded full covariance.
double estimate_residual_nested(std::span<const LabeledSample> samples,
                                const ThresholdedCovariance& cov_full,
                                const ThresholdedCovariance& cov_sub);

double estimate_residual_nested_from_moments(const Eigen::VectorXd& moment_vec,
                                             const Eigen::MatrixXd& moment_sq,
                                             long n,
                                             const ThresholdedCovariance& cov_full,
                                             const ThresholdedCovariance& cov_sub);

double estimate_residual_nested_naive(std::span<const LabeledSample> samples,
                                      const ThresholdedCovariance& cov_full,
                                      const ThresholdedCovariance& cov_sub);

enum class ThresholdVariant { ModCB, ModCB_U, ModCB_A };

ThresholdVariant threshold_variant_for(SelectorKind kind);

/// Misspecification-test threshold alpha_delta(n, m):
///   ModCB_U: c1 sqrt(d) ln^2(2d/delta) / (gamma n)
///            + c2 mu_norm_sq (d + ln(2/delta)) / (gamma^4 m) + c3 gamma
///   ModCB:   as ModCB_U but 1/gamma^2 on the first term and no +gamma term
///   ModCB_A: as ModCB_U without mu_norm_sq and without the +gamma term
/// Natural logarithms throughout; n = labeled count, m = unlabeled rounds.
double alpha_threshold(ThresholdVariant variant, long n, long m, int dim,
                       double delta, double gamma, double c1, double c2,
                       double c3, double mu_norm_sq = 1.0);

double alpha_threshold(ThresholdVariant variant, long n, long m,
                       const RunConfig& cfg, double mu_norm_sq = 1.0);

}  // namespace modcb
