#include "modcb/specgap.hpp"

#include <cmath>
#include <stdexcept>

namespace modcb {
namespace {

void require_symmetric(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  if (m.rows() > kMaxEigenDim)
    throw std::invalid_argument(std::string(who) + ": dimension exceeds limit");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose(
    const Eigen::MatrixXd& m, const char* who) {
  // Symmetrize first so tolerated asymmetry below 1e-8 cannot leak through.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(who) + ": eigendecomposition failed");
  return es;
}

}  // namespace

Eigen::MatrixXd threshold_eigenvalues(const Eigen::MatrixXd& m, double gamma) {
  require_symmetric(m, "threshold_eigenvalues");
  if (gamma < 0.0)
    throw std::invalid_argument("threshold_eigenvalues: gamma must be >= 0");
  const auto es = decompose(m, "threshold_eigenvalues");
  Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() < -1e-8)
    throw std::invalid_argument(
        "threshold_eigenvalues: materially negative eigenvalue");
  lam = lam.cwiseMax(0.0).cwiseMax(gamma);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  require_symmetric(m, "min_eigenvalue");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("min_eigenvalue: eigendecomposition failed");
  return es.eigenvalues().minCoeff();
}

CovarianceAccumulator::CovarianceAccumulator(int dim)
    : sum_(Eigen::MatrixXd::Zero(dim, dim)) {
  if (dim <= 0 || dim > kMaxEigenDim)
    throw std::invalid_argument("CovarianceAccumulator: bad dimension");
}

void CovarianceAccumulator::add(const Eigen::VectorXd& x) {
  if (x.size() != sum_.rows())
    throw std::invalid_argument("CovarianceAccumulator: dimension mismatch");
  sum_.selfadjointView<Eigen::Lower>().rankUpdate(x);
  ++count_;
}

void CovarianceAccumulator::add_slate(const ContextSlate& slate) {
  if (slate.contexts.cols() != sum_.rows())
    throw std::invalid_argument("CovarianceAccumulator: dimension mismatch");
  for (int i = 0; i < slate.contexts.rows(); ++i) {
    sum_.selfadjointView<Eigen::Lower>().rankUpdate(
        slate.contexts.row(i).transpose());
    ++count_;
  }
}

Eigen::MatrixXd CovarianceAccumulator::mean() const {
  if (count_ == 0) return Eigen::MatrixXd::Zero(sum_.rows(), sum_.cols());
  Eigen::MatrixXd full = sum_.selfadjointView<Eigen::Lower>();
  return full / static_cast<double>(count_);
}

ThresholdedCovariance ThresholdedCovariance::from_matrix(
    const Eigen::MatrixXd& raw, double gamma, long sample_count) {
  require_symmetric(raw, "ThresholdedCovariance");
  if (gamma <= 0.0)
    throw std::invalid_argument("ThresholdedCovariance: gamma must be > 0");
  ThresholdedCovariance cov;
  cov.raw = 0.5 * (raw + raw.transpose());
  cov.gamma = gamma;
  cov.sample_count = sample_count;
  const auto es = decompose(cov.raw, "ThresholdedCovariance");
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument(
        "ThresholdedCovariance: materially negative eigenvalue");
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseMax(gamma);
  const Eigen::MatrixXd& u = es.eigenvectors();
  cov.thresholded = u * lam.asDiagonal() * u.transpose();
  cov.inverse = u * lam.cwiseInverse().asDiagonal() * u.transpose();
  cov.inverse_sqrt = u * lam.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
  cov.sqrt = u * lam.cwiseSqrt().asDiagonal() * u.transpose();
  return cov;
}

ThresholdedCovariance ThresholdedCovariance::from_accumulator(
    const CovarianceAccumulator& acc, double gamma) {
  return from_matrix(acc.mean(), gamma, acc.count());
}

namespace {

void accumulate_moments(std::span<const LabeledSample> samples, int dim,
                        Eigen::VectorXd& moment_vec, Eigen::MatrixXd& moment_sq) {
  moment_vec = Eigen::VectorXd::Zero(dim);
  moment_sq = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : samples) {
    if (s.x.size() != dim)
      throw std::invalid_argument("estimate_residual: sample dimension mismatch");
    const Eigen::VectorXd u = s.x * s.y;
    moment_vec += u;
    moment_sq.selfadjointView<Eigen::Lower>().rankUpdate(u);
  }
  moment_sq = moment_sq.selfadjointView<Eigen::Lower>();
}

long require_pairs(long n) {
  if (n < 2)
    throw std::invalid_argument("estimate_residual: need at least 2 samples");
  return n * (n - 1) / 2;
}

}  // namespace

double estimate_residual_from_moments(const Eigen::VectorXd& moment_vec,
                                      const Eigen::MatrixXd& moment_sq, long n,
                                      const ThresholdedCovariance& cov) {
  const long pairs = require_pairs(n);
  // C(n,2) E_hat = (S^T Omega S - tr(Omega Q)) / 2 with S, Q the two moments.
  const double total = moment_vec.dot(cov.inverse * moment_vec);
  const double diag = (cov.inverse * moment_sq).trace();
  return 0.5 * (total - diag) / static_cast<double>(pairs);
}

double estimate_residual(std::span<const LabeledSample> samples,
                         const ThresholdedCovariance& cov) {
  require_pairs(static_cast<long>(samples.size()));
  Eigen::VectorXd moment_vec;
  Eigen::MatrixXd moment_sq;
  accumulate_moments(samples, static_cast<int>(cov.raw.rows()), moment_vec,
                     moment_sq);
  return estimate_residual_from_moments(moment_vec, moment_sq,
                                        static_cast<long>(samples.size()), cov);
}

double estimate_residual_naive(std::span<const LabeledSample> samples,
                               const ThresholdedCovariance& cov) {
  const long n = static_cast<long>(samples.size());
  const long pairs = require_pairs(n);
  std::vector<Eigen::VectorXd> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(cov.inverse_sqrt * s.x * s.y);
  double sum = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) sum += v[i].dot(v[j]);
  return sum / static_cast<double>(pairs);
}

namespace {

/// R = [[Omega_1, 0],[0,0]] - Omega for the nested residual.
Eigen::MatrixXd nested_contrast(const ThresholdedCovariance& cov_full,
                                const ThresholdedCovariance& cov_sub) {
  const int d = static_cast<int>(cov_full.raw.rows());
  const int d1 = static_cast<int>(cov_sub.raw.rows());
  if (d1 > d)
    throw std::invalid_argument(
        "estimate_residual_nested: sub-dimension exceeds full dimension");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, d);
  r.topLeftCorner(d1, d1) = cov_sub.inverse;
  r -= cov_full.inverse;
  return r;
}

}  // namespace

double estimate_residual_nested_from_moments(
    const Eigen::VectorXd& moment_vec, const Eigen::MatrixXd& moment_sq, long n,
    const ThresholdedCovariance& cov_full, const ThresholdedCovariance& cov_sub) {
  const long pairs = require_pairs(n);
  const Eigen::MatrixXd r = nested_contrast(cov_full, cov_sub);
  // With A = S^{1/2} R (R symmetric): A^T A = R S R, so
  // C(n,2) E_hat = (S_vec^T (R S R) S_vec - tr((R S R) Q)) / 2.
  const Eigen::MatrixXd gram = r * cov_full.thresholded * r;
  const double total = moment_vec.dot(gram * moment_vec);
  const double diag = (gram * moment_sq).trace();
  return 0.5 * (total - diag) / static_cast<double>(pairs);
}

double estimate_residual_nested(std::span<const LabeledSample> samples,
                                const ThresholdedCovariance& cov_full,
                                const ThresholdedCovariance& cov_sub) {
  require_pairs(static_cast<long>(samples.size()));
  Eigen::VectorXd moment_vec;
  Eigen::MatrixXd moment_sq;
  accumulate_moments(samples, static_cast<int>(cov_full.raw.rows()), moment_vec,
                     moment_sq);
  return estimate_residual_nested_from_moments(
      moment_vec, moment_sq, static_cast<long>(samples.size()), cov_full,
      cov_sub);
}

double estimate_residual_nested_naive(std::span<const LabeledSample> samples,
                                      const ThresholdedCovariance& cov_full,
                                      const ThresholdedCovariance& cov_sub) {
  const long n = static_cast<long>(samples.size());
  const long pairs = require_pairs(n);
  const Eigen::MatrixXd r = nested_contrast(cov_full, cov_sub);
  std::vector<Eigen::VectorXd> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(cov_full.sqrt * (r * s.x) * s.y);
  double sum = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) sum += v[i].dot(v[j]);
  return sum / static_cast<double>(pairs);
}

ThresholdVariant threshold_variant_for(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::ModCB: return ThresholdVariant::ModCB;
    case SelectorKind::ModCB_U: return ThresholdVariant::ModCB_U;
    case SelectorKind::ModCB_A: return ThresholdVariant::ModCB_A;
    case SelectorKind::Nested: return ThresholdVariant::ModCB_U;
  }
  throw std::logic_error("unknown SelectorKind");
}

double alpha_threshold(ThresholdVariant variant, long n, long m, int dim,
                       double delta, double gamma, double c1, double c2,
                       double c3, double mu_norm_sq) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("alpha_threshold: need n >= 1 and m >= 1");
  if (gamma <= 0.0)
    throw std::invalid_argument("alpha_threshold: gamma must be > 0");
  const double d = static_cast<double>(dim);
  const double log1 = std::log(2.0 * d / delta);
  const double log2 = std::log(2.0 / delta);
  const double gamma_pow =
      variant == ThresholdVariant::ModCB
          ? gamma * gamma
          : std::pow(gamma, kVarianceGammaExponentU);
  double alpha = c1 * std::sqrt(d) * log1 * log1 /
                 (gamma_pow * static_cast<double>(n));
  const double mu_factor =
      variant == ThresholdVariant::ModCB_A ? 1.0 : mu_norm_sq;
  alpha += c2 * mu_factor * (d + log2) /
           (std::pow(gamma, 4) * static_cast<double>(m));
  if (variant == ThresholdVariant::ModCB_U) alpha += c3 * gamma;
  return alpha;
}

double alpha_threshold(ThresholdVariant variant, long n, long m,
                       const RunConfig& cfg, double mu_norm_sq) {
  return alpha_threshold(variant, n, m, cfg.dim, cfg.failure_prob, cfg.gamma,
                         cfg.c1, cfg.c2, cfg.c3, mu_norm_sq);
}

}  // namespace modcb
