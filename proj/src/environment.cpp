#include "modcb/environment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace modcb {

SpectrumSpec SpectrumSpec::identity() { return {}; }

SpectrumSpec SpectrumSpec::scaled(double s) {
  SpectrumSpec spec;
  spec.kind = Kind::Scaled;
  spec.scale = s;
  return spec;
}

SpectrumSpec SpectrumSpec::diagonal(std::vector<double> eigs) {
  SpectrumSpec spec;
  spec.kind = Kind::Diagonal;
  spec.eigenvalues = std::move(eigs);
  return spec;
}

SpectrumSpec SpectrumSpec::rank_deficient(int r) {
  SpectrumSpec spec;
  spec.kind = Kind::RankDeficient;
  spec.rank = r;
  return spec;
}

SpectrumSpec SpectrumSpec::arm_heterogeneous(std::vector<SpectrumSpec> specs) {
  SpectrumSpec spec;
  spec.kind = Kind::ArmHeterogeneous;
  spec.per_arm = std::move(specs);
  return spec;
}

namespace {

Eigen::MatrixXd spectrum_matrix_single(const SpectrumSpec& spec, int dim) {
  using Kind = SpectrumSpec::Kind;
  switch (spec.kind) {
    case Kind::Identity:
      return Eigen::MatrixXd::Identity(dim, dim);
    case Kind::Scaled: {
      if (spec.scale < 0.0 || spec.scale > 1.0)
        throw std::invalid_argument("spectrum: scale must lie in [0,1]");
      return spec.scale * Eigen::MatrixXd::Identity(dim, dim);
    }
    case Kind::Diagonal: {
      if (static_cast<int>(spec.eigenvalues.size()) != dim)
        throw std::invalid_argument("spectrum: diagonal length must equal dim");
      Eigen::VectorXd d(dim);
      for (int i = 0; i < dim; ++i) {
        const double v = spec.eigenvalues[i];
        if (v < 0.0 || v > 1.0)
          throw std::invalid_argument("spectrum: eigenvalues must lie in [0,1]");
        d[i] = v;
      }
      return d.asDiagonal();
    }
    case Kind::RankDeficient: {
      if (spec.rank < 0 || spec.rank > dim)
        throw std::invalid_argument("spectrum: rank must lie in [0,dim]");
      Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
      d.head(spec.rank).setOnes();
      return d.asDiagonal();
    }
    case Kind::ArmHeterogeneous:
      throw std::invalid_argument(
          "spectrum: ArmHeterogeneous cannot nest inside ArmHeterogeneous");
  }
  throw std::logic_error("unknown spectrum kind");
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

void check_instance(const Instance& inst) {
  const int k = inst.num_arms();
  const int d = inst.dim();
  if (k <= 0 || d <= 0) throw std::invalid_argument("instance: empty dims");
  if (static_cast<int>(inst.covariances.size()) != k)
    throw std::invalid_argument("instance: need one covariance per arm");
  if (inst.theta.norm() > 1.0 + 1e-9)
    throw std::invalid_argument("instance: ||theta|| must be <= 1");
  if (inst.biases.cwiseAbs().maxCoeff() > 1.0 + 1e-9)
    throw std::invalid_argument("instance: biases must lie in [-1,1]");
  if (inst.noise_std < 0.0 || inst.noise_std > 1.0)
    throw std::invalid_argument("instance: noise_std must lie in [0,1]");
  for (const auto& cov : inst.covariances) {
    if (cov.rows() != d || cov.cols() != d)
      throw std::invalid_argument("instance: covariance dimension mismatch");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8)
      throw std::invalid_argument("instance: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 ||
        es.eigenvalues().maxCoeff() > 1.0 + 1e-9)
      throw std::invalid_argument(
          "instance: covariance eigenvalues must lie in [0,1]");
  }
}

}  // namespace

Instance make_instance(Eigen::VectorXd biases, Eigen::VectorXd theta,
                       std::vector<Eigen::MatrixXd> covariances,
                       double noise_std) {
  Instance inst;
  inst.biases = std::move(biases);
  inst.theta = std::move(theta);
  inst.covariances = std::move(covariances);
  inst.noise_std = noise_std;
  check_instance(inst);
  inst.cov_sqrts.reserve(inst.covariances.size());
  for (const auto& cov : inst.covariances)
    inst.cov_sqrts.push_back(symmetric_sqrt(cov));
  return inst;
}

std::vector<Eigen::MatrixXd> spectrum_matrices(const SpectrumSpec& spec,
                                               int num_arms, int dim) {
  std::vector<Eigen::MatrixXd> covs;
  covs.reserve(num_arms);
  if (spec.kind == SpectrumSpec::Kind::ArmHeterogeneous) {
    if (static_cast<int>(spec.per_arm.size()) != num_arms)
      throw std::invalid_argument(
          "spectrum: ArmHeterogeneous needs one spec per arm");
    for (const auto& sub : spec.per_arm)
      covs.push_back(spectrum_matrix_single(sub, dim));
  } else {
    const Eigen::MatrixXd cov = spectrum_matrix_single(spec, dim);
    for (int i = 0; i < num_arms; ++i) covs.push_back(cov);
  }
  return covs;
}

namespace {

Eigen::VectorXd bias_grid(int num_arms, double top_gap) {
  Eigen::VectorXd mu(num_arms);
  if (num_arms == 1) {
    mu[0] = 0.0;
    return mu;
  }
  for (int i = 0; i < num_arms; ++i)
    mu[i] = top_gap * static_cast<double>(num_arms - 1 - i) /
            static_cast<double>(num_arms - 1);
  return mu;
}

Eigen::VectorXd sphere_direction(int dim, RngStream& rng) {
  Eigen::VectorXd v(dim);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.next_gaussian();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v / std::sqrt(norm2);
}

}  // namespace

Instance generate_instance(InstanceKind kind, const SpectrumSpec& spectrum,
                           int num_arms, int dim, const InstanceOptions& opts,
                           RngStream& rng) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  switch (kind) {
    case InstanceKind::SimpleMAB:
      break;
    case InstanceKind::LinearCB:
      theta = opts.theta_norm * sphere_direction(dim, rng);
      break;
    case InstanceKind::NestedCB: {
      if (opts.nested_dims.empty())
        throw std::invalid_argument("generate_instance: NestedCB needs nested_dims");
      if (opts.true_order < 1 ||
          opts.true_order > static_cast<int>(opts.nested_dims.size()))
        throw std::invalid_argument("generate_instance: true_order out of range");
      const int support = opts.nested_dims[opts.true_order - 1];
      if (support > dim)
        throw std::invalid_argument("generate_instance: nested dim exceeds dim");
      theta.head(support) = opts.theta_norm * sphere_direction(support, rng);
      break;
    }
  }
  return make_instance(bias_grid(num_arms, opts.bias_gap), theta,
                       spectrum_matrices(spectrum, num_arms, dim),
                       opts.noise_std);
}

ContextSlate draw_slate(const Instance& inst, RngStream& rng) {
  const int k = inst.num_arms();
  const int d = inst.dim();
  ContextSlate slate;
  slate.contexts.resize(k, d);
  Eigen::VectorXd z(d);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.next_gaussian();
    slate.contexts.row(i) = (inst.cov_sqrts[i] * z).transpose();
  }
  return slate;
}

double mean_reward(const Instance& inst, const ContextSlate& slate, int arm) {
  if (arm < 0 || arm >= inst.num_arms())
    throw std::out_of_range("mean_reward: arm out of range");
  return inst.biases[arm] + slate.contexts.row(arm).dot(inst.theta);
}

double sample_reward(const Instance& inst, const ContextSlate& slate, int arm,
                     RngStream& rng) {
  return mean_reward(inst, slate, arm) + inst.noise_std * rng.next_gaussian();
}

std::string instance_to_json(const Instance& inst) {
  nlohmann::ordered_json j;
  j["biases"] = std::vector<double>(inst.biases.begin(), inst.biases.end());
  j["theta"] = std::vector<double>(inst.theta.begin(), inst.theta.end());
  j["noise_std"] = inst.noise_std;
  auto& covs = j["covariances"];
  covs = nlohmann::ordered_json::array();
  for (const auto& cov : inst.covariances) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int r = 0; r < cov.rows(); ++r) {
      std::vector<double> row(cov.cols());
      for (int c = 0; c < cov.cols(); ++c) row[c] = cov(r, c);
      rows.push_back(row);
    }
    covs.push_back(rows);
  }
  return j.dump(2);
}

Instance instance_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto biases = j.at("biases").get<std::vector<double>>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  const double noise_std = j.at("noise_std").get<double>();
  std::vector<Eigen::MatrixXd> covs;
  for (const auto& m : j.at("covariances")) {
    const int rows = static_cast<int>(m.size());
    const int cols = rows > 0 ? static_cast<int>(m[0].size()) : 0;
    Eigen::MatrixXd cov(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) cov(r, c) = m[r][c].get<double>();
    covs.push_back(std::move(cov));
  }
  return make_instance(
      Eigen::Map<const Eigen::VectorXd>(biases.data(), biases.size()),
      Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size()),
      std::move(covs), noise_std);
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path.string());
  out << instance_to_json(inst) << "\n";
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path.string());
  std::ostringstream oss;
  oss << in.rdbuf();
  return instance_from_json(oss.str());
}

}  // namespace modcb
