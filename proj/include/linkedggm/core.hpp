// Domain types shared by the sampler, inference and simulation layers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace linkedggm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Symmetric 0/1 adjacency matrix with zero diagonal.
using Adjacency = Eigen::MatrixXi;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Invalid user input: bad dimensions, out-of-range hyperparameters, malformed files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown inside the sampler (Cholesky failure, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite()) return false;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

inline bool is_symmetric(const Matrix& m, double tol = 0.0) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

/// Unit diagonal, symmetric, off-diagonals in (-1, 1), Cholesky succeeds.
inline bool is_correlation_matrix(const Matrix& phi, double tol = 1e-10) {
  if (phi.rows() != phi.cols() || phi.rows() == 0) return false;
  if (!is_symmetric(phi, tol)) return false;
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    if (std::abs(phi(i, i) - 1.0) > tol) return false;
    for (Eigen::Index j = 0; j < phi.cols(); ++j)
      if (i != j && !(std::abs(phi(i, j)) < 1.0)) return false;
  }
  return is_positive_definite(phi);
}

inline bool is_valid_graph(const Adjacency& g) {
  if (g.rows() != g.cols()) return false;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    if (g(i, i) != 0) return false;
    for (Eigen::Index j = i + 1; j < g.cols(); ++j) {
      if (g(i, j) != g(j, i)) return false;
      if (g(i, j) != 0 && g(i, j) != 1) return false;
    }
  }
  return true;
}

inline std::int64_t edge_count(const Adjacency& g) {
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = i + 1; j < g.cols(); ++j) count += g(i, j) != 0;
  return count;
}

/// Per-group centered observations with cached scatter matrices.
///
/// Construct through center_by_group(); the scatter matrices S_k = X_k^T X_k are
/// fixed for the lifetime of a fit, so they are computed once here.
class GroupDataset {
 public:
  GroupDataset() = default;

  [[nodiscard]] std::size_t groups() const { return data_.size(); }
  [[nodiscard]] Eigen::Index variables() const { return data_.empty() ? 0 : data_.front().cols(); }
  [[nodiscard]] Eigen::Index samples(std::size_t k) const { return data_.at(k).rows(); }
  [[nodiscard]] const Matrix& data(std::size_t k) const { return data_.at(k); }
  [[nodiscard]] const Matrix& scatter(std::size_t k) const { return scatter_.at(k); }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  void set_names(std::vector<std::string> names) {
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != variables())
      throw ConfigError("variable name count does not match column count");
    names_ = std::move(names);
  }

  friend GroupDataset center_by_group(const std::vector<Matrix>& raw, bool scale);

 private:
  std::vector<Matrix> data_;
  std::vector<Matrix> scatter_;
  std::vector<std::string> names_;
};

/// Subtracts per-group column means (divisor n_k). With `scale`, columns are
/// additionally divided by their standard deviation (divisor n_k - 1).
inline GroupDataset center_by_group(const std::vector<Matrix>& raw, bool scale = false) {
  if (raw.empty()) throw ConfigError("at least one group is required");
  const Eigen::Index p = raw.front().cols();
  if (p < 2) throw ConfigError("at least two variables are required");
  GroupDataset out;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const Matrix& x = raw[k];
    if (x.cols() != p)
      throw ConfigError("group " + std::to_string(k + 1) + " has " + std::to_string(x.cols()) +
                        " columns, expected " + std::to_string(p));
    if (x.rows() < 2)
      throw ConfigError("group " + std::to_string(k + 1) + " needs at least two observations");
    if (!x.allFinite())
      throw ConfigError("group " + std::to_string(k + 1) + " contains non-finite values");
    Matrix centered = x.rowwise() - x.colwise().mean();
    if (scale) {
      for (Eigen::Index j = 0; j < p; ++j) {
        const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(x.rows() - 1));
        if (sd > 0.0) centered.col(j) /= sd;
      }
    }
    Matrix s = centered.transpose() * centered;
    s = 0.5 * (s + s.transpose()).eval();
    out.data_.push_back(std::move(centered));
    out.scatter_.push_back(std::move(s));
  }
  return out;
}

/// Spike/slab prior settings. `pi` is the Bernoulli edge parameter.
struct Hyperparameters {
  double v0 = 0.01;
  double v1 = 0.1;
  double lambda = 1.0;
  double pi = 0.05;

  void validate() const {
    if (!(v0 > 0.0) || !(v1 > 0.0) || !(v0 < v1))
      throw ConfigError("hyperparameters require 0 < v0 < v1");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("pi must lie in (0, 1)");
  }
};

inline constexpr double kMaxDefaultPi = 1.0 - 1e-6;

/// 2/(p-1), clipped below 1 so the edge prior stays proper for very small p.
inline double default_pi(Eigen::Index p) {
  if (p < 2) throw ConfigError("default_pi requires p >= 2");
  return std::min(2.0 / static_cast<double>(p - 1), kMaxDefaultPi);
}

/// diag(nu) * phi * diag(nu) with nu_k = v1 when the edge is present in group k, v0 otherwise.
inline Matrix theta_matrix(const std::vector<int>& edge_in_group, const Hyperparameters& hyper,
                           const Matrix& phi) {
  const auto k = static_cast<Eigen::Index>(edge_in_group.size());
  if (phi.rows() != k || phi.cols() != k)
    throw ConfigError("theta_matrix: correlation matrix dimension does not match group count");
  Vector nu(k);
  for (Eigen::Index i = 0; i < k; ++i) nu(i) = edge_in_group[i] ? hyper.v1 : hyper.v0;
  return nu.asDiagonal() * phi * nu.asDiagonal();
}

/// Current draw of every group's precision matrix and graph plus the shared correlation matrix.
struct ChainState {
  std::vector<Matrix> omega;
  std::vector<Adjacency> graph;
  Matrix phi;

  [[nodiscard]] std::size_t groups() const { return omega.size(); }
  [[nodiscard]] Eigen::Index variables() const { return omega.empty() ? 0 : omega.front().rows(); }
};

/// Throws NumericalError describing the first violated invariant.
inline void check_state(const ChainState& state) {
  const std::size_t k = state.groups();
  if (k == 0 || state.graph.size() != k) throw NumericalError("chain state has inconsistent group count");
  if (state.phi.rows() != static_cast<Eigen::Index>(k) || !is_correlation_matrix(state.phi))
    throw NumericalError("correlation matrix is not a valid correlation matrix");
  for (std::size_t g = 0; g < k; ++g) {
    if (!is_symmetric(state.omega[g]) || !is_positive_definite(state.omega[g]))
      throw NumericalError("precision matrix of group " + std::to_string(g + 1) + " is not positive definite");
    if (!is_valid_graph(state.graph[g]))
      throw NumericalError("graph of group " + std::to_string(g + 1) + " is not a symmetric 0/1 matrix");
  }
}

/// Starting point: diagonal precision from the marginal sample variances, empty graphs, identity Phi.
inline ChainState initial_state(const GroupDataset& data) {
  ChainState state;
  const Eigen::Index p = data.variables();
  for (std::size_t k = 0; k < data.groups(); ++k) {
    Vector diag(p);
    const double n = static_cast<double>(data.samples(k));
    for (Eigen::Index i = 0; i < p; ++i) {
      const double s = data.scatter(k)(i, i);
      diag(i) = s > 0.0 ? n / s : 1.0;
    }
    state.omega.emplace_back(diag.asDiagonal());
    state.graph.push_back(Adjacency::Zero(p, p));
  }
  state.phi = Matrix::Identity(static_cast<Eigen::Index>(data.groups()),
                               static_cast<Eigen::Index>(data.groups()));
  return state;
}

/// Retained draws of one chain.
///
/// Alongside the tallies that inference needs (edge counts, Phi draws, Omega means),
/// per-parameter second moments are accumulated so convergence diagnostics can be
/// computed without storing full traces.
struct ChainOutput {
  std::vector<CountMatrix> edge_counts;
  std::vector<Matrix> phi_draws;
  std::vector<Matrix> omega_mean;
  std::vector<Matrix> omega_m2;  // Welford sum of squared deviations
  std::int64_t n_kept = 0;
  std::uint64_t seed = 0;
  std::int64_t phi_proposed = 0;
  std::int64_t phi_accepted = 0;

  [[nodiscard]] double phi_acceptance_rate() const {
    return phi_proposed == 0 ? 0.0 : static_cast<double>(phi_accepted) / static_cast<double>(phi_proposed);
  }

  void reset(std::size_t groups, Eigen::Index p) {
    edge_counts.assign(groups, CountMatrix::Zero(p, p));
    omega_mean.assign(groups, Matrix::Zero(p, p));
    omega_m2.assign(groups, Matrix::Zero(p, p));
    phi_draws.clear();
    n_kept = 0;
    phi_proposed = 0;
    phi_accepted = 0;
  }

  void record(const ChainState& state) {
    ++n_kept;
    const double n = static_cast<double>(n_kept);
    for (std::size_t k = 0; k < state.groups(); ++k) {
      edge_counts[k] += state.graph[k].cast<std::int64_t>();
      const Matrix delta = state.omega[k] - omega_mean[k];
      omega_mean[k] += delta / n;
      omega_m2[k].array() += delta.array() * (state.omega[k] - omega_mean[k]).array();
    }
    phi_draws.push_back(state.phi);
  }
};

}  // namespace linkedggm
