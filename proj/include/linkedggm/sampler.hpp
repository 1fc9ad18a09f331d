// Two-step MCMC for linked Gaussian graphical models.
//
// Step 1 updates, group by group, every column of the precision matrix from its
// exact Gaussian/Gamma full conditional and then every edge indicator from its
// Bernoulli full conditional. Step 2 moves the shared correlation matrix Phi
// with a parameter-expanded Metropolis-Hastings step.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace linkedggm {

struct SamplerConfig {
  std::int64_t burn_in = 5000;
  /// Post-burn-in sweeps; every `thin`-th one is retained.
  std::int64_t keep = 20000;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
  /// Holds Phi at the identity, which decouples the groups.
  bool fix_phi_identity = false;
  /// Proposals whose smallest eigenvalue falls below this are rejected.
  double phi_proposal_floor = 1e-8;
  /// Run the full invariant check after every sweep (always on in debug builds).
  bool check_every_sweep = false;
  /// Leading burn-in sweeps during which Phi stays at its starting value, so the graphs
  /// pick up their strong edges before the groups are coupled. Capped at burn_in.
  std::int64_t phi_warmup = 1000;

  void validate() const {
    if (burn_in < 0) throw ConfigError("burn_in must be non-negative");
    if (keep < 1) throw ConfigError("keep must be at least 1");
    if (thin < 1) throw ConfigError("thin must be at least 1");
    if (phi_warmup < 0) throw ConfigError("phi_warmup must be non-negative");
    if (!(phi_proposal_floor > 0.0)) throw ConfigError("phi_proposal_floor must be positive");
  }
  [[nodiscard]] std::int64_t total_sweeps() const { return burn_in + keep; }
  [[nodiscard]] std::int64_t effective_phi_warmup() const { return std::min(phi_warmup, burn_in); }
};

/// Which blocks a sweep updates. Resampling runs hold graphs and Phi fixed.
struct SweepOptions {
  bool update_graphs = true;
  bool update_phi = true;
};

/// Gaussian prior of one group's entry at an edge, given the other groups' entries.
struct EdgeConditional {
  double mean = 0.0;
  double variance = 0.0;
};

/// Conditions the K-variate N(0, theta) on every coordinate except `k`.
inline EdgeConditional edge_conditional(std::size_t k, const Vector& omega_edge, const Matrix& theta) {
  const auto dim = theta.rows();
  if (theta.cols() != dim || omega_edge.size() != dim || static_cast<Eigen::Index>(k) >= dim)
    throw ConfigError("edge_conditional: dimension mismatch");
  const auto kk = static_cast<Eigen::Index>(k);
  if (dim == 1) return {0.0, theta(0, 0)};

  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (i != kk) rest.push_back(i);
  const Matrix theta_rest = theta(rest, rest);
  const Vector cross = theta(rest, kk);
  Eigen::LLT<Matrix> llt(theta_rest);
  if (llt.info() != Eigen::Success) throw NumericalError("edge_conditional: singular covariance block");
  const Vector coef = llt.solve(cross);
  const Vector w_rest = omega_edge(rest);
  return {coef.dot(w_rest), theta(kk, kk) - coef.dot(cross)};
}

/// Regression of each standardized coordinate on the rest under N(0, phi).
///
/// With Theta = D Phi D the conditional of omega_k factors as
/// mean = nu_k * sum_l coef(k, l) * omega_l / nu_l and variance = nu_k^2 * residual(k),
/// so the K x K work is done once per sweep instead of once per edge.
struct PhiConditioning {
  Matrix coef;
  Vector residual;

  explicit PhiConditioning(const Matrix& phi) {
    const auto dim = phi.rows();
    coef = Matrix::Zero(dim, dim);
    residual = Vector::Ones(dim);
    if (dim == 1) return;
    Eigen::LLT<Matrix> llt(phi);
    if (llt.info() != Eigen::Success) throw NumericalError("correlation matrix lost positive definiteness");
    const Matrix precision = llt.solve(Matrix::Identity(dim, dim));
    for (Eigen::Index k = 0; k < dim; ++k) {
      residual(k) = 1.0 / precision(k, k);
      for (Eigen::Index l = 0; l < dim; ++l)
        if (l != k) coef(k, l) = -precision(k, l) / precision(k, k);
    }
  }
};

namespace detail {

inline double spike_slab_sd(int edge, const Hyperparameters& hyper) { return edge ? hyper.v1 : hyper.v0; }

/// sum_{l != k} coef(k, l) * omega_l(i, j) / nu_l(i, j)
inline double standardized_regression(std::size_t k, Eigen::Index i, Eigen::Index j, const ChainState& state,
                                      const Hyperparameters& hyper, const PhiConditioning& cond) {
  double acc = 0.0;
  for (std::size_t l = 0; l < state.groups(); ++l) {
    if (l == k) continue;
    const double c = cond.coef(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
    if (c == 0.0) continue;
    acc += c * state.omega[l](i, j) / spike_slab_sd(state.graph[l](i, j), hyper);
  }
  return acc;
}

inline double log_normal_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

}  // namespace detail

/// Gibbs update of row/column j of Omega_k, keeping `sigma` = Omega_k^{-1} in sync.
///
/// Partition Omega_k with j last: off-diagonal u ~ N(C (V^-1 m - s_j), C) with
/// C = [(s_jj + lambda) Omega_{-j,-j}^{-1} + V^-1]^{-1}, and the diagonal is
/// gamma + u' Omega_{-j,-j}^{-1} u with gamma ~ Gamma(n/2 + 1, rate (s_jj + lambda)/2).
inline void update_column(std::size_t k, Eigen::Index j, ChainState& state, Matrix& sigma, const GroupDataset& data,
                          const Hyperparameters& hyper, const PhiConditioning& cond, Rng& rng) {
  Matrix& omega = state.omega[k];
  const Adjacency& graph = state.graph[k];
  const Matrix& scatter = data.scatter(k);
  const Eigen::Index p = omega.rows();
  const double shrink = scatter(j, j) + hyper.lambda;
  const double resid = cond.residual(static_cast<Eigen::Index>(k));

  std::vector<Eigen::Index> others;
  others.reserve(static_cast<std::size_t>(p - 1));
  for (Eigen::Index i = 0; i < p; ++i)
    if (i != j) others.push_back(i);

  const Vector sigma_cross = sigma(others, j);
  Matrix omega11_inv = sigma(others, others);
  omega11_inv.noalias() -= (sigma_cross / sigma(j, j)) * sigma_cross.transpose();

  Vector prior_prec(p - 1);
  Vector linear(p - 1);
  for (Eigen::Index r = 0; r < p - 1; ++r) {
    const Eigen::Index i = others[static_cast<std::size_t>(r)];
    const double nu = detail::spike_slab_sd(graph(i, j), hyper);
    const double mean = nu * detail::standardized_regression(k, i, j, state, hyper, cond);
    prior_prec(r) = 1.0 / (nu * nu * resid);
    linear(r) = prior_prec(r) * mean - scatter(i, j);
  }

  Matrix c_inv = shrink * omega11_inv;
  c_inv.diagonal() += prior_prec;
  Eigen::LLT<Matrix> llt(c_inv);
  if (llt.info() != Eigen::Success)
    throw NumericalError("column " + std::to_string(j + 1) + " of group " + std::to_string(k + 1) +
                         ": conditional covariance is not positive definite");
  Vector noise(p - 1);
  for (Eigen::Index r = 0; r < p - 1; ++r) noise(r) = rng.normal();
  const Vector u = llt.solve(linear) + llt.matrixU().solve(noise);

  const double gamma = rng.gamma(0.5 * static_cast<double>(data.samples(k)) + 1.0, 0.5 * shrink);
  const Vector w = omega11_inv * u;
  const double diag = gamma + u.dot(w);
  if (!std::isfinite(diag) || !u.allFinite())
    throw NumericalError("column " + std::to_string(j + 1) + " of group " + std::to_string(k + 1) +
                         ": non-finite draw");

  for (Eigen::Index r = 0; r < p - 1; ++r) {
    const Eigen::Index i = others[static_cast<std::size_t>(r)];
    omega(i, j) = u(r);
    omega(j, i) = u(r);
  }
  omega(j, j) = diag;

  omega11_inv.noalias() += (w / gamma) * w.transpose();
  sigma(others, others) = omega11_inv;
  const Vector cross = -w / gamma;
  sigma(others, j) = cross;
  sigma(j, others) = cross.transpose();
  sigma(j, j) = 1.0 / gamma;
}

inline Matrix inverse_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

/// Convenience form that derives Omega_k^{-1} and the Phi conditioning from scratch.
inline void update_column(std::size_t k, Eigen::Index j, ChainState& state, const GroupDataset& data,
                          const Hyperparameters& hyper, Rng& rng) {
  Matrix sigma = inverse_spd(state.omega[k]);
  update_column(k, j, state, sigma, data, hyper, PhiConditioning(state.phi), rng);
}

/// Probability that g_{k,ij} = 1 under its full conditional.
inline double edge_inclusion_probability(std::size_t k, Eigen::Index i, Eigen::Index j, const ChainState& state,
                                         const Hyperparameters& hyper, const PhiConditioning& cond) {
  const double reg = detail::standardized_regression(k, i, j, state, hyper, cond);
  const double resid = cond.residual(static_cast<Eigen::Index>(k));
  const double w = state.omega[k](i, j);
  const double log_odds = std::log(hyper.pi) - std::log1p(-hyper.pi) +
                          detail::log_normal_density(w, hyper.v1 * reg, hyper.v1 * hyper.v1 * resid) -
                          detail::log_normal_density(w, hyper.v0 * reg, hyper.v0 * hyper.v0 * resid);
  return 1.0 / (1.0 + std::exp(-log_odds));
}

inline void update_graph(std::size_t k, ChainState& state, const Hyperparameters& hyper,
                         const PhiConditioning& cond, Rng& rng) {
  Adjacency& graph = state.graph[k];
  const Eigen::Index p = graph.rows();
  for (Eigen::Index j = 1; j < p; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const int g = rng.bernoulli(edge_inclusion_probability(k, i, j, state, hyper, cond)) ? 1 : 0;
      graph(i, j) = g;
      graph(j, i) = g;
    }
  }
}

inline void update_graph(std::size_t k, ChainState& state, const Hyperparameters& hyper, Rng& rng) {
  update_graph(k, state, hyper, PhiConditioning(state.phi), rng);
}

/// z_ij = omega_ij / nu_ij for every i < j, one row per edge, plus their scatter.
struct StandardizedEdges {
  Matrix z;
  Matrix scatter;
};

inline StandardizedEdges standardized_edge_vectors(const ChainState& state, const Hyperparameters& hyper) {
  const auto groups = static_cast<Eigen::Index>(state.groups());
  const Eigen::Index p = state.variables();
  StandardizedEdges out;
  out.z.resize(p * (p - 1) / 2, groups);
  Eigen::Index row = 0;
  for (Eigen::Index j = 1; j < p; ++j)
    for (Eigen::Index i = 0; i < j; ++i, ++row)
      for (Eigen::Index k = 0; k < groups; ++k)
        out.z(row, k) = state.omega[static_cast<std::size_t>(k)](i, j) /
                        detail::spike_slab_sd(state.graph[static_cast<std::size_t>(k)](i, j), hyper);
  out.scatter = out.z.transpose() * out.z;
  return out;
}

struct PhiMove {
  bool accepted = false;
  bool floor_rejected = false;
};

namespace detail {

/// Gaussian (Laplace) approximation, in u = log t, to the density
/// prop. to exp(dof * sum(u) - t'At / 2) that the expanded proposal induces on the
/// inverse scales t given the correlation matrix.
struct ScaleApproximation {
  Vector mode;
  Eigen::LLT<Matrix> chol;  // of the precision
  double half_log_det = 0.0;

  [[nodiscard]] double log_density(const Vector& u) const {
    const Vector d = chol.matrixU() * (u - mode);
    return half_log_det - 0.5 * static_cast<double>(u.size()) * std::log(2.0 * std::numbers::pi) -
           0.5 * d.squaredNorm();
  }
};

inline double scale_objective(const Vector& u, const Matrix& a, double dof) {
  const Vector t = u.array().exp();
  return dof * u.sum() - 0.5 * t.dot(a * t);
}

inline ScaleApproximation approximate_scales(const Matrix& a, double dof) {
  const auto dim = a.rows();
  Vector u(dim);
  for (Eigen::Index i = 0; i < dim; ++i) u(i) = 0.5 * std::log(dof / a(i, i));

  auto hessian = [&](const Vector& at) {
    const Vector t = at.array().exp();
    const Vector at_t = a * t;
    Matrix h = t.asDiagonal() * a * t.asDiagonal();
    h.diagonal() += t.cwiseProduct(at_t);
    return h;
  };

  for (int iter = 0; iter < 100; ++iter) {
    const Vector t = u.array().exp();
    const Vector grad = (dof - t.cwiseProduct(a * t).array()).matrix();
    if (grad.cwiseAbs().maxCoeff() < 1e-10 * dof) break;
    const Matrix h = hessian(u);
    Eigen::LLT<Matrix> llt(h);
    Vector step = llt.info() == Eigen::Success ? Vector(llt.solve(grad))
                                               : Vector(grad.cwiseQuotient(h.diagonal().cwiseAbs()));
    const double base = scale_objective(u, a, dof);
    double alpha = 1.0;
    for (int halve = 0; halve < 40; ++halve, alpha *= 0.5)
      if (scale_objective(u + alpha * step, a, dof) >= base) break;
    u += alpha * step;
  }

  ScaleApproximation out;
  out.mode = u;
  Matrix h = hessian(u);
  out.chol.compute(h);
  if (out.chol.info() != Eigen::Success) {
    // Only reachable if Newton stalled far from the mode; any fixed density keeps the move exact.
    h = Matrix(Vector::Constant(dim, 2.0 * dof).asDiagonal());
    out.chol.compute(h);
  }
  out.half_log_det = Matrix(out.chol.matrixL()).diagonal().array().log().sum();
  return out;
}

/// Log of target(R) * h(u | R) / proposal(R, u), dropping constants shared by both states.
inline double log_importance(const Matrix& r, const Vector& u, const ScaleApproximation& approx,
                             const Matrix& s_phi, double edges, const Matrix& psi, double dof) {
  const auto dim = static_cast<double>(r.rows());
  Eigen::LLT<Matrix> llt(r);
  const Matrix r_inv = llt.solve(Matrix::Identity(r.rows(), r.cols()));
  const double log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  const Vector t = u.array().exp();
  const Matrix a = r_inv.cwiseProduct(psi);
  const double log_target = -0.5 * edges * log_det - 0.5 * (r_inv.cwiseProduct(s_phi)).sum();
  const double log_proposal = -0.5 * (dof + dim + 1.0) * log_det + dof * u.sum() - 0.5 * t.dot(a * t);
  return log_target + approx.log_density(u) - log_proposal;
}

/// log |R|^{-m/2} exp(-tr(R^{-1} S)/2), or -inf outside the usable interior.
inline double log_phi_target(const Matrix& r, const Matrix& s_phi, double edges) {
  Eigen::LLT<Matrix> llt(r);
  if (llt.info() != Eigen::Success) return -INFINITY;
  const Vector diag = Matrix(llt.matrixL()).diagonal();
  if (diag.minCoeff() < 1e-4) return -INFINITY;
  const Matrix r_inv = llt.solve(Matrix::Identity(r.rows(), r.cols()));
  return -edges * diag.array().log().sum() - 0.5 * r_inv.cwiseProduct(s_phi).sum();
}

inline Matrix with_offdiagonal(const Matrix& base, const Vector& x) {
  Matrix r = base;
  Eigen::Index c = 0;
  for (Eigen::Index j = 1; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i, ++c) r(i, j) = r(j, i) = x(c);
  return r;
}

inline Vector offdiagonal(const Matrix& r) {
  Vector x(r.rows() * (r.rows() - 1) / 2);
  Eigen::Index c = 0;
  for (Eigen::Index j = 1; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i, ++c) x(c) = r(i, j);
  return x;
}

/// Gradient of log_phi_target with respect to the off-diagonal entries.
inline Vector phi_target_gradient(const Matrix& r, const Matrix& s_phi, double edges) {
  const Matrix r_inv = inverse_spd(r);
  const Matrix g = -0.5 * edges * r_inv + 0.5 * r_inv * s_phi * r_inv;
  return 2.0 * offdiagonal(g);
}

/// Newton ascent for the mode of the correlation target, started from corr(S).
/// Depends on S only, so a proposal built from it is a fixed kernel for this step.
inline Matrix phi_target_mode(const Matrix& s_phi, double edges) {
  const auto dim = s_phi.rows();
  const Vector sd = s_phi.diagonal().cwiseMax(1e-300).cwiseSqrt();
  Matrix start = sd.cwiseInverse().asDiagonal() * s_phi * sd.cwiseInverse().asDiagonal();
  start.diagonal().setOnes();
  Matrix r = std::isfinite(log_phi_target(start, s_phi, edges)) ? start : Matrix(Matrix::Identity(dim, dim));
  Vector x = offdiagonal(r);
  double value = log_phi_target(r, s_phi, edges);
  const Matrix identity = Matrix::Identity(dim, dim);
  for (int iter = 0; iter < 60; ++iter) {
    const Vector g = phi_target_gradient(with_offdiagonal(identity, x), s_phi, edges);
    if (g.cwiseAbs().maxCoeff() < 1e-9 * (edges + 1.0)) break;
    const auto n = x.size();
    Matrix h(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const double eps = 1e-6;
      Vector xp = x, xm = x;
      xp(c) += eps;
      xm(c) -= eps;
      const Matrix rp = with_offdiagonal(identity, xp);
      const Matrix rm = with_offdiagonal(identity, xm);
      if (!is_positive_definite(rp) || !is_positive_definite(rm)) {
        h = Matrix::Zero(n, n);
        break;
      }
      h.col(c) = (phi_target_gradient(rp, s_phi, edges) - phi_target_gradient(rm, s_phi, edges)) / (2.0 * eps);
    }
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::LLT<Matrix> llt(-h);
    Vector step = llt.info() == Eigen::Success ? Vector(llt.solve(g)) : Vector(g / (edges + s_phi.trace() + 1.0));
    double alpha = 1.0;
    bool moved = false;
    for (int halve = 0; halve < 50; ++halve, alpha *= 0.5) {
      const Vector trial = x + alpha * step;
      if (trial.cwiseAbs().maxCoeff() >= 0.999) continue;
      const double v = log_phi_target(with_offdiagonal(identity, trial), s_phi, edges);
      if (v >= value) {
        x = trial;
        value = v;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return with_offdiagonal(identity, x);
}

}  // namespace detail

/// Metropolis-Hastings move of the shared correlation matrix.
///
/// Target: |Phi|^{-m/2} exp(-tr(Phi^{-1} S)/2) on valid correlation matrices.
/// The move is carried out in the expanded space Sigma = T^{-1} Phi T^{-1}: a
/// candidate Sigma* ~ IW(dof, psi) is rescaled to a correlation matrix, and the
/// inverse scales t are treated as an auxiliary variable whose conditional given
/// Phi is a Laplace fit to the one the proposal induces. The acceptance ratio is
/// the ratio of importance weights target x auxiliary / proposal, which is exact
/// for any choice of the auxiliary density and of (dof, psi).
///
/// The rescaled candidate only depends on corr(psi), so psi is centred on the
/// target's mode rather than on corr(S): the two differ whenever the standardized
/// entries are not unit-scaled, and for large m that gap would stall the chain.
inline PhiMove update_phi(Matrix& phi, const Matrix& s_phi, std::int64_t edges, double floor, Rng& rng) {
  const auto dim = phi.rows();
  if (dim == 1) return {};
  const auto m = static_cast<double>(edges);

  const double dof = std::max(m, static_cast<double>(dim) + 1.0);
  const Matrix psi = dof * detail::phi_target_mode(s_phi, m);

  auto draw_scales = [&](const detail::ScaleApproximation& approx) {
    Vector z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.normal();
    return Vector(approx.mode + approx.chol.matrixU().solve(z));
  };

  // Refresh the auxiliary scales at the current state.
  const Matrix phi_inv = inverse_spd(phi);
  const auto current_approx = detail::approximate_scales(phi_inv.cwiseProduct(psi), dof);
  const Vector u_current = draw_scales(current_approx);
  const double log_w_current = detail::log_importance(phi, u_current, current_approx, s_phi, m, psi, dof);

  // Sigma* ~ IW(dof, psi) via Bartlett: W = L A A' L' ~ Wishart(dof, psi^{-1}), Sigma* = W^{-1}.
  const Matrix psi_inv = inverse_spd(psi);
  const Matrix l = Eigen::LLT<Matrix>(psi_inv).matrixL();
  Matrix bartlett = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    bartlett(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  const Matrix factor = l * bartlett;
  const Matrix sigma = inverse_spd(factor * factor.transpose());

  Vector u_prop(dim);
  for (Eigen::Index i = 0; i < dim; ++i) u_prop(i) = -0.5 * std::log(sigma(i, i));
  const Vector t = u_prop.array().exp();
  Matrix candidate = t.asDiagonal() * sigma * t.asDiagonal();
  candidate = 0.5 * (candidate + candidate.transpose()).eval();
  candidate.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(candidate, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() >= floor)) return {false, true};

  const Matrix cand_inv = inverse_spd(candidate);
  const auto cand_approx = detail::approximate_scales(cand_inv.cwiseProduct(psi), dof);
  const double log_w_prop = detail::log_importance(candidate, u_prop, cand_approx, s_phi, m, psi, dof);

  if (std::log(rng.uniform()) < log_w_prop - log_w_current) {
    phi = candidate;
    return {true, false};
  }
  return {};
}

/// One full iteration: for k = 1..K every column of Omega_k then G_k, then Phi once.
inline PhiMove sweep(ChainState& state, const GroupDataset& data, const Hyperparameters& hyper,
                     const SamplerConfig& config, Rng& rng, SweepOptions options = {}) {
  const PhiConditioning cond(state.phi);
  const Eigen::Index p = state.variables();
  for (std::size_t k = 0; k < state.groups(); ++k) {
    Matrix sigma = inverse_spd(state.omega[k]);
    for (Eigen::Index j = 0; j < p; ++j) update_column(k, j, state, sigma, data, hyper, cond, rng);
    if (options.update_graphs) update_graph(k, state, hyper, cond, rng);
  }
  PhiMove move;
  if (options.update_phi && !config.fix_phi_identity && state.groups() > 1) {
    const auto edges = standardized_edge_vectors(state, hyper);
    move = update_phi(state.phi, edges.scatter, p * (p - 1) / 2, config.phi_proposal_floor, rng);
  }
#ifdef NDEBUG
  if (config.check_every_sweep) check_state(state);
#else
  check_state(state);
#endif
  return move;
}

/// Everything needed to continue a chain bit-for-bit.
struct Checkpoint {
  Hyperparameters hyper;
  SamplerConfig config;
  SweepOptions options;
  ChainState state;
  ChainOutput output;
  std::int64_t iteration = 0;
  std::string rng_state;
};

/// A single MCMC chain: burn-in, retention with thinning, and checkpointing.
class Chain {
 public:
  using Progress = std::function<void(std::int64_t iteration, std::int64_t total, double seconds_per_sweep)>;

  Chain(const GroupDataset& data, const Hyperparameters& hyper, const SamplerConfig& config,
        SweepOptions options = {})
      : Chain(data, hyper, config, initial_state(data), options) {}

  Chain(const GroupDataset& data, const Hyperparameters& hyper, const SamplerConfig& config, ChainState start,
        SweepOptions options = {})
      : data_(&data), hyper_(hyper), config_(config), options_(options), state_(std::move(start)),
        rng_(config.seed) {
    hyper_.validate();
    config_.validate();
    if (state_.groups() != data.groups() || state_.variables() != data.variables())
      throw ConfigError("initial state does not match the dataset dimensions");
    if (config_.fix_phi_identity) state_.phi = Matrix::Identity(state_.phi.rows(), state_.phi.cols());
    check_state(state_);
    output_.reset(data.groups(), data.variables());
    output_.seed = config_.seed;
  }

  static Chain resume(const GroupDataset& data, const Checkpoint& cp) {
    Chain chain(data, cp.hyper, cp.config, cp.state, cp.options);
    chain.output_ = cp.output;
    chain.iteration_ = cp.iteration;
    chain.rng_ = Rng::deserialize(cp.rng_state);
    return chain;
  }

  [[nodiscard]] bool done() const { return iteration_ >= config_.total_sweeps(); }
  [[nodiscard]] std::int64_t iteration() const { return iteration_; }
  [[nodiscard]] const ChainState& state() const { return state_; }
  [[nodiscard]] const ChainOutput& output() const { return output_; }
  [[nodiscard]] const SamplerConfig& config() const { return config_; }

  void step() {
    PhiMove move;
    SweepOptions options = options_;
    if (iteration_ < config_.effective_phi_warmup()) options.update_phi = false;
    try {
      move = sweep(state_, *data_, hyper_, config_, rng_, options);
    } catch (const NumericalError& e) {
      throw NumericalError("chain aborted at iteration " + std::to_string(iteration_ + 1) + ": " + e.what());
    }
    ++iteration_;
    if (iteration_ > config_.burn_in) {
      if (options_.update_phi && !config_.fix_phi_identity && state_.groups() > 1) {
        ++output_.phi_proposed;
        output_.phi_accepted += move.accepted ? 1 : 0;
      }
      if ((iteration_ - config_.burn_in) % config_.thin == 0) output_.record(state_);
    }
  }

  /// Runs until done, or for at most `max_sweeps` further sweeps when non-negative.
  void run(std::int64_t max_sweeps = -1, const Progress& progress = {}, std::int64_t report_every = 1000) {
    auto last = std::chrono::steady_clock::now();
    std::int64_t since = 0;
    for (std::int64_t n = 0; !done() && (max_sweeps < 0 || n < max_sweeps); ++n) {
      step();
      ++since;
      if (progress && report_every > 0 && iteration_ % report_every == 0) {
        const auto now = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(now - last).count();
        progress(iteration_, config_.total_sweeps(), secs / static_cast<double>(since));
        last = now;
        since = 0;
      }
    }
  }

  [[nodiscard]] Checkpoint checkpoint() const {
    return {hyper_, config_, options_, state_, output_, iteration_, rng_.serialize()};
  }

 private:
  const GroupDataset* data_;
  Hyperparameters hyper_;
  SamplerConfig config_;
  SweepOptions options_;
  ChainState state_;
  ChainOutput output_;
  Rng rng_;
  std::int64_t iteration_ = 0;
};

inline ChainOutput run_chain(const GroupDataset& data, const Hyperparameters& hyper, const SamplerConfig& config) {
  Chain chain(data, hyper, config);
  chain.run();
  return chain.output();
}

/// Posterior mean of each Omega_k with the graphs and Phi held at the given values.
inline std::vector<Matrix> resample_omega(const GroupDataset& data, const std::vector<Adjacency>& graphs,
                                          const Matrix& phi, const Hyperparameters& hyper,
                                          const SamplerConfig& config) {
  if (graphs.size() != data.groups()) throw ConfigError("resample_omega: one graph per group is required");
  for (const auto& g : graphs)
    if (g.rows() != data.variables() || !is_valid_graph(g))
      throw ConfigError("resample_omega: graphs must be symmetric 0/1 matrices of the data dimension");
  if (phi.rows() != static_cast<Eigen::Index>(data.groups()) || !is_correlation_matrix(phi))
    throw ConfigError("resample_omega: phi must be a valid correlation matrix");
  ChainState start = initial_state(data);
  start.graph = graphs;
  start.phi = phi;
  SamplerConfig fixed = config;
  fixed.fix_phi_identity = false;
  Chain chain(data, hyper, fixed, std::move(start), SweepOptions{false, false});
  chain.run();
  std::vector<Matrix> out;
  for (const auto& m : chain.output().omega_mean) out.push_back(0.5 * (m + m.transpose()));
  return out;
}

}  // namespace linkedggm
