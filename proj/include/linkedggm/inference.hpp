// Posterior summaries: inclusion probabilities, median model, Phi estimate,
// Gelman-Rubin diagnostics and cross-group overlap tables.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "sampler.hpp"

namespace linkedggm {

/// Pooled posterior probabilities of inclusion: sum of edge counts over sum of kept draws.
inline std::vector<Matrix> ppi(const std::vector<ChainOutput>& outputs) {
  if (outputs.empty()) throw ConfigError("ppi: at least one chain output is required");
  const auto& first = outputs.front();
  std::vector<CountMatrix> total = first.edge_counts;
  std::int64_t kept = first.n_kept;
  for (std::size_t c = 1; c < outputs.size(); ++c) {
    const auto& o = outputs[c];
    if (o.edge_counts.size() != total.size()) throw ConfigError("ppi: chains disagree on the number of groups");
    for (std::size_t k = 0; k < total.size(); ++k) {
      if (o.edge_counts[k].rows() != total[k].rows()) throw ConfigError("ppi: chains disagree on dimension");
      total[k] += o.edge_counts[k];
    }
    kept += o.n_kept;
  }
  if (kept <= 0) throw ConfigError("ppi: chains contain no retained draws");
  std::vector<Matrix> out;
  for (const auto& t : total) out.push_back(t.cast<double>() / static_cast<double>(kept));
  return out;
}

inline std::vector<Matrix> ppi(const ChainOutput& output) { return ppi(std::vector<ChainOutput>{output}); }

/// g = 1 exactly when ppi >= threshold (ties included).
inline std::vector<Adjacency> median_model(const std::vector<Matrix>& ppi, double threshold = 0.5) {
  std::vector<Adjacency> out;
  for (const auto& m : ppi) {
    Adjacency g = (m.array() >= threshold).cast<int>();
    g.diagonal().setZero();
    out.push_back(g);
  }
  return out;
}

inline constexpr double kCorrelationEigenFloor = 1e-8;

/// Clips eigenvalues at `floor` and rescales back to unit diagonal.
inline Matrix nearest_correlation(const Matrix& m, double floor = kCorrelationEigenFloor) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector clipped = eig.eigenvalues().cwiseMax(floor);
  Matrix out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  const Vector d = out.diagonal().cwiseSqrt().cwiseInverse();
  out = d.asDiagonal() * out * d.asDiagonal();
  out = 0.5 * (out + out.transpose()).eval();
  out.diagonal().setOnes();
  return out;
}

/// Posterior mean of Phi, projected back to a correlation matrix if the mean is not positive definite.
inline Matrix phi_estimate(const std::vector<Matrix>& draws) {
  if (draws.empty()) throw ConfigError("phi_estimate: no draws");
  Matrix mean = Matrix::Zero(draws.front().rows(), draws.front().cols());
  for (const auto& d : draws) {
    if (d.rows() != mean.rows() || d.cols() != mean.cols()) throw ConfigError("phi_estimate: dimension mismatch");
    mean += d;
  }
  mean /= static_cast<double>(draws.size());
  mean = 0.5 * (mean + mean.transpose()).eval();
  mean.diagonal().setOnes();
  if (is_correlation_matrix(mean)) return mean;
  return nearest_correlation(mean);
}

inline Matrix phi_estimate(const std::vector<ChainOutput>& outputs) {
  std::vector<Matrix> all;
  for (const auto& o : outputs) all.insert(all.end(), o.phi_draws.begin(), o.phi_draws.end());
  return phi_estimate(all);
}

/// Count, mean and sum of squared deviations of one scalar trace.
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  [[nodiscard]] double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

/// Potential scale reduction from per-chain moments; all chains must have the same length.
/// Returns +infinity when the mean within-chain variance is zero.
inline double gelman_rubin(const std::vector<Moments>& chains) {
  if (chains.size() < 2) throw ConfigError("gelman_rubin: at least two chains are required");
  const std::int64_t n = chains.front().n;
  for (const auto& c : chains)
    if (c.n != n) throw ConfigError("gelman_rubin: chains must have equal length");
  if (n < 10) throw ConfigError("gelman_rubin: chains must have at least 10 draws");
  const double nd = static_cast<double>(n);
  const double m = static_cast<double>(chains.size());
  double w = 0.0;
  double grand = 0.0;
  for (const auto& c : chains) {
    w += c.variance();
    grand += c.mean;
  }
  w /= m;
  grand /= m;
  double b = 0.0;
  for (const auto& c : chains) b += (c.mean - grand) * (c.mean - grand);
  b *= nd / (m - 1.0);
  if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(((nd - 1.0) / nd * w + b / nd) / w);
}

inline double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  std::vector<Moments> moments;
  for (const auto& c : chains) {
    Moments mo;
    for (double x : c) mo.add(x);
    moments.push_back(mo);
  }
  return gelman_rubin(moments);
}

/// R-hat for every Phi off-diagonal ("phi[k,l]") and every upper-triangle Omega entry
/// ("omega<k>[i,j]"), all indices 1-based. Chains must have equal n_kept.
inline std::map<std::string, double> rhat_table(const std::vector<ChainOutput>& outputs) {
  std::map<std::string, double> out;
  if (outputs.size() < 2) return out;
  const std::size_t groups = outputs.front().omega_mean.size();
  const Eigen::Index p = groups > 0 ? outputs.front().omega_mean.front().rows() : 0;
  for (std::size_t a = 0; a < groups; ++a) {
    for (std::size_t b = a + 1; b < groups; ++b) {
      std::vector<Moments> chains;
      for (const auto& o : outputs) {
        Moments mo;
        for (const auto& d : o.phi_draws) mo.add(d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        chains.push_back(mo);
      }
      out["phi[" + std::to_string(a + 1) + "," + std::to_string(b + 1) + "]"] = gelman_rubin(chains);
    }
  }
  for (std::size_t k = 0; k < groups; ++k) {
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        std::vector<Moments> chains;
        for (const auto& o : outputs) chains.push_back({o.n_kept, o.omega_mean[k](i, j), o.omega_m2[k](i, j)});
        out["omega" + std::to_string(k + 1) + "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]"] =
            gelman_rubin(chains);
      }
    }
  }
  return out;
}

/// Pearson correlation of the upper-triangle PPIs of two chains, all groups stacked.
inline double ppi_correlation(const ChainOutput& a, const ChainOutput& b) {
  const auto pa = ppi(a);
  const auto pb = ppi(b);
  if (pa.size() != pb.size()) throw ConfigError("ppi_correlation: group count mismatch");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < pa.size(); ++k)
    for (Eigen::Index j = 1; j < pa[k].cols(); ++j)
      for (Eigen::Index i = 0; i < j; ++i) {
        x.push_back(pa[k](i, j));
        y.push_back(pb[k](i, j));
      }
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

/// Smallest pairwise PPI correlation across chains (NaN with fewer than two chains).
inline double min_ppi_correlation(const std::vector<ChainOutput>& outputs) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t a = 0; a < outputs.size(); ++a)
    for (std::size_t b = a + 1; b < outputs.size(); ++b) {
      const double r = ppi_correlation(outputs[a], outputs[b]);
      if (std::isnan(best) || r < best) best = r;
    }
  return best;
}

struct OverlapTable {
  /// Diagonal: edges per group. Off-diagonal: edges shared by the two groups.
  CountMatrix counts;
  /// Edges present in that group and in no other.
  std::vector<std::int64_t> unique;
};

/// Edge overlap between selected graphs, optionally restricted to edges with both
/// endpoints in `subset` (0-based variable indices).
inline OverlapTable edge_overlap_table(const std::vector<Adjacency>& graphs,
                                       const std::optional<std::vector<int>>& subset = std::nullopt) {
  if (graphs.empty()) throw ConfigError("edge_overlap_table: no graphs");
  const Eigen::Index p = graphs.front().rows();
  for (const auto& g : graphs)
    if (g.rows() != p || !is_valid_graph(g)) throw ConfigError("edge_overlap_table: graphs must be symmetric 0/1 of equal size");
  std::vector<Eigen::Index> nodes;
  if (subset) {
    for (int v : *subset) {
      if (v < 0 || v >= p) throw ConfigError("edge_overlap_table: subset index " + std::to_string(v) + " out of range");
      nodes.push_back(v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  } else {
    for (Eigen::Index v = 0; v < p; ++v) nodes.push_back(v);
  }
  const auto k = static_cast<Eigen::Index>(graphs.size());
  OverlapTable t{CountMatrix::Zero(k, k), std::vector<std::int64_t>(graphs.size(), 0)};
  for (std::size_t b = 1; b < nodes.size(); ++b) {
    for (std::size_t a = 0; a < b; ++a) {
      const Eigen::Index i = nodes[a];
      const Eigen::Index j = nodes[b];
      int present = 0;
      for (Eigen::Index g = 0; g < k; ++g) present += graphs[static_cast<std::size_t>(g)](i, j);
      for (Eigen::Index g = 0; g < k; ++g) {
        if (!graphs[static_cast<std::size_t>(g)](i, j)) continue;
        if (present == 1) ++t.unique[static_cast<std::size_t>(g)];
        for (Eigen::Index h = 0; h < k; ++h)
          if (graphs[static_cast<std::size_t>(h)](i, j)) ++t.counts(g, h);
      }
    }
  }
  return t;
}

struct PosteriorSummary {
  std::vector<Matrix> ppi;
  std::vector<Adjacency> selected_graphs;
  Matrix phi_hat;
  std::vector<Matrix> omega_hat;
  std::map<std::string, double> rhat;
  double ppi_correlation = std::numeric_limits<double>::quiet_NaN();
  double threshold = 0.5;
  std::vector<std::string> variables;
};

/// Pools chains, selects the median model, estimates Phi and resamples Omega given both.
/// `resample` supplies the run length and seed of the conditional resampling run.
inline PosteriorSummary summarize(const std::vector<ChainOutput>& outputs, const GroupDataset& data,
                                  const Hyperparameters& hyper, const SamplerConfig& resample,
                                  double threshold = 0.5) {
  PosteriorSummary s;
  s.threshold = threshold;
  s.ppi = ppi(outputs);
  s.selected_graphs = median_model(s.ppi, threshold);
  s.phi_hat = phi_estimate(outputs);
  s.omega_hat = resample_omega(data, s.selected_graphs, s.phi_hat, hyper, resample);
  s.rhat = rhat_table(outputs);
  s.ppi_correlation = min_ppi_correlation(outputs);
  s.variables = data.names();
  return s;
}

}  // namespace linkedggm
