// Structure-learning and estimation metrics plus small-world network summaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace linkedggm {

/// Counts over upper-triangle positions.
struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  [[nodiscard]] std::int64_t total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

namespace detail {

inline void check_same_shape(const Eigen::Index a_rows, const Eigen::Index a_cols, const Eigen::Index b_rows,
                             const Eigen::Index b_cols, const char* what) {
  if (a_rows != b_rows || a_cols != b_cols || a_rows != a_cols)
    throw ConfigError(std::string(what) + ": matrices must be square with equal dimensions");
}

inline void tally(Confusion& c, bool predicted, bool truth) {
  if (predicted && truth) ++c.tp;
  else if (predicted) ++c.fp;
  else if (truth) ++c.fn;
  else ++c.tn;
}

}  // namespace detail

inline Confusion confusion(const Adjacency& estimate, const Adjacency& truth) {
  detail::check_same_shape(estimate.rows(), estimate.cols(), truth.rows(), truth.cols(), "confusion");
  Confusion c;
  for (Eigen::Index j = 1; j < truth.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) detail::tally(c, estimate(i, j) != 0, truth(i, j) != 0);
  return c;
}

/// Sum of per-group confusions.
inline Confusion confusion(const std::vector<Adjacency>& estimate, const std::vector<Adjacency>& truth) {
  if (estimate.size() != truth.size()) throw ConfigError("confusion: group count mismatch");
  Confusion c;
  for (std::size_t k = 0; k < truth.size(); ++k) c += confusion(estimate[k], truth[k]);
  return c;
}

struct Rates {
  double tpr = 0.0;
  double fpr = 0.0;
  double mcc = 0.0;
  /// Set when any denominator was zero and the affected value was reported as 0.
  bool degenerate = false;
};

inline Rates rates_and_mcc(const Confusion& c) {
  Rates r;
  const auto d = [](std::int64_t v) { return static_cast<double>(v); };
  if (c.tp + c.fn > 0) r.tpr = d(c.tp) / d(c.tp + c.fn);
  else r.degenerate = true;
  if (c.fp + c.tn > 0) r.fpr = d(c.fp) / d(c.fp + c.tn);
  else r.degenerate = true;
  const double denom = d(c.tp + c.fp) * d(c.tp + c.fn) * d(c.tn + c.fp) * d(c.tn + c.fn);
  if (denom > 0.0) r.mcc = (d(c.tp) * d(c.tn) - d(c.fp) * d(c.fn)) / std::sqrt(denom);
  else r.degenerate = true;
  return r;
}

/// Mann-Whitney AUC of scored items: probability a positive outscores a negative, ties 1/2.
/// Empty when either class is absent.
inline std::optional<double> roc_auc(std::vector<std::pair<double, bool>> items) {
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double pos = 0, neg = 0, rank_sum = 0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].first == items[i].first) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (items[t].second) {
        pos += 1;
        rank_sum += mid_rank;
      } else {
        neg += 1;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) return std::nullopt;
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

inline std::optional<double> roc_auc(const Matrix& scores, const Adjacency& truth) {
  detail::check_same_shape(scores.rows(), scores.cols(), truth.rows(), truth.cols(), "roc_auc");
  std::vector<std::pair<double, bool>> items;
  for (Eigen::Index j = 1; j < truth.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) items.emplace_back(scores(i, j), truth(i, j) != 0);
  return roc_auc(std::move(items));
}

/// AUC with every group's positions pooled.
inline std::optional<double> roc_auc(const std::vector<Matrix>& scores, const std::vector<Adjacency>& truth) {
  if (scores.size() != truth.size()) throw ConfigError("roc_auc: group count mismatch");
  std::vector<std::pair<double, bool>> items;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    detail::check_same_shape(scores[k].rows(), scores[k].cols(), truth[k].rows(), truth[k].cols(), "roc_auc");
    for (Eigen::Index j = 1; j < truth[k].cols(); ++j)
      for (Eigen::Index i = 0; i < j; ++i) items.emplace_back(scores[k](i, j), truth[k](i, j) != 0);
  }
  return roc_auc(std::move(items));
}

struct DifferentialResult {
  Confusion counts;
  Rates rates;
  std::optional<double> auc;
};

/// Differential edges over all unordered group pairs: truth is g_k != g_l, prediction is
/// selected_k != selected_l, and the AUC score is |ppi_k - ppi_l|. Pass an empty `ppi` to skip AUC.
inline DifferentialResult differential_eval(const std::vector<Adjacency>& selected, const std::vector<Matrix>& ppi,
                                            const std::vector<Adjacency>& truth) {
  if (truth.size() < 2) throw ConfigError("differential_eval: at least two groups are required");
  if (selected.size() != truth.size() || (!ppi.empty() && ppi.size() != truth.size()))
    throw ConfigError("differential_eval: group count mismatch");
  DifferentialResult out;
  std::vector<std::pair<double, bool>> items;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    for (std::size_t l = k + 1; l < truth.size(); ++l) {
      const Eigen::Index p = truth[k].rows();
      detail::check_same_shape(selected[k].rows(), selected[k].cols(), p, p, "differential_eval");
      detail::check_same_shape(selected[l].rows(), selected[l].cols(), p, p, "differential_eval");
      detail::check_same_shape(truth[l].rows(), truth[l].cols(), p, p, "differential_eval");
      for (Eigen::Index j = 1; j < p; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const bool diff_true = (truth[k](i, j) != 0) != (truth[l](i, j) != 0);
          const bool diff_pred = (selected[k](i, j) != 0) != (selected[l](i, j) != 0);
          detail::tally(out.counts, diff_pred, diff_true);
          if (!ppi.empty()) items.emplace_back(std::abs(ppi[k](i, j) - ppi[l](i, j)), diff_true);
        }
      }
    }
  }
  out.rates = rates_and_mcc(out.counts);
  if (!ppi.empty()) out.auc = roc_auc(std::move(items));
  return out;
}

/// (1/K) sum_k ||estimate_k - truth_k||_F^2 / ||truth_k||_F^2.
inline double frobenius_loss(const std::vector<Matrix>& estimate, const std::vector<Matrix>& truth) {
  if (estimate.size() != truth.size() || truth.empty()) throw ConfigError("frobenius_loss: group count mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    detail::check_same_shape(estimate[k].rows(), estimate[k].cols(), truth[k].rows(), truth[k].cols(),
                             "frobenius_loss");
    const double norm = truth[k].squaredNorm();
    if (!(norm > 0.0)) throw ConfigError("frobenius_loss: true precision matrix has zero norm");
    total += (estimate[k] - truth[k]).squaredNorm() / norm;
  }
  return total / static_cast<double>(truth.size());
}

/// Mean local clustering over nodes of degree >= 2 (0 when there are none).
inline double clustering_coefficient(const Adjacency& g) {
  const Eigen::Index p = g.rows();
  double sum = 0.0;
  int counted = 0;
  std::vector<Eigen::Index> nb;
  for (Eigen::Index v = 0; v < p; ++v) {
    nb.clear();
    for (Eigen::Index u = 0; u < p; ++u)
      if (u != v && g(v, u)) nb.push_back(u);
    if (nb.size() < 2) continue;
    std::int64_t links = 0;
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b) links += g(nb[a], nb[b]) != 0;
    const double possible = 0.5 * static_cast<double>(nb.size()) * static_cast<double>(nb.size() - 1);
    sum += static_cast<double>(links) / possible;
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

/// Mean shortest-path length over connected pairs of distinct nodes; NaN if no pair is connected.
inline double characteristic_path_length(const Adjacency& g) {
  const Eigen::Index p = g.rows();
  std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j && g(i, j)) adj[static_cast<std::size_t>(i)].push_back(j);
  double sum = 0.0;
  std::int64_t pairs = 0;
  std::vector<int> dist(static_cast<std::size_t>(p));
  for (Eigen::Index s = 0; s < p; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<Eigen::Index> q;
    dist[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const Eigen::Index v = q.front();
      q.pop();
      for (Eigen::Index u : adj[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(u)] >= 0) continue;
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        q.push(u);
      }
    }
    for (Eigen::Index t = s + 1; t < p; ++t)
      if (dist[static_cast<std::size_t>(t)] > 0) {
        sum += dist[static_cast<std::size_t>(t)];
        ++pairs;
      }
  }
  return pairs == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(pairs);
}

/// Drops nodes with no edges.
inline Adjacency remove_isolated(const Adjacency& g) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    if (g.row(i).any()) keep.push_back(i);
  const auto n = static_cast<Eigen::Index>(keep.size());
  Adjacency out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) out(a, b) = g(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
  return out;
}

/// Uniform graph on n nodes with exactly m edges.
inline Adjacency random_graph(Eigen::Index n, std::int64_t m, Rng& rng) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> slots;
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) slots.emplace_back(i, j);
  if (m < 0 || static_cast<std::size_t>(m) > slots.size()) throw ConfigError("random_graph: infeasible edge count");
  Adjacency g = Adjacency::Zero(n, n);
  for (std::size_t t = 0; t < static_cast<std::size_t>(m); ++t) {
    std::swap(slots[t], slots[t + rng.index(slots.size() - t)]);
    g(slots[t].first, slots[t].second) = g(slots[t].second, slots[t].first) = 1;
  }
  return g;
}

struct GraphMetrics {
  double clustering = std::numeric_limits<double>::quiet_NaN();
  double path_length = std::numeric_limits<double>::quiet_NaN();
  double clustering_random = std::numeric_limits<double>::quiet_NaN();
  double path_length_random = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  /// False for graphs with fewer than three non-isolated nodes or a degenerate baseline.
  bool defined = false;
};

/// gamma = C / C_rand, lambda = L / L_rand, sigma = gamma / lambda, with isolated nodes
/// removed and baselines averaged over `n_random` uniform graphs of the same size.
inline GraphMetrics graph_metrics(const Adjacency& g, int n_random, Rng& rng) {
  if (!is_valid_graph(g)) throw ConfigError("graph_metrics: input is not a symmetric 0/1 graph");
  if (n_random < 1) throw ConfigError("graph_metrics: n_random must be at least 1");
  GraphMetrics out;
  const Adjacency core = remove_isolated(g);
  if (core.rows() < 3) return out;
  out.clustering = clustering_coefficient(core);
  out.path_length = characteristic_path_length(core);
  const std::int64_t m = edge_count(core);
  double c_sum = 0.0, l_sum = 0.0;
  int l_count = 0;
  for (int r = 0; r < n_random; ++r) {
    const Adjacency rg = random_graph(core.rows(), m, rng);
    c_sum += clustering_coefficient(rg);
    const double l = characteristic_path_length(rg);
    if (!std::isnan(l)) {
      l_sum += l;
      ++l_count;
    }
  }
  out.clustering_random = c_sum / n_random;
  if (l_count > 0) out.path_length_random = l_sum / l_count;
  out.gamma = out.clustering / out.clustering_random;
  out.lambda = out.path_length / out.path_length_random;
  out.sigma = out.gamma / out.lambda;
  out.defined = std::isfinite(out.gamma) && std::isfinite(out.lambda) && std::isfinite(out.sigma);
  return out;
}

}  // namespace linkedggm
