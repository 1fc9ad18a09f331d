// Ground-truth generator for multi-group simulation studies: community
// scale-free graphs, cross-group perturbations, precision filling,
// diagonal-dominance adjustment and Gaussian sampling.
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace linkedggm {

struct EdgeChange {
  int i = 0;
  int j = 0;
  bool added = false;
};

/// Edges removed/added when deriving one graph from another.
using Provenance = std::vector<EdgeChange>;

/// Block-diagonal preferential-attachment graph. Each new node attaches
/// `edges_per_node` edges to distinct existing nodes with probability proportional
/// to their degree; with one edge per node every community is a tree.
inline Adjacency scale_free_community_graph(int n_comm, int comm_size, Rng& rng, int edges_per_node = 1) {
  if (n_comm < 1 || comm_size < 2) throw ConfigError("need at least one community of at least two nodes");
  if (edges_per_node < 1) throw ConfigError("edges_per_node must be at least 1");
  const int p = n_comm * comm_size;
  Adjacency g = Adjacency::Zero(p, p);
  for (int c = 0; c < n_comm; ++c) {
    const int base = c * comm_size;
    std::vector<int> degree(static_cast<std::size_t>(comm_size), 0);
    auto link = [&](int a, int b) {
      g(base + a, base + b) = g(base + b, base + a) = 1;
      ++degree[static_cast<std::size_t>(a)];
      ++degree[static_cast<std::size_t>(b)];
    };
    link(0, 1);
    for (int node = 2; node < comm_size; ++node) {
      const int wanted = std::min(edges_per_node, node);
      for (int e = 0; e < wanted; ++e) {
        int total = 0;
        for (int v = 0; v < node; ++v)
          if (!g(base + node, base + v)) total += degree[static_cast<std::size_t>(v)];
        auto pick = static_cast<int>(rng.index(static_cast<std::size_t>(total)));
        for (int v = 0; v < node; ++v) {
          if (g(base + node, base + v)) continue;
          pick -= degree[static_cast<std::size_t>(v)];
          if (pick < 0) {
            link(node, v);
            break;
          }
        }
      }
    }
  }
  return g;
}

namespace detail {

inline std::vector<std::pair<int, int>> positions(const Adjacency& g, int value) {
  std::vector<std::pair<int, int>> out;
  for (int j = 1; j < g.cols(); ++j)
    for (int i = 0; i < j; ++i)
      if (g(i, j) == value) out.emplace_back(i, j);
  return out;
}

/// Uniform sample of `n` elements without replacement (partial Fisher-Yates), in draw order.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t n, Rng& rng) {
  for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  pool.resize(n);
  return pool;
}

}  // namespace detail

/// Removes `n_remove` existing edges and adds `n_add` edges absent from `g`, both uniformly.
inline std::pair<Adjacency, Provenance> perturb_graph(const Adjacency& g, int n_remove, int n_add, Rng& rng) {
  if (!is_valid_graph(g)) throw ConfigError("perturb_graph: input is not a symmetric 0/1 graph");
  const auto present = detail::positions(g, 1);
  const auto absent = detail::positions(g, 0);
  if (n_remove < 0 || n_add < 0 || static_cast<std::size_t>(n_remove) > present.size() ||
      static_cast<std::size_t>(n_add) > absent.size())
    throw ConfigError("perturb_graph: cannot remove " + std::to_string(n_remove) + " of " +
                      std::to_string(present.size()) + " edges and add " + std::to_string(n_add) + " of " +
                      std::to_string(absent.size()) + " non-edges");
  Adjacency out = g;
  Provenance prov;
  for (auto [i, j] : detail::sample_without_replacement(present, static_cast<std::size_t>(n_remove), rng)) {
    out(i, j) = out(j, i) = 0;
    prov.push_back({i, j, false});
  }
  for (auto [i, j] : detail::sample_without_replacement(absent, static_cast<std::size_t>(n_add), rng)) {
    out(i, j) = out(j, i) = 1;
    prov.push_back({i, j, true});
  }
  return {out, prov};
}

inline std::pair<Adjacency, Provenance> remove_edges(const Adjacency& g, int n, Rng& rng) {
  return perturb_graph(g, n, 0, rng);
}

/// Entry uniform on [-0.6, -0.4] U [0.4, 0.6].
inline double draw_edge_weight(Rng& rng) {
  const double magnitude = 0.4 + 0.2 * rng.uniform();
  return rng.bernoulli(0.5) ? magnitude : -magnitude;
}

/// Unit diagonal, edge entries from draw_edge_weight(), zeros elsewhere.
inline Matrix fill_precision(const Adjacency& g, Rng& rng) {
  if (!is_valid_graph(g)) throw ConfigError("fill_precision: input is not a symmetric 0/1 graph");
  Matrix m = Matrix::Identity(g.rows(), g.cols());
  for (Eigen::Index j = 1; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (g(i, j)) m(i, j) = m(j, i) = draw_edge_weight(rng);
  return m;
}

inline constexpr double kDominanceFactor = 1.5;

/// Scales entry (i, j) by 1 / (1.5 * max(s_i, s_j)) with s_i the row's off-diagonal
/// absolute sum, and resets the diagonal to 1. Every row then has off-diagonal
/// absolute sum at most 2/3. Plain row scaling followed by averaging with the
/// transpose does not give this bound: a hub whose neighbours are leaves
/// collects 2/3 from each of them.
inline Matrix pd_adjust(const Matrix& m) {
  if (m.rows() != m.cols() || !is_symmetric(m, 1e-12)) throw ConfigError("pd_adjust: input must be symmetric");
  const Eigen::Index p = m.rows();
  Vector row_sum = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (j != i) row_sum(i) += std::abs(m(i, j));
  Matrix out = Matrix::Identity(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (j != i && m(i, j) != 0.0) out(i, j) = m(i, j) / (kDominanceFactor * std::max(row_sum(i), row_sum(j)));
  if (!is_positive_definite(out)) throw NumericalError("pd_adjust: adjusted matrix is not positive definite");
  return out;
}

/// n i.i.d. rows from N(0, Omega^{-1}): with Omega = L L', x = L^{-T} z.
inline Matrix sample_data(const Matrix& omega, Eigen::Index n, Rng& rng) {
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) throw ConfigError("sample_data: precision matrix is not positive definite");
  const Eigen::Index p = omega.rows();
  Matrix z(p, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < p; ++r) z(r, c) = rng.normal();
  return llt.matrixU().solve(z).transpose();
}

/// How group k+1 is derived from group k.
struct GroupStep {
  int n_remove = 0;
  int n_add = 0;
};

struct ScenarioSpec {
  int n_comm = 5;
  int comm_size = 20;
  int edges_per_node = 1;
  /// One entry per group after the first.
  std::vector<GroupStep> steps{{5, 5}, {20, 0}};
  /// Observations per group; a single value is broadcast.
  std::vector<int> n{150};

  [[nodiscard]] int groups() const { return static_cast<int>(steps.size()) + 1; }
  [[nodiscard]] int variables() const { return n_comm * comm_size; }
  [[nodiscard]] int samples(int k) const {
    return n.size() == 1 ? n.front() : n.at(static_cast<std::size_t>(k));
  }

  void validate() const {
    if (n_comm < 1 || comm_size < 2) throw ConfigError("scenario needs n_comm >= 1 and comm_size >= 2");
    if (n.empty() || (n.size() != 1 && static_cast<int>(n.size()) != groups()))
      throw ConfigError("scenario sample sizes must be one value or one per group");
    for (int v : n)
      if (v < 2) throw ConfigError("scenario sample sizes must be at least 2");
  }

  /// The three-group design: 5 communities of 20, then (remove 5, add 5), then remove 20.
  static ScenarioSpec reference() { return {}; }
  /// The same design at p = 40 with perturbation counts scaled by p/100.
  static ScenarioSpec reduced() {
    ScenarioSpec s;
    s.n_comm = 2;
    s.steps = {{2, 2}, {8, 0}};
    return s;
  }
};

struct SimScenario {
  int groups = 0;
  int variables = 0;
  std::vector<Adjacency> true_graphs;
  std::vector<Matrix> true_omegas;
  std::vector<Matrix> datasets;
  std::uint64_t seed = 0;
  /// provenance[k] lists the changes that produced graph k+1 from graph k.
  std::vector<Provenance> provenance;
};

/// Group 1: fill and adjust. A step with additions zeroes the removed entries of the
/// unadjusted matrix, fills the new edges and re-adjusts; a removal-only step zeroes
/// the removed entries of the previous adjusted matrix without re-adjusting.
inline SimScenario build_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  SimScenario sc;
  sc.groups = spec.groups();
  sc.variables = spec.variables();
  sc.seed = seed;

  Adjacency graph = scale_free_community_graph(spec.n_comm, spec.comm_size, rng, spec.edges_per_node);
  Matrix raw = fill_precision(graph, rng);
  Matrix omega = pd_adjust(raw);
  sc.true_graphs.push_back(graph);
  sc.true_omegas.push_back(omega);

  for (const auto& step : spec.steps) {
    auto [next, prov] = perturb_graph(graph, step.n_remove, step.n_add, rng);
    for (const auto& c : prov) {
      if (c.added) {
        raw(c.i, c.j) = raw(c.j, c.i) = draw_edge_weight(rng);
      } else {
        raw(c.i, c.j) = raw(c.j, c.i) = 0.0;
        omega(c.i, c.j) = omega(c.j, c.i) = 0.0;
      }
    }
    if (step.n_add > 0) omega = pd_adjust(raw);
    if (!is_positive_definite(omega)) throw NumericalError("scenario precision matrix lost positive definiteness");
    graph = next;
    sc.true_graphs.push_back(graph);
    sc.true_omegas.push_back(omega);
    sc.provenance.push_back(std::move(prov));
  }

  for (int k = 0; k < sc.groups; ++k) sc.datasets.push_back(sample_data(sc.true_omegas[static_cast<std::size_t>(k)], spec.samples(k), rng));
  return sc;
}

/// Off-diagonal support of `m` (entries with |m_ij| > tol).
inline Adjacency support(const Matrix& m, double tol = 1e-12) {
  Adjacency g = Adjacency::Zero(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && std::abs(m(i, j)) > tol) g(i, j) = 1;
  return g;
}

}  // namespace linkedggm
