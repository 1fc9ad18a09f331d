#include <gtest/gtest.h>

#include <cmath>

#include "brute.hpp"
#include "linkedggm/evalmetrics.hpp"

using namespace linkedggm;

namespace {

Adjacency graph_from_edges(Eigen::Index p, const std::vector<std::pair<int, int>>& edges) {
  Adjacency g = Adjacency::Zero(p, p);
  for (auto [i, j] : edges) g(i, j) = g(j, i) = 1;
  return g;
}

Adjacency complete(Eigen::Index p) {
  Adjacency g = Adjacency::Ones(p, p);
  g.diagonal().setZero();
  return g;
}

Adjacency cycle(int p) {
  Adjacency g = Adjacency::Zero(p, p);
  for (int i = 0; i < p; ++i) g(i, (i + 1) % p) = g((i + 1) % p, i) = 1;
  return g;
}

}  // namespace

TEST(Confusion, PerfectRecoveryTenEdges) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < 9; ++i) e.emplace_back(i, i + 1);
  e.emplace_back(0, 9);
  const auto g = graph_from_edges(10, e);
  const auto c = confusion(g, g);
  EXPECT_EQ(c, (Confusion{10, 0, 35, 0}));
  EXPECT_EQ(c.total(), 45);
}

TEST(Confusion, EmptyEstimate) {
  const auto truth = graph_from_edges(5, {{0, 1}, {2, 3}});
  const auto c = confusion(Adjacency::Zero(5, 5), truth);
  EXPECT_EQ(c.tp, 0);
  EXPECT_EQ(c.fp, 0);
  EXPECT_EQ(c.fn, 2);
  EXPECT_EQ(rates_and_mcc(c).tpr, 0.0);
}

TEST(Confusion, HandCaseOnFiveNodes) {
  // truth: 5 edges; estimate hits 3 of them and adds one false edge
  const auto truth = graph_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  const auto est = graph_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {0, 2}});
  const auto c = confusion(est, truth);
  EXPECT_EQ(c, (Confusion{3, 1, 4, 2}));
  const auto b = brute::confusion(est, truth);
  EXPECT_EQ(c, (Confusion{b.tp, b.fp, b.tn, b.fn}));
}

TEST(Confusion, DimensionMismatchThrows) {
  EXPECT_THROW(confusion(Adjacency::Zero(3, 3), Adjacency::Zero(4, 4)), ConfigError);
}

TEST(Rates, PerfectPredictionHasUnitMcc) {
  const auto r = rates_and_mcc(Confusion{4, 0, 6, 0});
  EXPECT_DOUBLE_EQ(r.mcc, 1.0);
  EXPECT_DOUBLE_EQ(r.tpr, 1.0);
  EXPECT_DOUBLE_EQ(r.fpr, 0.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(Rates, HandMcc) {
  const auto r = rates_and_mcc(Confusion{3, 1, 4, 2});
  EXPECT_NEAR(r.mcc, 10.0 / std::sqrt(600.0), 1e-15);
  EXPECT_NEAR(r.mcc, 0.408, 1e-3);
  EXPECT_DOUBLE_EQ(r.tpr, 0.6);
  EXPECT_DOUBLE_EQ(r.fpr, 0.2);
}

TEST(Rates, DegenerateDenominatorFlagged) {
  const auto r = rates_and_mcc(Confusion{0, 0, 10, 3});
  EXPECT_DOUBLE_EQ(r.mcc, 0.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_DOUBLE_EQ(r.tpr, 0.0);
}

TEST(RocAuc, Examples) {
  const auto truth = graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  EXPECT_DOUBLE_EQ(*roc_auc(truth.cast<double>(), truth), 1.0);
  EXPECT_DOUBLE_EQ(*roc_auc(Matrix::Constant(4, 4, 0.3), truth), 0.5);
  Matrix s = Matrix::Zero(4, 4);
  auto set = [&](int i, int j, double v) { s(i, j) = s(j, i) = v; };
  set(0, 1, 0.9);
  set(1, 2, 0.4);
  set(2, 3, 0.2);
  set(0, 2, 0.5);
  set(0, 3, 0.1);
  set(1, 3, 0.4);
  // pairs: 0.9 beats all 3; 0.4 beats 0.1, ties 0.4, loses 0.5; 0.2 beats 0.1 only
  EXPECT_NEAR(*roc_auc(s, truth), (3.0 + 1.5 + 1.0) / 9.0, 1e-15);
  EXPECT_NEAR(*roc_auc(s, truth), *brute::auc(s, truth), 1e-15);
}

TEST(RocAuc, UndefinedForDegenerateTruth) {
  EXPECT_FALSE(roc_auc(Matrix::Zero(4, 4), Adjacency::Zero(4, 4)).has_value());
  EXPECT_FALSE(roc_auc(Matrix::Zero(4, 4), complete(4)).has_value());
}

TEST(RocAuc, InvariantUnderMonotoneTransforms) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto truth = brute::random_adjacency(7, 0.3, rng);
    const Matrix s = brute::random_scores(7, rng);
    const auto a = roc_auc(s, truth);
    if (!a) continue;
    const Matrix t = (3.0 * s.array().exp() - 2.0).matrix();
    EXPECT_DOUBLE_EQ(*roc_auc(t, truth), *a);
  }
}

TEST(BruteForce, AgreesOnRandomSmallGraphs) {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = static_cast<Eigen::Index>(2 + rng.index(5));
    const auto truth = brute::random_adjacency(p, rng.uniform(), rng);
    const auto est = brute::random_adjacency(p, rng.uniform(), rng);
    const Matrix scores = brute::random_scores(p, rng);
    const auto c = confusion(est, truth);
    const auto b = brute::confusion(est, truth);
    ASSERT_EQ(c, (Confusion{b.tp, b.fp, b.tn, b.fn}));
    EXPECT_NEAR(rates_and_mcc(c).mcc, brute::mcc(est, truth), 1e-12);
    const auto a = roc_auc(scores, truth);
    const auto ba = brute::auc(scores, truth);
    ASSERT_EQ(a.has_value(), ba.has_value());
    if (a) {
      EXPECT_NEAR(*a, *ba, 1e-12);
    }
  }
}

TEST(Differential, IdenticalTruthHasNoPositives) {
  const auto g = graph_from_edges(5, {{0, 1}, {2, 3}});
  const auto r = differential_eval({g, g}, {}, {g, g});
  EXPECT_EQ(r.counts.tp, 0);
  EXPECT_EQ(r.counts.fp, 0);
  EXPECT_EQ(r.counts.fn, 0);
  const auto h = graph_from_edges(5, {{0, 1}});
  EXPECT_EQ(differential_eval({g, h}, {}, {g, g}).counts.fp, 1);
}

TEST(Differential, DetectedFlip) {
  const auto g1 = graph_from_edges(4, {{0, 1}, {1, 2}});
  const auto g2 = graph_from_edges(4, {{0, 1}});
  const auto r = differential_eval({g1, g2}, {g1.cast<double>(), g2.cast<double>()}, {g1, g2});
  EXPECT_EQ(r.counts, (Confusion{1, 0, 5, 0}));
  EXPECT_DOUBLE_EQ(*r.auc, 1.0);
}

TEST(Differential, PoolsAllPairs) {
  Rng rng(12);
  std::vector<Adjacency> truth, est;
  for (int k = 0; k < 3; ++k) {
    truth.push_back(brute::random_adjacency(6, 0.4, rng));
    est.push_back(brute::random_adjacency(6, 0.4, rng));
  }
  Confusion pooled;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = k + 1; l < 3; ++l) {
      Adjacency dt = ((truth[k].array() != truth[l].array())).cast<int>();
      Adjacency de = ((est[k].array() != est[l].array())).cast<int>();
      pooled += confusion(de, dt);
    }
  EXPECT_EQ(differential_eval(est, {}, truth).counts, pooled);
  EXPECT_EQ(pooled.total(), 3 * 15);
  EXPECT_THROW(differential_eval({truth[0]}, {}, {truth[0]}), ConfigError);
}

TEST(FrobeniusLoss, Examples) {
  Matrix t(2, 2);
  t << 2, 0.5, 0.5, 1;
  EXPECT_DOUBLE_EQ(frobenius_loss({t}, {t}), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_loss({Matrix::Zero(2, 2)}, {t}), 1.0);
  // hand case: estimate = identity, error entries (1, 0.5, 0.5, 0) over norm 4 + 0.25 + 0.25 + 1
  EXPECT_NEAR(frobenius_loss({Matrix::Identity(2, 2)}, {t}), 1.5 / 5.5, 1e-15);
  // group average
  EXPECT_NEAR(frobenius_loss({Matrix::Identity(2, 2), t}, {t, t}), 0.5 * 1.5 / 5.5, 1e-15);
  EXPECT_NEAR(frobenius_loss({3.0 * Matrix::Identity(2, 2)}, {3.0 * t}),
              frobenius_loss({Matrix::Identity(2, 2)}, {t}), 1e-15);
  EXPECT_THROW(frobenius_loss({t}, {Matrix::Zero(2, 2)}), ConfigError);
  EXPECT_GT(frobenius_loss({t + 1e-9 * Matrix::Identity(2, 2)}, {t}), 0.0);
}

TEST(GraphTopology, CompleteGraph) {
  EXPECT_DOUBLE_EQ(clustering_coefficient(complete(5)), 1.0);
  EXPECT_DOUBLE_EQ(characteristic_path_length(complete(5)), 1.0);
}

TEST(GraphTopology, FiveCycle) {
  EXPECT_DOUBLE_EQ(clustering_coefficient(cycle(5)), 0.0);
  EXPECT_DOUBLE_EQ(characteristic_path_length(cycle(5)), 1.5);
}

TEST(GraphTopology, DisconnectedPairsAndIsolatedNodes) {
  // two triangles plus an isolated node: only within-component pairs count
  const auto g = graph_from_edges(7, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  EXPECT_DOUBLE_EQ(characteristic_path_length(g), 1.0);
  EXPECT_EQ(remove_isolated(g).rows(), 6);
  EXPECT_TRUE(std::isnan(characteristic_path_length(Adjacency::Zero(3, 3))));
}

TEST(GraphTopology, ClusteringIgnoresLowDegreeNodes) {
  // triangle with a pendant: node 3 has degree 1 and is skipped, node 2 has C = 1/3
  const auto g = graph_from_edges(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
  EXPECT_NEAR(clustering_coefficient(g), (1.0 + 1.0 + 1.0 / 3.0) / 3.0, 1e-15);
}

TEST(GraphTopology, RandomGraphHasRequestedSize) {
  Rng rng(2);
  const auto g = random_graph(10, 12, rng);
  EXPECT_TRUE(is_valid_graph(g));
  EXPECT_EQ(edge_count(g), 12);
  EXPECT_THROW(random_graph(4, 7, rng), ConfigError);
}

TEST(GraphMetrics, SmallWorldLatticeHasSigmaAboveOne) {
  // ring lattice with neighbours at distance 1 and 2 plus a few shortcuts
  const int p = 40;
  Adjacency g = Adjacency::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int d : {1, 2}) g(i, (i + d) % p) = g((i + d) % p, i) = 1;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 20}, {5, 27}, {11, 33}}) g(a, b) = g(b, a) = 1;
  Rng rng(9);
  const auto m = graph_metrics(g, 100, rng);
  ASSERT_TRUE(m.defined);
  EXPECT_GT(m.sigma, 1.0);
  EXPECT_NEAR(m.sigma, m.gamma / m.lambda, 1e-12);
}

TEST(GraphMetrics, UndefinedForTinyGraphs) {
  Rng rng(1);
  EXPECT_FALSE(graph_metrics(graph_from_edges(5, {{0, 1}}), 10, rng).defined);
  EXPECT_FALSE(graph_metrics(Adjacency::Zero(5, 5), 10, rng).defined);
}

TEST(GraphMetrics, SeededBaselineIsDeterministic) {
  const auto g = graph_from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {3, 5}});
  Rng a(4), b(4);
  EXPECT_EQ(graph_metrics(g, 20, a).sigma, graph_metrics(g, 20, b).sigma);
}
