#include <gtest/gtest.h>

#include <random>

#include "linkedggm/core.hpp"
#include "linkedggm/rng.hpp"

using namespace linkedggm;

namespace {

Matrix random_correlation(int k, Rng& rng) {
  Matrix a(k, k + 2);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  Matrix c = a * a.transpose();
  const Vector d = c.diagonal().cwiseSqrt().cwiseInverse();
  c = d.asDiagonal() * c * d.asDiagonal();
  c.diagonal().setOnes();
  return c;
}

}  // namespace

TEST(CenterByGroup, SubtractsColumnMeans) {
  Matrix x(2, 2);
  x << 1, 3, 3, 5;
  const auto data = center_by_group({x});
  Matrix expected(2, 2);
  expected << -1, -1, 1, 1;
  EXPECT_TRUE(data.data(0).isApprox(expected, 1e-14));
}

TEST(CenterByGroup, ScatterOfHandExample) {
  Matrix x(2, 2);
  x << -1, -1, 1, 1;
  const auto data = center_by_group({x});
  Matrix expected(2, 2);
  expected << 2, 2, 2, 2;
  EXPECT_TRUE(data.scatter(0).isApprox(expected, 1e-14));
}

TEST(CenterByGroup, IdempotentAndColumnsSumToZero) {
  Rng rng(3);
  std::vector<Matrix> raw;
  for (int k = 0; k < 3; ++k) {
    Matrix x(20 + k, 5);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = 10.0 * rng.normal() + 4.0;
    raw.push_back(x);
  }
  const auto once = center_by_group(raw);
  std::vector<Matrix> centered;
  for (std::size_t k = 0; k < once.groups(); ++k) {
    EXPECT_LT(once.data(k).colwise().sum().cwiseAbs().maxCoeff(), 1e-8);
    centered.push_back(once.data(k));
    EXPECT_TRUE(is_symmetric(once.scatter(k)));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(once.scatter(k));
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-9);
  }
  const auto twice = center_by_group(centered);
  for (std::size_t k = 0; k < once.groups(); ++k)
    EXPECT_LT((twice.data(k) - once.data(k)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CenterByGroup, ScalingGivesUnitSampleVariance) {
  Rng rng(4);
  Matrix x(30, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = (j + 1) * rng.normal();
  const auto data = center_by_group({x}, true);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(data.scatter(0)(j, j) / 29.0, 1.0, 1e-12);
}

TEST(CenterByGroup, RejectsBadInput) {
  EXPECT_THROW(center_by_group({}), ConfigError);
  EXPECT_THROW(center_by_group({Matrix::Ones(3, 2), Matrix::Ones(3, 3)}), ConfigError);
  EXPECT_THROW(center_by_group({Matrix::Ones(3, 1)}), ConfigError);
  EXPECT_THROW(center_by_group({Matrix::Ones(1, 3)}), ConfigError);
  Matrix bad = Matrix::Ones(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(center_by_group({bad}), ConfigError);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(center_by_group({bad}), ConfigError);
}

TEST(DefaultPi, Values) {
  EXPECT_NEAR(default_pi(100), 2.0 / 99.0, 1e-15);
  EXPECT_NEAR(default_pi(100), 0.0202, 1e-4);
  EXPECT_DOUBLE_EQ(default_pi(41), 0.05);
  EXPECT_DOUBLE_EQ(default_pi(3), 1.0 - 1e-6);
  EXPECT_DOUBLE_EQ(default_pi(2), 1.0 - 1e-6);
  EXPECT_THROW(default_pi(1), ConfigError);
}

TEST(Hyperparameters, Validation) {
  EXPECT_NO_THROW(Hyperparameters{}.validate());
  EXPECT_THROW((Hyperparameters{0.1, 0.1, 1.0, 0.1}.validate()), ConfigError);
  EXPECT_THROW((Hyperparameters{0.0, 0.1, 1.0, 0.1}.validate()), ConfigError);
  EXPECT_THROW((Hyperparameters{0.01, 0.1, 0.0, 0.1}.validate()), ConfigError);
  EXPECT_THROW((Hyperparameters{0.01, 0.1, 1.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((Hyperparameters{0.01, 0.1, 1.0, 0.0}.validate()), ConfigError);
}

TEST(ThetaMatrix, IdentityPhiAllSpike) {
  const Hyperparameters h{0.01, 0.1, 1.0, 0.1};
  const Matrix t = theta_matrix({0, 0}, h, Matrix::Identity(2, 2));
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal().setConstant(1e-4);
  EXPECT_TRUE(t.isApprox(expected, 1e-14));
}

TEST(ThetaMatrix, HandComputedMixedCase) {
  const Hyperparameters h{0.01, 0.1, 1.0, 0.1};
  Matrix phi(2, 2);
  phi << 1, 0.5, 0.5, 1;
  const Matrix t = theta_matrix({1, 0}, h, phi);
  Matrix expected(2, 2);
  expected << 0.01, 5e-4, 5e-4, 1e-4;
  EXPECT_LT((t - expected).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(ThetaMatrix, RandomInputsMatchDefinitionAndArePositiveDefinite) {
  Rng rng(11);
  const Hyperparameters h{0.02, 0.3, 1.0, 0.1};
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.index(4));
    const Matrix phi = random_correlation(k, rng);
    std::vector<int> g(static_cast<std::size_t>(k));
    for (auto& v : g) v = rng.bernoulli(0.5) ? 1 : 0;
    const Matrix t = theta_matrix(g, h, phi);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const double na = g[static_cast<std::size_t>(a)] ? h.v1 : h.v0;
        const double nb = g[static_cast<std::size_t>(b)] ? h.v1 : h.v0;
        EXPECT_NEAR(t(a, b), na * phi(a, b) * nb, 1e-15);
      }
    EXPECT_TRUE(is_positive_definite(t));
  }
}

TEST(ThetaMatrix, DimensionMismatchThrows) {
  EXPECT_THROW(theta_matrix({1, 0, 1}, Hyperparameters{}, Matrix::Identity(2, 2)), ConfigError);
}

TEST(Validity, CorrelationAndGraphChecks) {
  Matrix phi(2, 2);
  phi << 1, 0.3, 0.3, 1;
  EXPECT_TRUE(is_correlation_matrix(phi));
  phi(0, 1) = phi(1, 0) = 1.0;
  EXPECT_FALSE(is_correlation_matrix(phi));
  phi << 1.1, 0.3, 0.3, 1;
  EXPECT_FALSE(is_correlation_matrix(phi));

  Adjacency g = Adjacency::Zero(3, 3);
  g(0, 1) = g(1, 0) = 1;
  EXPECT_TRUE(is_valid_graph(g));
  EXPECT_EQ(edge_count(g), 1);
  g(2, 2) = 1;
  EXPECT_FALSE(is_valid_graph(g));
  g(2, 2) = 0;
  g(0, 2) = 1;
  EXPECT_FALSE(is_valid_graph(g));
}

TEST(ChainState, InitialStateSatisfiesInvariants) {
  Rng rng(5);
  Matrix x(10, 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  const auto data = center_by_group({x, x * 2.0});
  const auto state = initial_state(data);
  EXPECT_NO_THROW(check_state(state));
  EXPECT_EQ(state.groups(), 2u);
  EXPECT_TRUE(state.phi.isIdentity());
  ChainState broken = state;
  broken.omega[1](0, 0) = -1.0;
  EXPECT_THROW(check_state(broken), NumericalError);
  broken = state;
  broken.phi(0, 1) = 0.5;  // asymmetric
  EXPECT_THROW(check_state(broken), NumericalError);
}

TEST(ChainOutput, RecordKeepsTalliesWithinBoundsAndMeansSymmetric) {
  ChainOutput out;
  out.reset(1, 3);
  ChainState s;
  s.omega = {Matrix::Identity(3, 3)};
  s.graph = {Adjacency::Zero(3, 3)};
  s.phi = Matrix::Identity(1, 1);
  for (int t = 0; t < 10; ++t) {
    s.graph[0](0, 1) = s.graph[0](1, 0) = t % 2;
    s.omega[0](0, 1) = s.omega[0](1, 0) = 0.1 * t;
    out.record(s);
  }
  EXPECT_EQ(out.n_kept, 10);
  EXPECT_EQ(out.edge_counts[0](0, 1), 5);
  EXPECT_TRUE((out.edge_counts[0].array() >= 0).all() && (out.edge_counts[0].array() <= out.n_kept).all());
  EXPECT_TRUE(is_symmetric(out.omega_mean[0], 1e-15));
  EXPECT_NEAR(out.omega_mean[0](0, 1), 0.45, 1e-12);
  // Welford sum of squares for 0, 0.1, ..., 0.9
  EXPECT_NEAR(out.omega_m2[0](0, 1) / 9.0, 0.091666666666666667, 1e-12);
}

TEST(Rng, SerializeRoundTripContinuesStreamExactly) {
  Rng a(42);
  for (int i = 0; i < 17; ++i) a.normal();
  Rng b = Rng::deserialize(a.serialize());
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.normal(), b.normal());
    EXPECT_EQ(a.gamma(2.5, 1.5), b.gamma(2.5, 1.5));
  }
}

TEST(Rng, GammaUsesRateParameterization) {
  Rng rng(8);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.gamma(3.0, 2.0);
  EXPECT_NEAR(sum / n, 1.5, 0.01);
}
