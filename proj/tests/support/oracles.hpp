// Independent numerical oracles used by the unit and acceptance suites.
//
// Nothing in here calls into the sampler: posteriors are integrated on grids
// directly from the unnormalized joint density.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace linkedggm::oracle {

inline double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

/// Trapezoid weights for an increasing, possibly nonuniform grid.
inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

/// Dense near zero (to resolve spike components), coarser further out.
inline std::vector<double> two_scale_grid(double fine_half_width, double fine_step, double half_width,
                                          double coarse_step) {
  std::vector<double> g;
  for (double x = -half_width; x < -fine_half_width; x += coarse_step) g.push_back(x);
  for (double x = -fine_half_width; x <= fine_half_width + 1e-12; x += fine_step) g.push_back(x);
  for (double x = fine_half_width + coarse_step; x <= half_width + 1e-12; x += coarse_step) g.push_back(x);
  return g;
}

/// CDF of the correlation phi in the K = 2 target
/// (1 - phi^2)^{-m/2} exp(-tr(Phi^{-1} S)/2) on a uniform grid over (-0.999, 0.999).
struct GridCdf {
  std::vector<double> x;
  std::vector<double> cdf;

  [[nodiscard]] double operator()(double v) const {
    if (v <= x.front()) return 0.0;
    if (v >= x.back()) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double t = (v - x[i]) / (x[i + 1] - x[i]);
    return cdf[i] + t * (cdf[i + 1] - cdf[i]);
  }
};

inline GridCdf phi_marginal_cdf(const Eigen::Matrix2d& s, double m, int points = 2001) {
  GridCdf out;
  std::vector<double> logd;
  for (int i = 0; i < points; ++i) {
    const double phi = -0.999 + 1.998 * i / (points - 1);
    const double one_minus = 1.0 - phi * phi;
    out.x.push_back(phi);
    logd.push_back(-0.5 * m * std::log(one_minus) -
                   0.5 * (s(0, 0) + s(1, 1) - 2.0 * phi * s(0, 1)) / one_minus);
  }
  const double mx = *std::max_element(logd.begin(), logd.end());
  out.cdf.assign(points, 0.0);
  for (int i = 1; i < points; ++i) {
    const double a = std::exp(logd[i - 1] - mx);
    const double b = std::exp(logd[i] - mx);
    out.cdf[i] = out.cdf[i - 1] + 0.5 * (a + b) * (out.x[i] - out.x[i - 1]);
  }
  for (double& c : out.cdf) c /= out.cdf.back();
  return out;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <typename Cdf>
double ks_distance(std::vector<double> sample, const Cdf& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs((static_cast<double>(i) + 1.0) / n - f), std::abs(static_cast<double>(i) / n - f)});
  }
  return d;
}

/// log of the integral over the diagonal entries (w11, w22) of a 2 x 2 precision matrix
/// with off-diagonal `a`, of likelihood x Exp(lambda/2) priors, restricted to w11 w22 > a^2:
///   (w11 w22 - a^2)^{n/2} exp(-(s11 w11 + s22 w22 + 2 s12 a)/2) (lambda/2)^2 exp(-lambda (w11 + w22)/2).
/// Integrated numerically in log coordinates on a 2-D grid.
class DiagonalMarginal {
 public:
  DiagonalMarginal(const Eigen::Matrix2d& s, double n, double lambda, int points = 241, double half_range = 1.6)
      : s_(s), n_(n), lambda_(lambda) {
    for (int axis = 0; axis < 2; ++axis) {
      const double centre = std::log(n / s(axis, axis));
      std::vector<double> g;
      for (int i = 0; i < points; ++i) g.push_back(centre - half_range + 2.0 * half_range * i / (points - 1));
      log_grid_[axis] = g;
    }
    step_ = 2.0 * half_range / (points - 1);
  }

  [[nodiscard]] double log_value(double a) const {
    std::vector<double> terms;
    terms.reserve(log_grid_[0].size() * log_grid_[1].size());
    const double a2 = a * a;
    for (std::size_t i = 0; i < log_grid_[0].size(); ++i) {
      const double x = std::exp(log_grid_[0][i]);
      for (std::size_t j = 0; j < log_grid_[1].size(); ++j) {
        const double y = std::exp(log_grid_[1][j]);
        const double det = x * y - a2;
        if (det <= 0.0) continue;
        double wt = 1.0;
        if (i == 0 || i + 1 == log_grid_[0].size()) wt *= 0.5;
        if (j == 0 || j + 1 == log_grid_[1].size()) wt *= 0.5;
        terms.push_back(0.5 * n_ * std::log(det) - 0.5 * (s_(0, 0) * x + s_(1, 1) * y + 2.0 * s_(0, 1) * a) -
                        0.5 * lambda_ * (x + y) + std::log(x) + std::log(y) + std::log(wt));
      }
    }
    if (terms.empty()) return -INFINITY;
    return log_sum_exp(terms) + 2.0 * std::log(step_);
  }

 private:
  Eigen::Matrix2d s_;
  double n_;
  double lambda_;
  std::vector<double> log_grid_[2];
  double step_ = 0.0;
};

inline double log_normal(double x, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * x * x / var;
}

struct SingleEdgePosterior {
  double ppi = 0.0;
  double mean_given_edge = 0.0;
};

/// p = 2, K = 1: posterior of (omega_12, g) by quadrature over omega_12 with the
/// diagonal entries integrated numerically.
inline SingleEdgePosterior single_group_edge_posterior(const Eigen::Matrix2d& s, double n, double v0, double v1,
                                                       double lambda, double pi) {
  const DiagonalMarginal diag(s, n, lambda);
  const auto grid = two_scale_grid(6.0 * v0, v0 / 40.0, 3.0, 0.002);
  const auto w = trapezoid_weights(grid);
  std::vector<double> log_edge, log_none, log_edge_pos, log_edge_neg;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = grid[i];
    const double base = diag.log_value(a) + std::log(w[i]);
    const double le = base + log_normal(a, v1 * v1) + std::log(pi);
    const double ln = base + log_normal(a, v0 * v0) + std::log1p(-pi);
    log_edge.push_back(le);
    log_none.push_back(ln);
    if (a > 0) log_edge_pos.push_back(le + std::log(a));
    if (a < 0) log_edge_neg.push_back(le + std::log(-a));
  }
  const double z1 = log_sum_exp(log_edge);
  const double z0 = log_sum_exp(log_none);
  SingleEdgePosterior out;
  out.ppi = 1.0 / (1.0 + std::exp(z0 - z1));
  const double pos = log_edge_pos.empty() ? 0.0 : std::exp(log_sum_exp(log_edge_pos) - z1);
  const double neg = log_edge_neg.empty() ? 0.0 : std::exp(log_sum_exp(log_edge_neg) - z1);
  out.mean_given_edge = pos - neg;
  return out;
}

/// p = 2, K = 2: marginal inclusion probabilities of the single edge in each group,
/// summing over the four graph configurations and integrating over both
/// off-diagonal entries, both groups' diagonals and the correlation phi (uniform prior).
inline std::pair<double, double> two_group_edge_ppi(const Eigen::Matrix2d& s1, double n1, const Eigen::Matrix2d& s2,
                                                    double n2, double v0, double v1, double lambda, double pi) {
  const DiagonalMarginal d1(s1, n1, lambda);
  const DiagonalMarginal d2(s2, n2, lambda);
  const auto grid = two_scale_grid(5.0 * v0, v0 / 12.0, 2.5, 0.005);
  const auto w = trapezoid_weights(grid);
  std::vector<double> f1(grid.size()), f2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f1[i] = d1.log_value(grid[i]) + std::log(w[i]);
    f2[i] = d2.log_value(grid[i]) + std::log(w[i]);
  }
  const double mx1 = *std::max_element(f1.begin(), f1.end());
  const double mx2 = *std::max_element(f2.begin(), f2.end());
  std::vector<double> e1(grid.size()), e2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    e1[i] = std::exp(f1[i] - mx1);
    e2[i] = std::exp(f2[i] - mx2);
  }

  const int phi_points = 199;
  double mass[2][2] = {{0, 0}, {0, 0}};
  for (int g1 = 0; g1 < 2; ++g1) {
    for (int g2 = 0; g2 < 2; ++g2) {
      const double nu1 = g1 ? v1 : v0;
      const double nu2 = g2 ? v1 : v0;
      const double prior = std::pow(pi, g1 + g2) * std::pow(1.0 - pi, 2 - g1 - g2);
      double total = 0.0;
      for (int f = 0; f < phi_points; ++f) {
        const double phi = -0.995 + 1.99 * f / (phi_points - 1);
        const double det = 1.0 - phi * phi;
        const double wphi = (f == 0 || f == phi_points - 1) ? 0.5 : 1.0;
        const double norm = 1.0 / (2.0 * std::numbers::pi * nu1 * nu2 * std::sqrt(det));
        double inner = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (e1[i] < 1e-300) continue;
          const double z1 = grid[i] / nu1;
          for (std::size_t j = 0; j < grid.size(); ++j) {
            const double z2 = grid[j] / nu2;
            const double q = (z1 * z1 - 2.0 * phi * z1 * z2 + z2 * z2) / det;
            inner += e1[i] * e2[j] * std::exp(-0.5 * q);
          }
        }
        total += wphi * norm * inner;
      }
      mass[g1][g2] = prior * total;
    }
  }
  const double z = mass[0][0] + mass[0][1] + mass[1][0] + mass[1][1];
  return {(mass[1][0] + mass[1][1]) / z, (mass[0][1] + mass[1][1]) / z};
}

}  // namespace linkedggm::oracle
