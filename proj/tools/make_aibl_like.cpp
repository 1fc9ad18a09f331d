// Writes the bundled case-study-shaped dataset: K = 4 groups (hpHC, HC, MCI, AD) of
// n = 143/145/148/148 subjects, p = 100 regions in 5 lobes of 20, values in mm of
// cortical thickness. Usage: make_aibl_like <out-dir> [seed]
#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "linkedggm/io.hpp"
#include "linkedggm/simgen.hpp"

using namespace linkedggm;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kLobes{"frontal", "temporal", "parietal", "occipital", "limbic"};
const std::vector<std::string> kGroups{"hpHC", "HC", "MCI", "AD"};
const std::vector<int> kSamples{143, 145, 148, 148};
// (remove, add) relative to the previous group.
const std::vector<GroupStep> kSteps{{2, 2}, {4, 3}, {8, 3}};

// Each diagonal entry exceeds its row's off-diagonal absolute sum by 0.25, which keeps
// the matrix positive definite; then rescaled to unit diagonal.
Matrix dominant_precision(const Matrix& weights) {
  Matrix w = weights;
  w.diagonal().setZero();
  const Vector d = (w.cwiseAbs().rowwise().sum().array() + 0.25).sqrt();
  Matrix omega = w;
  omega.diagonal() = d.array().square();
  return d.cwiseInverse().asDiagonal() * omega * d.cwiseInverse().asDiagonal();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_aibl_like <out-dir> [seed]\n";
    return 2;
  }
  const fs::path out(argv[1]);
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 2016;
  Rng rng(seed);

  std::vector<std::string> names;
  for (const auto& lobe : kLobes)
    for (const char* hemi : {"lh", "rh"})
      for (int i = 1; i <= 10; ++i) names.push_back(lobe + "_" + hemi + (i < 10 ? "_0" : "_") + std::to_string(i));

  // Dense scale-free lobes plus a handful of cross-lobe links.
  Adjacency g = scale_free_community_graph(5, 20, rng, 2);
  for (int e = 0; e < 15;) {
    const auto i = static_cast<Eigen::Index>(rng.index(100)), j = static_cast<Eigen::Index>(rng.index(100));
    if (i / 20 == j / 20 || g(i, j)) continue;
    g(i, j) = g(j, i) = 1;
    ++e;
  }
  Matrix weights = fill_precision(g, rng);

  fs::create_directories(out / "lobes");
  fs::create_directories(out / "truth");
  for (std::size_t l = 0; l < kLobes.size(); ++l) {
    auto f = io::detail::open_out(out / "lobes" / (kLobes[l] + ".txt"));
    for (std::size_t i = 20 * l; i < 20 * (l + 1); ++i) f << names[i] << '\n';
  }

  for (std::size_t k = 0; k < kGroups.size(); ++k) {
    if (k > 0) {
      const auto [next, changes] = perturb_graph(g, kSteps[k - 1].n_remove, kSteps[k - 1].n_add, rng);
      for (const auto& c : changes)
        weights(c.i, c.j) = weights(c.j, c.i) = c.added ? draw_edge_weight(rng) : 0.0;
      g = next;
    }
    const Matrix omega = dominant_precision(weights);
    Matrix x = sample_data(omega, kSamples[k], rng);
    // Region means between 2.2 and 2.8 mm, standard deviation near 0.15 mm.
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      x.col(j) = (x.col(j) * 0.15).array() + 2.2 + 0.012 * static_cast<double>((j * 7) % 50);
    io::write_csv(out / (kGroups[k] + ".csv"), x, names);
    io::write_csv(out / "truth" / (kGroups[k] + ".csv"), g, names);
    std::cerr << kGroups[k] << ": " << edge_count(g) << " edges\n";
  }
  return 0;
}
