// Seeded random stream whose full state can be checkpointed.
#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace linkedggm {

/// Thin wrapper over mt19937_64.
///
/// Distribution objects are constructed per call so that no cached variates live
/// outside the engine; serializing the engine therefore captures the stream exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }
  double chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

  [[nodiscard]] std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }
  static Rng deserialize(const std::string& text) {
    Rng rng;
    std::istringstream is(text);
    is >> rng.engine_;
    return rng;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace linkedggm
