#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace csifb {

/// Purpose tags mixed into derived seeds so that different consumers of the
/// same (trial, user, antenna) coordinate never share a stream.
enum class StreamTag : std::uint64_t {
  Channel = 0x11,
  FeedbackNoise = 0x22,
  Codebook = 0x33,
  TestChannel = 0x44,
  Selftest = 0x55,
};

/// Hash a master seed and a coordinate path into a 64-bit engine seed.
/// Pure function of its arguments; order of the path matters.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// A random stream owning its engine. Streams are cheap to construct and are
/// created per (trial, user, antenna) so that results never depend on how
/// work is scheduled.
class RandomStream {
 public:
  using Engine = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(master, path)) {}

  /// Real standard normal N(0, 1).
  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  /// Circularly-symmetric complex Gaussian CN(0, variance).
  std::complex<double> complex_normal(double variance = 1.0);

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Identifies one Monte Carlo trial; hands out substreams per purpose and
/// coordinate.
struct TrialSeed {
  std::uint64_t master = 0;
  std::uint64_t trial = 0;

  RandomStream stream(StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0) const {
    return RandomStream(master, {static_cast<std::uint64_t>(tag), trial, a, b});
  }
};

}  // namespace csifb
