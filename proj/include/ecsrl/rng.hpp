#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace ecsrl {

// Seeded random stream used everywhere randomness is needed. Wraps a
// mersenne twister but generates floats through a fixed bit recipe so the
// draw sequence is identical across standard libraries, and the whole
// stream state round-trips through checkpoints as text.
class RngStream {
 public:
  RngStream() : engine_(0) {}
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  uint64_t next_bits() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1): strictly positive, used for simplex initialisation.
  double next_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive.
  int next_index(int n) {
    return static_cast<int>(next_double() * static_cast<double>(n));
  }

  // Uniform in [-scale, scale].
  double next_symmetric(double scale) { return (2.0 * next_double() - 1.0) * scale; }

  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void load_state(const std::string& text) {
    std::istringstream is(text);
    is >> engine_;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; mixes a base seed with a stream index so that
// episodes, evaluation pools and sweep cells get independent streams that
// do not depend on how many draws earlier phases consumed.
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
  uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Fixed sub-stream tags.
inline constexpr uint64_t kStreamInit = 1;
inline constexpr uint64_t kStreamEpisode = 2;
inline constexpr uint64_t kStreamEval = 3;
inline constexpr uint64_t kStreamCorpus = 4;
inline constexpr uint64_t kStreamSweep = 5;

}  // namespace ecsrl
