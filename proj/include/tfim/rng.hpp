#pragma once

#include <cstdint>
#include <random>

namespace tfim {

std::uint64_t splitmix64(std::uint64_t x);

// Per-stream seed: splitmix64(master + (stream + 1) * golden). Stream ids are
// chain indices, so a run is reproducible from (master seed, chain count).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream);

// All variates are built from raw 64-bit draws so results do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t master = 0, std::uint64_t stream = 0) : eng_(stream_seed(master, stream)) {}

  std::uint64_t next() { return eng_(); }
  double uniform();                     // [0, 1), 53 bits
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double uniform_open();                // (0, 1)
  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }
  int coin() { return static_cast<int>(next() >> 63); }
  std::uint64_t below(std::uint64_t n);  // uniform on {0..n-1}
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 eng_;
};

}  // namespace tfim
