#include "tfim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace tfim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  double u;
  do u = uniform();
  while (u == 0.0);
  return u;
}

double Rng::exponential(double rate) {
  if (!(rate > 0)) throw std::invalid_argument("exponential rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("empty range");
  // rejection on the top of the range keeps it exactly uniform
  const std::uint64_t lim = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do v = eng_();
  while (v >= lim);
  return v % n;
}

std::uint64_t Rng::poisson(double mean) {
  if (mean < 0) throw std::invalid_argument("negative Poisson mean");
  if (mean == 0) return 0;
  if (mean < 30) {
    // inversion
    double p = std::exp(-mean), c = p, u = uniform();
    std::uint64_t k = 0;
    while (u > c && k < 1000) {
      ++k;
      p *= mean / k;
      c += p;
    }
    return k;
  }
  // split large means into independent chunks
  std::uint64_t k = 0;
  while (mean > 0) {
    double m = mean > 20 ? 20 : mean;
    k += poisson(m);
    mean -= m;
  }
  return k;
}

}  // namespace tfim
