#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "tfim/rng.hpp"

namespace tfim {

// Runs fn(chain, rng) for chain = 0..n_chains-1 on up to `workers` threads.
// Each chain owns stream `chain` of the master seed; results come back in
// chain order so reductions are independent of scheduling.
template <class R, class Fn>
std::vector<R> run_chains(std::size_t n_chains, unsigned workers, std::uint64_t master, Fn fn) {
  std::vector<R> out(n_chains);
  if (workers == 0) workers = 1;
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chains || failed) return;
      try {
        Rng rng(master, c);
        out[c] = fn(c, rng);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
  };
  if (workers == 1 || n_chains <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers && w < n_chains; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

// split n samples over chains as evenly as possible
inline std::size_t chain_share(std::size_t n, std::size_t n_chains, std::size_t c) {
  return n / n_chains + (c < n % n_chains ? 1 : 0);
}

}  // namespace tfim
