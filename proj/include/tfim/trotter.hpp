#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tfim/geometry.hpp"
#include "tfim/rng.hpp"
#include "tfim/stats.hpp"

namespace tfim {

// Suzuki-Trotter discretisation: a classical Ising model on sites x slices,
// K_t = -1/2 ln tanh(δ dτ) along time, λ dτ across edges. Approximate, with
// O(dτ²) bias; the time step is reported with every estimate.
class TrotterChain {
 public:
  TrotterChain(const SpaceTimeRegion& region, double lambda, double delta, double dtau);

  // heat-bath resampling of every unfrozen site line from its exact
  // conditional law (forward filtering, backward sampling)
  void sweep(Rng& rng);

  int n_slices() const { return M_; }
  double dtau() const { return dt_; }
  int slice_of(double t) const;
  int spin(std::size_t inner_site, int slice) const;
  // E[σ(x,t) | all other lines]; falls back to the raw spin on a time circle
  double conditional_spin(std::size_t inner_site, double t) const;
  const EdgeSet& edges() const { return *edges_; }

 private:
  void resample_line(std::size_t x, Rng& rng);
  void line_fields(std::size_t x, std::vector<double>& h) const;

  SpaceTimeRegion region_;
  double lambda_, delta_;
  int M_;        // number of time bonds
  int rows_;     // stored slices
  double dt_, Kt_, Ks_;
  std::shared_ptr<const EdgeSet> edges_;
  std::vector<std::vector<std::size_t>> nbrs_;
  std::vector<double> row_w_;       // weight of the spatial coupling per slice
  std::vector<std::int8_t> s_;      // site-major spins
};

struct TrotterOptions {
  double dtau = 0.05;
  std::size_t sweeps = 20000;  // per chain, after thermalisation
  std::size_t thermalize = 500;
  std::size_t n_chains = 4;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::size_t n_bins = 20;  // per chain
};

struct TrotterEstimate {
  Estimate est;
  double dtau = 0;
  int n_slices = 0;
};

using TrotterObservable = std::function<double(const TrotterChain&)>;

TrotterEstimate trotter_estimate(const SpaceTimeRegion& region, double lambda, double delta,
                                 const TrotterObservable& obs, const TrotterOptions& opt);
TrotterEstimate trotter_magnetization(const SpaceTimeRegion& region, double lambda, double delta,
                                      const TrotterOptions& opt);
TrotterEstimate trotter_correlation(const std::vector<STPoint>& A, const SpaceTimeRegion& region, double lambda,
                                    double delta, const TrotterOptions& opt);

}  // namespace tfim
