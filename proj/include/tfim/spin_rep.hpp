#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tfim/geometry.hpp"
#include "tfim/rng.hpp"
#include "tfim/stats.hpp"

namespace tfim {

// One site line: value just after -r/2 and the sorted flip times.
// σ(t) = left * (-1)^{#flips in (-r/2, t]}, right-continuous.
struct SpinLine {
  int left = 1;
  std::vector<double> flips;
  int at(double t) const;
};

struct SpinConfiguration {
  SpaceTimeRegion region;
  std::shared_ptr<const EdgeSet> edges;
  std::vector<SpinLine> lines;  // by outer index; frozen lines are +1

  int sigma(std::size_t inner_site, double t) const { return lines[edges->to_outer[inner_site]].at(t); }
  int sigma_outer(std::size_t outer_site, double t) const { return lines[outer_site].at(t); }
  // initial spin (-1)^ξ at time 0
  int initial(std::size_t inner_site) const { return sigma(inner_site, 0.0); }
};

// ∫_a^b σ_u σ_v dt for two lines sharing the carrier starting at lo
double overlap_integral(const SpinLine& u, const SpinLine& v, double lo, double a, double b);

class SpinSampler {
 public:
  SpinSampler(const SpaceTimeRegion& region, double delta, std::size_t max_tries = 1000000);

  SpinConfiguration sample_apriori(Rng& rng) const;
  const SpaceTimeRegion& region() const { return region_; }
  const std::shared_ptr<const EdgeSet>& edges() const { return edges_; }

 private:
  SpaceTimeRegion region_;
  double delta_;
  std::size_t max_tries_;
  std::shared_ptr<const EdgeSet> edges_;
};

// λ Σ_{xy} ∫ σσ over the region's edge set
double log_gibbs_weight(const SpinConfiguration& c, double lambda);
double gibbs_weight(const SpinConfiguration& c, double lambda);
// largest possible log weight, used to keep importance weights ≤ 1
double log_gibbs_weight_max(const SpaceTimeRegion& region, const EdgeSet& edges, double lambda);

// L_J(σ): edge overlap restricted to the edges' times meeting J
double L_J(const SpinConfiguration& c, const IntervalSet& J);

struct SamplingOptions {
  std::size_t n_samples = 100000;
  std::size_t n_chains = 8;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  double min_ess = 100;
};

using SpinObservable = std::function<double(const SpinConfiguration&)>;

// importance sampling against the a-priori measure; one estimator per observable
std::vector<RatioEstimator> importance_chain(const SpaceTimeRegion& region, double lambda, double delta,
                                             const std::vector<SpinObservable>& obs, std::size_t n, Rng& rng);
std::vector<Estimate> importance_estimate(const SpaceTimeRegion& region, double lambda, double delta,
                                          const std::vector<SpinObservable>& obs, const SamplingOptions& opt);

struct SpinEstimate {
  Estimate est;
  bool low_ess = false;  // variance warning
};

SpinObservable product_observable(const std::vector<STPoint>& A);

SpinEstimate estimate_correlation(const std::vector<STPoint>& A, const SpaceTimeRegion& region, double lambda,
                                  double delta, const SamplingOptions& opt);
SpinEstimate estimate_exp_L(const IntervalSet& J, const SpaceTimeRegion& region, double lambda, double delta,
                            const SamplingOptions& opt);
SpinEstimate estimate_magnetization(const SpaceTimeRegion& region, double lambda, double delta,
                                    const SamplingOptions& opt);

}  // namespace tfim
