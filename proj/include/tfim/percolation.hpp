#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tfim/random_parity.hpp"

namespace tfim {

// Metropolis chain for one labelling measure: bridges (and ghosts) with
// density e^{2δε} 1{consistent} against the Poisson prior. Moves keep every
// site's parity, so the state stays consistent:
//  - pair birth/death on one process
//  - shift of one point
//  - one point added or removed on every process of a fundamental cycle of
//    the site graph (Γ joins the boundary sites when ghosts are on)
//  - τ flip on one line (bc p)
class LabellingChain {
 public:
  LabellingChain(const RPRSystem& sys, BC time, bool ghosts, double lambda, double delta);

  void step(Rng& rng);
  void sweep(Rng& rng);  // one step per process

  const BridgeConfig& bridges() const { return b_; }
  const std::vector<int>& tau() const { return tau_; }
  const Labelling& labelling() const { return L_; }
  double acceptance() const { return tried_ ? double(accepted_) / double(tried_) : 0.0; }
  std::size_t n_cycles() const { return cycles_.size(); }

 private:
  struct Process {
    bool ghost;
    std::size_t index;  // edge or site
    double rate;
  };
  const RPRSystem* sys_;
  BC time_;
  bool ghosts_;
  double delta_;
  std::vector<Process> procs_;
  std::vector<std::vector<std::size_t>> cycles_;
  BridgeConfig b_;
  std::vector<int> tau_;
  Labelling L_;
  std::size_t tried_ = 0, accepted_ = 0;

  std::vector<double>& points(std::size_t p);
  bool try_accept(Rng& rng, BridgeConfig& nb, std::vector<int>& ntau, double log_q);
};

// P̄ sampler: independent chains for ψ and ψ̂; Δ is drawn fresh per draw since
// it does not enter the weight
class PbarSampler {
 public:
  explicit PbarSampler(const CoupledSystem& cs);
  void sweep(Rng& rng);
  CoupledConfiguration draw(Rng& rng) const;
  const LabellingChain& chain(int i) const { return i == 0 ? c1_ : c2_; }

 private:
  const CoupledSystem* cs_;
  LabellingChain c1_, c2_;
};

struct MCMCOptions {
  std::size_t n_draws = 10000;
  std::size_t burn_in = 200;  // sweeps
  std::size_t thin = 5;       // sweeps between draws
  std::size_t n_chains = 4;
  unsigned workers = 1;
  std::uint64_t seed = 1;
};

// clusters are off-Γ components; "boundary" means a boundary site, a time end
// ±r/2 (interval topology) or a ghost point
struct ClusterReport {
  std::size_t n_clusters = 0;
  std::size_t boundary_touching = 0;
  bool origin_to_ghost = false;
  bool origin_to_boundary = false;  // leaves K(N0, r0)
  double largest_cluster_measure = 0;
  double total_measure = 0;
};
ClusterReport cluster_report(const CoupledConfiguration& c, int N0, double r0);

// P̄(κ ↔ κ') by importance sampling over the a-priori measure
Estimate two_point_connectivity(const CoupledSystem& cs, const STPoint& a, const STPoint& b, const RPROptions& opt,
                                ConnMode mode = ConnMode::off_gamma);

struct ProductReport {
  Estimate p_conn, corr_f, corr_w, product;
  double z = 0;
  bool holds = false;
};
// P̄(a↔b) against ⟨σσ⟩^{f,t1}·⟨σσ⟩^{w,t2}, all from independent pools
ProductReport connectivity_product_identity(const CoupledSystem& cs, const STPoint& a, const STPoint& b,
                                            const RPROptions& opt);

struct TrifurcationCount {
  std::size_t n_trifurcations = 0;
  std::size_t n_boundary_intervals = 0;
  std::size_t n_probes = 0;
  std::size_t n_clipped = 0;
};
// probes at x ∈ (2N0+1)Z^d, t ∈ 2r0 Z; blocks leaving the region are clipped
TrifurcationCount count_trifurcations(const CoupledConfiguration& c, int N0, double r0);
// maximal Δ-free intervals on a boundary site or containing ±r/2
std::size_t boundary_interval_count(const CoupledSystem& cs, const Lines& cuts);

struct TrifurcationReport {
  Estimate n_trifurcations, n_boundary_intervals;
  double leaf_bound = 0;  // 2(2N+1)^d + 4δr(2N+1)^{d-1}
  std::size_t draws = 0, violations = 0, clipped_per_draw = 0, probes_per_draw = 0;
  bool per_config_holds = false, expectation_holds = false;
  double acceptance1 = 0, acceptance2 = 0;
};
TrifurcationReport trifurcation_diagnostic(const CoupledSystem& cs, int N0, double r0, const MCMCOptions& opt);

// P̄(origin ↔ Γ) and mean cluster statistics under the MCMC sampler
struct PercolationPoint {
  Estimate p_origin_ghost, n_clusters, boundary_touching, largest_fraction;
};
PercolationPoint percolation_point(const CoupledSystem& cs, const MCMCOptions& opt);

}  // namespace tfim
