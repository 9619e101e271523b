#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tfim/random_parity.hpp"

namespace tfim {

// Bernoulli-slot version of the coupled measure. Each line is cut into M
// cells of length h = r/M; switching points sit on slots (cell boundaries).
// Interval lines use interior slots 1..M-1, circle lines slots 0..M-1.
//  - each edge slot holds nothing, a B bridge or a B̂ bridge (probabilities
//    1-2p, p, p); a shared slot keeps the two processes disjoint as in the
//    continuum
//  - each site slot holds a ghost point with probability p_ghost * n_ext(x)
//  - each cell carries a cut with probability 1 - e^{-4δh}
// A labelling weighs e^{2δh(#even cells - M|Λ|)}.
struct DiscreteSystem {
  CoupledSystem cs;  // geometry, bc pair and δ; cs.lambda is unused
  int M = 3;
  double p_bridge = 0.1;
  double p_ghost = 0.1;

  DiscreteSystem(const Box& box, double r, bool ground, double delta, int M, double p_bridge, double p_ghost);
  double h() const { return cs.sys.r / M; }
  double slot_time(int s) const { return cs.sys.t_lo() + s * h(); }
  int first_slot() const { return cs.circle() ? 0 : 1; }
  int last_slot() const { return M - 1; }
  double cut_probability() const;
};

struct DiscretePoint {
  std::size_t site = 0;
  int slot = 1;
};

struct DiscreteState {
  const DiscreteSystem* sys = nullptr;
  std::vector<std::vector<signed char>> bridge;  // [edge][slot]: 0 none, 1 B, 2 B̂
  std::vector<std::vector<char>> ghost;          // [site][slot]
  std::vector<int> tau1, tau2;
  std::vector<std::vector<char>> lab1, lab2;     // [site][cell], 1 odd
  std::vector<std::vector<char>> cut;            // [site][cell]
  bool consistent = false;
  int even1 = 0, even2 = 0;
  double prior = 0;   // probability of bridges, ghosts and taus
  double weight = 0;  // ∂ψ ∂ψ̂, normalised as in the continuum
};

using DiscreteEvent = std::function<double(const DiscreteState&)>;

enum class CutSum {
  none,      // events ignore cuts
  blocking,  // enumerate cuts on even-even cells only, others marginalised
  all,       // enumerate every cell (brute force)
};

// Σ prior · weight · P(cuts) · f over all configurations, one value per
// event, plus the plain Σ prior · weight in the last slot
std::vector<double> discrete_sums(const DiscreteSystem& sys, const std::vector<DiscretePoint>& A1,
                                  const std::vector<DiscretePoint>& A2, const std::vector<DiscreteEvent>& events,
                                  CutSum cuts);

// connectivity on the slot graph; same modes as the continuum
bool discrete_connected(const DiscreteState& s, const DiscretePoint& a, const DiscretePoint& b, ConnMode mode);
bool discrete_to_gamma(const DiscreteState& s, const DiscretePoint& a);

// the same configuration in continuum form, cuts at cell midpoints
CoupledConfiguration to_continuum(const DiscreteState& s, const std::vector<DiscretePoint>& A1,
                                  const std::vector<DiscretePoint>& A2);
STPoint to_stpoint(const DiscreteSystem& sys, const DiscretePoint& p);

struct DiscreteSwitching {
  double lhs = 0, rhs = 0;  // E(∂ψ_{0κ}∂ψ̂_∅), E(∂ψ_∅∂ψ̂_{0κ} 1{0↔κ})
  double diff() const { return lhs - rhs; }
};
DiscreteSwitching discrete_switching(const DiscreteSystem& sys, const DiscretePoint& o, const DiscretePoint& kappa,
                                     ConnMode mode);

// E(∂ψ_{xy}∂ψ̂_{xy}) against E(∂ψ_∅∂ψ̂_∅ 1{x↔y}). In the continuum the left
// side factorises and gives P̄(x↔y) = ⟨σσ⟩^{f}⟨σσ⟩^{w}; the shared bridge slots
// make the two labellings dependent here, so only this form is exact.
struct DiscreteProduct {
  double both_sources = 0, connected = 0;
  double diff() const { return both_sources - connected; }
};
DiscreteProduct discrete_product(const DiscreteSystem& sys, const DiscretePoint& x, const DiscretePoint& y,
                                 ConnMode mode);

// largest discrepancy between slot-graph and continuum evaluation over all
// configurations: weights, consistency, and connectivity in every mode
struct DiscreteCrossCheck {
  double max_weight_diff = 0;
  std::size_t consistency_mismatch = 0;
  std::size_t connectivity_mismatch = 0;
  std::size_t configurations = 0;
};
DiscreteCrossCheck discrete_cross_check(const DiscreteSystem& sys, const DiscretePoint& a, const DiscretePoint& b);

}  // namespace tfim
