#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "tfim/geometry.hpp"
#include "tfim/rng.hpp"
#include "tfim/stats.hpp"

namespace tfim {

// Bridges, ghosts and cuts on Λ_N × I_r. Edges are the free edges E_N; a
// spatially wired system carries ghost processes G_x of rate λ n_ext(x) on
// boundary sites instead of an extended box.
struct RPRSystem {
  Box box;
  double r = 1.0;
  EdgeSet edges;                   // free mode
  std::vector<int> ghost_mult;     // n_ext(x), zero off the boundary
  bool ghosts = false;

  RPRSystem() = default;
  RPRSystem(const Box& b, double r_, bool with_ghosts);
  std::size_t n_sites() const { return box.size(); }
  double t_lo() const { return -0.5 * r; }
  double t_hi() const { return 0.5 * r; }
};

using Lines = std::vector<std::vector<double>>;  // sorted times per site or per edge

// One labelled piece of a site line. Circle pieces wrap: times below lo are
// read as t + r. Labels: 0 even, 1 odd.
struct LineSegment {
  double lo = 0, hi = 0;
  int start = 0;       // label just after lo
  int end = 0;         // required label just before hi (unused on a full circle)
  bool full_circle = false;
  std::vector<double> pts;  // switching points in (lo, hi), unrolled
};

class Labelling {
 public:
  double r = 1.0;
  std::vector<std::vector<LineSegment>> lines;
  bool consistent = false;
  double even_length = 0;  // ε
  double total_length = 0;

  // label at (site, t); the odd set is closed so switching points read odd.
  // Times inside holes throw.
  int label(std::size_t site, double t) const;
  bool is_even(std::size_t site, double t) const { return label(site, t) == 0; }
  // every point of [a, b] even (a == b allowed)
  bool even_on(std::size_t site, double a, double b) const;
  // Σ over odd pieces, computed independently of even_length
  double odd_length() const;
  // 2δε, or -inf when inconsistent
  double log_weight(double delta) const;

 private:
  const LineSegment* find(std::size_t site, double t, double& u) const;
};

// Per-site switching points S_x and the time boundary condition. For bc p,
// tau[x] labels the line just after -r/2 (equivalent to anchoring at 0, and
// well defined when a source sits at time 0). J removes closed holes; their
// endpoints are labelled even.
Labelling build_labelling(const RPRSystem& sys, const Lines& switching, BC time, const std::vector<int>& tau,
                          const IntervalSet& J = {});

struct BridgeConfig {
  Lines bridges;  // per edge
  Lines ghosts;   // per site, empty without ghosts
};

// Poisson bridges (and ghosts) of rate λ; intensity is zero where either
// endpoint lies in J
BridgeConfig sample_bridges(const RPRSystem& sys, double lambda, Rng& rng, const IntervalSet& J = {},
                            bool with_ghosts = true);

// sources ∪ bridge endpoints ∪ ghost points, per site
Lines switching_points(const RPRSystem& sys, const BridgeConfig& b, const std::vector<STPoint>& A,
                       bool use_ghosts);

void check_sources(const RPRSystem& sys, const std::vector<STPoint>& A);

struct RPROptions {
  std::size_t n_samples = 100000;
  std::size_t n_chains = 8;
  unsigned workers = 1;
  std::uint64_t seed = 1;
};

// E(∂ψ_A)/E(∂ψ_∅) (ghosts when space = w) from two independent pools
struct RatioReport {
  Estimate value, numerator, denominator;
};
RatioReport estimate_rpr_correlation(const std::vector<STPoint>& A, const SpaceTimeRegion& region, double lambda,
                                     double delta, const RPROptions& opt);

// mean of e^{2δ(ε - r|Λ|)} f over the a-priori bridge measure
Estimate rpr_mean(const RPRSystem& sys, double lambda, double delta, BC time, const std::vector<STPoint>& A,
                  bool ghosts, const IntervalSet& J, const std::function<double(const Labelling&)>& f,
                  const RPROptions& opt, std::uint64_t stream_offset = 0);

struct IdentityReport {
  Estimate lhs, rhs;
  double z = 0;
  bool holds = false;  // |lhs - rhs| <= 3 combined SE
  // holes only: rhs times the bridge-removal factor e^{λ|J̃|} (times 2 per periodic
  // line meeting J), which the plain form leaves out
  double factor = 1.0;
  double z_corrected = 0;
  bool holds_corrected = false;
};

// E_{K'}(∂ψ_∅) versus e^{-2δ|J|} E(∂ψ_∅ 1{ψ even in J}); both sides scaled by
// e^{-2δ r|Λ|}
IdentityReport holes_identity_check(const IntervalSet& J, const SpaceTimeRegion& region, double lambda, double delta,
                                    const RPROptions& opt);

// number of extra intervals created by removing J (circle lines when p)
int hole_interval_count(const IntervalSet& J, const SpaceTimeRegion& region);
// |J̃|: edge-time measure with at least one endpoint in J
double tilde_J_length(const IntervalSet& J, const SpaceTimeRegion& region);
double c_J(const IntervalSet& J, const SpaceTimeRegion& region, double lambda, double delta);

struct EventProbabilityReport {
  Estimate lhs;        // P(ψ even in J)
  Estimate rhs;        // c(J) μ^{f,t}[exp(-λ L_J)]
  Estimate rhs_holes;  // Z'(K')/Z(K), segments decoupled across holes
  double cJ = 0;
  double z = 0, z_holes = 0;
  bool holds = false, holds_holes = false;
};
EventProbabilityReport event_probability_identity(const IntervalSet& J, const SpaceTimeRegion& region, double lambda,
                                                  double delta, const RPROptions& opt);

// ---------------------------------------------------------------------------
// coupled measure

// β < ∞: t1 = t2 = p; β = ∞ (region.ground_state): t1 = f, t2 = w
struct CoupledSystem {
  RPRSystem sys;  // ghosts on
  BC t1 = BC::p, t2 = BC::p;
  double lambda = 1, delta = 1;

  CoupledSystem() = default;
  CoupledSystem(const Box& box, double r, bool ground, double lambda, double delta, bool ghosts = true);
  bool circle() const { return t1 == BC::p; }
};

struct CoupledConfiguration {
  const CoupledSystem* cs = nullptr;
  BridgeConfig b1;  // B (ghost lists unused)
  BridgeConfig b2;  // B̂ and G
  std::vector<int> tau1, tau2;
  Lines cuts;       // Δ, per site
  Labelling psi, psi_hat;
  double log_weight = 0;  // 2δ(ε + ε̂ - 2r|Λ|), -inf if inconsistent
};

CoupledConfiguration sample_coupled(const CoupledSystem& cs, const std::vector<STPoint>& A1,
                                    const std::vector<STPoint>& A2, Rng& rng);
// relabel after editing bridges, taus or sources
void relabel(CoupledConfiguration& c, const std::vector<STPoint>& A1, const std::vector<STPoint>& A2);

enum class ConnMode {
  plain,              // ghost jumps allowed, merged through Γ
  off_gamma,          // no ghost jumps at all
  off_gamma_literal,  // only jumps between ghost points of different sites are excluded
};

// Vertices are maximal intervals free of blocking cuts (cuts even in both
// labellings); bridges of B ∪ B̂ merge vertices by union-find.
class ClusterPartition {
 public:
  ClusterPartition(const CoupledConfiguration& c, ConnMode mode);

  struct Vertex {
    std::size_t site;
    double lo, hi;  // unrolled on a circle
    bool ghost = false;
  };

  std::size_t vertex_of(std::size_t site, double t) const;
  std::size_t find(std::size_t v) const;
  bool connected(const STPoint& a, const STPoint& b) const;
  // the class of a holds a ghost point (a path reaches Γ); any mode
  bool to_gamma(const STPoint& a) const;
  bool class_has_ghost(std::size_t v) const;
  std::size_t gamma_node() const { return gamma_; }
  const std::vector<Vertex>& vertices() const { return verts_; }
  const Lines& blocking_cuts() const { return blocking_; }

 private:
  const CoupledConfiguration* c_;
  std::vector<Vertex> verts_;
  std::vector<std::size_t> first_;  // first vertex per site
  Lines blocking_;
  mutable std::vector<std::size_t> parent_;
  std::vector<char> has_ghost_;  // by root, filled after all unions
  std::size_t gamma_ = 0;
  void unite(std::size_t a, std::size_t b);
};

bool connectivity(const CoupledConfiguration& c, const STPoint& a, const STPoint& b, ConnMode mode);
bool connected_to_gamma(const CoupledConfiguration& c, const STPoint& a);

using CoupledEvent = std::function<double(const CoupledConfiguration&)>;

// E(∂ψ_{A1} ∂ψ̂_{A2} f) scaled by e^{-4δ r|Λ|}, plain means over a-priori draws
std::vector<Estimate> coupled_means(const CoupledSystem& cs, const std::vector<STPoint>& A1,
                                    const std::vector<STPoint>& A2, const std::vector<CoupledEvent>& f,
                                    const RPROptions& opt, std::uint64_t stream_offset = 0);
// P̄ of each event, ratio estimator over one pool
std::vector<Estimate> p_bar(const CoupledSystem& cs, const std::vector<CoupledEvent>& events, const RPROptions& opt);

struct SwitchingReport {
  Estimate lhs, rhs;  // E(∂ψ_{0κ}∂ψ̂_∅), E(∂ψ_∅∂ψ̂_{0κ} 1{0↔κ off Γ})
  double z = 0;
  bool holds = false;
};
SwitchingReport verify_switching(const CoupledSystem& cs, const STPoint& kappa, const RPROptions& opt,
                                 ConnMode mode = ConnMode::off_gamma);

struct DifferenceBoundReport {
  Estimate corr_w, corr_f, difference, bound;
  bool lower_holds = false, upper_holds = false;
};
DifferenceBoundReport correlation_difference_bound(const CoupledSystem& cs, const STPoint& kappa,
                                                   const RPROptions& opt);

// closed forms from the local-modification argument
double constant_A(const std::vector<int>& x, double t, double lambda, double delta, double beta);
double constant_B(int N0, double r0, double lambda, double delta, int d);

// K0 = sites × I_{r0} is connected inside itself (paths through bridges,
// intervals and ghost jumps that stay in K0). r0 >= r on a circle means whole
// circle lines.
bool internally_connected(const CoupledConfiguration& c, const std::vector<std::size_t>& sites, double r0);

struct LocalAReport {
  double C = 0;
  Estimate difference;  // ⟨σσ⟩^{w} - ⟨σσ⟩^{f}
  Estimate p_gamma;     // P̄(0 ↔ Γ)
  Estimate lhs_cx, rhs_cx;  // E(∂ψ_∅∂ψ̂_{0κ}1{0↔Γ}) and E(∂ψ_∅∂ψ̂_∅1{0↔Γ})
  bool holds = false, holds_cx = false;
};
LocalAReport local_modification_A(const CoupledSystem& cs, const STPoint& kappa, double beta, const RPROptions& opt);

struct LocalBReport {
  double c = 0;
  Estimate p_event, p_event_and_C;
  bool holds = false;
};
// K0 = sites × I_{r0}; N0 only enters the constant
LocalBReport local_modification_B(const CoupledSystem& cs, const CoupledEvent& event, int N0, double r0,
                                  const std::vector<std::size_t>& sites, const RPROptions& opt);

}  // namespace tfim
