#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tfim {

enum class BoxConvention { symmetric, even_side };

// Finite box in Z^d. symmetric: {-n..n}^d, even_side: {-n+1..n}^d.
struct Box {
  int d = 1;
  int n = 1;
  BoxConvention conv = BoxConvention::symmetric;

  Box() = default;
  Box(int d_, int n_, BoxConvention c = BoxConvention::symmetric);

  int lo() const { return conv == BoxConvention::symmetric ? -n : -n + 1; }
  int hi() const { return n; }
  int side() const { return hi() - lo() + 1; }
  std::size_t size() const;

  std::vector<int> coords(std::size_t idx) const;
  std::size_t index(const std::vector<int>& x) const;
  bool contains(const std::vector<int>& x) const;
  std::size_t origin() const { return index(std::vector<int>(d, 0)); }

  // same convention, half-side m
  Box with_n(int m) const { return Box(d, m, conv, true); }

  // x in Λ_n \ Λ_{n-1}
  bool on_boundary(std::size_t idx) const;
  std::vector<std::size_t> boundary() const;
  // number of y in Z^d \ Λ_n adjacent to x
  int exterior_neighbours(std::size_t idx) const;

 private:
  Box(int d_, int n_, BoxConvention c, bool allow_empty);
};

enum class EdgeMode { free, wired, periodic };

struct Edge {
  std::size_t a, b;
};

// Nearest-neighbour edges. In wired mode sites are indexed in the box with
// half-side n+1 and the outer shell is flagged frozen.
struct EdgeSet {
  EdgeMode mode = EdgeMode::free;
  Box inner;
  Box outer;  // equals inner unless wired
  std::vector<Edge> edges;
  std::vector<char> frozen;         // by outer index
  std::vector<std::size_t> to_outer;  // inner index -> outer index

  EdgeSet() = default;
  EdgeSet(const Box& b, EdgeMode m);

  std::size_t n_sites() const { return outer.size(); }
  std::vector<std::vector<std::size_t>> incident() const;
};

enum class BC { f, w, p };
char bc_char(BC b);
BC parse_bc(char c);

struct SpaceTimeRegion {
  Box box;
  double r = 1.0;
  BC space = BC::f;
  BC time = BC::f;
  bool ground_state = false;  // β = ∞ proxy with r = 2N

  SpaceTimeRegion() = default;
  SpaceTimeRegion(const Box& b, double r_, BC s, BC t);

  static SpaceTimeRegion finite(const Box& b, double beta, BC s, BC t);
  static SpaceTimeRegion ground(const Box& b, BC s, BC t);

  bool circle() const { return time == BC::p; }
  double t_lo() const { return -0.5 * r; }
  double t_hi() const { return 0.5 * r; }
  EdgeMode edge_mode() const;
  std::string tag() const;
};

struct SpaceTimePoint {
  std::vector<int> x;
  double t = 0.0;
};

double l1_norm(const std::vector<int>& x);
double l1_norm(const SpaceTimePoint& p);

// Σ_j (1 - cos p_j); coordinates must lie in (-π, π]
double graph_laplacian_ft(const std::vector<double>& p);

struct DualLattice {
  Box box;  // even-side box
  double r = 1.0;
  int m_max = 0;  // |ℓ| ≤ 2π m_max / r

  DualLattice(const Box& b, double r_, int m_max_);
  static int m_for_cutoff(double r, double l_max);

  std::vector<std::vector<double>> momenta() const;  // (π/N) Λ_N
  std::vector<double> frequencies(bool include_zero = true) const;
};

}  // namespace tfim

namespace tfim {

// Space-time point addressed by inner site index.
struct STPoint {
  std::size_t site = 0;
  double t = 0.0;
};

// Closed time interval [a, b] on one site line (inner index).
struct SiteInterval {
  std::size_t site = 0;
  double a = 0.0, b = 0.0;
};

using IntervalSet = std::vector<SiteInterval>;

double total_length(const IntervalSet& J);

}  // namespace tfim
