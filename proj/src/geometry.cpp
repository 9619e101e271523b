#include "tfim/geometry.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>

namespace tfim {

Box::Box(int d_, int n_, BoxConvention c) : Box(d_, n_, c, false) {}

Box::Box(int d_, int n_, BoxConvention c, bool allow_empty) : d(d_), n(n_), conv(c) {
  if (d < 1) throw std::invalid_argument("box dimension must be positive");
  // n = 0 is the single site {0} (symmetric); Λ_0 of the even-side box is empty
  if (n < 0 || (!allow_empty && conv == BoxConvention::even_side && n < 1))
    throw std::invalid_argument("box half-side out of range");
}

std::size_t Box::size() const {
  std::size_t s = 1;
  for (int j = 0; j < d; ++j) s *= static_cast<std::size_t>(side());
  return s;
}

std::vector<int> Box::coords(std::size_t idx) const {
  std::vector<int> x(d);
  const std::size_t L = side();
  for (int j = 0; j < d; ++j) {
    x[j] = static_cast<int>(idx % L) + lo();
    idx /= L;
  }
  return x;
}

std::size_t Box::index(const std::vector<int>& x) const {
  if (!contains(x)) throw std::out_of_range("point outside box");
  std::size_t idx = 0;
  const std::size_t L = side();
  for (int j = d - 1; j >= 0; --j) idx = idx * L + static_cast<std::size_t>(x[j] - lo());
  return idx;
}

bool Box::contains(const std::vector<int>& x) const {
  if (static_cast<int>(x.size()) != d) return false;
  for (int v : x)
    if (v < lo() || v > hi()) return false;
  return side() > 0;
}

bool Box::on_boundary(std::size_t idx) const {
  if (n == 0) return true;
  Box inner(d, n - 1, conv, true);
  return !inner.contains(coords(idx));
}

std::vector<std::size_t> Box::boundary() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (on_boundary(i)) out.push_back(i);
  return out;
}

int Box::exterior_neighbours(std::size_t idx) const {
  auto x = coords(idx);
  int c = 0;
  for (int j = 0; j < d; ++j) {
    c += (x[j] == lo());
    c += (x[j] == hi());
  }
  return c;
}

EdgeSet::EdgeSet(const Box& b, EdgeMode m) : mode(m), inner(b), outer(b) {
  if (m == EdgeMode::wired) outer = b.with_n(b.n + 1);
  const std::size_t ns = outer.size();
  frozen.assign(ns, 0);
  to_outer.resize(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) to_outer[i] = outer.index(inner.coords(i));
  if (m == EdgeMode::wired)
    for (std::size_t i = 0; i < ns; ++i) frozen[i] = !inner.contains(outer.coords(i));

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < ns; ++i) {
    auto x = outer.coords(i);
    for (int j = 0; j < outer.d; ++j) {
      auto y = x;
      y[j] += 1;
      if (!outer.contains(y)) {
        if (m != EdgeMode::periodic || outer.side() < 2) continue;
        y[j] = outer.lo();  // wrap hi -> lo
      }
      std::size_t k = outer.index(y);
      if (k == i) continue;
      auto key = std::minmax(i, k);
      if (seen.insert(key).second) edges.push_back({key.first, key.second});
    }
  }
}

std::vector<std::vector<std::size_t>> EdgeSet::incident() const {
  std::vector<std::vector<std::size_t>> inc(n_sites());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    inc[edges[e].a].push_back(e);
    inc[edges[e].b].push_back(e);
  }
  return inc;
}

char bc_char(BC b) { return b == BC::f ? 'f' : b == BC::w ? 'w' : 'p'; }

BC parse_bc(char c) {
  switch (c) {
    case 'f': return BC::f;
    case 'w': return BC::w;
    case 'p': return BC::p;
  }
  throw std::invalid_argument(std::string("unknown boundary condition '") + c + "'");
}

SpaceTimeRegion::SpaceTimeRegion(const Box& b, double r_, BC s, BC t) : box(b), r(r_), space(s), time(t) {
  if (!(r > 0) || !std::isfinite(r)) throw std::invalid_argument("time length must be positive and finite");
}

SpaceTimeRegion SpaceTimeRegion::finite(const Box& b, double beta, BC s, BC t) { return {b, beta, s, t}; }

SpaceTimeRegion SpaceTimeRegion::ground(const Box& b, BC s, BC t) {
  if (b.n < 1) throw std::invalid_argument("ground-state region needs N >= 1");
  SpaceTimeRegion R(b, 2.0 * b.n, s, t);
  R.ground_state = true;
  return R;
}

EdgeMode SpaceTimeRegion::edge_mode() const {
  switch (space) {
    case BC::w: return EdgeMode::wired;
    case BC::p: return EdgeMode::periodic;
    default: return EdgeMode::free;
  }
}

std::string SpaceTimeRegion::tag() const { return std::string{bc_char(space), ',', bc_char(time)}; }

double l1_norm(const std::vector<int>& x) {
  double s = 0;
  for (int v : x) s += std::abs(v);
  return s;
}

double l1_norm(const SpaceTimePoint& p) { return l1_norm(p.x) + std::abs(p.t); }

double graph_laplacian_ft(const std::vector<double>& p) {
  constexpr double pi = std::numbers::pi;
  double s = 0;
  for (double v : p) {
    if (!(v > -pi) || v > pi + 1e-12) throw std::domain_error("momentum coordinate outside (-pi, pi]");
    s += 1.0 - std::cos(v);
  }
  return s;
}

DualLattice::DualLattice(const Box& b, double r_, int m_max_) : box(b), r(r_), m_max(m_max_) {
  if (b.conv != BoxConvention::even_side) throw std::invalid_argument("dual lattice needs the even-side box");
  if (m_max < 0) throw std::invalid_argument("negative frequency cutoff");
}

int DualLattice::m_for_cutoff(double r, double l_max) {
  return static_cast<int>(std::floor(l_max * r / (2 * std::numbers::pi) + 1e-9));
}

std::vector<std::vector<double>> DualLattice::momenta() const {
  std::vector<std::vector<double>> out;
  const double s = std::numbers::pi / box.n;
  for (std::size_t i = 0; i < box.size(); ++i) {
    auto x = box.coords(i);
    std::vector<double> k(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) k[j] = s * x[j];
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<double> DualLattice::frequencies(bool include_zero) const {
  std::vector<double> out;
  for (int m = -m_max; m <= m_max; ++m)
    if (m != 0 || include_zero) out.push_back(2 * std::numbers::pi * m / r);
  return out;
}

}  // namespace tfim

namespace tfim {

double total_length(const IntervalSet& J) {
  double s = 0;
  for (const auto& iv : J) s += iv.b - iv.a;
  return s;
}

}  // namespace tfim
