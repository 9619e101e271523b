#include "tfim/discrete_rpr.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tfim {

DiscreteSystem::DiscreteSystem(const Box& box, double r, bool ground, double delta, int M_, double pb, double pg)
    : cs(box, r, ground, 1.0, delta, true), M(M_), p_bridge(pb), p_ghost(pg) {
  if (M < 2) throw std::invalid_argument("need at least two cells per line");
  if (!(pb >= 0 && 2 * pb <= 1)) throw std::invalid_argument("bridge slot probability must lie in [0, 1/2]");
  for (std::size_t x = 0; x < box.size(); ++x)
    if (!(pg >= 0 && pg * cs.sys.ghost_mult[x] <= 1)) throw std::invalid_argument("ghost slot probability too large");
}

double DiscreteSystem::cut_probability() const { return 1 - std::exp(-4 * cs.delta * h()); }

STPoint to_stpoint(const DiscreteSystem& sys, const DiscretePoint& p) { return {p.site, sys.slot_time(p.slot)}; }

namespace {

void check_points(const DiscreteSystem& sys, const std::vector<DiscretePoint>& A) {
  for (const auto& p : A)
    if (p.site >= sys.cs.sys.n_sites() || p.slot < 1 || p.slot > sys.M - 1)
      throw std::domain_error("discrete source must sit on an interior slot");
}

// cell labels from per-slot switch parities; returns consistency
bool label_line(const DiscreteSystem& sys, const std::vector<char>& sw, int start, int end, std::vector<char>& lab,
                int& even) {
  const int M = sys.M;
  lab.assign(M, 0);
  int cur = start;
  if (sys.cs.circle()) cur ^= sw[0];
  for (int j = 0; j < M; ++j) {
    if (j > 0) cur ^= sw[j];
    lab[j] = static_cast<char>(cur);
    if (!cur) ++even;
  }
  if (sys.cs.circle()) return cur == start;  // all M slots used once
  return cur == end;
}

void relabel_state(DiscreteState& s, const std::vector<DiscretePoint>& A1, const std::vector<DiscretePoint>& A2) {
  const DiscreteSystem& sys = *s.sys;
  const auto& edges = sys.cs.sys.edges.edges;
  const std::size_t n = sys.cs.sys.n_sites();
  std::vector<std::vector<char>> sw1(n, std::vector<char>(sys.M + 1, 0)), sw2 = sw1;
  for (const auto& p : A1) sw1[p.site][p.slot] ^= 1;
  for (const auto& p : A2) sw2[p.site][p.slot] ^= 1;
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int k = sys.first_slot(); k <= sys.last_slot(); ++k) {
      int b = s.bridge[e][k];
      if (b == 0) continue;
      auto& sw = b == 1 ? sw1 : sw2;
      sw[edges[e].a][k] ^= 1;
      sw[edges[e].b][k] ^= 1;
    }
  for (std::size_t x = 0; x < n; ++x)
    for (int k = sys.first_slot(); k <= sys.last_slot(); ++k)
      if (s.ghost[x][k]) sw2[x][k] ^= 1;
  s.lab1.resize(n);
  s.lab2.resize(n);
  s.even1 = s.even2 = 0;
  bool ok = true;
  const bool circ = sys.cs.circle();
  const int s1 = sys.cs.t1 == BC::w ? 1 : 0, s2 = sys.cs.t2 == BC::w ? 1 : 0;
  for (std::size_t x = 0; x < n; ++x) {
    ok &= label_line(sys, sw1[x], circ ? s.tau1[x] : s1, s1, s.lab1[x], s.even1);
    ok &= label_line(sys, sw2[x], circ ? s.tau2[x] : s2, s2, s.lab2[x], s.even2);
  }
  s.consistent = ok;
  const double ref = 2.0 * sys.M * static_cast<double>(n);
  s.weight = ok ? std::exp(2 * sys.cs.delta * sys.h() * (s.even1 + s.even2 - ref)) : 0.0;
}

// visits every configuration with prior > 0; cut subsets per `cuts`
template <class Visit>
void enumerate(const DiscreteSystem& sys, const std::vector<DiscretePoint>& A1, const std::vector<DiscretePoint>& A2,
               CutSum cuts, bool skip_inconsistent, Visit&& visit) {
  check_points(sys, A1);
  check_points(sys, A2);
  const std::size_t n = sys.cs.sys.n_sites();
  const auto& edges = sys.cs.sys.edges.edges;
  const bool circ = sys.cs.circle();
  const int lo = sys.first_slot(), hi = sys.last_slot();

  struct Var {
    int kind;  // 0 bridge, 1 ghost, 2 tau1, 3 tau2
    std::size_t a;
    int slot;
  };
  std::vector<Var> vars;
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int k = lo; k <= hi; ++k) vars.push_back({0, e, k});
  for (std::size_t x = 0; x < n; ++x)
    if (sys.cs.sys.ghost_mult[x] > 0 && sys.p_ghost > 0)
      for (int k = lo; k <= hi; ++k) vars.push_back({1, x, k});
  if (circ)
    for (std::size_t x = 0; x < n; ++x) {
      vars.push_back({2, x, 0});
      vars.push_back({3, x, 0});
    }

  DiscreteState s;
  s.sys = &sys;
  s.bridge.assign(edges.size(), std::vector<signed char>(sys.M + 1, 0));
  s.ghost.assign(n, std::vector<char>(sys.M + 1, 0));
  s.tau1.assign(n, 0);
  s.tau2.assign(n, 0);
  s.cut.assign(n, std::vector<char>(sys.M, 0));
  const double pc = sys.cut_probability();

  std::vector<int> digit(vars.size(), 0);
  auto radix = [](const Var& v) { return v.kind == 0 ? 3 : 2; };
  for (;;) {
    double prior = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const Var& v = vars[i];
      int d = digit[i];
      switch (v.kind) {
        case 0:
          s.bridge[v.a][v.slot] = static_cast<signed char>(d);
          prior *= d == 0 ? 1 - 2 * sys.p_bridge : sys.p_bridge;
          break;
        case 1: {
          double pg = sys.p_ghost * sys.cs.sys.ghost_mult[v.a];
          s.ghost[v.a][v.slot] = static_cast<char>(d);
          prior *= d ? pg : 1 - pg;
          break;
        }
        case 2:
          s.tau1[v.a] = d;
          prior *= 0.5;
          break;
        default:
          s.tau2[v.a] = d;
          prior *= 0.5;
      }
    }
    s.prior = prior;
    if (prior > 0) {
      relabel_state(s, A1, A2);
      if (s.consistent || !skip_inconsistent) {
        std::vector<std::pair<std::size_t, int>> free_cells;
        for (std::size_t x = 0; x < n; ++x)
          for (int j = 0; j < sys.M; ++j) {
            s.cut[x][j] = 0;
            bool ee = !s.lab1[x][j] && !s.lab2[x][j];
            if (cuts == CutSum::all || (cuts == CutSum::blocking && ee)) free_cells.push_back({x, j});
          }
        const std::size_t k = free_cells.size();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
          double pcut = 1;
          for (std::size_t i = 0; i < k; ++i) {
            bool on = (mask >> i) & 1;
            s.cut[free_cells[i].first][free_cells[i].second] = on;
            pcut *= on ? pc : 1 - pc;
          }
          visit(s, pcut);
        }
      }
    }
    std::size_t i = 0;
    while (i < vars.size() && ++digit[i] == radix(vars[i])) digit[i++] = 0;
    if (i == vars.size()) break;
  }
}

struct SlotGraph {
  std::vector<std::size_t> parent;
  std::vector<char> ghost;
  std::size_t K = 0, gamma = 0;
  std::size_t node(std::size_t x, int slot) const { return x * K + static_cast<std::size_t>(slot) % K; }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

SlotGraph slot_graph(const DiscreteState& s, ConnMode mode) {
  const DiscreteSystem& sys = *s.sys;
  const std::size_t n = sys.cs.sys.n_sites();
  SlotGraph g;
  g.K = sys.cs.circle() ? sys.M : sys.M + 1;
  g.gamma = n * g.K;
  g.parent.resize(g.gamma + 1);
  std::iota(g.parent.begin(), g.parent.end(), std::size_t{0});
  g.ghost.assign(g.gamma + 1, 0);
  for (std::size_t x = 0; x < n; ++x)
    for (int j = 0; j < sys.M; ++j)
      if (!s.cut[x][j] || s.lab1[x][j] || s.lab2[x][j]) g.unite(g.node(x, j), g.node(x, j + 1));  // only even-even cuts block
  const auto& edges = sys.cs.sys.edges.edges;
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int k = sys.first_slot(); k <= sys.last_slot(); ++k)
      if (s.bridge[e][k]) g.unite(g.node(edges[e].a, k), g.node(edges[e].b, k));
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<int> gs;
    for (int k = sys.first_slot(); k <= sys.last_slot(); ++k)
      if (s.ghost[x][k]) gs.push_back(k);
    if (sys.cs.t2 == BC::w) {
      gs.push_back(0);
      gs.push_back(sys.M);
    }
    for (std::size_t i = 0; i < gs.size(); ++i) {
      std::size_t v = g.node(x, gs[i]);
      g.ghost[v] = 1;
      if (mode == ConnMode::plain) g.unite(v, g.gamma);
      if (mode == ConnMode::off_gamma_literal && i > 0) g.unite(g.node(x, gs[i - 1]), v);
    }
  }
  return g;
}

}  // namespace

bool discrete_connected(const DiscreteState& s, const DiscretePoint& a, const DiscretePoint& b, ConnMode mode) {
  SlotGraph g = slot_graph(s, mode);
  return g.find(g.node(a.site, a.slot)) == g.find(g.node(b.site, b.slot));
}

bool discrete_to_gamma(const DiscreteState& s, const DiscretePoint& a) {
  SlotGraph g = slot_graph(s, ConnMode::off_gamma);
  const std::size_t ra = g.find(g.node(a.site, a.slot));
  for (std::size_t v = 0; v < g.gamma; ++v)
    if (g.ghost[v] && g.find(v) == ra) return true;
  return false;
}

std::vector<double> discrete_sums(const DiscreteSystem& sys, const std::vector<DiscretePoint>& A1,
                                  const std::vector<DiscretePoint>& A2, const std::vector<DiscreteEvent>& events,
                                  CutSum cuts) {
  std::vector<long double> acc(events.size() + 1, 0.0L);
  enumerate(sys, A1, A2, cuts, true, [&](const DiscreteState& s, double pcut) {
    const long double w = static_cast<long double>(s.prior) * s.weight * pcut;
    for (std::size_t k = 0; k < events.size(); ++k) acc[k] += w * events[k](s);
    acc.back() += w;
  });
  return {acc.begin(), acc.end()};
}

CoupledConfiguration to_continuum(const DiscreteState& s, const std::vector<DiscretePoint>& A1,
                                  const std::vector<DiscretePoint>& A2) {
  const DiscreteSystem& sys = *s.sys;
  const std::size_t n = sys.cs.sys.n_sites();
  const auto& edges = sys.cs.sys.edges.edges;
  CoupledConfiguration c;
  c.cs = &sys.cs;
  c.b1.bridges.resize(edges.size());
  c.b2.bridges.resize(edges.size());
  c.b1.ghosts.resize(n);
  c.b2.ghosts.resize(n);
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (int k = sys.first_slot(); k <= sys.last_slot(); ++k) {
      if (s.bridge[e][k] == 1) c.b1.bridges[e].push_back(sys.slot_time(k));
      if (s.bridge[e][k] == 2) c.b2.bridges[e].push_back(sys.slot_time(k));
    }
  c.cuts.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (int k = sys.first_slot(); k <= sys.last_slot(); ++k)
      if (s.ghost[x][k]) c.b2.ghosts[x].push_back(sys.slot_time(k));
    for (int j = 0; j < sys.M; ++j)
      if (s.cut[x][j]) c.cuts[x].push_back(sys.slot_time(j) + 0.5 * sys.h());
  }
  c.tau1 = s.tau1;
  c.tau2 = s.tau2;
  std::vector<STPoint> B1, B2;
  for (const auto& p : A1) B1.push_back(to_stpoint(sys, p));
  for (const auto& p : A2) B2.push_back(to_stpoint(sys, p));
  relabel(c, B1, B2);
  return c;
}

DiscreteSwitching discrete_switching(const DiscreteSystem& sys, const DiscretePoint& o, const DiscretePoint& kappa,
                                     ConnMode mode) {
  const std::vector<DiscretePoint> A{o, kappa};
  DiscreteSwitching R;
  R.lhs = discrete_sums(sys, A, {}, {}, CutSum::none).back();
  R.rhs = discrete_sums(sys, {}, A,
                        {[&](const DiscreteState& s) { return discrete_connected(s, o, kappa, mode) ? 1.0 : 0.0; }},
                        CutSum::blocking)[0];
  return R;
}

DiscreteProduct discrete_product(const DiscreteSystem& sys, const DiscretePoint& x, const DiscretePoint& y,
                                 ConnMode mode) {
  const std::vector<DiscretePoint> A{x, y};
  DiscreteProduct R;
  R.both_sources = discrete_sums(sys, A, A, {}, CutSum::none).back();
  R.connected = discrete_sums(sys, {}, {},
                              {[&](const DiscreteState& s) { return discrete_connected(s, x, y, mode) ? 1.0 : 0.0; }},
                              CutSum::blocking)[0];
  return R;
}

DiscreteCrossCheck discrete_cross_check(const DiscreteSystem& sys, const DiscretePoint& a, const DiscretePoint& b) {
  DiscreteCrossCheck R;
  const std::vector<DiscretePoint> A{a, b};
  for (int which = 0; which < 3; ++which) {
    std::vector<DiscretePoint> A1 = which == 1 ? A : std::vector<DiscretePoint>{};
    std::vector<DiscretePoint> A2 = which == 2 ? A : std::vector<DiscretePoint>{};
    enumerate(sys, A1, A2, CutSum::blocking, false, [&](const DiscreteState& s, double) {
      ++R.configurations;
      CoupledConfiguration c = to_continuum(s, A1, A2);
      const bool cc = c.psi.consistent && c.psi_hat.consistent;
      if (cc != s.consistent) {
        ++R.consistency_mismatch;
        return;
      }
      if (!cc) return;
      R.max_weight_diff = std::max(R.max_weight_diff, std::abs(std::exp(c.log_weight) - s.weight));
      const STPoint pa = to_stpoint(sys, a), pb = to_stpoint(sys, b);
      for (ConnMode m : {ConnMode::plain, ConnMode::off_gamma, ConnMode::off_gamma_literal}) {
        ClusterPartition P(c, m);
        if (P.connected(pa, pb) != discrete_connected(s, a, b, m)) ++R.connectivity_mismatch;
      }
      if (connected_to_gamma(c, pa) != discrete_to_gamma(s, a)) ++R.connectivity_mismatch;
    });
  }
  return R;
}

}  // namespace tfim
