#include "tfim/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "tfim/parallel.hpp"
#include "tfim/poisson.hpp"

namespace tfim {

namespace {

Labelling label_of(const RPRSystem& sys, const BridgeConfig& b, BC time, const std::vector<int>& tau, bool ghosts) {
  return build_labelling(sys, switching_points(sys, b, {}, ghosts), time, tau);
}

void insert_sorted(std::vector<double>& v, double t) { v.insert(std::upper_bound(v.begin(), v.end(), t), t); }

struct DSU {
  std::vector<std::size_t> p;
  explicit DSU(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), std::size_t{0}); }
  std::size_t find(std::size_t v) {
    while (p[v] != v) v = p[v] = p[p[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) { p[find(a)] = find(b); }
};

int linf(const std::vector<int>& x) {
  int m = 0;
  for (int v : x) m = std::max(m, std::abs(v));
  return m;
}

// mean and SE from per-chain series, 10 batches per chain
Estimate batch_means(const std::vector<std::vector<double>>& series) {
  RunningStats batches;
  double n = 0;
  for (const auto& s : series) {
    n += static_cast<double>(s.size());
    const std::size_t B = std::min<std::size_t>(10, s.size());
    for (std::size_t b = 0; b < B; ++b) {
      std::size_t lo = s.size() * b / B, hi = s.size() * (b + 1) / B;
      double m = 0;
      for (std::size_t i = lo; i < hi; ++i) m += s[i];
      batches.add(m / double(hi - lo));
    }
  }
  Estimate e = batches.estimate();
  e.n = e.n_eff = n;
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------

LabellingChain::LabellingChain(const RPRSystem& sys, BC time, bool ghosts, double lambda, double delta)
    : sys_(&sys), time_(time), ghosts_(ghosts && sys.ghosts), delta_(delta) {
  if (lambda < 0 || delta < 0) throw std::domain_error("rates must be nonnegative");
  const std::size_t n = sys.n_sites(), E = sys.edges.edges.size();
  for (std::size_t e = 0; e < E; ++e) procs_.push_back({false, e, lambda});
  std::vector<std::size_t> ghost_proc(n, SIZE_MAX);
  if (ghosts_)
    for (std::size_t x = 0; x < n; ++x)
      if (sys.ghost_mult[x] > 0) {
        ghost_proc[x] = procs_.size();
        procs_.push_back({true, x, lambda * sys.ghost_mult[x]});
      }
  b_.bridges.resize(E);
  b_.ghosts.resize(n);
  tau_.assign(n, 0);

  // fundamental cycles of sites + Γ
  struct GE {
    std::size_t a, b, proc;
  };
  std::vector<GE> ge;
  for (std::size_t e = 0; e < E; ++e) ge.push_back({sys.edges.edges[e].a, sys.edges.edges[e].b, e});
  for (std::size_t x = 0; x < n; ++x)
    if (ghost_proc[x] != SIZE_MAX) ge.push_back({x, n, ghost_proc[x]});
  std::vector<std::vector<std::size_t>> inc(n + 1);
  for (std::size_t i = 0; i < ge.size(); ++i) {
    inc[ge[i].a].push_back(i);
    inc[ge[i].b].push_back(i);
  }
  std::vector<std::size_t> parent_edge(n + 1, SIZE_MAX), depth(n + 1, 0);
  std::vector<char> seen(n + 1, 0), tree(ge.size(), 0);
  for (std::size_t root = 0; root <= n; ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::queue<std::size_t> q;
    q.push(root);
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t i : inc[u]) {
        std::size_t v = ge[i].a == u ? ge[i].b : ge[i].a;
        if (seen[v]) continue;
        seen[v] = 1;
        tree[i] = 1;
        parent_edge[v] = i;
        depth[v] = depth[u] + 1;
        q.push(v);
      }
    }
  }
  auto up = [&](std::size_t v) {
    const GE& g = ge[parent_edge[v]];
    return g.a == v ? g.b : g.a;
  };
  for (std::size_t i = 0; i < ge.size(); ++i) {
    if (tree[i]) continue;
    std::vector<std::size_t> cyc{ge[i].proc};
    std::size_t u = ge[i].a, v = ge[i].b;
    while (u != v) {
      if (depth[u] >= depth[v]) {
        cyc.push_back(ge[parent_edge[u]].proc);
        u = up(u);
      } else {
        cyc.push_back(ge[parent_edge[v]].proc);
        v = up(v);
      }
    }
    cycles_.push_back(std::move(cyc));
  }
  L_ = label_of(sys, b_, time_, tau_, ghosts_);
  if (!L_.consistent) throw std::logic_error("empty configuration must be consistent");
}

std::vector<double>& LabellingChain::points(std::size_t p) {
  return procs_[p].ghost ? b_.ghosts[procs_[p].index] : b_.bridges[procs_[p].index];
}

bool LabellingChain::try_accept(Rng& rng, BridgeConfig& nb, std::vector<int>& ntau, double log_q) {
  ++tried_;
  if (!std::isfinite(log_q)) return false;
  Labelling nl = label_of(*sys_, nb, time_, ntau, ghosts_);
  if (!nl.consistent) return false;
  const double lr = log_q + 2 * delta_ * (nl.even_length - L_.even_length);
  if (lr < 0 && std::log(rng.uniform_open()) >= lr) return false;
  b_ = std::move(nb);
  tau_ = std::move(ntau);
  L_ = std::move(nl);
  ++accepted_;
  return true;
}

void LabellingChain::step(Rng& rng) {
  if (procs_.empty() && time_ != BC::p) return;
  const double lo = sys_->t_lo(), hi = sys_->t_hi(), T = sys_->r;
  const double u = rng.uniform();
  BridgeConfig nb = b_;
  std::vector<int> ntau = tau_;
  auto pts = [&](std::size_t p) -> std::vector<double>& {
    return procs_[p].ghost ? nb.ghosts[procs_[p].index] : nb.bridges[procs_[p].index];
  };
  const bool has_tau = time_ == BC::p;
  if (has_tau && (u >= 0.9 || procs_.empty())) {
    ntau[rng.below(ntau.size())] ^= 1;
    try_accept(rng, nb, ntau, 0.0);
    return;
  }
  const std::size_t p = rng.below(procs_.size());
  auto& v = pts(p);
  const double mass = procs_[p].rate * T;
  if (u < 0.35) {
    const double n = static_cast<double>(v.size());
    if (rng.coin()) {
      insert_sorted(v, rng.uniform(lo, hi));
      insert_sorted(v, rng.uniform(lo, hi));
      try_accept(rng, nb, ntau, 2 * std::log(mass) - std::log((n + 1) * (n + 2)));
    } else {
      if (v.size() < 2) {
        ++tried_;
        return;
      }
      std::size_t i = rng.below(v.size()), j = rng.below(v.size() - 1);
      if (j >= i) ++j;
      v.erase(v.begin() + std::max(i, j));
      v.erase(v.begin() + std::min(i, j));
      try_accept(rng, nb, ntau, std::log(n * (n - 1)) - 2 * std::log(mass));
    }
  } else if (u < 0.7 || cycles_.empty()) {
    if (v.empty()) {
      ++tried_;
      return;
    }
    v.erase(v.begin() + rng.below(v.size()));
    insert_sorted(v, rng.uniform(lo, hi));
    try_accept(rng, nb, ntau, 0.0);
  } else {
    const auto& cyc = cycles_[rng.below(cycles_.size())];
    double log_q = 0;
    for (std::size_t q : cyc) {
      auto& w = pts(q);
      const double m = procs_[q].rate * T, n = static_cast<double>(w.size());
      if (rng.coin()) {
        insert_sorted(w, rng.uniform(lo, hi));
        log_q += std::log(m / (n + 1));
      } else {
        if (w.empty()) {
          ++tried_;
          return;
        }
        w.erase(w.begin() + rng.below(w.size()));
        log_q += std::log(n / m);
      }
    }
    try_accept(rng, nb, ntau, log_q);
  }
}

void LabellingChain::sweep(Rng& rng) {
  const std::size_t k = std::max<std::size_t>(1, procs_.size() + (time_ == BC::p ? tau_.size() : 0));
  for (std::size_t i = 0; i < k; ++i) step(rng);
}

PbarSampler::PbarSampler(const CoupledSystem& cs)
    : cs_(&cs), c1_(cs.sys, cs.t1, false, cs.lambda, cs.delta), c2_(cs.sys, cs.t2, true, cs.lambda, cs.delta) {}

void PbarSampler::sweep(Rng& rng) {
  c1_.sweep(rng);
  c2_.sweep(rng);
}

CoupledConfiguration PbarSampler::draw(Rng& rng) const {
  CoupledConfiguration c;
  c.cs = cs_;
  c.b1 = c1_.bridges();
  c.b2 = c2_.bridges();
  c.tau1 = c1_.tau();
  c.tau2 = c2_.tau();
  c.psi = c1_.labelling();
  c.psi_hat = c2_.labelling();
  const std::size_t n = cs_->sys.n_sites();
  c.cuts.resize(n);
  for (std::size_t x = 0; x < n; ++x)
    c.cuts[x] = sample_uniform(cs_->sys.t_lo(), cs_->sys.t_hi(), 4 * cs_->delta, rng).pts;
  c.log_weight = 2 * cs_->delta * (c.psi.even_length + c.psi_hat.even_length - 2 * cs_->sys.r * double(n));
  return c;
}

// ---------------------------------------------------------------------------

ClusterReport cluster_report(const CoupledConfiguration& c, int N0, double r0) {
  const CoupledSystem& cs = *c.cs;
  const Box& box = cs.sys.box;
  ClusterPartition P(c, ConnMode::off_gamma);
  const auto& V = P.vertices();
  std::vector<char> bnd(V.size(), 0), root(V.size(), 0), far(V.size(), 0);
  std::vector<double> meas(V.size(), 0);
  ClusterReport R;
  for (std::size_t v = 0; v < V.size(); ++v) {
    const auto& vx = V[v];
    std::size_t r = P.find(v);
    root[r] = 1;
    meas[r] += vx.hi - vx.lo;
    R.total_measure += vx.hi - vx.lo;
    bool b = box.on_boundary(vx.site) || vx.ghost ||
             (!cs.circle() && (vx.lo <= cs.sys.t_lo() || vx.hi >= cs.sys.t_hi()));
    if (b) bnd[r] = 1;
    bool out = vx.ghost || linf(box.coords(vx.site)) > N0 || vx.lo < -0.5 * r0 || vx.hi > 0.5 * r0;
    if (out) far[r] = 1;
  }
  for (std::size_t v = 0; v < V.size(); ++v)
    if (root[v]) {
      ++R.n_clusters;
      if (bnd[v]) ++R.boundary_touching;
      R.largest_cluster_measure = std::max(R.largest_cluster_measure, meas[v]);
    }
  const STPoint o{box.origin(), 0.0};
  const std::size_t ro = P.find(P.vertex_of(o.site, o.t));
  R.origin_to_ghost = P.to_gamma(o);
  R.origin_to_boundary = far[ro] != 0;
  return R;
}

Estimate two_point_connectivity(const CoupledSystem& cs, const STPoint& a, const STPoint& b, const RPROptions& opt,
                                ConnMode mode) {
  return p_bar(cs, {[&](const CoupledConfiguration& c) { return connectivity(c, a, b, mode) ? 1.0 : 0.0; }}, opt)[0];
}

ProductReport connectivity_product_identity(const CoupledSystem& cs, const STPoint& a, const STPoint& b,
                                            const RPROptions& opt) {
  ProductReport R;
  R.p_conn = two_point_connectivity(cs, a, b, opt);
  RPROptions o = opt;
  o.seed = stream_seed(opt.seed, 0x51);
  SpaceTimeRegion rf(cs.sys.box, cs.sys.r, BC::f, cs.t1), rw(cs.sys.box, cs.sys.r, BC::w, cs.t2);
  R.corr_f = estimate_rpr_correlation({a, b}, rf, cs.lambda, cs.delta, o).value;
  o.seed = stream_seed(opt.seed, 0x52);
  R.corr_w = estimate_rpr_correlation({a, b}, rw, cs.lambda, cs.delta, o).value;
  R.product = product_independent(R.corr_f, R.corr_w);
  R.z = z_score(R.p_conn, R.product);
  R.holds = R.z <= 3.0;
  return R;
}

// ---------------------------------------------------------------------------

std::size_t boundary_interval_count(const CoupledSystem& cs, const Lines& cuts) {
  std::size_t n = 0;
  for (std::size_t x = 0; x < cs.sys.n_sites(); ++x) {
    const std::size_t k = cuts[x].size();
    if (cs.sys.box.on_boundary(x))
      n += cs.circle() ? std::max<std::size_t>(k, 1) : k + 1;
    else if (!cs.circle())
      n += k == 0 ? 1 : 2;
  }
  return n;
}

namespace {

// line pieces between breakpoints for one probe
struct Pieces {
  std::vector<std::vector<double>> brk;    // per site, sorted
  std::vector<std::size_t> first;          // first piece per site
  std::vector<double> lo, hi;
  std::vector<std::size_t> site;
  std::size_t piece(std::size_t x, double t) const {
    const auto& b = brk[x];
    std::size_t j = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), t) - b.begin());
    return first[x] + j;
  }
};

}  // namespace

TrifurcationCount count_trifurcations(const CoupledConfiguration& c, int N0, double r0) {
  const CoupledSystem& cs = *c.cs;
  const Box& box = cs.sys.box;
  const std::size_t n = box.size();
  const double tlo = cs.sys.t_lo(), thi = cs.sys.t_hi();
  const bool circ = cs.circle();
  ClusterPartition P(c, ConnMode::off_gamma);
  const Lines& blocking = P.blocking_cuts();
  TrifurcationCount R;
  R.n_boundary_intervals = boundary_interval_count(cs, c.cuts);

  const int step = 2 * N0 + 1;
  std::vector<double> times;
  for (long k = static_cast<long>(std::ceil(tlo / (2 * r0))); 2 * r0 * k <= thi; ++k) {
    const double t = 2 * r0 * k;
    if (circ && t >= thi) break;
    times.push_back(t);
  }
  for (std::size_t x = 0; x < n; ++x) {
    const auto cx = box.coords(x);
    bool on_grid = true;
    for (int v : cx) on_grid &= ((v % step) + step) % step == 0;
    if (!on_grid) continue;
    for (double t : times) {
      ++R.n_probes;
      const double a = t - 0.5 * r0, b = t + 0.5 * r0;
      // block sites, clipped when the block leaves the region
      std::vector<char> in_block(n, 0);
      bool clipped = a < tlo || b > thi;
      for (std::size_t y = 0; y < n && !clipped; ++y) {
        auto cy = box.coords(y);
        int dist = 0;
        for (int i = 0; i < box.d; ++i) dist = std::max(dist, std::abs(cy[i] - cx[i]));
        if (dist <= N0) in_block[y] = 1;
      }
      if (!clipped) {
        std::size_t cnt = std::count(in_block.begin(), in_block.end(), 1);
        if (cnt != std::size_t(std::pow(step, box.d))) clipped = true;
      }
      if (clipped) {
        ++R.n_clipped;
        continue;
      }
      Pieces pc;
      pc.brk.resize(n);
      pc.first.resize(n + 1);
      for (std::size_t y = 0; y < n; ++y) {
        auto& br = pc.brk[y];
        br = blocking[y];
        if (in_block[y]) {
          br.push_back(a);
          br.push_back(b);
        }
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        pc.first[y] = pc.lo.size();
        double s = tlo;
        for (double q : br) {
          pc.lo.push_back(s);
          pc.hi.push_back(q);
          pc.site.push_back(y);
          s = q;
        }
        pc.lo.push_back(s);
        pc.hi.push_back(thi);
        pc.site.push_back(y);
      }
      pc.first[n] = pc.lo.size();
      const std::size_t np = pc.lo.size();
      auto is_block = [&](std::size_t p) { return in_block[pc.site[p]] && pc.lo[p] >= a && pc.hi[p] <= b; };
      DSU out(np), inside(np);
      std::vector<std::size_t> adjacent;
      for (std::size_t y = 0; y < n; ++y) {
        // a block edge is a breakpoint but not a cut: record adjacency
        if (in_block[y]) {
          for (double e : {a, b}) {
            if (std::binary_search(blocking[y].begin(), blocking[y].end(), e)) continue;
            std::size_t pb = pc.piece(y, e);          // piece starting at e
            std::size_t pa = pb - 1;                  // piece ending at e
            std::size_t outer = is_block(pa) ? pb : pa;
            if (outer >= pc.first[y] && outer < pc.first[y + 1]) adjacent.push_back(outer);
          }
        }
        // circle: the first and last piece are one arc
        if (circ && pc.first[y + 1] - pc.first[y] > 1) {
          std::size_t f = pc.first[y], l = pc.first[y + 1] - 1;
          if (!is_block(f) && !is_block(l)) out.unite(f, l);
        }
      }
      for (const BridgeConfig* bc : {&c.b1, &c.b2})
        for (std::size_t e = 0; e < cs.sys.edges.edges.size(); ++e)
          for (double s : bc->bridges[e]) {
            const Edge& E = cs.sys.edges.edges[e];
            std::size_t p1 = pc.piece(E.a, s), p2 = pc.piece(E.b, s);
            bool k1 = is_block(p1), k2 = is_block(p2);
            if (!k1 && !k2) out.unite(p1, p2);
            else if (k1 && k2) inside.unite(p1, p2);
            else adjacent.push_back(k1 ? p2 : p1);
          }
      // (i) the block is connected inside itself
      std::size_t block_root = SIZE_MAX;
      bool connected = true;
      for (std::size_t p = 0; p < np; ++p)
        if (is_block(p)) {
          std::size_t r = inside.find(p);
          if (block_root == SIZE_MAX) block_root = r;
          else if (r != block_root) connected = false;
        }
      if (!connected) continue;
      // (ii) at least three boundary-touching outside components meet it
      std::vector<char> bnd(np, 0);
      for (std::size_t p = 0; p < np; ++p) {
        if (is_block(p)) continue;
        const std::size_t y = pc.site[p];
        bool touch = box.on_boundary(y) || (!circ && (pc.lo[p] <= tlo || pc.hi[p] >= thi));
        if (!touch && !c.b2.ghosts.empty())
          for (double g : c.b2.ghosts[y])
            if (g >= pc.lo[p] && g <= pc.hi[p]) touch = true;
        if (touch) bnd[out.find(p)] = 1;
      }
      std::vector<std::size_t> roots;
      for (std::size_t p : adjacent) {
        std::size_t r = out.find(p);
        if (bnd[r]) roots.push_back(r);
      }
      std::sort(roots.begin(), roots.end());
      roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
      if (roots.size() >= 3) ++R.n_trifurcations;
    }
  }
  return R;
}

TrifurcationReport trifurcation_diagnostic(const CoupledSystem& cs, int N0, double r0, const MCMCOptions& opt) {
  struct Part {
    std::vector<double> trif, bnd;
    std::size_t violations = 0, probes = 0, clipped = 0;
    double acc1 = 0, acc2 = 0;
  };
  const std::size_t nc = std::max<std::size_t>(1, opt.n_chains);
  auto parts = run_chains<Part>(nc, opt.workers, opt.seed, [&](std::size_t ch, Rng& rng) {
    Part P;
    PbarSampler S(cs);
    for (std::size_t i = 0; i < opt.burn_in; ++i) S.sweep(rng);
    for (std::size_t i = 0; i < chain_share(opt.n_draws, nc, ch); ++i) {
      for (std::size_t k = 0; k < std::max<std::size_t>(1, opt.thin); ++k) S.sweep(rng);
      TrifurcationCount t = count_trifurcations(S.draw(rng), N0, r0);
      P.trif.push_back(double(t.n_trifurcations));
      P.bnd.push_back(double(t.n_boundary_intervals));
      if (t.n_trifurcations > t.n_boundary_intervals) ++P.violations;
      P.probes = t.n_probes;
      P.clipped = t.n_clipped;
    }
    P.acc1 = S.chain(0).acceptance();
    P.acc2 = S.chain(1).acceptance();
    return P;
  });
  TrifurcationReport R;
  std::vector<std::vector<double>> tr, bd;
  for (auto& p : parts) {
    tr.push_back(p.trif);
    bd.push_back(p.bnd);
    R.violations += p.violations;
    R.draws += p.trif.size();
    R.probes_per_draw = p.probes;
    R.clipped_per_draw = p.clipped;
    R.acceptance1 += p.acc1 / double(nc);
    R.acceptance2 += p.acc2 / double(nc);
  }
  R.n_trifurcations = batch_means(tr);
  // Δ is drawn afresh for every draw, so these counts are iid
  RunningStats rb;
  for (auto& s : bd)
    for (double v : s) rb.add(v);
  R.n_boundary_intervals = rb.estimate();
  const double side = 2.0 * cs.sys.box.n + 1;
  const int d = cs.sys.box.d;
  R.leaf_bound = 2 * std::pow(side, d) + 4 * cs.delta * cs.sys.r * std::pow(side, d - 1);
  R.per_config_holds = R.violations == 0;
  R.expectation_holds = R.n_boundary_intervals.value <= R.leaf_bound + 3 * R.n_boundary_intervals.se;
  return R;
}

PercolationPoint percolation_point(const CoupledSystem& cs, const MCMCOptions& opt) {
  struct Part {
    std::vector<double> g, nc, bt, lf;
  };
  const std::size_t nch = std::max<std::size_t>(1, opt.n_chains);
  auto parts = run_chains<Part>(nch, opt.workers, opt.seed, [&](std::size_t ch, Rng& rng) {
    Part P;
    PbarSampler S(cs);
    for (std::size_t i = 0; i < opt.burn_in; ++i) S.sweep(rng);
    for (std::size_t i = 0; i < chain_share(opt.n_draws, nch, ch); ++i) {
      for (std::size_t k = 0; k < std::max<std::size_t>(1, opt.thin); ++k) S.sweep(rng);
      ClusterReport c = cluster_report(S.draw(rng), 0, 1.0);
      P.g.push_back(c.origin_to_ghost ? 1.0 : 0.0);
      P.nc.push_back(double(c.n_clusters));
      P.bt.push_back(double(c.boundary_touching));
      P.lf.push_back(c.total_measure > 0 ? c.largest_cluster_measure / c.total_measure : 0.0);
    }
    return P;
  });
  std::vector<std::vector<double>> g, nc, bt, lf;
  for (auto& p : parts) {
    g.push_back(p.g);
    nc.push_back(p.nc);
    bt.push_back(p.bt);
    lf.push_back(p.lf);
  }
  return {batch_means(g), batch_means(nc), batch_means(bt), batch_means(lf)};
}

}  // namespace tfim
