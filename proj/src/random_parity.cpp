#include "tfim/random_parity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tfim/parallel.hpp"
#include "tfim/poisson.hpp"
#include "tfim/spin_rep.hpp"

namespace tfim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Ivs = std::vector<std::pair<double, double>>;

Ivs merge_ivs(Ivs v) {
  std::sort(v.begin(), v.end());
  Ivs out;
  for (auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second)
      out.back().second = std::max(out.back().second, iv.second);
    else
      out.push_back(iv);
  }
  return out;
}

std::vector<Ivs> holes_by_site(const IntervalSet& J, std::size_t n_sites, double lo, double hi) {
  std::vector<Ivs> h(n_sites);
  for (const auto& iv : J) {
    if (iv.site >= n_sites) throw std::out_of_range("hole site outside box");
    if (iv.a > iv.b || iv.a < lo || iv.b > hi) throw std::domain_error("hole must be a closed interval inside I_r");
    h[iv.site].push_back({iv.a, iv.b});
  }
  for (auto& v : h) v = merge_ivs(v);
  return h;
}

bool in_holes(const Ivs& h, double t) {
  for (const auto& iv : h)
    if (t >= iv.first && t <= iv.second) return true;
  return false;
}

int bc_label(BC t) { return t == BC::w ? 1 : 0; }

// even length of a segment, walking its switching points
double segment_even(const LineSegment& s) {
  int lab = s.start;
  double prev = s.lo, e = 0;
  for (double p : s.pts) {
    if (lab == 0) e += p - prev;
    lab ^= 1;
    prev = p;
  }
  if (lab == 0) e += s.hi - prev;
  return e;
}

std::uint64_t pool_master(std::uint64_t seed, std::uint64_t offset) {
  return offset == 0 ? seed : stream_seed(seed, 0x100000 + offset);
}

}  // namespace

RPRSystem::RPRSystem(const Box& b, double r_, bool with_ghosts)
    : box(b), r(r_), edges(b, EdgeMode::free), ghosts(with_ghosts) {
  if (!(r > 0)) throw std::invalid_argument("time length must be positive");
  ghost_mult.assign(b.size(), 0);
  if (with_ghosts)
    for (std::size_t x = 0; x < b.size(); ++x) ghost_mult[x] = b.exterior_neighbours(x);
}

// ---------------------------------------------------------------------------
// labelling

const LineSegment* Labelling::find(std::size_t site, double t, double& u) const {
  if (site >= lines.size()) throw std::out_of_range("site");
  for (const auto& s : lines[site]) {
    for (double cand : {t, t + r}) {
      if (cand >= s.lo && cand <= s.hi) {
        u = cand;
        return &s;
      }
    }
  }
  throw std::domain_error("time lies in a hole of the labelled region");
}

int Labelling::label(std::size_t site, double t) const {
  double u;
  const LineSegment* s = find(site, t, u);
  if (std::binary_search(s->pts.begin(), s->pts.end(), u)) return 1;
  auto c = std::lower_bound(s->pts.begin(), s->pts.end(), u) - s->pts.begin();
  return s->start ^ static_cast<int>(c & 1);
}

bool Labelling::even_on(std::size_t site, double a, double b) const {
  if (b < a) throw std::invalid_argument("interval end before start");
  double u;
  const LineSegment* s = find(site, a, u);
  double v = u + (b - a);
  auto hit = [s](double x, double y) {
    auto it = std::lower_bound(s->pts.begin(), s->pts.end(), x);
    return it != s->pts.end() && *it <= y;
  };
  if (v > s->hi) {
    if (!s->full_circle || v - r > u) throw std::domain_error("interval crosses a hole");
    if (hit(s->lo, v - r)) return false;
  }
  if (hit(u, std::min(v, s->hi))) return false;
  return label(site, a) == 0;
}

double Labelling::odd_length() const {
  double o = 0;
  for (const auto& line : lines)
    for (const auto& s : line) {
      // pieces between consecutive boundaries, odd when the running parity says so
      std::vector<double> cuts{s.lo};
      cuts.insert(cuts.end(), s.pts.begin(), s.pts.end());
      cuts.push_back(s.hi);
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (((s.start + static_cast<int>(i)) & 1) == 1) o += cuts[i + 1] - cuts[i];
    }
  return o;
}

double Labelling::log_weight(double delta) const { return consistent ? 2 * delta * even_length : kNegInf; }

void check_sources(const RPRSystem& sys, const std::vector<STPoint>& A) {
  for (const auto& p : A) {
    if (p.site >= sys.n_sites()) throw std::out_of_range("source site outside box");
    if (!(p.t > sys.t_lo() && p.t < sys.t_hi())) throw std::domain_error("source at or beyond time ±r/2");
  }
}

Labelling build_labelling(const RPRSystem& sys, const Lines& switching, BC time, const std::vector<int>& tau,
                          const IntervalSet& J) {
  const std::size_t n = sys.n_sites();
  const double lo = sys.t_lo(), hi = sys.t_hi(), r = sys.r;
  if (switching.size() != n) throw std::invalid_argument("one switching list per site");
  if (time == BC::p && tau.size() != n) throw std::invalid_argument("bc p needs tau per site");
  auto holes = holes_by_site(J, n, lo, hi);
  Labelling L;
  L.r = r;
  L.lines.resize(n);
  L.consistent = true;
  for (std::size_t x = 0; x < n; ++x) {
    const Ivs& h = holes[x];
    std::vector<double> pts;
    for (double t : switching[x])
      if (!in_holes(h, t)) pts.push_back(t);
    std::sort(pts.begin(), pts.end());
    auto& segs = L.lines[x];
    auto take = [&](double a, double b) {
      std::vector<double> out;
      for (double t : pts) {
        double u = t < a ? t + r : t;
        if (u > a && u < b) out.push_back(u);
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    if (h.empty()) {
      LineSegment s;
      s.lo = lo;
      s.hi = hi;
      s.pts = pts;
      if (time == BC::p) {
        s.full_circle = true;
        s.start = s.end = tau[x] & 1;
      } else {
        s.start = s.end = bc_label(time);
      }
      segs.push_back(std::move(s));
    } else if (time == BC::p) {
      // arcs between consecutive holes on the circle, both ends even
      for (std::size_t i = 0; i < h.size(); ++i) {
        double a = h[i].second;
        double b = i + 1 < h.size() ? h[i + 1].first : h[0].first + r;
        if (b - a <= 0) continue;
        LineSegment s;
        s.lo = a;
        s.hi = b;
        s.start = s.end = 0;
        s.pts = take(a, b);
        segs.push_back(std::move(s));
      }
    } else {
      double cur = lo;
      int cur_label = bc_label(time);
      for (const auto& iv : h) {
        if (iv.first > cur) {
          LineSegment s;
          s.lo = cur;
          s.hi = iv.first;
          s.start = cur_label;
          s.end = 0;
          s.pts = take(cur, iv.first);
          segs.push_back(std::move(s));
        }
        cur = iv.second;
        cur_label = 0;
      }
      if (cur < hi) {
        LineSegment s;
        s.lo = cur;
        s.hi = hi;
        s.start = cur_label;
        s.end = bc_label(time);
        s.pts = take(cur, hi);
        segs.push_back(std::move(s));
      }
    }
    for (const auto& s : segs) {
      if (static_cast<int>(s.pts.size() & 1) != (s.start ^ s.end)) L.consistent = false;
      L.even_length += segment_even(s);
      L.total_length += s.hi - s.lo;
    }
  }
  return L;
}

BridgeConfig sample_bridges(const RPRSystem& sys, double lambda, Rng& rng, const IntervalSet& J, bool with_ghosts) {
  auto holes = holes_by_site(J, sys.n_sites(), sys.t_lo(), sys.t_hi());
  BridgeConfig b;
  b.bridges.resize(sys.edges.edges.size());
  for (std::size_t e = 0; e < sys.edges.edges.size(); ++e) {
    const Edge& E = sys.edges.edges[e];
    PointSet P = sample_uniform(sys.t_lo(), sys.t_hi(), lambda, rng);
    for (double t : P.pts)
      if (!in_holes(holes[E.a], t) && !in_holes(holes[E.b], t)) b.bridges[e].push_back(t);
  }
  b.ghosts.resize(sys.n_sites());
  if (with_ghosts && sys.ghosts)
    for (std::size_t x = 0; x < sys.n_sites(); ++x) {
      if (sys.ghost_mult[x] == 0) continue;
      PointSet P = sample_uniform(sys.t_lo(), sys.t_hi(), lambda * sys.ghost_mult[x], rng);
      for (double t : P.pts)
        if (!in_holes(holes[x], t)) b.ghosts[x].push_back(t);
    }
  return b;
}

Lines switching_points(const RPRSystem& sys, const BridgeConfig& b, const std::vector<STPoint>& A, bool use_ghosts) {
  Lines S(sys.n_sites());
  for (const auto& p : A) S[p.site].push_back(p.t);
  for (std::size_t e = 0; e < sys.edges.edges.size(); ++e)
    for (double t : b.bridges[e]) {
      S[sys.edges.edges[e].a].push_back(t);
      S[sys.edges.edges[e].b].push_back(t);
    }
  if (use_ghosts && !b.ghosts.empty())
    for (std::size_t x = 0; x < S.size(); ++x) S[x].insert(S[x].end(), b.ghosts[x].begin(), b.ghosts[x].end());
  for (auto& s : S) std::sort(s.begin(), s.end());
  return S;
}

// ---------------------------------------------------------------------------
// single-labelling estimators

Estimate rpr_mean(const RPRSystem& sys, double lambda, double delta, BC time, const std::vector<STPoint>& A,
                  bool ghosts, const IntervalSet& J, const std::function<double(const Labelling&)>& f,
                  const RPROptions& opt, std::uint64_t stream_offset) {
  const std::size_t nc = std::max<std::size_t>(1, opt.n_chains);
  const double ref = sys.r * static_cast<double>(sys.n_sites());
  auto parts = run_chains<RunningStats>(nc, opt.workers, pool_master(opt.seed, stream_offset),
                                        [&](std::size_t c, Rng& rng) {
                                          RunningStats st;
                                          std::vector<int> tau(sys.n_sites(), 0);
                                          const std::size_t m = chain_share(opt.n_samples, nc, c);
                                          for (std::size_t i = 0; i < m; ++i) {
                                            BridgeConfig b = sample_bridges(sys, lambda, rng, J, ghosts);
                                            if (time == BC::p)
                                              for (auto& v : tau) v = rng.coin();
                                            Labelling L = build_labelling(
                                                sys, switching_points(sys, b, A, ghosts), time, tau, J);
                                            if (!L.consistent) {
                                              st.add(0.0);
                                              continue;
                                            }
                                            double w = std::exp(2 * delta * (L.even_length - ref));
                                            st.add(w * f(L));
                                          }
                                          return st;
                                        });
  RunningStats tot;
  for (auto& p : parts) tot.merge(p);
  return tot.estimate();
}

namespace {

RPRSystem system_for(const SpaceTimeRegion& region) {
  if (region.space == BC::p) throw std::invalid_argument("random-parity representation needs spatial bc f or w");
  return RPRSystem(region.box, region.r, region.space == BC::w);
}

IdentityReport compare(const Estimate& a, const Estimate& b) {
  IdentityReport R;
  R.lhs = a;
  R.rhs = b;
  R.z = z_score(a, b);
  R.holds = R.z <= 3.0;
  return R;
}

Estimate scaled(Estimate e, double c) {
  e.value *= c;
  e.se *= c;
  return e;
}

}  // namespace

RatioReport estimate_rpr_correlation(const std::vector<STPoint>& A, const SpaceTimeRegion& region, double lambda,
                                     double delta, const RPROptions& opt) {
  RPRSystem sys = system_for(region);
  check_sources(sys, A);
  RatioReport R;
  if (A.empty()) {
    R.value = {1.0, 0.0, static_cast<double>(opt.n_samples), static_cast<double>(opt.n_samples)};
    return R;
  }
  auto one = [](const Labelling&) { return 1.0; };
  R.numerator = rpr_mean(sys, lambda, delta, region.time, A, sys.ghosts, {}, one, opt, 0);
  R.denominator = rpr_mean(sys, lambda, delta, region.time, {}, sys.ghosts, {}, one, opt, 1);
  if (R.denominator.value <= 0) throw std::runtime_error("no consistent configuration in the denominator pool");
  R.value = ratio_independent(R.numerator, R.denominator);
  return R;
}

IdentityReport holes_identity_check(const IntervalSet& J, const SpaceTimeRegion& region, double lambda, double delta,
                                    const RPROptions& opt) {
  RPRSystem sys = system_for(region);
  auto one = [](const Labelling&) { return 1.0; };
  Estimate lhs = rpr_mean(sys, lambda, delta, region.time, {}, sys.ghosts, J, one, opt, 0);
  auto even_J = [&J](const Labelling& L) {
    for (const auto& iv : J)
      if (!L.even_on(iv.site, iv.a, iv.b)) return 0.0;
    return 1.0;
  };
  Estimate rhs = rpr_mean(sys, lambda, delta, region.time, {}, sys.ghosts, {}, even_J, opt, 1);
  IdentityReport R = compare(lhs, scaled(rhs, std::exp(-2 * delta * total_length(J))));
  // no bridge may touch J on the right-hand side, and on a periodic line the
  // τ coin must match the forced 'even' label
  int m = 0;
  if (region.time == BC::p)
    for (const auto& h : holes_by_site(J, sys.n_sites(), sys.t_lo(), sys.t_hi())) m += !h.empty();
  R.factor = std::ldexp(std::exp(lambda * tilde_J_length(J, region)), m);
  R.z_corrected = z_score(lhs, scaled(R.rhs, R.factor));
  R.holds_corrected = R.z_corrected <= 3.0;
  return R;
}

int hole_interval_count(const IntervalSet& J, const SpaceTimeRegion& region) {
  auto holes = holes_by_site(J, region.box.size(), region.t_lo(), region.t_hi());
  int n = 0;
  for (const auto& h : holes) {
    if (h.empty()) continue;
    int pieces = 0;
    if (region.circle()) {
      for (std::size_t i = 0; i < h.size(); ++i) {
        double a = h[i].second, b = i + 1 < h.size() ? h[i + 1].first : h[0].first + region.r;
        if (b - a > 0) ++pieces;
      }
      n += pieces - 1;
    } else {
      double cur = region.t_lo();
      for (const auto& iv : h) {
        if (iv.first > cur) ++pieces;
        cur = iv.second;
      }
      if (cur < region.t_hi()) ++pieces;
      n += pieces - 1;
    }
  }
  return n;
}

double tilde_J_length(const IntervalSet& J, const SpaceTimeRegion& region) {
  EdgeSet E(region.box, region.edge_mode());
  std::vector<Ivs> per(E.n_sites());
  for (const auto& iv : J) per[E.to_outer.at(iv.site)].push_back({iv.a, iv.b});
  double s = 0;
  for (const auto& e : E.edges) {
    Ivs u = per[e.a];
    u.insert(u.end(), per[e.b].begin(), per[e.b].end());
    for (const auto& iv : merge_ivs(u)) s += iv.second - iv.first;
  }
  return s;
}

double c_J(const IntervalSet& J, const SpaceTimeRegion& region, double lambda, double delta) {
  int n = hole_interval_count(J, region);
  return std::pow(2.0, -n) * std::exp(delta * total_length(J) + lambda * tilde_J_length(J, region));
}

EventProbabilityReport event_probability_identity(const IntervalSet& J, const SpaceTimeRegion& region, double lambda,
                                                  double delta, const RPROptions& opt) {
  SpaceTimeRegion fr = region;
  fr.space = BC::f;
  RPRSystem sys(fr.box, fr.r, false);
  EventProbabilityReport R;
  R.cJ = c_J(J, fr, lambda, delta);
  const std::size_t nc = std::max<std::size_t>(1, opt.n_chains);
  const double ref = sys.r * static_cast<double>(sys.n_sites());

  // P(ψ even in J), one pool
  auto parts = run_chains<RatioEstimator>(nc, opt.workers, opt.seed, [&](std::size_t c, Rng& rng) {
    RatioEstimator est;
    std::vector<int> tau(sys.n_sites(), 0);
    for (std::size_t i = 0; i < chain_share(opt.n_samples, nc, c); ++i) {
      BridgeConfig b = sample_bridges(sys, lambda, rng, {}, false);
      if (fr.time == BC::p)
        for (auto& v : tau) v = rng.coin();
      Labelling L = build_labelling(sys, switching_points(sys, b, {}, false), fr.time, tau);
      if (!L.consistent) {
        est.add(0.0, 0.0);
        continue;
      }
      double f = 1.0;
      for (const auto& iv : J)
        if (!L.even_on(iv.site, iv.a, iv.b)) f = 0.0;
      est.add(std::exp(2 * delta * (L.even_length - ref)), f);
    }
    return est;
  });
  RatioEstimator tot;
  for (auto& p : parts) tot.merge(p);
  R.lhs = tot.estimate();

  SamplingOptions so;
  so.n_samples = opt.n_samples;
  so.n_chains = opt.n_chains;
  so.workers = opt.workers;
  so.seed = pool_master(opt.seed, 1);
  R.rhs = scaled(estimate_exp_L(J, fr, lambda, delta, so).est, R.cJ);
  R.z = z_score(R.lhs, R.rhs);
  R.holds = R.z <= 3.0;

  // segments decoupled across holes: an extra flip inside each hole with probability 1/2
  if (fr.time == BC::f) {
    auto holes = holes_by_site(J, sys.n_sites(), fr.t_lo(), fr.t_hi());
    auto parts2 = run_chains<RatioEstimator>(nc, opt.workers, pool_master(opt.seed, 2), [&](std::size_t c, Rng& rng) {
      RatioEstimator est;
      SpinSampler S(fr, delta);
      const double top = log_gibbs_weight_max(fr, *S.edges(), lambda);
      for (std::size_t i = 0; i < chain_share(opt.n_samples, nc, c); ++i) {
        SpinConfiguration cfg = S.sample_apriori(rng);
        double lw = log_gibbs_weight(cfg, lambda);
        SpinConfiguration dec = cfg;
        for (std::size_t x = 0; x < holes.size(); ++x)
          for (const auto& iv : holes[x])
            if (rng.coin()) {
              auto& fl = dec.lines[dec.edges->to_outer[x]].flips;
              fl.insert(std::upper_bound(fl.begin(), fl.end(), 0.5 * (iv.first + iv.second)),
                        0.5 * (iv.first + iv.second));
            }
        double lw_dec = log_gibbs_weight(dec, lambda) - lambda * L_J(dec, J);
        est.add(std::exp(lw - top), std::exp(lw_dec - lw));
      }
      return est;
    });
    RatioEstimator t2;
    for (auto& p : parts2) t2.merge(p);
    R.rhs_holes = t2.estimate();
    R.z_holes = z_score(R.lhs, R.rhs_holes);
    R.holds_holes = R.z_holes <= 3.0;
  }
  return R;
}

// ---------------------------------------------------------------------------
// coupled measure

CoupledSystem::CoupledSystem(const Box& box, double r, bool ground, double lambda_, double delta_, bool ghosts)
    : sys(box, r, ghosts), lambda(lambda_), delta(delta_) {
  t1 = ground ? BC::f : BC::p;
  t2 = ground ? BC::w : BC::p;
}

void relabel(CoupledConfiguration& c, const std::vector<STPoint>& A1, const std::vector<STPoint>& A2) {
  const CoupledSystem& cs = *c.cs;
  c.psi = build_labelling(cs.sys, switching_points(cs.sys, c.b1, A1, false), cs.t1, c.tau1);
  c.psi_hat = build_labelling(cs.sys, switching_points(cs.sys, c.b2, A2, true), cs.t2, c.tau2);
  if (c.psi.consistent && c.psi_hat.consistent) {
    const double ref = 2 * cs.sys.r * static_cast<double>(cs.sys.n_sites());
    c.log_weight = 2 * cs.delta * (c.psi.even_length + c.psi_hat.even_length - ref);
  } else {
    c.log_weight = kNegInf;
  }
}

CoupledConfiguration sample_coupled(const CoupledSystem& cs, const std::vector<STPoint>& A1,
                                    const std::vector<STPoint>& A2, Rng& rng) {
  CoupledConfiguration c;
  c.cs = &cs;
  const std::size_t n = cs.sys.n_sites();
  c.b1 = sample_bridges(cs.sys, cs.lambda, rng, {}, false);
  c.b2 = sample_bridges(cs.sys, cs.lambda, rng, {}, true);
  c.tau1.assign(n, 0);
  c.tau2.assign(n, 0);
  if (cs.circle())
    for (std::size_t x = 0; x < n; ++x) {
      c.tau1[x] = rng.coin();
      c.tau2[x] = rng.coin();
    }
  c.cuts.resize(n);
  for (std::size_t x = 0; x < n; ++x) c.cuts[x] = sample_uniform(cs.sys.t_lo(), cs.sys.t_hi(), 4 * cs.delta, rng).pts;
  relabel(c, A1, A2);
  return c;
}

ClusterPartition::ClusterPartition(const CoupledConfiguration& c, ConnMode mode) : c_(&c) {
  const CoupledSystem& cs = *c.cs;
  const std::size_t n = cs.sys.n_sites();
  const double lo = cs.sys.t_lo(), hi = cs.sys.t_hi(), r = cs.sys.r;
  const bool circ = cs.circle();
  blocking_.resize(n);
  first_.resize(n + 1);
  for (std::size_t x = 0; x < n; ++x) {
    for (double t : c.cuts[x])
      if (c.psi.is_even(x, t) && c.psi_hat.is_even(x, t)) blocking_[x].push_back(t);
    first_[x] = verts_.size();
    const auto& bc = blocking_[x];
    const std::size_t k = bc.size();
    if (!circ) {
      double a = lo;
      for (double t : bc) {
        verts_.push_back({x, a, t});
        a = t;
      }
      verts_.push_back({x, a, hi});
    } else if (k == 0) {
      verts_.push_back({x, lo, hi});
    } else {
      for (std::size_t i = 0; i + 1 < k; ++i) verts_.push_back({x, bc[i], bc[i + 1]});
      verts_.push_back({x, bc[k - 1], bc[0] + r});
    }
  }
  first_[n] = verts_.size();
  gamma_ = verts_.size();
  parent_.resize(verts_.size() + 1);
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});

  for (const BridgeConfig* b : {&c.b1, &c.b2})
    for (std::size_t e = 0; e < cs.sys.edges.edges.size(); ++e)
      for (double t : b->bridges[e]) unite(vertex_of(cs.sys.edges.edges[e].a, t), vertex_of(cs.sys.edges.edges[e].b, t));

  for (std::size_t x = 0; x < n; ++x) {
    std::vector<double> gp;
    if (cs.sys.ghosts && !c.b2.ghosts.empty()) gp = c.b2.ghosts[x];
    if (cs.t2 == BC::w) {
      gp.push_back(lo);
      gp.push_back(hi);
    }
    std::size_t prev = gamma_;
    for (double t : gp) {
      std::size_t v = vertex_of(x, t);
      verts_[v].ghost = true;
      if (mode == ConnMode::plain) unite(v, gamma_);
      if (mode == ConnMode::off_gamma_literal) {
        if (prev != gamma_) unite(prev, v);
        prev = v;
      }
    }
  }
  has_ghost_.assign(parent_.size(), 0);
  for (std::size_t v = 0; v < verts_.size(); ++v)
    if (verts_[v].ghost) has_ghost_[find(v)] = 1;
}

std::size_t ClusterPartition::vertex_of(std::size_t site, double t) const {
  const auto& bc = blocking_.at(site);
  const std::size_t j = static_cast<std::size_t>(std::upper_bound(bc.begin(), bc.end(), t) - bc.begin());
  if (!c_->cs->circle()) return first_[site] + j;
  const std::size_t k = bc.size();
  if (k == 0 || j == 0 || j == k) return first_[site] + (k == 0 ? 0 : k - 1);
  return first_[site] + j - 1;
}

std::size_t ClusterPartition::find(std::size_t v) const {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

void ClusterPartition::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (a < b) std::swap(a, b);
  parent_[a] = b;
}

bool ClusterPartition::connected(const STPoint& a, const STPoint& b) const {
  return find(vertex_of(a.site, a.t)) == find(vertex_of(b.site, b.t));
}

bool ClusterPartition::class_has_ghost(std::size_t v) const { return has_ghost_[find(v)] != 0; }

bool ClusterPartition::to_gamma(const STPoint& a) const { return class_has_ghost(vertex_of(a.site, a.t)); }

bool connectivity(const CoupledConfiguration& c, const STPoint& a, const STPoint& b, ConnMode mode) {
  if (a.site == b.site && a.t == b.t) return true;
  return ClusterPartition(c, mode).connected(a, b);
}

bool connected_to_gamma(const CoupledConfiguration& c, const STPoint& a) {
  return ClusterPartition(c, ConnMode::plain).to_gamma(a);
}

namespace {

std::vector<RatioEstimator> coupled_pool(const CoupledSystem& cs, const std::vector<STPoint>& A1,
                                         const std::vector<STPoint>& A2, const std::vector<CoupledEvent>& f,
                                         const RPROptions& opt, std::uint64_t offset) {
  check_sources(cs.sys, A1);
  check_sources(cs.sys, A2);
  const std::size_t nc = std::max<std::size_t>(1, opt.n_chains);
  auto parts = run_chains<std::vector<RatioEstimator>>(nc, opt.workers, pool_master(opt.seed, offset),
                                                       [&](std::size_t c, Rng& rng) {
                                                         std::vector<RatioEstimator> acc(f.size());
                                                         for (std::size_t i = 0; i < chain_share(opt.n_samples, nc, c);
                                                              ++i) {
                                                           CoupledConfiguration cfg = sample_coupled(cs, A1, A2, rng);
                                                           double w = std::exp(cfg.log_weight);
                                                           for (std::size_t k = 0; k < f.size(); ++k)
                                                             acc[k].add(w, w > 0 ? f[k](cfg) : 0.0);
                                                         }
                                                         return acc;
                                                       });
  std::vector<RatioEstimator> tot(f.size());
  for (auto& p : parts)
    for (std::size_t k = 0; k < f.size(); ++k) tot[k].merge(p[k]);
  return tot;
}

STPoint origin_point(const CoupledSystem& cs) { return {cs.sys.box.origin(), 0.0}; }

Estimate difference(const Estimate& a, const Estimate& b) {
  return {a.value - b.value, std::hypot(a.se, b.se), std::min(a.n, b.n), std::min(a.n_eff, b.n_eff)};
}

}  // namespace

std::vector<Estimate> coupled_means(const CoupledSystem& cs, const std::vector<STPoint>& A1,
                                    const std::vector<STPoint>& A2, const std::vector<CoupledEvent>& f,
                                    const RPROptions& opt, std::uint64_t stream_offset) {
  std::vector<Estimate> out;
  for (auto& e : coupled_pool(cs, A1, A2, f, opt, stream_offset)) out.push_back(e.mean_wf());
  return out;
}

std::vector<Estimate> p_bar(const CoupledSystem& cs, const std::vector<CoupledEvent>& events, const RPROptions& opt) {
  std::vector<Estimate> out;
  for (auto& e : coupled_pool(cs, {}, {}, events, opt, 0)) out.push_back(e.estimate());
  return out;
}

SwitchingReport verify_switching(const CoupledSystem& cs, const STPoint& kappa, const RPROptions& opt, ConnMode mode) {
  const STPoint o = origin_point(cs);
  const std::vector<STPoint> A{o, kappa};
  SwitchingReport R;
  R.lhs = coupled_means(cs, A, {}, {[](const CoupledConfiguration&) { return 1.0; }}, opt, 0)[0];
  R.rhs = coupled_means(
      cs, {}, A, {[&](const CoupledConfiguration& c) { return connectivity(c, o, kappa, mode) ? 1.0 : 0.0; }}, opt,
      1)[0];
  R.z = z_score(R.lhs, R.rhs);
  R.holds = R.z <= 3.0;
  return R;
}

namespace {

struct DiffPools {
  Estimate d, g0;       // E(∂ψ_∅∂ψ̂_∅), E(∂ψ_∅∂ψ̂_∅ 1{0↔Γ})
  Estimate p_gamma;     // P̄(0↔Γ)
  Estimate a, ag;       // E(∂ψ_∅∂ψ̂_{0κ}), with 1{0↔Γ}
  Estimate b;           // E(∂ψ_{0κ}∂ψ̂_∅)
};

DiffPools diff_pools(const CoupledSystem& cs, const STPoint& kappa, const RPROptions& opt) {
  const STPoint o = origin_point(cs);
  const std::vector<STPoint> A{o, kappa};
  CoupledEvent one = [](const CoupledConfiguration&) { return 1.0; };
  CoupledEvent gam = [o](const CoupledConfiguration& c) { return connected_to_gamma(c, o) ? 1.0 : 0.0; };
  DiffPools P;
  auto p0 = coupled_pool(cs, {}, {}, {one, gam}, opt, 0);
  P.d = p0[0].mean_wf();
  P.g0 = p0[1].mean_wf();
  P.p_gamma = p0[1].estimate();
  auto p1 = coupled_pool(cs, {}, A, {one, gam}, opt, 1);
  P.a = p1[0].mean_wf();
  P.ag = p1[1].mean_wf();
  P.b = coupled_pool(cs, A, {}, {one}, opt, 2)[0].mean_wf();
  if (P.d.value <= 0) throw std::runtime_error("no consistent configuration in the reference pool");
  return P;
}

}  // namespace

DifferenceBoundReport correlation_difference_bound(const CoupledSystem& cs, const STPoint& kappa,
                                                   const RPROptions& opt) {
  DiffPools P = diff_pools(cs, kappa, opt);
  DifferenceBoundReport R;
  R.corr_w = ratio_independent(P.a, P.d);
  R.corr_f = ratio_independent(P.b, P.d);
  R.difference = ratio_independent(difference(P.a, P.b), P.d);
  R.bound = ratio_independent(P.ag, P.d);
  R.lower_holds = R.difference.value >= -3 * R.difference.se;
  R.upper_holds = R.difference.value <= R.bound.value + 3 * std::hypot(R.difference.se, R.bound.se);
  return R;
}

double constant_A(const std::vector<int>& x, double t, double lambda, double delta, double beta) {
  if (!(lambda > 0)) throw std::domain_error("constant_A needs lambda > 0");
  const double nx = l1_norm(x);
  if (std::isinf(beta)) {
    const double L = std::abs(t) + 2 + nx;
    return std::exp(6 * delta * L) * std::pow(2 / lambda + lambda, L);
  }
  if (!(beta > 0)) throw std::domain_error("beta must be positive");
  return std::exp(6 * delta * beta * nx) * std::pow(2 / (lambda * beta) + lambda * beta, nx);
}

double constant_B(int N0, double r0, double lambda, double delta, int d) {
  if (!(lambda * r0 > 0)) throw std::domain_error("constant_B needs lambda r0 > 0");
  if (N0 < 0 || d < 1) throw std::invalid_argument("N0 >= 0 and d >= 1 required");
  const double m = std::pow(2.0 * N0 + 1, d);
  const double e = std::exp(4 * delta * r0 * m);
  return e * e * std::pow(1 + 2 / ((lambda * r0) * (lambda * r0)), 2 * d * m);
}

bool internally_connected(const CoupledConfiguration& c, const std::vector<std::size_t>& sites, double r0) {
  const CoupledSystem& cs = *c.cs;
  const double r = cs.sys.r;
  const bool whole = cs.circle() && r0 >= r;
  const double a = whole ? cs.sys.t_lo() : std::max(cs.sys.t_lo(), -0.5 * r0);
  const double b = whole ? cs.sys.t_hi() : std::min(cs.sys.t_hi(), 0.5 * r0);
  std::vector<char> in(cs.sys.n_sites(), 0);
  for (auto s : sites) in.at(s) = 1;

  // vertices per site: window split by blocking cuts
  std::vector<std::vector<double>> blk(cs.sys.n_sites());
  std::vector<std::size_t> first(cs.sys.n_sites(), 0);
  std::size_t nv = 0;
  for (auto x : sites) {
    for (double t : c.cuts[x])
      if (t >= a && t <= b && c.psi.is_even(x, t) && c.psi_hat.is_even(x, t)) blk[x].push_back(t);
    first[x] = nv;
    nv += whole ? std::max<std::size_t>(1, blk[x].size()) : blk[x].size() + 1;
  }
  auto vid = [&](std::size_t x, double t) {
    const auto& bc = blk[x];
    std::size_t j = static_cast<std::size_t>(std::upper_bound(bc.begin(), bc.end(), t) - bc.begin());
    if (!whole) return first[x] + j;
    std::size_t k = bc.size();
    if (k == 0 || j == 0 || j == k) return first[x] + (k == 0 ? 0 : k - 1);
    return first[x] + j - 1;
  };
  std::vector<std::size_t> par(nv + 1);
  std::iota(par.begin(), par.end(), std::size_t{0});
  auto fnd = [&](std::size_t v) {
    while (par[v] != v) v = par[v] = par[par[v]];
    return v;
  };
  auto uni = [&](std::size_t u, std::size_t v) { par[fnd(u)] = fnd(v); };
  for (const BridgeConfig* bb : {&c.b1, &c.b2})
    for (std::size_t e = 0; e < cs.sys.edges.edges.size(); ++e) {
      const Edge& E = cs.sys.edges.edges[e];
      if (!in[E.a] || !in[E.b]) continue;
      for (double t : bb->bridges[e])
        if (t >= a && t <= b) uni(vid(E.a, t), vid(E.b, t));
    }
  const std::size_t gam = nv;
  for (auto x : sites) {
    std::vector<double> gp;
    if (cs.sys.ghosts && !c.b2.ghosts.empty()) gp = c.b2.ghosts[x];
    if (cs.t2 == BC::w) gp.insert(gp.end(), {cs.sys.t_lo(), cs.sys.t_hi()});
    for (double t : gp)
      if (t >= a && t <= b) uni(vid(x, t), gam);
  }
  const std::size_t root = nv ? fnd(0) : 0;
  for (std::size_t v = 0; v < nv; ++v)
    if (fnd(v) != root) return false;
  return true;
}

LocalAReport local_modification_A(const CoupledSystem& cs, const STPoint& kappa, double beta, const RPROptions& opt) {
  DiffPools P = diff_pools(cs, kappa, opt);
  LocalAReport R;
  R.C = constant_A(cs.sys.box.coords(kappa.site), kappa.t, cs.lambda, cs.delta, beta);
  R.difference = ratio_independent(difference(P.a, P.b), P.d);
  R.p_gamma = P.p_gamma;
  R.lhs_cx = P.ag;
  R.rhs_cx = scaled(P.g0, R.C);
  R.holds = R.difference.value <= R.C * R.p_gamma.value + 3 * std::hypot(R.difference.se, R.C * R.p_gamma.se);
  R.holds_cx = R.lhs_cx.value <= R.rhs_cx.value + 3 * std::hypot(R.lhs_cx.se, R.rhs_cx.se);
  return R;
}

LocalBReport local_modification_B(const CoupledSystem& cs, const CoupledEvent& event, int N0, double r0,
                                  const std::vector<std::size_t>& sites, const RPROptions& opt) {
  LocalBReport R;
  R.c = constant_B(N0, r0, cs.lambda, cs.delta, cs.sys.box.d);
  CoupledEvent both = [&](const CoupledConfiguration& c) {
    return event(c) != 0.0 && internally_connected(c, sites, r0) ? 1.0 : 0.0;
  };
  auto p = p_bar(cs, {event, both}, opt);
  R.p_event = p[0];
  R.p_event_and_C = p[1];
  R.holds = R.p_event.value <= R.c * R.p_event_and_C.value + 3 * std::hypot(R.p_event.se, R.c * R.p_event_and_C.se);
  return R;
}

}  // namespace tfim
