#include "tfim/spin_rep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tfim/parallel.hpp"
#include "tfim/poisson.hpp"

namespace tfim {

int SpinLine::at(double t) const {
  auto k = std::upper_bound(flips.begin(), flips.end(), t) - flips.begin();
  return (k & 1) ? -left : left;
}

double overlap_integral(const SpinLine& u, const SpinLine& v, double lo, double a, double b) {
  if (b <= a) return 0.0;
  // merge the two flip lists, walking from lo
  std::size_t i = 0, j = 0;
  int su = u.left, sv = v.left;
  double t = lo, acc = 0;
  auto flush = [&](double next) {
    double s = std::max(t, a), e = std::min(next, b);
    if (e > s) acc += (e - s) * su * sv;
    t = next;
  };
  while (t < b) {
    double nu = i < u.flips.size() ? u.flips[i] : INFINITY;
    double nv = j < v.flips.size() ? v.flips[j] : INFINITY;
    double nx = std::min(nu, nv);
    if (!std::isfinite(nx)) {
      flush(b);
      break;
    }
    flush(nx);
    if (nu == nx) {
      su = -su;
      ++i;
    }
    if (nv == nx) {
      sv = -sv;
      ++j;
    }
  }
  return acc;
}

SpinSampler::SpinSampler(const SpaceTimeRegion& region, double delta, std::size_t max_tries)
    : region_(region), delta_(delta), max_tries_(max_tries) {
  if (delta < 0) throw std::invalid_argument("delta must be nonnegative");
  edges_ = std::make_shared<const EdgeSet>(region.box, region.edge_mode());
}

SpinConfiguration SpinSampler::sample_apriori(Rng& rng) const {
  SpinConfiguration c;
  c.region = region_;
  c.edges = edges_;
  c.lines.resize(edges_->n_sites());
  const double lo = region_.t_lo(), hi = region_.t_hi();
  for (std::size_t x = 0; x < c.lines.size(); ++x) {
    SpinLine& L = c.lines[x];
    if (edges_->frozen[x]) continue;  // +1, no flips
    std::size_t tries = 0;
    for (;;) {
      PointSet D = delta_ > 0 ? sample_uniform(lo, hi, delta_, rng) : PointSet(lo, hi);
      if (region_.time == BC::f || D.size() % 2 == 0) {
        L.flips = std::move(D.pts);
        break;
      }
      if (++tries >= max_tries_)
        throw std::runtime_error("spin sampler: rejection budget exceeded (delta*r = " +
                                 std::to_string(delta_ * region_.r) + ")");
    }
    L.left = region_.time == BC::w ? 1 : (rng.coin() ? 1 : -1);
  }
  return c;
}

double log_gibbs_weight(const SpinConfiguration& c, double lambda) {
  if (lambda == 0) return 0.0;
  const double lo = c.region.t_lo(), hi = c.region.t_hi();
  double s = 0;
  for (const auto& e : c.edges->edges) s += overlap_integral(c.lines[e.a], c.lines[e.b], lo, lo, hi);
  return lambda * s;
}

double gibbs_weight(const SpinConfiguration& c, double lambda) { return std::exp(log_gibbs_weight(c, lambda)); }

double log_gibbs_weight_max(const SpaceTimeRegion& region, const EdgeSet& edges, double lambda) {
  return lambda * region.r * static_cast<double>(edges.edges.size());
}

namespace {

using Ivs = std::vector<std::pair<double, double>>;

Ivs merged(Ivs v) {
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

}  // namespace

double L_J(const SpinConfiguration& c, const IntervalSet& J) {
  if (J.empty()) return 0.0;
  const EdgeSet& E = *c.edges;
  std::vector<Ivs> per(E.n_sites());
  for (const auto& iv : J) per[E.to_outer.at(iv.site)].push_back({iv.a, iv.b});
  const double lo = c.region.t_lo();
  double s = 0;
  for (const auto& e : E.edges) {
    if (per[e.a].empty() && per[e.b].empty()) continue;
    Ivs u = per[e.a];
    u.insert(u.end(), per[e.b].begin(), per[e.b].end());
    for (auto& iv : merged(u)) s += overlap_integral(c.lines[e.a], c.lines[e.b], lo, iv.first, iv.second);
  }
  return s;
}

std::vector<RatioEstimator> importance_chain(const SpaceTimeRegion& region, double lambda, double delta,
                                             const std::vector<SpinObservable>& obs, std::size_t n, Rng& rng) {
  SpinSampler S(region, delta);
  const double ref = log_gibbs_weight_max(region, *S.edges(), lambda);
  std::vector<RatioEstimator> acc(obs.size());
  for (std::size_t i = 0; i < n; ++i) {
    SpinConfiguration c = S.sample_apriori(rng);
    double w = std::exp(log_gibbs_weight(c, lambda) - ref);
    for (std::size_t k = 0; k < obs.size(); ++k) acc[k].add(w, obs[k](c));
  }
  return acc;
}

std::vector<Estimate> importance_estimate(const SpaceTimeRegion& region, double lambda, double delta,
                                          const std::vector<SpinObservable>& obs, const SamplingOptions& opt) {
  const std::size_t nc = std::max<std::size_t>(1, opt.n_chains);
  auto parts = run_chains<std::vector<RatioEstimator>>(nc, opt.workers, opt.seed, [&](std::size_t c, Rng& rng) {
    return importance_chain(region, lambda, delta, obs, chain_share(opt.n_samples, nc, c), rng);
  });
  std::vector<RatioEstimator> tot(obs.size());
  for (auto& p : parts)
    for (std::size_t k = 0; k < obs.size(); ++k) tot[k].merge(p[k]);
  std::vector<Estimate> out;
  for (auto& t : tot) out.push_back(t.estimate());
  return out;
}

SpinObservable product_observable(const std::vector<STPoint>& A) {
  return [A](const SpinConfiguration& c) {
    int s = 1;
    for (const auto& p : A) s *= c.sigma(p.site, p.t);
    return static_cast<double>(s);
  };
}

static void check_points(const std::vector<STPoint>& A, const SpaceTimeRegion& region) {
  for (const auto& p : A) {
    if (p.site >= region.box.size()) throw std::out_of_range("source site outside box");
    if (p.t <= region.t_lo() || p.t >= region.t_hi()) throw std::domain_error("point time must lie inside (-r/2, r/2)");
  }
}

SpinEstimate estimate_correlation(const std::vector<STPoint>& A, const SpaceTimeRegion& region, double lambda,
                                  double delta, const SamplingOptions& opt) {
  check_points(A, region);
  auto e = importance_estimate(region, lambda, delta, {product_observable(A)}, opt)[0];
  return {e, e.n_eff < opt.min_ess};
}

SpinEstimate estimate_exp_L(const IntervalSet& J, const SpaceTimeRegion& region, double lambda, double delta,
                            const SamplingOptions& opt) {
  for (const auto& iv : J)
    if (iv.site >= region.box.size() || iv.a > iv.b || iv.a < region.t_lo() || iv.b > region.t_hi())
      throw std::domain_error("J must lie inside the region");
  SpinObservable f = [J, lambda](const SpinConfiguration& c) { return std::exp(-lambda * L_J(c, J)); };
  auto e = importance_estimate(region, lambda, delta, {f}, opt)[0];
  return {e, e.n_eff < opt.min_ess};
}

SpinEstimate estimate_magnetization(const SpaceTimeRegion& region, double lambda, double delta,
                                    const SamplingOptions& opt) {
  if (region.space != BC::w) throw std::invalid_argument("magnetization needs wired spatial boundary");
  std::vector<STPoint> A{{region.box.origin(), 0.0}};
  return estimate_correlation(A, region, lambda, delta, opt);
}

}  // namespace tfim
