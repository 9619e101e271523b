#include "tfim/trotter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "tfim/parallel.hpp"

namespace tfim {

TrotterChain::TrotterChain(const SpaceTimeRegion& region, double lambda, double delta, double dtau)
    : region_(region), lambda_(lambda), delta_(delta) {
  if (!(dtau > 0)) throw std::invalid_argument("time step must be positive");
  if (!(delta > 0)) throw std::invalid_argument("Trotter sampler needs delta > 0");
  M_ = std::max(2, static_cast<int>(std::lround(region.r / dtau)));
  dt_ = region.r / M_;
  Kt_ = -0.5 * std::log(std::tanh(delta * dt_));
  Ks_ = lambda * dt_;
  edges_ = std::make_shared<const EdgeSet>(region.box, region.edge_mode());
  const std::size_t ns = edges_->n_sites();
  nbrs_.assign(ns, {});
  for (const auto& e : edges_->edges) {
    nbrs_[e.a].push_back(e.b);
    nbrs_[e.b].push_back(e.a);
  }
  rows_ = region.time == BC::p ? M_ : M_ + 1;
  row_w_.assign(rows_, 1.0);
  if (region.time == BC::f) row_w_.front() = row_w_.back() = 0.5;
  s_.assign(ns * rows_, 1);
}

int TrotterChain::slice_of(double t) const {
  int j = static_cast<int>(std::lround((t - region_.t_lo()) / dt_));
  if (region_.time == BC::p) return ((j % M_) + M_) % M_;
  return std::clamp(j, 0, M_);
}

int TrotterChain::spin(std::size_t inner_site, int slice) const {
  return s_[edges_->to_outer[inner_site] * rows_ + slice];
}

void TrotterChain::line_fields(std::size_t x, std::vector<double>& h) const {
  h.assign(rows_, 0.0);
  for (std::size_t y : nbrs_[x]) {
    const std::int8_t* sy = &s_[y * rows_];
    for (int j = 0; j < rows_; ++j) h[j] += sy[j];
  }
  for (int j = 0; j < rows_; ++j) h[j] *= Ks_ * row_w_[j];
}

namespace {

using Msg = std::array<double, 2>;  // index 0 -> spin +1, 1 -> spin -1
inline int spin_of(int i) { return i == 0 ? 1 : -1; }

// forward messages over slices [a, b] with an extra field on slice a;
// returns the log of the product of normalisers
double forward(const std::vector<double>& h, int a, int b, double K, double left, std::vector<Msg>& m) {
  double logz = 0;
  for (int j = a; j <= b; ++j) {
    Msg cur;
    for (int i = 0; i < 2; ++i) {
      double s = spin_of(i), v;
      if (j == a)
        v = std::exp((h[j] + left) * s);
      else
        v = std::exp(h[j] * s) * (m[j - 1][0] * std::exp(K * s) + m[j - 1][1] * std::exp(-K * s));
      cur[i] = v;
    }
    double z = cur[0] + cur[1];
    m[j] = {cur[0] / z, cur[1] / z};
    logz += std::log(z);
  }
  return logz;
}

}  // namespace

void TrotterChain::resample_line(std::size_t x, Rng& rng) {
  std::vector<double> h;
  line_fields(x, h);
  std::int8_t* sx = &s_[x * rows_];
  std::vector<Msg> m(rows_);
  const double K = Kt_;
  auto backward = [&](int a, int b, double right) {
    double p0 = m[b][0] * std::exp(right), p1 = m[b][1] * std::exp(-right);
    sx[b] = rng.uniform() * (p0 + p1) < p0 ? 1 : -1;
    for (int j = b - 1; j >= a; --j) {
      double q0 = m[j][0] * std::exp(K * sx[j + 1]), q1 = m[j][1] * std::exp(-K * sx[j + 1]);
      sx[j] = rng.uniform() * (q0 + q1) < q0 ? 1 : -1;
    }
  };
  switch (region_.time) {
    case BC::f:
      forward(h, 0, M_, K, 0.0, m);
      backward(0, M_, 0.0);
      break;
    case BC::w:
      sx[0] = sx[M_] = 1;
      forward(h, 1, M_ - 1, K, K, m);
      backward(1, M_ - 1, K);
      break;
    case BC::p: {
      // pick slice 0 from its marginal, then the open chain 1..M-1
      std::array<double, 2> lz;
      std::vector<Msg> keep[2];
      for (int i = 0; i < 2; ++i) {
        double s0 = spin_of(i);
        std::vector<Msg> mm(rows_);
        double lg = forward(h, 1, M_ - 1, K, K * s0, mm);
        double close = mm[M_ - 1][0] * std::exp(K * s0) + mm[M_ - 1][1] * std::exp(-K * s0);
        lz[i] = h[0] * s0 + lg + std::log(close);
        keep[i] = std::move(mm);
      }
      double mx = std::max(lz[0], lz[1]);
      double p0 = std::exp(lz[0] - mx), p1 = std::exp(lz[1] - mx);
      int i = rng.uniform() * (p0 + p1) < p0 ? 0 : 1;
      sx[0] = static_cast<std::int8_t>(spin_of(i));
      m = std::move(keep[i]);
      backward(1, M_ - 1, K * sx[0]);
      break;
    }
  }
}

void TrotterChain::sweep(Rng& rng) {
  for (std::size_t x = 0; x < nbrs_.size(); ++x)
    if (!edges_->frozen[x]) resample_line(x, rng);
}

double TrotterChain::conditional_spin(std::size_t inner_site, double t) const {
  const std::size_t x = edges_->to_outer[inner_site];
  const int j = slice_of(t);
  if (region_.time == BC::p) return s_[x * rows_ + j];
  int a = 0, b = M_;
  double left = 0, right = 0;
  if (region_.time == BC::w) {
    if (j == 0 || j == M_) return 1.0;
    a = 1;
    b = M_ - 1;
    left = right = Kt_;
  }
  std::vector<double> h;
  line_fields(x, h);
  std::vector<Msg> f(rows_);
  forward(h, a, j, Kt_, left, f);
  // backward message into slice j from the right
  Msg bk{std::exp(right), std::exp(-right)};
  if (j == b) {
    // nothing to the right beyond the boundary field
  } else {
    Msg g = bk;
    for (int k = b; k > j; --k) {
      Msg loc{g[0] * std::exp(h[k]), g[1] * std::exp(-h[k])};
      Msg nx{loc[0] * std::exp(Kt_) + loc[1] * std::exp(-Kt_), loc[0] * std::exp(-Kt_) + loc[1] * std::exp(Kt_)};
      double z = nx[0] + nx[1];
      g = {nx[0] / z, nx[1] / z};
    }
    bk = g;
  }
  double p0 = f[j][0] * bk[0], p1 = f[j][1] * bk[1];
  return (p0 - p1) / (p0 + p1);
}

TrotterEstimate trotter_estimate(const SpaceTimeRegion& region, double lambda, double delta,
                                 const TrotterObservable& obs, const TrotterOptions& opt) {
  const std::size_t nc = std::max<std::size_t>(1, opt.n_chains);
  const std::size_t nb = std::max<std::size_t>(1, opt.n_bins);
  if (opt.sweeps < nb) throw std::invalid_argument("need at least one sweep per bin");
  auto parts = run_chains<RunningStats>(nc, opt.workers, opt.seed, [&](std::size_t, Rng& rng) {
    TrotterChain ch(region, lambda, delta, opt.dtau);
    for (std::size_t i = 0; i < opt.thermalize; ++i) ch.sweep(rng);
    RunningStats bins;
    const std::size_t per = opt.sweeps / nb;
    for (std::size_t b = 0; b < nb; ++b) {
      double acc = 0;
      for (std::size_t i = 0; i < per; ++i) {
        ch.sweep(rng);
        acc += obs(ch);
      }
      bins.add(acc / per);
    }
    return bins;
  });
  RunningStats tot;
  for (auto& p : parts) tot.merge(p);
  TrotterEstimate out;
  out.est = tot.estimate();
  out.est.n = static_cast<double>(nc * (opt.sweeps / nb) * nb);
  out.est.n_eff = static_cast<double>(tot.count());
  TrotterChain probe(region, lambda, delta, opt.dtau);
  out.dtau = probe.dtau();
  out.n_slices = probe.n_slices();
  return out;
}

TrotterEstimate trotter_magnetization(const SpaceTimeRegion& region, double lambda, double delta,
                                      const TrotterOptions& opt) {
  if (region.space != BC::w) throw std::invalid_argument("magnetization needs wired spatial boundary");
  const std::size_t o = region.box.origin();
  return trotter_estimate(region, lambda, delta, [o](const TrotterChain& c) { return c.conditional_spin(o, 0.0); },
                          opt);
}

TrotterEstimate trotter_correlation(const std::vector<STPoint>& A, const SpaceTimeRegion& region, double lambda,
                                    double delta, const TrotterOptions& opt) {
  return trotter_estimate(
      region, lambda, delta,
      [A](const TrotterChain& c) {
        int s = 1;
        for (const auto& p : A) s *= c.spin(p.site, c.slice_of(p.t));
        return static_cast<double>(s);
      },
      opt);
}

}  // namespace tfim
