#include "tfim/stats.hpp"

#include <cmath>
#include <limits>

namespace tfim {

void RunningStats::add(double x) {
  ++n_;
  double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_), n = na + nb;
  const double d = o.mean_ - mean_;
  mean_ += d * nb / n;
  m2_ += o.m2_ + d * d * na * nb / n;
  n_ += o.n_;
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::stderr_mean() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : std::numeric_limits<double>::infinity();
}

Estimate RunningStats::estimate() const {
  return {mean_, stderr_mean(), static_cast<double>(n_), static_cast<double>(n_)};
}

void RatioEstimator::add(double w, double f) {
  const int b = static_cast<int>(n_ % K);
  ++n_;
  sw_ += w;
  sw2_ += w * w;
  swf_ += w * f;
  swf2_ += w * w * f * f;
  bw_[b] += w;
  bwf_[b] += w * f;
}

void RatioEstimator::merge(const RatioEstimator& o) {
  n_ += o.n_;
  sw_ += o.sw_;
  sw2_ += o.sw2_;
  swf_ += o.swf_;
  swf2_ += o.swf2_;
  for (int b = 0; b < K; ++b) {
    bw_[b] += o.bw_[b];
    bwf_[b] += o.bwf_[b];
  }
}

Estimate RatioEstimator::estimate() const {
  Estimate e;
  e.n = static_cast<double>(n_);
  e.n_eff = sw2_ > 0 ? sw_ * sw_ / sw2_ : 0;
  if (sw_ <= 0) {
    e.value = std::numeric_limits<double>::quiet_NaN();
    e.se = std::numeric_limits<double>::infinity();
    return e;
  }
  e.value = swf_ / sw_;
  // leave-one-block-out jackknife
  int used = 0;
  double jm = 0;
  std::array<double, K> th{};
  for (int b = 0; b < K; ++b) {
    double w = sw_ - bw_[b];
    if (w <= 0) continue;
    th[used++] = (swf_ - bwf_[b]) / w;
  }
  if (used < 2) {
    e.se = std::numeric_limits<double>::infinity();
    return e;
  }
  for (int i = 0; i < used; ++i) jm += th[i];
  jm /= used;
  double v = 0;
  for (int i = 0; i < used; ++i) v += (th[i] - jm) * (th[i] - jm);
  e.se = std::sqrt(v * (used - 1) / used);
  return e;
}

Estimate RatioEstimator::mean_w() const {
  const double n = static_cast<double>(n_);
  Estimate e{sw_ / n, 0, n, n};
  double var = n > 1 ? (sw2_ - sw_ * sw_ / n) / (n - 1) : 0;
  e.se = std::sqrt(std::max(var, 0.0) / n);
  return e;
}

Estimate RatioEstimator::mean_wf() const {
  const double n = static_cast<double>(n_);
  Estimate e{swf_ / n, 0, n, n};
  double var = n > 1 ? (swf2_ - swf_ * swf_ / n) / (n - 1) : 0;
  e.se = std::sqrt(std::max(var, 0.0) / n);
  return e;
}

Estimate ratio_independent(const Estimate& a, const Estimate& b) {
  Estimate e;
  e.value = a.value / b.value;
  double ra = a.value != 0 ? a.se / a.value : 0, rb = b.se / b.value;
  e.se = std::abs(e.value) * std::sqrt(ra * ra + rb * rb);
  if (a.value == 0) e.se = a.se / std::abs(b.value);
  e.n = a.n + b.n;
  e.n_eff = std::min(a.n_eff, b.n_eff);
  return e;
}

Estimate product_independent(const Estimate& a, const Estimate& b) {
  Estimate e;
  e.value = a.value * b.value;
  e.se = std::sqrt(a.se * a.se * b.value * b.value + b.se * b.se * a.value * a.value + a.se * a.se * b.se * b.se);
  e.n = a.n + b.n;
  e.n_eff = std::min(a.n_eff, b.n_eff);
  return e;
}

double z_score(const Estimate& a, const Estimate& b) {
  double s = std::sqrt(a.se * a.se + b.se * b.se);
  double d = std::abs(a.value - b.value);
  if (s == 0) return d == 0 ? 0 : std::numeric_limits<double>::infinity();
  return d / s;
}

double z_score(const Estimate& a, double exact) { return z_score(a, Estimate{exact, 0, 0, 0}); }

}  // namespace tfim
