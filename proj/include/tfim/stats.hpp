#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace tfim {

struct Estimate {
  double value = 0;
  double se = 0;
  double n = 0;      // samples used
  double n_eff = 0;  // effective sample size (importance weights), n otherwise
};

// Welford mean/variance with pairwise (Chan et al.) merge.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& o);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double stderr_mean() const;
  Estimate estimate() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0, m2_ = 0;
};

// Self-normalised ratio Σ w f / Σ w with a block jackknife error. Sample i
// goes to block i mod K; blocks of merged chains are summed.
class RatioEstimator {
 public:
  static constexpr int K = 64;
  void add(double w, double f);
  void merge(const RatioEstimator& o);
  std::uint64_t count() const { return n_; }
  double sum_w() const { return sw_; }
  Estimate estimate() const;
  // plain mean of w and of w f with their standard errors
  Estimate mean_w() const;
  Estimate mean_wf() const;

 private:
  std::uint64_t n_ = 0;
  double sw_ = 0, sw2_ = 0, swf_ = 0, swf2_ = 0;
  std::array<double, K> bw_{}, bwf_{};
};

// a / b for independent estimates, delta method
Estimate ratio_independent(const Estimate& a, const Estimate& b);
Estimate product_independent(const Estimate& a, const Estimate& b);

// |a - b| measured in combined standard errors
double z_score(const Estimate& a, const Estimate& b);
double z_score(const Estimate& a, double exact);

}  // namespace tfim
