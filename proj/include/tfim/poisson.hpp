#pragma once

#include <functional>
#include <vector>

#include "tfim/rng.hpp"
#include "tfim/stats.hpp"

namespace tfim {

// Finite point configuration on [lo, hi] (interval) or [lo, hi) (circle).
struct PointSet {
  double lo = 0, hi = 1;
  bool circle = false;
  std::vector<double> pts;  // strictly increasing

  PointSet() = default;
  PointSet(double a, double b, bool c = false) : lo(a), hi(b), circle(c) {}

  std::size_t size() const { return pts.size(); }
  bool empty() const { return pts.empty(); }
  double length() const { return hi - lo; }
  bool valid() const;
  // number of points in (a, b]
  std::size_t count_in(double a, double b) const;
};

// Piecewise-constant nonnegative rate on breaks[0] < ... < breaks[k].
struct IntensityProfile {
  std::vector<double> breaks;
  std::vector<double> rates;

  static IntensityProfile constant(double lo, double hi, double rate);
  double lo() const { return breaks.front(); }
  double hi() const { return breaks.back(); }
  double mass() const;
  bool valid() const;
};

PointSet sample(const IntensityProfile& prof, Rng& rng, bool circle = false);
PointSet sample_uniform(double lo, double hi, double rate, Rng& rng, bool circle = false);

enum class Scheme { delete_all, add_two_if_empty, add_or_delete };
const char* scheme_name(Scheme s);

// density = dẼ/dE evaluated at the input X; bound = the scheme's uniform bound
struct Modification {
  PointSet modified;
  double density = 0;
  double bound = 0;
};

Modification rn_delete_all(const PointSet& X, double alpha, double t);
Modification rn_add_two_if_empty(const PointSet& X, double alpha, double t, Rng& rng);
Modification rn_add_or_delete(const PointSet& X, double alpha, double t, Rng& rng);
Modification modify(Scheme s, const PointSet& X, double alpha, double t, Rng& rng);

// closed forms as functions of |X| and a = αt
double rn_density(Scheme s, std::size_t k, double a);
double rn_bound(Scheme s, double a);
// event that the modified process always lands in
bool scheme_event(Scheme s, const PointSet& X);

using Functional = std::function<double(const PointSet&)>;

struct ModificationReport {
  Scheme scheme;
  double alpha = 0, t = 0, c1 = 1, c2 = 1;
  Estimate lhs;  // E f(X)
  Estimate rhs;  // c1 c2 E[f(X) 1_A(X)]
  bool holds = false;
};

// E f(X) <= c1 c2 E[f(X) 1_A(X)], c1 a caller-supplied bound on f(X)/f(X~)
ModificationReport verify_modification_identity(const Functional& f, double c1, Scheme s, double alpha, double t,
                                                 std::size_t samples, Rng& rng);

struct RNReport {
  Estimate modified;  // E g(X~)
  Estimate weighted;  // E[D(X) g(X)]
  Estimate diff;      // paired difference
};

// Radon-Nikodym property on a common draw
RNReport verify_rn_identity(const Functional& g, Scheme s, double alpha, double t, std::size_t samples, Rng& rng);

// total variation between Poisson(αt) and the count of the Bernoulli slot
// process on {0, 1/n, .., floor(tn)/n} with success probability α/n
double bernoulli_slot_tv(int n, double alpha, double t);

}  // namespace tfim
