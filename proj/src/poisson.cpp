#include "tfim/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tfim {

bool PointSet::valid() const {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i] < lo || pts[i] > hi || (circle && pts[i] >= hi)) return false;
    if (i > 0 && !(pts[i] > pts[i - 1])) return false;
  }
  return true;
}

std::size_t PointSet::count_in(double a, double b) const {
  auto i = std::upper_bound(pts.begin(), pts.end(), a);
  auto j = std::upper_bound(pts.begin(), pts.end(), b);
  return j > i ? static_cast<std::size_t>(j - i) : 0;
}

IntensityProfile IntensityProfile::constant(double lo, double hi, double rate) {
  return {{lo, hi}, {rate}};
}

double IntensityProfile::mass() const {
  double m = 0;
  for (std::size_t i = 0; i < rates.size(); ++i) m += rates[i] * (breaks[i + 1] - breaks[i]);
  return m;
}

bool IntensityProfile::valid() const {
  if (breaks.size() != rates.size() + 1 || rates.empty()) return false;
  for (std::size_t i = 0; i < rates.size(); ++i)
    if (!(breaks[i + 1] >= breaks[i]) || !(rates[i] >= 0) || !std::isfinite(rates[i])) return false;
  return true;
}

PointSet sample(const IntensityProfile& prof, Rng& rng, bool circle) {
  if (!prof.valid()) throw std::invalid_argument("invalid intensity profile");
  PointSet X(prof.lo(), prof.hi(), circle);
  for (;;) {
    X.pts.clear();
    for (std::size_t i = 0; i < prof.rates.size(); ++i) {
      const double a = prof.breaks[i], b = prof.breaks[i + 1], rate = prof.rates[i];
      if (rate == 0 || b <= a) continue;
      // exponential gaps
      double s = a + rng.exponential(rate);
      while (s < b) {
        X.pts.push_back(s);
        s += rng.exponential(rate);
      }
    }
    // coincident times have probability zero; redraw if rounding produced one
    if (X.valid()) return X;
  }
}

PointSet sample_uniform(double lo, double hi, double rate, Rng& rng, bool circle) {
  return sample(IntensityProfile::constant(lo, hi, rate), rng, circle);
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::delete_all: return "delete_all";
    case Scheme::add_two_if_empty: return "add_two_if_empty";
    case Scheme::add_or_delete: return "add_or_delete";
  }
  return "?";
}

double rn_density(Scheme s, std::size_t k, double a) {
  switch (s) {
    case Scheme::delete_all: return k == 0 ? std::exp(a) : 0.0;
    case Scheme::add_two_if_empty:
      if (a <= 0) throw std::domain_error("degenerate rate: alpha*t = 0");
      return k == 0 ? 0.0 : 1.0 + (k == 2 ? 2.0 / (a * a) : 0.0);
    case Scheme::add_or_delete: {
      if (a <= 0) throw std::domain_error("degenerate rate: alpha*t = 0");
      if (k == 0) return 0.0;
      double d = a / static_cast<double>(k + 1);
      if (k == 1) d += 1.0 / a;
      if (k == 2) d += 2.0 / a;
      return d;
    }
  }
  return 0;
}

double rn_bound(Scheme s, double a) {
  switch (s) {
    case Scheme::delete_all: return std::exp(a);
    case Scheme::add_two_if_empty: return 1.0 + 2.0 / (a * a);
    case Scheme::add_or_delete: return 2.0 / a + a;
  }
  return 0;
}

bool scheme_event(Scheme s, const PointSet& X) {
  return s == Scheme::delete_all ? X.empty() : !X.empty();
}

static void insert_sorted(PointSet& X, double v) {
  auto it = std::lower_bound(X.pts.begin(), X.pts.end(), v);
  X.pts.insert(it, v);
}

static double fresh_point(const PointSet& X, Rng& rng) {
  for (;;) {
    double v = rng.uniform(X.lo, X.hi);
    if (!std::binary_search(X.pts.begin(), X.pts.end(), v)) return v;
  }
}

Modification rn_delete_all(const PointSet& X, double alpha, double t) {
  Modification m;
  m.modified = PointSet(X.lo, X.hi, X.circle);
  m.density = rn_density(Scheme::delete_all, X.size(), alpha * t);
  m.bound = rn_bound(Scheme::delete_all, alpha * t);
  return m;
}

Modification rn_add_two_if_empty(const PointSet& X, double alpha, double t, Rng& rng) {
  Modification m;
  m.density = rn_density(Scheme::add_two_if_empty, X.size(), alpha * t);
  m.bound = rn_bound(Scheme::add_two_if_empty, alpha * t);
  m.modified = X;
  if (X.empty()) {
    insert_sorted(m.modified, fresh_point(m.modified, rng));
    insert_sorted(m.modified, fresh_point(m.modified, rng));
  }
  return m;
}

Modification rn_add_or_delete(const PointSet& X, double alpha, double t, Rng& rng) {
  Modification m;
  m.density = rn_density(Scheme::add_or_delete, X.size(), alpha * t);
  m.bound = rn_bound(Scheme::add_or_delete, alpha * t);
  m.modified = X;
  if (X.size() <= 1)
    insert_sorted(m.modified, fresh_point(m.modified, rng));
  else
    m.modified.pts.erase(m.modified.pts.begin() + static_cast<long>(rng.below(X.size())));
  return m;
}

Modification modify(Scheme s, const PointSet& X, double alpha, double t, Rng& rng) {
  switch (s) {
    case Scheme::delete_all: return rn_delete_all(X, alpha, t);
    case Scheme::add_two_if_empty: return rn_add_two_if_empty(X, alpha, t, rng);
    case Scheme::add_or_delete: return rn_add_or_delete(X, alpha, t, rng);
  }
  throw std::logic_error("bad scheme");
}

ModificationReport verify_modification_identity(const Functional& f, double c1, Scheme s, double alpha, double t,
                                                 std::size_t samples, Rng& rng) {
  ModificationReport rep;
  rep.scheme = s;
  rep.alpha = alpha;
  rep.t = t;
  rep.c1 = c1;
  rep.c2 = rn_bound(s, alpha * t);
  RunningStats l, r;
  for (std::size_t i = 0; i < samples; ++i) {
    PointSet X = sample_uniform(0, t, alpha, rng);
    double v = f(X);
    l.add(v);
    r.add(scheme_event(s, X) ? v : 0.0);
  }
  rep.lhs = l.estimate();
  rep.rhs = r.estimate();
  const double c = rep.c1 * rep.c2;
  rep.rhs.value *= c;
  rep.rhs.se *= c;
  rep.holds = rep.lhs.value <= rep.rhs.value + 3 * std::hypot(rep.lhs.se, rep.rhs.se);
  return rep;
}

RNReport verify_rn_identity(const Functional& g, Scheme s, double alpha, double t, std::size_t samples, Rng& rng) {
  RunningStats a, b, d;
  for (std::size_t i = 0; i < samples; ++i) {
    PointSet X = sample_uniform(0, t, alpha, rng);
    Modification m = modify(s, X, alpha, t, rng);
    double ga = g(m.modified), gb = m.density * g(X);
    a.add(ga);
    b.add(gb);
    d.add(ga - gb);
  }
  return {a.estimate(), b.estimate(), d.estimate()};
}

double bernoulli_slot_tv(int n, double alpha, double t) {
  if (n < 1) throw std::invalid_argument("need at least one slot per unit time");
  const long m = static_cast<long>(std::floor(t * n)) + 1;
  const double p = alpha / n, mu = alpha * t;
  if (p > 1) throw std::invalid_argument("slot probability exceeds one");
  double tv = 0, pois_mass = 0;
  for (long k = 0; k <= m; ++k) {
    double lp = -mu + k * std::log(mu) - std::lgamma(k + 1.0);
    double pk = mu > 0 ? std::exp(lp) : (k == 0 ? 1.0 : 0.0);
    double lb = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
    double bk;
    if (p == 0) bk = k == 0;
    else if (p == 1) bk = k == m;
    else bk = std::exp(lb + k * std::log(p) + (m - k) * std::log1p(-p));
    tv += std::abs(pk - bk);
    pois_mass += pk;
  }
  tv += std::max(0.0, 1.0 - pois_mass);  // Poisson mass beyond m
  return 0.5 * tv;
}

}  // namespace tfim
