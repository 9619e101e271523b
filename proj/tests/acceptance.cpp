// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Reference values come from the spectral oracle or closed forms; nothing is
// tuned to the expected answer.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "tfim/discrete_rpr.hpp"
#include "tfim/experiments.hpp"
#include "tfim/percolation.hpp"
#include "tfim/poisson.hpp"
#include "tfim/random_parity.hpp"
#include "tfim/spectral.hpp"
#include "tfim/spin_rep.hpp"

using namespace tfim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Criterion {
  int id;
  std::string title;
  bool pass = true;
  std::vector<std::string> notes;

  void note(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    notes.emplace_back(buf);
  }
  void require(bool ok, const char* f, auto... args) {
    pass = pass && ok;
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    notes.emplace_back(std::string(ok ? "ok   " : "FAIL ") + buf);
  }
};

std::vector<Criterion> results;

void report(Criterion& c) {
  std::printf("%s criterion %d: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.title.c_str());
  for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  results.push_back(c);
}

double z_of(const Estimate& a, const Estimate& b) {
  const double s = std::hypot(a.se, b.se);
  return s > 0 ? std::abs(a.value - b.value) / s : (a.value == b.value ? 0.0 : kInf);
}

RPROptions ropt(std::size_t n, std::uint64_t seed) {
  RPROptions o;
  o.n_samples = n;
  o.n_chains = 8;
  o.workers = 1;
  o.seed = seed;
  return o;
}

SamplingOptions sopt(std::size_t n, std::uint64_t seed) {
  SamplingOptions o;
  o.n_samples = n;
  o.n_chains = 8;
  o.workers = 1;
  o.seed = seed;
  return o;
}

void criterion1() {
  Criterion c{1, "oracle equivalence on 3-site chains (spin and random-parity estimators)"};
  const std::vector<STPoint> A{{1, 0.0}, {2, 0.0}};  // x = 0 and x = 1
  std::uint64_t seed = 1001;
  for (BC t : {BC::f, BC::p}) {
    SpaceTimeRegion reg(Box(1, 1), 1.0, BC::f, t);
    SpectralModel m(reg.box, reg.edge_mode(), 1.0, 1.0);
    const double exact = m.correlation(A, 1.0, t);
    auto t0 = Clock::now();
    auto s = estimate_correlation(A, reg, 1.0, 1.0, sopt(100000, seed++)).est;
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    auto r = estimate_rpr_correlation(A, reg, 1.0, 1.0, ropt(100000, seed++)).value;
    const double tr = seconds_since(t0);
    const double zs = z_of(s, {exact, 0}), zr = z_of(r, {exact, 0});
    c.require(zs <= 3 && ts <= 60, "bc f,%c spin   %.5f +- %.5f vs oracle %.5f (z=%.2f, %.1fs)", bc_char(t), s.value,
              s.se, exact, zs, ts);
    c.require(zr <= 3 && tr <= 60, "bc f,%c parity %.5f +- %.5f vs oracle %.5f (z=%.2f, %.1fs)", bc_char(t), r.value,
              r.se, exact, zr, tr);
  }
  report(c);
}

void criterion2() {
  Criterion c{2, "switching lemma: exact on slot systems, Monte Carlo in the continuum"};
  auto t0 = Clock::now();
  struct Case {
    const char* name;
    Box box;
    bool ground;
    int M;
  };
  const Case cases[] = {{"2 sites p/p M=3", Box(1, 1, BoxConvention::even_side), false, 3},
                        {"2 sites f/w M=4", Box(1, 1, BoxConvention::even_side), true, 4},
                        {"3 sites f/w M=3", Box(1, 1), true, 3}};
  for (const auto& k : cases) {
    DiscreteSystem sys(k.box, 1.0, k.ground, 1.0, k.M, 0.3, 0.3);
    double worst = 0;
    int n = 0;
    for (std::size_t y = 0; y < k.box.size(); ++y)
      for (int s = 1; s < k.M; ++s) {
        if (y == k.box.origin() && s == 1) continue;
        worst = std::max(worst, std::abs(discrete_switching(sys, {k.box.origin(), 1}, {y, s}, ConnMode::off_gamma).diff()));
        ++n;
      }
    c.require(worst <= 1e-12, "exact %s: %d choices of kappa, max |lhs-rhs| = %.2e", k.name, n, worst);
  }
  c.note("exact mode %.1fs", seconds_since(t0));
  t0 = Clock::now();
  CoupledSystem cs(Box(1, 1, BoxConvention::even_side), 1.0, false, 1.0, 1.0);
  std::uint64_t seed = 2001;
  for (STPoint kappa : {STPoint{1, 0.0}, STPoint{1, 0.3}, STPoint{0, 0.4}}) {
    auto S = verify_switching(cs, kappa, ropt(200000, seed++));
    c.require(S.holds, "continuum kappa=(%zu,%.1f): lhs %.5f +- %.5f, rhs %.5f +- %.5f, z=%.2f", kappa.site, kappa.t,
              S.lhs.value, S.lhs.se, S.rhs.value, S.rhs.se, S.z);
  }
  c.note("continuum mode %.1fs", seconds_since(t0));
  report(c);
}

void criterion3() {
  Criterion c{3, "infrared bound on even-side boxes with 4 and 6 sites"};
  auto t0 = Clock::now();
  for (int n : {2, 3})
    for (double beta : {1.0, 2.0}) {
      SpectralModel m(Box(1, n, BoxConvention::even_side), EdgeMode::periodic, 1.0, 1.0);
      IRBReport R = irb_check(m, beta, 100 * std::numbers::pi);
      c.require(R.worst_slack >= -1e-9 && R.passed,
                "%d sites beta=%g: %zu points, worst slack %.3e at (k=%.3f, l=%.3f), max imag %.1e", 2 * n, beta,
                R.points.size(), R.worst_slack, R.worst.k[0], R.worst.ell, R.max_imag);
    }
  const double ts = seconds_since(t0);
  c.require(ts <= 60, "runtime %.2fs", ts);
  report(c);
}

void criterion4() {
  Criterion c{4, "boundary-condition monotonicity f,f <= f,p <= w,p <= w,w"};
  const std::vector<STPoint> A{{2, 0.0}, {3, 0.2}};  // x = 0 and x = 1 in {-2..2}
  const BC order[4][2] = {{BC::f, BC::f}, {BC::f, BC::p}, {BC::w, BC::p}, {BC::w, BC::w}};
  std::vector<Estimate> e;
  std::uint64_t seed = 4001;
  for (auto& bc : order) {
    SpaceTimeRegion reg(Box(1, 2), 1.0, bc[0], bc[1]);
    SpectralModel m(reg.box, reg.edge_mode(), 1.0, 1.0);
    e.push_back(estimate_correlation(A, reg, 1.0, 1.0, sopt(100000, seed++)).est);
    c.note("%c,%c: %.5f +- %.5f (oracle %.5f)", bc_char(bc[0]), bc_char(bc[1]), e.back().value, e.back().se,
           m.correlation(A, 1.0, bc[1]));
  }
  for (int i = 0; i + 1 < 4; ++i) {
    const double gap = e[i + 1].value - e[i].value, se = std::hypot(e[i].se, e[i + 1].se);
    c.require(gap >= -3 * se, "step %d: difference %.5f, 3 SE = %.5f", i + 1, gap, 3 * se);
  }
  report(c);
}

void criterion5() {
  Criterion c{5, "connectivity equals product of free and wired correlations (2 sites)"};
  auto t0 = Clock::now();
  std::uint64_t seed = 5001;
  struct Case {
    bool ground;
    double r;
    STPoint a, b;
  };
  const Case cases[] = {{false, 1.0, {0, 0.0}, {1, 0.0}},
                        {false, 1.0, {0, 0.0}, {1, 0.3}},
                        {false, 1.0, {0, -0.2}, {0, 0.3}},
                        {true, 2.0, {0, 0.0}, {1, 0.0}}};
  for (const auto& k : cases) {
    CoupledSystem cs(Box(1, 1, BoxConvention::even_side), k.r, k.ground, 1.0, 1.0);
    auto P = connectivity_product_identity(cs, k.a, k.b, ropt(200000, seed++));
    c.require(P.holds, "%s (%zu,%.1f)-(%zu,%.1f): P %.5f +- %.5f, <>f <>w = %.5f x %.5f = %.5f +- %.5f, z=%.2f",
              k.ground ? "r=2 f/w" : "beta=1 p/p", k.a.site, k.a.t, k.b.site, k.b.t, P.p_conn.value, P.p_conn.se,
              P.corr_f.value, P.corr_w.value, P.product.value, P.product.se, P.z);
  }
  c.note("runtime %.1fs", seconds_since(t0));
  report(c);
}

void criterion6() {
  Criterion c{6, "local-modification bounds (A) and (B) on 2-site systems, beta = 1"};
  CoupledSystem cs(Box(1, 1, BoxConvention::even_side), 1.0, false, 1.0, 1.0);
  std::uint64_t seed = 6001;
  for (STPoint kappa : {STPoint{1, 0.0}, STPoint{1, 0.3}, STPoint{0, 0.4}}) {
    auto A = local_modification_A(cs, kappa, 1.0, ropt(200000, seed++));
    c.require(A.holds && A.holds_cx,
              "(A) kappa=(%zu,%.1f): C=%.4g, <>w-<>f %.5f +- %.5f <= C P(0<->G) = %.4g; E-form %.4g <= %.4g",
              kappa.site, kappa.t, A.C, A.difference.value, A.difference.se, A.C * A.p_gamma.value,
              A.lhs_cx.value, A.rhs_cx.value);
    // the finite-beta path covers |x|+1 whole lines, one more than the closed form counts
    const double C1 = A.C * std::exp(6.0);
    c.note("  counting |x|+1 lines: C=%.4g, C P(0<->G) = %.4g, E-form bound %.4g", C1, C1 * A.p_gamma.value,
           A.rhs_cx.value * C1 / A.C);
  }
  // K0 = {0} x [-r0/2, r0/2]; events only look at the configuration outside it
  const int N0 = 0;
  const double r0 = 0.5, h = 0.5 * r0;
  const std::vector<std::size_t> sites{0};
  auto outside = [h](double t) { return std::abs(t) > h; };
  struct Ev {
    const char* name;
    CoupledEvent f;
  };
  const std::vector<Ev> events{
      {"ghost point on site 1", [](const CoupledConfiguration& g) { return g.b2.ghosts[1].empty() ? 0.0 : 1.0; }},
      {"cut on site 1", [](const CoupledConfiguration& g) { return g.cuts[1].empty() ? 0.0 : 1.0; }},
      {"B bridge outside K0",
       [outside](const CoupledConfiguration& g) {
         for (double t : g.b1.bridges[0])
           if (outside(t)) return 1.0;
         return 0.0;
       }},
      {"no B^ bridge outside K0",
       [outside](const CoupledConfiguration& g) {
         for (double t : g.b2.bridges[0])
           if (outside(t)) return 0.0;
         return 1.0;
       }},
      {"even number of cuts on site 0 outside K0",
       [outside](const CoupledConfiguration& g) {
         int k = 0;
         for (double t : g.cuts[0]) k += outside(t);
         return k % 2 == 0 ? 1.0 : 0.0;
       }},
  };
  for (const auto& ev : events) {
    auto B = local_modification_B(cs, ev.f, N0, r0, sites, ropt(100000, seed++));
    c.require(B.holds, "(B) %s: P(A) %.5f +- %.5f <= c P(A and C) = %.4g x %.5f", ev.name, B.p_event.value,
              B.p_event.se, B.c, B.p_event_and_C.value);
  }
  report(c);
}

void criterion7() {
  Criterion c{7, "holes identity and event-probability identity (d = 1, <= 3 sites)"};
  std::uint64_t seed = 7001;
  {
    SpaceTimeRegion reg(Box(1, 1), 1.0, BC::f, BC::f);
    SpaceTimeRegion two(Box(1, 1, BoxConvention::even_side), 1.0, BC::f, BC::w);
    struct Case {
      const char* name;
      IntervalSet J;
      const SpaceTimeRegion* reg;
    };
    const Case cases[] = {{"3 sites f,f, J = {0}x[-0.25,0.25]", {{1, -0.25, 0.25}}, &reg},
                          {"2 sites f,w, two intervals", {{0, -0.3, 0.0}, {1, 0.1, 0.2}}, &two}};
    for (const auto& k : cases) {
      auto H = holes_identity_check(k.J, *k.reg, 1.0, 1.0, ropt(200000, seed++));
      c.require(H.holds, "holes, %s: E_K' %.5f +- %.5f vs e^{-2d|J|} E[. 1{even}] %.5f +- %.5f (z=%.2f)", k.name,
                H.lhs.value, H.lhs.se, H.rhs.value, H.rhs.se, H.z);
      c.note("  with bridge-removal factor %.4f: %.5f +- %.5f (z=%.2f)", H.factor, H.factor * H.rhs.value,
             H.factor * H.rhs.se, H.z_corrected);
    }
  }
  {
    SpaceTimeRegion reg(Box(1, 1), 1.0, BC::f, BC::f);
    IntervalSet J{{1, -0.25, 0.25}};
    auto E = event_probability_identity(J, reg, 1.0, 1.0, ropt(200000, seed++));
    c.require(E.holds, "event probability, c(J) form: P(even in J) %.5f +- %.5f vs c(J)=%.4f x mu = %.5f +- %.5f (z=%.2f)",
              E.lhs.value, E.lhs.se, E.cJ, E.rhs.value, E.rhs.se, E.z);
    c.note("  segment form Z'(K')/Z(K): P(even in J) %.5f vs %.5f +- %.5f (z=%.2f)", E.lhs.value, E.rhs_holes.value,
           E.rhs_holes.se, E.z_holes);
  }
  report(c);
}

void criterion8() {
  Criterion c{8, "Radon-Nikodym densities of the three modification schemes"};
  Functional g = [](const PointSet& X) {
    if (X.size() > 3) return 0.0;
    double s = 1.0 + 0.5 * double(X.size());
    for (double t : X.pts) s += t * t;
    return s;
  };
  Functional f = [](const PointSet& X) { return std::exp(-0.5 * double(X.size())); };
  std::uint64_t seed = 8001;
  for (Scheme s : {Scheme::delete_all, Scheme::add_two_if_empty, Scheme::add_or_delete})
    for (double at : {0.5, 1.0, 2.0}) {
      Rng rng(seed++);
      RNReport r = verify_rn_identity(g, s, at, 1.0, 200000, rng);
      const double z = r.diff.se > 0 ? std::abs(r.diff.value) / r.diff.se : 0.0;
      c.require(z <= 3, "%-16s at=%.1f: E g(X~) %.5f vs E[D g] %.5f, paired diff %.2e +- %.1e (z=%.2f)",
                scheme_name(s), at, r.modified.value, r.weighted.value, r.diff.value, r.diff.se, z);
      // f(X)/f(X~) <= e^{1/2} when the count changes by one; e^{1} when two points are added
      Rng rng2(seed++);
      const double c1 = s == Scheme::add_two_if_empty ? 1.0 : std::exp(0.5);
      auto M = verify_modification_identity(f, s == Scheme::delete_all ? 1.0 : c1, s, at, 1.0, 100000, rng2);
      c.require(M.holds, "%-16s at=%.1f: E f %.5f <= c1 c2 E[f 1_A] = %.5f", scheme_name(s), at, M.lhs.value,
                M.rhs.value);
    }
  report(c);
}

void criterion9() {
  Criterion c{9, "d = 1 ground-state critical point from wired-magnetization crossings"};
  auto t0 = Clock::now();
  GapScan G = gap_scan_reference(10, 1.0);
  for (std::size_t i = 0; i < G.crossings.size(); ++i)
    c.note("gap scan L=%zu/%zu: lambda/delta = %.4f", 4 + 2 * i, 6 + 2 * i, G.crossings[i]);
  c.require(std::abs(G.best - 1.0) < 0.02, "oracle reference lambda_c/delta = %.4f (%.1fs)", G.best,
            seconds_since(t0));
  t0 = Clock::now();
  RunConfig cfg = parse_config(
      "kind = magnetization-sweep\nd = 1\nN = 3, 4, 5, 6\nbeta = inf\nspace = w\ntime = w\n"
      "lambda = 0.8:1.2:0.05\ndelta = 1\nmethod = trotter\ndtau = 0.05\nsweeps = 3000\nn_chains = 4\n"
      "crossing = true\nseed = 9001\n");
  try {
    LambdaCReport L = estimate_lambda_c_1d(cfg);
    const double t = seconds_since(t0);
    for (std::size_t i = 0; i < L.crossings.size(); ++i)
      c.note("pair N=%d/%d crosses at %.4f", cfg.N[i], cfg.N[i + 1], L.crossings[i]);
    c.require(std::abs(L.estimate - G.best) <= 0.15 * G.best, "estimate %.4f +- %.4f, reference %.4f", L.estimate,
              L.uncertainty, G.best);
    c.require(t <= 1800, "runtime %.1fs", t);
  } catch (const EstimationError& e) {
    c.require(false, "estimation failed: %s", e.what());
  }
  report(c);
}

void criterion10() {
  Criterion c{10, "percolation leaf bound on d = 1, N = 4, r = 8"};
  auto t0 = Clock::now();
  CoupledSystem cs(Box(1, 4), 8.0, true, 1.0, 1.0);
  MCMCOptions o;
  o.n_draws = 10000;
  o.workers = 1;
  o.seed = 10001;
  TrifurcationReport T = trifurcation_diagnostic(cs, 0, 1.0, o);
  c.require(T.per_config_holds && T.draws == 10000, "per configuration: %zu violations in %zu draws (%zu probes, %zu clipped)",
            T.violations, T.draws, T.probes_per_draw, T.clipped_per_draw);
  c.note("mean trifurcations %.4f +- %.4f", T.n_trifurcations.value, T.n_trifurcations.se);
  c.require(T.expectation_holds, "E[boundary intervals] %.3f +- %.3f vs bound 2(2N+1)+4 delta r = %.1f",
            T.n_boundary_intervals.value, T.n_boundary_intervals.se, T.leaf_bound);
  c.note("acceptance rates %.3f / %.3f, runtime %.1fs", T.acceptance1, T.acceptance2, seconds_since(t0));
  report(c);
}

void criterion11() {
  Criterion c{11, "determinism: identical config and seed give identical CSV bytes"};
  const char* cfgs[] = {
      "kind = correlation\nN = 1\nbeta = 1\npoints = 0@0; 1@0.2\nmethod = spin\nn_samples = 20000\nseed = 11\n",
      "kind = correlation\nN = 1\nbeta = 1\npoints = 0@0; 1@0.2\nmethod = rpr\nn_samples = 20000\nseed = 12\n",
      "kind = magnetization-sweep\nN = 2, 3\nbeta = inf\nspace = w\ntime = w\nlambda = 0.8, 1.2\nmethod = trotter\n"
      "sweeps = 200\nseed = 13\n",
      "kind = percolation-sweep\nN = 1\nbeta = 1\ntime = p\nlambda = 0.2, 0.6, 1.0\nn_samples = 500\ntrifurcations = true\n"
      "seed = 14\n",
      "kind = identity-suite\nconvention = even-side\nN = 1\nbeta = 1\ntime = p\nn_samples = 5000\nseed = 15\n"};
  for (const char* text : cfgs) {
    RunConfig a = parse_config(text);
    RunConfig b = a;
    b.workers = 3;
    auto csv = [](const RunResult& r) {
      std::string s;
      for (const auto& t : r.tables) s += to_csv(t);
      return s;
    };
    const std::string x = csv(run_experiment(a)), y = csv(run_experiment(a)), z = csv(run_experiment(b));
    c.require(x == y && x == z, "%s: %zu bytes, repeat %s, 3 workers %s", kind_name(a.kind), x.size(),
              x == y ? "identical" : "DIFFERENT", x == z ? "identical" : "DIFFERENT");
  }
  report(c);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::function<void()>> all{criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
                                         criterion7, criterion8, criterion9, criterion10, criterion11};
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), int(i + 1)) == only.end()) continue;
    try {
      all[i]();
    } catch (const std::exception& e) {
      Criterion c{int(i + 1), "error"};
      c.require(false, "%s", e.what());
      report(c);
    }
  }
  int failed = 0;
  for (const auto& c : results) failed += !c.pass;
  std::printf("%zu criteria run, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
