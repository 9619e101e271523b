#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "tfim/spin_rep.hpp"
#include "tfim/trotter.hpp"

using namespace tfim;

namespace {

SamplingOptions opts(std::size_t n, std::uint64_t seed) {
  SamplingOptions o;
  o.n_samples = n;
  o.n_chains = 4;
  o.workers = 4;
  o.seed = seed;
  return o;
}

bool within(const Estimate& e, double exact, double k = 3.0) { return std::abs(e.value - exact) <= k * e.se + 1e-12; }

}  // namespace

TEST_SUITE("spin-rep") {
  TEST_CASE("a-priori measure without flips") {
    SpinSampler free(SpaceTimeRegion(Box(1, 1), 1.0, BC::f, BC::f), 0.0);
    SpinSampler wired_t(SpaceTimeRegion(Box(1, 1), 1.0, BC::f, BC::w), 0.0);
    Rng rng(1);
    int plus = 0, total = 0;
    for (int i = 0; i < 2000; ++i) {
      auto c = free.sample_apriori(rng);
      for (std::size_t x = 0; x < 3; ++x) {
        CHECK(c.sigma(x, -0.4) == c.sigma(x, 0.4));
        plus += c.sigma(x, 0.0) == 1;
        ++total;
      }
      auto w = wired_t.sample_apriori(rng);
      for (std::size_t x = 0; x < 3; ++x) CHECK(w.sigma(x, 0.1) == 1);
    }
    CHECK(std::abs(plus / double(total) - 0.5) < 3 * 0.5 / std::sqrt(double(total)));
  }

  TEST_CASE("flip rate under free time ends") {
    const double delta = 1.3, r = 2.0;
    SpinSampler s(SpaceTimeRegion(Box(1, 1), r, BC::f, BC::f), delta);
    Rng rng(2);
    RunningStats flips;
    for (int i = 0; i < 20000; ++i) flips.add(double(s.sample_apriori(rng).lines[1].flips.size()));
    CHECK(std::abs(flips.mean() - delta * r) <= 3 * flips.stderr_mean());
  }

  TEST_CASE("periodic and wired time ends force even flip counts") {
    Rng rng(3);
    for (BC t : {BC::p, BC::w}) {
      SpinSampler s(SpaceTimeRegion(Box(1, 1), 1.0, BC::f, t), 2.0);
      for (int i = 0; i < 500; ++i) {
        auto c = s.sample_apriori(rng);
        for (std::size_t x = 0; x < 3; ++x) {
          CHECK(c.lines[c.edges->to_outer[x]].flips.size() % 2 == 0);
          if (t == BC::w) CHECK(c.sigma(x, -0.5) == 1);
        }
      }
    }
  }

  TEST_CASE("Gibbs weight") {
    SpaceTimeRegion reg(Box(1, 1, BoxConvention::even_side), 2.0, BC::f, BC::f);
    SpinSampler s(reg, 1.0);
    SpinConfiguration c;
    c.region = reg;
    c.edges = s.edges();
    c.lines.assign(2, SpinLine{});
    CHECK(gibbs_weight(c, 0.0) == doctest::Approx(1.0));
    CHECK(gibbs_weight(c, 0.7) == doctest::Approx(std::exp(0.7 * 2.0)));
    c.lines[1].flips = {0.0};  // differ on half the time
    CHECK(gibbs_weight(c, 0.7) == doctest::Approx(1.0));
    CHECK(log_gibbs_weight(c, 0.7) <= log_gibbs_weight_max(reg, *s.edges(), 0.7) + 1e-12);
  }

  TEST_CASE("independent sites at zero coupling") {
    SpaceTimeRegion reg(Box(1, 1), 1.0, BC::f, BC::f);
    auto e = estimate_correlation({{1, 0.0}, {2, 0.2}}, reg, 0.0, 1.0, opts(20000, 4)).est;
    CHECK(within(e, 0.0));
    const double delta = 0.8;
    auto g = estimate_correlation({{1, -0.3}, {1, 0.2}}, reg, 0.0, delta, opts(20000, 5)).est;
    CHECK(within(g, std::exp(-2 * delta * 0.5)));
  }

  TEST_CASE("odd source sets vanish by spin flip symmetry") {
    for (BC t : {BC::f, BC::p}) {
      SpaceTimeRegion reg(Box(1, 1), 1.0, BC::f, t);
      CHECK(within(estimate_correlation({{1, 0.0}}, reg, 1.0, 1.0, opts(20000, 6)).est, 0.0));
    }
  }

  TEST_CASE("three-site chain matches the dense oracle") {
    oracle::Chain ch{3, false, false, 1.0, 1.0};
    for (BC t : {BC::f, BC::p, BC::w}) {
      SpaceTimeRegion reg(Box(1, 1), 1.0, BC::f, t);
      const double exact = oracle::correlation(ch, {{1, 0.0}, {2, 0.0}}, 1.0, t);
      auto e = estimate_correlation({{1, 0.0}, {2, 0.0}}, reg, 1.0, 1.0, opts(40000, 7)).est;
      CAPTURE(bc_char(t));
      CHECK(within(e, exact));
    }
  }

  TEST_CASE("wired magnetization matches the dense oracle") {
    oracle::Chain ch{3, false, true, 0.8, 1.0};
    SpaceTimeRegion reg(Box(1, 1), 1.5, BC::w, BC::p);
    const double exact = oracle::correlation(ch, {{1, 0.0}}, 1.5, BC::p);
    CHECK(exact > 0.0);
    CHECK(within(estimate_magnetization(reg, 0.8, 1.0, opts(40000, 8)).est, exact));
  }

  TEST_CASE("single site with wired time ends") {
    oracle::Chain ch{1, false, false, 0.0, 1.0};
    SpaceTimeRegion reg(Box(1, 0), 1.0, BC::f, BC::w);
    const double exact = oracle::correlation(ch, {{0, 0.0}}, 1.0, BC::w);
    CHECK(exact > 0.0);
    CHECK(within(estimate_correlation({{0, 0.0}}, reg, 0.0, 1.0, opts(20000, 9)).est, exact));
  }

  TEST_CASE("strong coupling ground-state magnetization") {
    // λ/δ = 4 at N = 6: the oracle value is far above one half
    auto reg = SpaceTimeRegion::ground(Box(1, 6), BC::w, BC::w);
    TrotterOptions o;
    o.sweeps = 400;
    o.thermalize = 100;
    o.workers = 4;
    o.seed = 10;
    auto m = trotter_magnetization(reg, 4.0, 1.0, o);
    CHECK(m.est.value > 0.5);
  }

  TEST_CASE("exp(-lambda L_J) trivial cases") {
    SpaceTimeRegion reg(Box(1, 1), 1.0, BC::f, BC::f);
    CHECK(estimate_exp_L({}, reg, 1.0, 1.0, opts(1000, 11)).est.value == doctest::Approx(1.0));
    CHECK(estimate_exp_L({{1, -0.2, 0.2}}, reg, 0.0, 1.0, opts(1000, 12)).est.value == doctest::Approx(1.0));
  }

  TEST_CASE("Griffiths inequality") {
    SpaceTimeRegion reg(Box(1, 1), 1.0, BC::w, BC::p);
    auto ab = estimate_correlation({{0, 0.0}, {2, 0.1}}, reg, 1.0, 1.0, opts(40000, 13)).est;
    auto a = estimate_correlation({{0, 0.0}}, reg, 1.0, 1.0, opts(40000, 14)).est;
    auto b = estimate_correlation({{2, 0.1}}, reg, 1.0, 1.0, opts(40000, 15)).est;
    auto prod = product_independent(a, b);
    CHECK(ab.value >= prod.value - 3 * std::hypot(ab.se, prod.se));
  }

  TEST_CASE("Trotter sampler approaches the oracle") {
    oracle::Chain ch{2, false, false, 1.0, 1.0};
    SpaceTimeRegion reg(Box(1, 1, BoxConvention::even_side), 1.0, BC::f, BC::p);
    const double exact = oracle::correlation(ch, {{0, 0.0}, {1, 0.3}}, 1.0, BC::p);
    TrotterOptions o;
    o.dtau = 0.02;
    o.sweeps = 8000;
    o.workers = 4;
    o.seed = 16;
    auto t = trotter_correlation({{0, 0.0}, {1, 0.3}}, reg, 1.0, 1.0, o);
    CHECK(t.dtau == doctest::Approx(0.02).epsilon(0.05));
    CHECK(std::abs(t.est.value - exact) <= 3 * t.est.se + 0.01);
  }
}
