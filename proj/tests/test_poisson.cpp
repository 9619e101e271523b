#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "tfim/poisson.hpp"

using namespace tfim;

namespace {

PointSet points(double lo, double hi, std::vector<double> p) {
  PointSet X(lo, hi);
  X.pts = std::move(p);
  return X;
}

}  // namespace

TEST_SUITE("poisson") {
  TEST_CASE("zero intensity gives no points") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(sample_uniform(0, 3, 0.0, rng).empty());
  }

  TEST_CASE("mean count matches rate times length") {
    Rng rng(2);
    const double rate = 1.7, t = 2.5;
    RunningStats s;
    for (int i = 0; i < 40000; ++i) {
      PointSet X = sample_uniform(0, t, rate, rng);
      CHECK(X.valid());
      s.add(double(X.size()));
    }
    CHECK(std::abs(s.mean() - rate * t) <= 3 * s.stderr_mean());
    // Poisson variance equals the mean
    CHECK(std::abs(s.variance() - rate * t) < 0.1);
  }

  TEST_CASE("piecewise profile respects zero-rate pieces") {
    IntensityProfile prof{{0.0, 1.0, 2.0}, {3.0, 0.0}};
    REQUIRE(prof.valid());
    CHECK(prof.mass() == doctest::Approx(3.0));
    Rng rng(3);
    std::size_t total = 0;
    for (int i = 0; i < 2000; ++i) {
      PointSet X = sample(prof, rng);
      CHECK(X.count_in(1.0, 2.0) == 0);
      total += X.size();
    }
    CHECK(total > 0);
  }

  TEST_CASE("circle carriers stay half open") {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
      PointSet X = sample_uniform(-0.5, 0.5, 4.0, rng, true);
      CHECK(X.valid());
      for (double t : X.pts) {
        CHECK(t >= -0.5);
        CHECK(t < 0.5);
      }
    }
  }

  TEST_CASE("delete-all density") {
    CHECK(rn_delete_all(PointSet(0, 2), 1.0, 2.0).density == doctest::Approx(std::exp(2.0)));
    Modification m = rn_delete_all(points(0, 1, {0.3}), 1.0, 1.0);
    CHECK(m.modified.empty());
    CHECK(m.bound == doctest::Approx(std::exp(1.0)));
    CHECK(rn_delete_all(PointSet(0, 1), 0.0, 1.0).density == doctest::Approx(1.0));
  }

  TEST_CASE("add-two-if-empty density") {
    Rng rng(5);
    const double a = 0.8;
    CHECK(rn_add_two_if_empty(points(0, 1, {0.2}), a, 1.0, rng).density == doctest::Approx(1.0));
    CHECK(rn_add_two_if_empty(points(0, 1, {0.2, 0.7}), a, 1.0, rng).density ==
          doctest::Approx(1 + 2 / (a * a)));
    Modification m = rn_add_two_if_empty(PointSet(0, 1), a, 1.0, rng);
    CHECK(m.modified.size() == 2);
    CHECK(m.modified.valid());
    CHECK(m.bound == doctest::Approx(1 + 2 / (a * a)));
    CHECK_THROWS_AS(rn_add_two_if_empty(PointSet(0, 1), 0.0, 1.0, rng), std::domain_error);
  }

  TEST_CASE("add-or-delete density") {
    Rng rng(6);
    const double a = 1.3;
    CHECK(rn_add_or_delete(points(0, 1, {0.5}), a, 1.0, rng).density == doctest::Approx(1 / a + a / 2));
    CHECK(rn_add_or_delete(points(0, 1, {0.2, 0.5}), a, 1.0, rng).density == doctest::Approx(2 / a + a / 3));
    CHECK(rn_add_or_delete(points(0, 1, {0.1, 0.2, 0.3, 0.4, 0.5}), a, 1.0, rng).density ==
          doctest::Approx(a / 6));
    Modification m0 = rn_add_or_delete(PointSet(0, 1), a, 1.0, rng);
    CHECK(m0.modified.size() == 1);
    Modification m3 = rn_add_or_delete(points(0, 1, {0.1, 0.2, 0.3}), a, 1.0, rng);
    CHECK(m3.modified.size() == 2);
    CHECK(m3.bound == doctest::Approx(2 / a + a));
    for (std::size_t k = 0; k < 12; ++k) CHECK(rn_density(Scheme::add_or_delete, k, a) <= m3.bound + 1e-12);
    CHECK_THROWS_AS(rn_add_or_delete(PointSet(0, 1), 0.0, 1.0, rng), std::domain_error);
  }

  TEST_CASE("Radon-Nikodym property on a common draw") {
    // g depends on the count and the point positions, supported on <= 3 points
    Functional g = [](const PointSet& X) {
      if (X.size() > 3) return 0.0;
      double s = 1.0 + double(X.size());
      for (double t : X.pts) s += std::cos(3 * t);
      return s;
    };
    std::uint64_t seed = 70;
    for (Scheme s : {Scheme::delete_all, Scheme::add_two_if_empty, Scheme::add_or_delete})
      for (double at : {0.5, 1.0, 2.0}) {
        Rng rng(seed++);
        RNReport r = verify_rn_identity(g, s, at, 1.0, 60000, rng);
        CAPTURE(scheme_name(s));
        CAPTURE(at);
        CHECK(std::abs(r.diff.value) <= 3 * r.diff.se + 1e-12);
      }
  }

  TEST_CASE("modification inequality") {
    Rng rng(8);
    auto one = [](const PointSet&) { return 1.0; };
    auto zero = [](const PointSet&) { return 0.0; };
    auto count = [](const PointSet& X) { return double(X.size()); };
    auto r1 = verify_modification_identity(one, 1.0, Scheme::delete_all, 1.0, 1.0, 20000, rng);
    CHECK(r1.holds);
    auto r0 = verify_modification_identity(zero, 1.0, Scheme::delete_all, 1.0, 1.0, 1000, rng);
    CHECK(r0.lhs.value == 0.0);
    CHECK(r0.rhs.value == 0.0);
    // count changes by one under add-or-delete, count(X) <= 2 count(X~) for |X| >= 2
    auto r2 = verify_modification_identity(count, 3.0, Scheme::add_or_delete, 1.0, 1.0, 20000, rng);
    CHECK(r2.holds);
  }

  TEST_CASE("Bernoulli slot discretisation converges") {
    const double tv10 = bernoulli_slot_tv(10, 1.5, 1.0);
    const double tv100 = bernoulli_slot_tv(100, 1.5, 1.0);
    const double tv1000 = bernoulli_slot_tv(1000, 1.5, 1.0);
    CHECK(tv10 > tv100);
    CHECK(tv100 > tv1000);
    CHECK(tv1000 < 0.01);
  }
}
