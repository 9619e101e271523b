#include <stdexcept>
#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "tfim/geometry.hpp"
#include "tfim/rng.hpp"
#include "tfim/stats.hpp"

using namespace tfim;

TEST_SUITE("geometry") {
  TEST_CASE("l1 norm") {
    CHECK(l1_norm(std::vector<int>{0, 0, 0}) == 0.0);
    CHECK(l1_norm(SpaceTimePoint{{1, -2}, 0.5}) == doctest::Approx(3.5));
    CHECK(l1_norm(SpaceTimePoint{{0, 0}, -1.25}) == doctest::Approx(1.25));
  }

  TEST_CASE("graph laplacian transform") {
    const double pi = std::numbers::pi;
    CHECK(graph_laplacian_ft({0.0}) == 0.0);
    CHECK(graph_laplacian_ft({pi}) == doctest::Approx(2.0));
    CHECK(graph_laplacian_ft({pi / 2, pi / 2}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(graph_laplacian_ft({-pi}), std::domain_error);
    CHECK_THROWS_AS(graph_laplacian_ft({4.0}), std::domain_error);
    // even, and zero only at the origin
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> p{rng.uniform(-pi, pi) + 1e-12, rng.uniform(-pi, pi) + 1e-12};
      std::vector<double> q{-p[0], p[1]};
      CHECK(graph_laplacian_ft(p) == doctest::Approx(graph_laplacian_ft(q)));
      CHECK(graph_laplacian_ft(p) > 0.0);
      CHECK(graph_laplacian_ft(p) <= 4.0);
    }
  }

  TEST_CASE("box conventions") {
    Box s(1, 2), e(1, 2, BoxConvention::even_side);
    CHECK(s.size() == 5);
    CHECK(e.size() == 4);
    CHECK(s.lo() == -2);
    CHECK(e.lo() == -1);
    Box b(2, 2);
    CHECK(b.size() == 25);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.index(b.coords(i)) == i);
    CHECK(b.coords(b.origin()) == std::vector<int>{0, 0});
    CHECK_THROWS_AS(b.index({3, 0}), std::out_of_range);
  }

  TEST_CASE("boundary and inner box partition the box") {
    for (int d = 1; d <= 3; ++d) {
      Box b(d, 2);
      Box inner(d, 1);
      std::set<std::size_t> bd;
      for (auto i : b.boundary()) bd.insert(i);
      std::size_t n_inner = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        auto x = b.coords(i);
        const bool in_inner = inner.contains(x);
        CHECK(in_inner != (bd.count(i) == 1));
        CHECK(b.on_boundary(i) == (bd.count(i) == 1));
        n_inner += in_inner;
      }
      CHECK(n_inner + bd.size() == b.size());
    }
  }

  TEST_CASE("exterior neighbours") {
    Box b(2, 1);
    CHECK(b.exterior_neighbours(b.index({0, 0})) == 0);
    CHECK(b.exterior_neighbours(b.index({1, 0})) == 1);
    CHECK(b.exterior_neighbours(b.index({1, 1})) == 2);
    Box one(1, 0, BoxConvention::symmetric);
    CHECK(one.exterior_neighbours(0) == 2);
  }

  TEST_CASE("edge counts") {
    for (int d = 1; d <= 3; ++d)
      for (int n = 1; n <= 2; ++n) {
        Box b(d, n);
        const std::size_t side = 2 * n + 1;
        std::size_t vol = 1;
        for (int j = 0; j < d; ++j) vol *= side;
        CHECK(EdgeSet(b, EdgeMode::periodic).edges.size() == d * vol);
        CHECK(EdgeSet(b, EdgeMode::free).edges.size() == d * vol / side * (side - 1));
      }
    Box b(1, 1);
    EdgeSet w(b, EdgeMode::wired);
    CHECK(w.n_sites() == 5);
    CHECK(w.edges.size() == 4);
    std::size_t frozen = 0;
    for (char f : w.frozen) frozen += f;
    CHECK(frozen == 2);
  }

  TEST_CASE("regions") {
    Box b(1, 3);
    auto g = SpaceTimeRegion::ground(b, BC::w, BC::w);
    CHECK(g.r == 6.0);
    CHECK(g.ground_state);
    CHECK(g.edge_mode() == EdgeMode::wired);
    auto f = SpaceTimeRegion::finite(b, 1.5, BC::f, BC::p);
    CHECK(f.r == 1.5);
    CHECK(f.circle());
    CHECK_THROWS(SpaceTimeRegion(b, 0.0, BC::f, BC::f));
    CHECK(parse_bc('w') == BC::w);
    CHECK(bc_char(BC::p) == 'p');
  }

  TEST_CASE("dual lattice") {
    const double pi = std::numbers::pi;
    DualLattice L(Box(1, 2, BoxConvention::even_side), 2.0, 3);
    auto k = L.momenta();
    REQUIRE(k.size() == 4);
    std::set<long> seen;
    for (auto& v : k) {
      CHECK(v[0] > -pi);
      CHECK(v[0] <= pi + 1e-12);
      seen.insert(std::lround(v[0] * 2 / pi));
    }
    CHECK(seen == std::set<long>{-1, 0, 1, 2});
    CHECK(L.frequencies(true).size() == 7);
    CHECK(L.frequencies(false).size() == 6);
    CHECK(DualLattice::m_for_cutoff(1.0, 100 * pi) == 50);
    CHECK_THROWS(DualLattice(Box(1, 2), 1.0, 2));
  }
}

TEST_SUITE("geometry") {
  TEST_CASE("running stats merge equals pooled") {
    Rng rng(11);
    RunningStats all, a, b, c;
    for (int i = 0; i < 3000; ++i) {
      const double x = rng.uniform() * 10 - 3 + (i % 7);
      all.add(x);
      (i < 1000 ? a : i < 2200 ? b : c).add(x);
    }
    a.merge(b);
    a.merge(c);
    CHECK(a.count() == all.count());
    CHECK(std::abs(a.mean() - all.mean()) < 1e-12);
    CHECK(std::abs(a.variance() - all.variance()) < 1e-12 * all.variance());
  }

  TEST_CASE("stream seeds are distinct and reproducible") {
    std::set<std::uint64_t> s;
    for (std::uint64_t i = 0; i < 1000; ++i) s.insert(stream_seed(42, i));
    CHECK(s.size() == 1000);
    Rng a(5, 3), b(5, 3);
    for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  }
}
