#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "tfim/percolation.hpp"

using namespace tfim;

namespace {

CoupledConfiguration bare(const CoupledSystem& cs) {
  CoupledConfiguration c;
  c.cs = &cs;
  const std::size_t n = cs.sys.n_sites();
  c.b1.bridges.assign(cs.sys.edges.edges.size(), {});
  c.b2.bridges.assign(cs.sys.edges.edges.size(), {});
  c.b2.ghosts.assign(n, {});
  c.tau1.assign(n, 0);
  c.tau2.assign(n, 0);
  c.cuts.assign(n, {});
  relabel(c, {}, {});
  return c;
}

RPROptions ropts(std::size_t n, std::uint64_t seed) {
  RPROptions o;
  o.n_samples = n;
  o.n_chains = 4;
  o.workers = 4;
  o.seed = seed;
  return o;
}

MCMCOptions mopts(std::size_t n, std::uint64_t seed) {
  MCMCOptions o;
  o.n_draws = n;
  o.workers = 4;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_SUITE("percolation") {
  TEST_CASE("fully bridged configuration is one cluster") {
    CoupledSystem cs(Box(1, 1), 1.0, false, 1.0, 1.0, false);
    CoupledConfiguration c = bare(cs);
    for (auto& e : c.b1.bridges) e = {-0.2, 0.2};
    relabel(c, {}, {});
    REQUIRE(std::isfinite(c.log_weight));
    ClusterReport R = cluster_report(c, 0, 0.5);
    CHECK(R.n_clusters == 1);
    CHECK(R.boundary_touching == 1);
    CHECK(R.total_measure == doctest::Approx(3.0));
    CHECK(R.largest_cluster_measure == doctest::Approx(3.0));
  }

  TEST_CASE("even-even cuts split every line") {
    CoupledSystem cs(Box(1, 1), 2.0, false, 0.0, 1.0, false);
    CoupledConfiguration c = bare(cs);
    for (auto& L : c.cuts) L = {-0.5, 0.5};  // two cuts on a circle, two intervals per site
    ClusterReport R = cluster_report(c, 0, 0.5);
    CHECK(R.n_clusters == 6);
    CHECK(R.boundary_touching <= R.n_clusters);
    CHECK(R.largest_cluster_measure == doctest::Approx(1.0));
    CHECK_FALSE(R.origin_to_ghost);
  }

  TEST_CASE("trifurcation trivial cases") {
    CoupledSystem cs(Box(1, 4), 8.0, true, 0.0, 1.0);
    CoupledConfiguration c = bare(cs);
    auto T0 = count_trifurcations(c, 0, 1.0);
    CHECK(T0.n_trifurcations == 0);
    CHECK(T0.n_probes > 0);
    for (auto& e : c.b1.bridges) e = {-1.0, 1.0};
    relabel(c, {}, {});
    CHECK(count_trifurcations(c, 0, 1.0).n_trifurcations == 0);
    // every line is one boundary interval (it contains ±r/2), so n = 9
    CHECK(boundary_interval_count(cs, c.cuts) == 9);
  }

  TEST_CASE("per-configuration leaf bound on a short run") {
    CoupledSystem cs(Box(1, 4), 8.0, true, 1.0, 1.0);
    auto T = trifurcation_diagnostic(cs, 0, 1.0, mopts(400, 1));
    CHECK(T.draws == 400);
    CHECK(T.violations == 0);
    CHECK(T.per_config_holds);
    CHECK(T.leaf_bound == doctest::Approx(2 * 9 + 4 * 8.0));
  }

  TEST_CASE("MCMC agrees with importance sampling") {
    CoupledSystem cs(Box(1, 1, BoxConvention::even_side), 1.0, false, 1.0, 1.0);
    PercolationPoint mc = percolation_point(cs, mopts(20000, 2));
    const STPoint o{cs.sys.box.origin(), 0.0};
    auto is = p_bar(cs, {[&](const CoupledConfiguration& c) { return connected_to_gamma(c, o) ? 1.0 : 0.0; }},
                    ropts(100000, 3));
    CHECK(std::abs(mc.p_origin_ghost.value - is[0].value) <= 3 * std::hypot(mc.p_origin_ghost.se, is[0].se));
  }

  TEST_CASE("ghost connectivity grows with the coupling") {
    CoupledSystem lo(Box(1, 1), 1.0, false, 0.2, 1.0), hi(Box(1, 1), 1.0, false, 1.0, 1.0);
    auto a = percolation_point(lo, mopts(5000, 4)).p_origin_ghost;
    auto b = percolation_point(hi, mopts(5000, 5)).p_origin_ghost;
    CHECK(b.value >= a.value - 3 * std::hypot(a.se, b.se));
  }

  TEST_CASE("two-point connectivity") {
    CoupledSystem cs(Box(1, 1, BoxConvention::even_side), 1.0, false, 1.0, 1.0);
    const STPoint a{0, 0.0};
    CHECK(two_point_connectivity(cs, a, a, ropts(1000, 6)).value == doctest::Approx(1.0));
    CoupledSystem z(Box(1, 1, BoxConvention::even_side), 1.0, false, 0.0, 1.0, false);
    CHECK(two_point_connectivity(z, a, {1, 0.0}, ropts(1000, 7)).value == 0.0);
  }

  TEST_CASE("connectivity equals the product of correlations") {
    CoupledSystem cs(Box(1, 1, BoxConvention::even_side), 1.0, false, 1.0, 1.0);
    auto P = connectivity_product_identity(cs, {0, 0.0}, {1, 0.2}, ropts(100000, 8));
    CHECK(P.holds);
  }
}
