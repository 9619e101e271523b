#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "tfim/experiments.hpp"

using namespace tfim;

TEST_SUITE("experiments") {
  TEST_CASE("key = value config") {
    RunConfig c = parse_config(R"(
# comment
[region]
kind = magnetization-sweep
d = 1
N = 2, 3, 4
beta = inf
space = w
time = w
[model]
lambda = 0.25:2.0:0.25
delta = 1
seed = 12345
)");
    CHECK(c.kind == Kind::magnetization_sweep);
    CHECK(c.N == std::vector<int>{2, 3, 4});
    CHECK(c.ground);
    CHECK(c.r_for(3) == 6.0);
    REQUIRE(c.lambda.size() == 8);
    CHECK(c.lambda.back() == doctest::Approx(2.0));
    CHECK(c.seed_value() == 12345);
  }

  TEST_CASE("JSON config") {
    RunConfig c = parse_config(R"({"kind": "correlation", "N": [1], "beta": 1.0, "points": [[0, 0.0], [1, 0.25]],
                                   "lambda": [1.0], "seed": 9})");
    CHECK(c.kind == Kind::correlation);
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[1].x == std::vector<int>{1});
    CHECK(c.points[1].t == doctest::Approx(0.25));
  }

  TEST_CASE("invalid configs") {
    CHECK_THROWS_AS(parse_config("kind = correlation\nlambda =\npoints = 0@0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind = correlation\nlambda = 1, 0.5\npoints = 0@0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind = correlation\nN = 3, 2\npoints = 0@0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind = nonsense\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind = correlation\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind = correlation\n"), ConfigError);  // no points
    CHECK_THROWS_AS(parse_config("kind = correlation\nbeta = inf\ntime = p\npoints = 0@0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
    // a config without a seed parses but cannot run
    RunConfig c = parse_config("kind = correlation\npoints = 0@0\n");
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
  }

  TEST_CASE("formatting") {
    CHECK(fmt(0.1) == "0.1");
    CHECK(fmt(1.0 / 3) == "0.333333333333");
    CHECK(fmt(std::nan("")) == "nan");
    ResultTable t{"t", {"a", "b"}, {}};
    t.add({"1", "x,y"});
    CHECK(to_csv(t) == "a,b\n1,\"x,y\"\n");
    CHECK_THROWS(t.add({"1"}));
  }

  TEST_CASE("oracle correlation run") {
    RunConfig c = parse_config("kind = correlation\nN = 1\nbeta = 1\npoints = 0@0; 1@0\nmethod = oracle\nseed = 1\n");
    RunResult r = run_experiment(c);
    REQUIRE(r.tables.size() == 1);
    REQUIRE(r.tables[0].rows.size() == 1);
    CHECK(r.ok());
  }

  TEST_CASE("identical seeds give identical bytes") {
    const char* cfg = "kind = correlation\nN = 1\nbeta = 1\npoints = 0@0; 1@0\nmethod = rpr\nn_samples = 4000\n"
                      "n_chains = 4\nseed = 77\n";
    RunConfig a = parse_config(cfg), b = parse_config(cfg);
    b.workers = 3;  // scheduling must not matter
    const std::string x = to_csv(run_experiment(a).tables[0]);
    const std::string y = to_csv(run_experiment(b).tables[0]);
    CHECK(x == y);
    a.seed = 78;
    CHECK(to_csv(run_experiment(a).tables[0]) != x);
  }

  TEST_CASE("exact switching suite passes") {
    RunConfig c = parse_config("kind = switching-verify\nmode = exact\nslots = 3\nseed = 1\n");
    RunResult r = run_experiment(c);
    CHECK(r.ok());
    for (const auto& row : r.tables[0].rows) CHECK(row.back() == "true");
  }

  TEST_CASE("crossing analysis needs two sizes") {
    RunConfig c = parse_config("kind = magnetization-sweep\nN = 2\nbeta = inf\nspace = w\ntime = w\n"
                               "lambda = 0.5, 1.5\nmethod = oracle\nseed = 1\n");
    CHECK_THROWS_AS(estimate_lambda_c_1d(c), EstimationError);
    c.crossing = true;
    RunResult r = run_experiment(c);
    CHECK_FALSE(r.ok());
  }

  TEST_CASE("oracle magnetization crossing") {
    // exact wired magnetization for N = 2, 3, 4 (r = 2N) crosses near λ = δ
    RunConfig c = parse_config("kind = magnetization-sweep\nN = 2, 3, 4\nbeta = inf\nspace = w\ntime = w\n"
                               "lambda = 0.6:1.6:0.1\nmethod = oracle\ncrossing = true\nseed = 1\n");
    RunResult r = run_experiment(c);
    CHECK(r.ok());
    REQUIRE(r.summary.count("lambda_c"));
    CHECK(std::abs(r.summary["lambda_c"] - 1.0) < 0.3);
  }

  TEST_CASE("json output") {
    RunResult r;
    r.tables.push_back({"t", {"a", "b"}, {{"1.5", "w"}}});
    r.summary["x"] = 2.0;
    const std::string j = to_json(r);
    CHECK(j.find("\"a\": 1.5") != std::string::npos);
    CHECK(j.find("\"b\": \"w\"") != std::string::npos);
  }
}
