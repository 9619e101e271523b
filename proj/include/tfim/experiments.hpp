#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfim/geometry.hpp"

namespace tfim {

// invalid or inconsistent configuration (exit code 2)
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// crossing analysis could not produce an estimate
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { correlation, magnetization_sweep, switching_verify, irb_check, percolation_sweep, identity_suite };
const char* kind_name(Kind k);
Kind parse_kind(const std::string& s);
bool is_verification(Kind k);
bool is_sweep(Kind k);

struct RunConfig {
  Kind kind = Kind::correlation;
  int d = 1;
  std::vector<int> N{1};          // box half-sides, strictly increasing
  BoxConvention conv = BoxConvention::symmetric;
  bool ground = false;            // β = ∞ proxy, r = 2N
  double beta = 1.0;              // r when not ground
  BC space = BC::f, time = BC::f;
  bool time_given = false;  // random-parity kinds default to time = p at finite beta
  std::vector<double> lambda{1.0};  // strictly increasing
  double delta = 1.0;
  std::string method = "spin";    // spin | rpr | trotter | oracle
  std::vector<SpaceTimePoint> points;  // sources, coordinates relative to the origin
  std::size_t n_samples = 100000;
  std::size_t n_chains = 8;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  double dtau = 0.05;
  std::size_t sweeps = 4000;
  double l_max = 100.0;           // frequency cutoff in units of π
  std::string mode = "mc";        // switching-verify: exact | mc
  int slots = 4;                  // cells per line in exact mode
  double p_bridge = 0.3;
  bool crossing = false;          // magnetization-sweep: λ_c estimate
  int N0 = 0;
  double r0 = 1.0;
  bool trifurcations = false;     // percolation-sweep

  double r_for(int n) const { return ground ? 2.0 * n : beta; }
  SpaceTimeRegion region(int n) const;
  std::uint64_t seed_value() const;
};

// key = value lines ('#' comments, [section] headers ignored), or a JSON
// object when the text starts with '{'. Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& c);

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> row);
};

struct RunResult {
  std::vector<ResultTable> tables;
  std::vector<std::string> failures;  // failing identities or checks
  std::map<std::string, double> summary;
  bool ok() const { return failures.empty(); }
};

RunResult run_experiment(const RunConfig& c);

// fixed formatting so identical runs give identical bytes
std::string fmt(double v);
std::string to_csv(const ResultTable& t);
std::string to_json(const RunResult& r);

struct LambdaCReport {
  double estimate = 0, uncertainty = 0;
  std::vector<double> crossings;  // consecutive-size pairs
  ResultTable table;              // N, lambda, M, se, scaled
};
// crossing of L^{1/8} M^{w,w}(λ) across sizes L = 2N+1 (d = 1, r = 2N); the
// Trotter sampler supplies M
LambdaCReport estimate_lambda_c_1d(const RunConfig& c);

// λ_c from the L·gap crossing of periodic rings (L, L+2) for L = 4..L_max-2
struct GapScan {
  std::vector<double> crossings;
  double best = 0;  // largest pair
};
GapScan gap_scan_reference(int L_max, double delta);

}  // namespace tfim
