#include "tfim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include "json.hpp"
#include <sstream>

#include "tfim/discrete_rpr.hpp"
#include "tfim/percolation.hpp"
#include "tfim/poisson.hpp"
#include "tfim/random_parity.hpp"
#include "tfim/spectral.hpp"
#include "tfim/spin_rep.hpp"
#include "tfim/trotter.hpp"

namespace tfim {

using json = nlohmann::ordered_json;

namespace {

constexpr struct {
  Kind k;
  const char* name;
} kKinds[] = {{Kind::correlation, "correlation"},
              {Kind::magnetization_sweep, "magnetization-sweep"},
              {Kind::switching_verify, "switching-verify"},
              {Kind::irb_check, "irb-check"},
              {Kind::percolation_sweep, "percolation-sweep"},
              {Kind::identity_suite, "identity-suite"}};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    unsigned long long x = std::stoull(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an unsigned 64-bit integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

// "a, b, c" or "lo:hi:step"
std::vector<double> to_list(const std::string& key, const std::string& v) {
  if (v.find(':') != std::string::npos) {
    auto p = split(v, ':');
    if (p.size() != 3) throw ConfigError("key '" + key + "': range must be lo:hi:step");
    double lo = to_double(key, p[0]), hi = to_double(key, p[1]), st = to_double(key, p[2]);
    if (!(st > 0)) throw ConfigError("key '" + key + "': range step must be positive");
    std::vector<double> out;
    for (long i = 0; lo + i * st <= hi + 1e-9 * st; ++i) out.push_back(lo + i * st);
    return out;
  }
  std::vector<double> out;
  for (auto& s : split(v, ',')) out.push_back(to_double(key, s));
  return out;
}

BC to_bc(const std::string& key, const std::string& v) {
  if (v.size() != 1 || (v[0] != 'f' && v[0] != 'w' && v[0] != 'p'))
    throw ConfigError("key '" + key + "': boundary condition must be f, w or p");
  return parse_bc(v[0]);
}

// "x1,x2@t; y1,y2@s"
std::vector<SpaceTimePoint> to_points(const std::string& key, const std::string& v) {
  std::vector<SpaceTimePoint> out;
  for (auto& item : split(v, ';')) {
    auto at = item.find('@');
    if (at == std::string::npos) throw ConfigError("key '" + key + "': point must read x1,..,xd@t");
    SpaceTimePoint p;
    for (auto& c : split(item.substr(0, at), ',')) p.x.push_back(static_cast<int>(to_int(key, c)));
    p.t = to_double(key, trim(item.substr(at + 1)));
    out.push_back(std::move(p));
  }
  return out;
}

void set_key(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "kind") c.kind = parse_kind(v);
  else if (key == "d") c.d = static_cast<int>(to_int(key, v));
  else if (key == "N") {
    c.N.clear();
    for (double x : to_list(key, v)) {
      if (x != std::floor(x)) throw ConfigError("key 'N': sizes must be integers");
      c.N.push_back(static_cast<int>(x));
    }
  } else if (key == "convention") {
    if (v == "symmetric") c.conv = BoxConvention::symmetric;
    else if (v == "even-side") c.conv = BoxConvention::even_side;
    else throw ConfigError("key 'convention': symmetric or even-side");
  } else if (key == "beta") {
    if (v == "inf" || v == "infinity") c.ground = true;
    else {
      c.ground = false;
      c.beta = to_double(key, v);
    }
  } else if (key == "space") c.space = to_bc(key, v);
  else if (key == "time") {
    c.time = to_bc(key, v);
    c.time_given = true;
  } else if (key == "lambda") c.lambda = to_list(key, v);
  else if (key == "delta") c.delta = to_double(key, v);
  else if (key == "method") c.method = v;
  else if (key == "points") c.points = to_points(key, v);
  else if (key == "n_samples") c.n_samples = static_cast<std::size_t>(to_int(key, v));
  else if (key == "n_chains") c.n_chains = static_cast<std::size_t>(to_int(key, v));
  else if (key == "workers") c.workers = static_cast<unsigned>(to_int(key, v));
  else if (key == "seed") c.seed = to_u64(key, v);
  else if (key == "dtau") c.dtau = to_double(key, v);
  else if (key == "sweeps") c.sweeps = static_cast<std::size_t>(to_int(key, v));
  else if (key == "l_max") c.l_max = to_double(key, v);
  else if (key == "mode") c.mode = v;
  else if (key == "slots") c.slots = static_cast<int>(to_int(key, v));
  else if (key == "p_bridge") c.p_bridge = to_double(key, v);
  else if (key == "crossing") c.crossing = to_bool(key, v);
  else if (key == "N0") c.N0 = static_cast<int>(to_int(key, v));
  else if (key == "r0") c.r0 = to_double(key, v);
  else if (key == "trifurcations") c.trifurcations = to_bool(key, v);
  else throw ConfigError("unknown key '" + key + "'");
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  throw ConfigError("unsupported JSON value");
}

}  // namespace

const char* kind_name(Kind k) {
  for (const auto& e : kKinds)
    if (e.k == k) return e.name;
  return "?";
}

Kind parse_kind(const std::string& s) {
  for (const auto& e : kKinds)
    if (s == e.name) return e.k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

bool is_verification(Kind k) {
  return k == Kind::switching_verify || k == Kind::irb_check || k == Kind::identity_suite;
}
bool is_sweep(Kind k) { return k == Kind::magnetization_sweep || k == Kind::percolation_sweep; }

SpaceTimeRegion RunConfig::region(int n) const {
  Box b(d, n, conv);
  return ground ? SpaceTimeRegion::ground(b, space, time) : SpaceTimeRegion::finite(b, beta, space, time);
}

std::uint64_t RunConfig::seed_value() const {
  if (!seed) throw ConfigError("no seed given (set 'seed' or pass --seed)");
  return *seed;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  const std::string t = trim(text);
  if (!t.empty() && t[0] == '{') {
    json j;
    try {
      j = json::parse(t);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      const json& v = it.value();
      if (v.is_array()) {
        std::string joined;
        const char sep = it.key() == "points" ? ';' : ',';
        for (const auto& e : v) {
          if (!joined.empty()) joined += sep;
          if (e.is_array()) {
            // [x1, .., xd, t]
            if (e.size() < 2) throw ConfigError("point arrays need coordinates and a time");
            for (std::size_t i = 0; i + 1 < e.size(); ++i) joined += (i ? "," : "") + json_scalar(e[i]);
            joined += "@" + json_scalar(e.back());
          } else {
            joined += json_scalar(e);
          }
        }
        set_key(c, it.key(), joined);
      } else {
        set_key(c, it.key(), json_scalar(v));
      }
    }
  } else {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty() || line.front() == '[') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      set_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  const bool rpr_kind =
      c.kind == Kind::percolation_sweep || c.kind == Kind::identity_suite || c.kind == Kind::switching_verify;
  if (rpr_kind && !c.ground && !c.time_given) c.time = BC::p;
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  if (c.d < 1 || c.d > 3) throw ConfigError("d must be 1, 2 or 3");
  if (c.N.empty()) throw ConfigError("empty N grid");
  for (std::size_t i = 0; i < c.N.size(); ++i) {
    if (c.N[i] < 1) throw ConfigError("N must be positive");
    if (i && c.N[i] <= c.N[i - 1]) throw ConfigError("N grid must be strictly increasing");
  }
  if (c.lambda.empty()) throw ConfigError("empty lambda grid");
  for (std::size_t i = 0; i < c.lambda.size(); ++i) {
    if (!(c.lambda[i] >= 0)) throw ConfigError("lambda must be nonnegative");
    if (i && !(c.lambda[i] > c.lambda[i - 1])) throw ConfigError("lambda grid must be strictly increasing");
  }
  if (!(c.delta >= 0)) throw ConfigError("delta must be nonnegative");
  if (!c.ground && !(c.beta > 0 && std::isfinite(c.beta))) throw ConfigError("beta must be positive or inf");
  if (c.ground && c.time == BC::p) throw ConfigError("beta = inf uses time bc f or w (r = 2N)");
  if (c.method != "spin" && c.method != "rpr" && c.method != "trotter" && c.method != "oracle")
    throw ConfigError("method must be spin, rpr, trotter or oracle");
  if (c.mode != "exact" && c.mode != "mc") throw ConfigError("mode must be exact or mc");
  if (c.n_samples == 0 || c.n_chains == 0) throw ConfigError("n_samples and n_chains must be positive");
  if (c.workers == 0) throw ConfigError("workers must be positive");
  if (!(c.dtau > 0) || c.sweeps == 0) throw ConfigError("dtau and sweeps must be positive");
  if (!(c.l_max > 0)) throw ConfigError("l_max must be positive");
  if (c.slots < 2 || c.slots > 4) throw ConfigError("slots must lie in 2..4");
  if (!(c.p_bridge >= 0 && c.p_bridge <= 0.5)) throw ConfigError("p_bridge must lie in [0, 1/2]");
  if (c.N0 < 0 || !(c.r0 > 0)) throw ConfigError("N0 >= 0 and r0 > 0 required");
  for (const auto& p : c.points)
    if (static_cast<int>(p.x.size()) != c.d) throw ConfigError("point dimension differs from d");
  switch (c.kind) {
    case Kind::correlation:
      if (c.points.empty()) throw ConfigError("correlation needs points");
      break;
    case Kind::magnetization_sweep:
      if (c.space != BC::w) throw ConfigError("magnetization needs space = w");
      if (c.method == "rpr") throw ConfigError("magnetization methods: spin, trotter, oracle");
      if (c.crossing && (c.d != 1 || !c.ground)) throw ConfigError("crossing analysis needs d = 1 and beta = inf");
      break;
    case Kind::irb_check:
      if (c.ground) throw ConfigError("irb-check needs finite beta");
      break;
    case Kind::percolation_sweep:
    case Kind::identity_suite:
    case Kind::switching_verify:
      if (c.space == BC::p) throw ConfigError("random-parity runs need space f or w");
      if (!c.ground && c.time != BC::p) throw ConfigError("finite beta random-parity runs use time = p");
      break;
  }
}

// ---------------------------------------------------------------------------
// output

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void ResultTable::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width differs from header in " + name);
  rows.push_back(std::move(row));
}

std::string to_csv(const ResultTable& t) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      const bool quote = v[i].find_first_of(",\"\n") != std::string::npos;
      if (quote) {
        out += '"';
        for (char ch : v[i]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        out += '"';
      } else {
        out += v[i];
      }
    }
    out += '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::string to_json(const RunResult& r) {
  json j;
  j["tables"] = json::array();
  for (const auto& t : r.tables) {
    json jt;
    jt["name"] = t.name;
    jt["rows"] = json::array();
    for (const auto& row : t.rows) {
      json o;
      for (std::size_t i = 0; i < row.size(); ++i) {
        const std::string& s = row[i];
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (!s.empty() && end && *end == '\0' && std::isfinite(v)) o[t.columns[i]] = v;
        else if (s == "true" || s == "false") o[t.columns[i]] = s == "true";
        else o[t.columns[i]] = s;
      }
      jt["rows"].push_back(std::move(o));
    }
    j["tables"].push_back(std::move(jt));
  }
  j["failures"] = r.failures;
  json s = json::object();
  for (const auto& [k, v] : r.summary) s[k] = v;
  j["summary"] = s;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// experiments

namespace {

std::string bcs(BC b) { return std::string(1, bc_char(b)); }
std::string tf(bool b) { return b ? "true" : "false"; }

std::vector<STPoint> resolve(const RunConfig& c, const Box& box) {
  std::vector<STPoint> A;
  for (const auto& p : c.points) {
    if (!box.contains(p.x)) throw ConfigError("point outside the box");
    A.push_back({box.index(p.x), p.t});
  }
  return A;
}

std::uint64_t point_seed(const RunConfig& c, std::size_t iN, std::size_t il) {
  return stream_seed(c.seed_value(), 1000 * iN + il);
}

SamplingOptions spin_opts(const RunConfig& c, std::uint64_t seed) {
  SamplingOptions o;
  o.n_samples = c.n_samples;
  o.n_chains = c.n_chains;
  o.workers = c.workers;
  o.seed = seed;
  return o;
}

RPROptions rpr_opts(const RunConfig& c, std::uint64_t seed) {
  RPROptions o;
  o.n_samples = c.n_samples;
  o.n_chains = c.n_chains;
  o.workers = c.workers;
  o.seed = seed;
  return o;
}

TrotterOptions trotter_opts(const RunConfig& c, std::uint64_t seed) {
  TrotterOptions o;
  o.dtau = c.dtau;
  o.sweeps = c.sweeps;
  o.thermalize = std::max<std::size_t>(50, c.sweeps / 10);
  o.n_chains = std::min<std::size_t>(c.n_chains, 4);
  o.workers = c.workers;
  o.seed = seed;
  return o;
}

MCMCOptions mcmc_opts(const RunConfig& c, std::uint64_t seed) {
  MCMCOptions o;
  o.n_draws = c.n_samples;
  o.n_chains = std::min<std::size_t>(c.n_chains, 4);
  o.workers = c.workers;
  o.seed = seed;
  return o;
}

RunResult run_correlation(const RunConfig& c) {
  RunResult R;
  ResultTable t{"correlation",
                {"N", "r", "space", "time", "lambda", "delta", "method", "estimate", "stderr", "n", "n_eff", "dtau", "seed"},
                {}};
  for (std::size_t iN = 0; iN < c.N.size(); ++iN) {
    const SpaceTimeRegion reg = c.region(c.N[iN]);
    const auto A = resolve(c, reg.box);
    for (std::size_t il = 0; il < c.lambda.size(); ++il) {
      const double lam = c.lambda[il];
      const std::uint64_t seed = point_seed(c, iN, il);
      Estimate e;
      double dt = 0;
      if (c.method == "spin") {
        e = estimate_correlation(A, reg, lam, c.delta, spin_opts(c, seed)).est;
      } else if (c.method == "rpr") {
        e = estimate_rpr_correlation(A, reg, lam, c.delta, rpr_opts(c, seed)).value;
      } else if (c.method == "trotter") {
        auto te = trotter_correlation(A, reg, lam, c.delta, trotter_opts(c, seed));
        e = te.est;
        dt = te.dtau;
      } else {
        SpectralModel m(reg.box, reg.edge_mode(), lam, c.delta);
        e.value = m.correlation(A, reg.r, reg.time);
      }
      t.add({std::to_string(c.N[iN]), fmt(reg.r), bcs(reg.space), bcs(reg.time), fmt(lam), fmt(c.delta), c.method,
             fmt(e.value), fmt(e.se), fmt(e.n), fmt(e.n_eff), fmt(dt), std::to_string(seed)});
    }
  }
  R.tables.push_back(std::move(t));
  return R;
}

struct MagPoint {
  int N;
  double lambda;
  Estimate M;
  double scaled;
};

std::vector<MagPoint> magnetization_points(const RunConfig& c, ResultTable& t) {
  std::vector<MagPoint> pts;
  for (std::size_t iN = 0; iN < c.N.size(); ++iN) {
    const SpaceTimeRegion reg = c.region(c.N[iN]);
    const double L = reg.box.side();
    for (std::size_t il = 0; il < c.lambda.size(); ++il) {
      const double lam = c.lambda[il];
      const std::uint64_t seed = point_seed(c, iN, il);
      Estimate e;
      double dt = 0;
      if (c.method == "spin") {
        e = estimate_magnetization(reg, lam, c.delta, spin_opts(c, seed)).est;
      } else if (c.method == "trotter") {
        auto te = trotter_magnetization(reg, lam, c.delta, trotter_opts(c, seed));
        e = te.est;
        dt = te.dtau;
      } else {
        SpectralModel m(reg.box, reg.edge_mode(), lam, c.delta);
        e.value = m.correlation({{reg.box.origin(), 0.0}}, reg.r, reg.time);
      }
      const double scaled = std::pow(L, 1.0 / 8.0) * e.value;
      pts.push_back({c.N[iN], lam, e, scaled});
      t.add({std::to_string(c.N[iN]), fmt(reg.r), fmt(lam), fmt(c.delta), c.method, fmt(e.value), fmt(e.se),
             fmt(e.n_eff), fmt(scaled), fmt(dt), std::to_string(seed)});
    }
  }
  return pts;
}

LambdaCReport crossing_from(const RunConfig& c, const std::vector<MagPoint>& pts) {
  LambdaCReport R;
  if (c.N.size() < 2) throw EstimationError("crossing analysis needs at least two sizes");
  if (c.lambda.size() < 2) throw EstimationError("crossing analysis needs at least two lambda values");
  const std::size_t nl = c.lambda.size();
  std::string diag;
  for (std::size_t i = 0; i + 1 < c.N.size(); ++i) {
    // Y_small - Y_large changes sign from + to - at the crossing
    bool found = false;
    for (std::size_t k = 0; k + 1 < nl && !found; ++k) {
      const double d0 = pts[i * nl + k].scaled - pts[(i + 1) * nl + k].scaled;
      const double d1 = pts[i * nl + k + 1].scaled - pts[(i + 1) * nl + k + 1].scaled;
      if (d0 > 0 && d1 <= 0) {
        const double l0 = c.lambda[k], l1 = c.lambda[k + 1];
        R.crossings.push_back(l0 + (l1 - l0) * d0 / (d0 - d1));
        found = true;
      }
    }
    if (!found) diag += " N=" + std::to_string(c.N[i]) + "/" + std::to_string(c.N[i + 1]);
  }
  if (R.crossings.empty()) throw EstimationError("scaled magnetization curves do not cross for pairs" + diag);
  double s = 0;
  for (double x : R.crossings) s += x;
  R.estimate = s / double(R.crossings.size()) / (c.delta > 0 ? c.delta : 1.0);
  auto [mn, mx] = std::minmax_element(R.crossings.begin(), R.crossings.end());
  double step = (c.lambda.back() - c.lambda.front()) / double(nl - 1);
  R.uncertainty = std::max(0.5 * (*mx - *mn), R.crossings.size() == 1 ? 0.5 * step : 0.0) / (c.delta > 0 ? c.delta : 1.0);
  return R;
}

ResultTable magnetization_table() {
  return {"magnetization", {"N", "r", "lambda", "delta", "method", "M", "stderr", "n_eff", "scaled", "dtau", "seed"}, {}};
}

RunResult run_magnetization(const RunConfig& c) {
  RunResult R;
  ResultTable t = magnetization_table();
  auto pts = magnetization_points(c, t);
  const std::size_t nl = c.lambda.size();
  for (std::size_t iN = 0; iN < c.N.size(); ++iN)
    for (std::size_t k = 0; k + 1 < nl; ++k) {
      const Estimate& a = pts[iN * nl + k].M;
      const Estimate& b = pts[iN * nl + k + 1].M;
      if (b.value < a.value - 3 * std::hypot(a.se, b.se))
        R.failures.push_back("magnetization not monotone at N=" + std::to_string(c.N[iN]) + " lambda=" +
                             fmt(c.lambda[k]) + ".." + fmt(c.lambda[k + 1]));
    }
  R.tables.push_back(std::move(t));
  if (c.crossing) {
    try {
      LambdaCReport L = crossing_from(c, pts);
      ResultTable ct{"lambda_c", {"pair", "crossing"}, {}};
      for (std::size_t i = 0; i < L.crossings.size(); ++i) ct.add({std::to_string(i), fmt(L.crossings[i])});
      R.tables.push_back(std::move(ct));
      R.summary["lambda_c"] = L.estimate;
      R.summary["lambda_c_uncertainty"] = L.uncertainty;
    } catch (const EstimationError& e) {
      R.failures.push_back(std::string("lambda_c: ") + e.what());
    }
  }
  return R;
}

RunResult run_switching(const RunConfig& c) {
  RunResult R;
  if (c.mode == "exact") {
    ResultTable t{"switching_exact",
                  {"system", "bc", "slots", "identity", "kappa", "lhs", "rhs", "diff", "holds"},
                  {}};
    ResultTable x{"cross_check", {"system", "bc", "slots", "configurations", "max_weight_diff", "mismatches"}, {}};
    struct Sys {
      const char* name;
      Box box;
      bool ground;
      int M;
    };
    const int M = c.slots;
    std::vector<Sys> systems{{"2-site", Box(1, 1, BoxConvention::even_side), true, M},
                             {"2-site", Box(1, 1, BoxConvention::even_side), false, std::min(M, 3)},
                             {"3-site", Box(1, 1), true, std::min(M, 3)}};
    for (const auto& s : systems) {
      DiscreteSystem ds(s.box, 1.0, s.ground, c.delta, s.M, c.p_bridge, c.p_bridge);
      const std::size_t o = s.box.origin();
      const std::size_t nb = o + 1 < s.box.size() ? o + 1 : o - 1;
      const std::string bc = std::string(1, bc_char(ds.cs.t1)) + "/" + bc_char(ds.cs.t2);
      const DiscretePoint po{o, 1};
      std::vector<DiscretePoint> kappas{{nb, 1}, {nb, s.M - 1}, {o, s.M - 1}};
      for (const auto& k : kappas) {
        const std::string ks = std::to_string(k.site) + "@" + std::to_string(k.slot);
        auto sw = discrete_switching(ds, po, k, ConnMode::off_gamma);
        const bool h1 = std::abs(sw.diff()) <= 1e-12;
        t.add({s.name, bc, std::to_string(s.M), "switching", ks, fmt(sw.lhs), fmt(sw.rhs), fmt(sw.diff()), tf(h1)});
        auto pr = discrete_product(ds, po, k, ConnMode::off_gamma);
        const bool h2 = std::abs(pr.diff()) <= 1e-12;
        t.add({s.name, bc, std::to_string(s.M), "two-sided", ks, fmt(pr.both_sources), fmt(pr.connected),
               fmt(pr.diff()), tf(h2)});
        if (!h1 || !h2) R.failures.push_back(std::string("exact switching ") + s.name + " " + bc + " kappa=" + ks);
      }
      auto cc = discrete_cross_check(ds, po, kappas[0]);
      const std::size_t mism = cc.consistency_mismatch + cc.connectivity_mismatch;
      x.add({s.name, bc, std::to_string(s.M), std::to_string(cc.configurations), fmt(cc.max_weight_diff),
             std::to_string(mism)});
      if (mism != 0 || cc.max_weight_diff > 1e-12)
        R.failures.push_back(std::string("discrete/continuum cross-check ") + s.name + " " + bc);
    }
    R.tables.push_back(std::move(t));
    R.tables.push_back(std::move(x));
    return R;
  }
  ResultTable t{"switching_mc",
                {"N", "r", "lambda", "delta", "kappa_site", "kappa_t", "lhs", "se_lhs", "rhs", "se_rhs", "z", "holds"},
                {}};
  for (std::size_t iN = 0; iN < c.N.size(); ++iN) {
    const SpaceTimeRegion reg = c.region(c.N[iN]);
    auto A = resolve(c, reg.box);
    STPoint kappa = A.empty() ? STPoint{reg.box.origin() + 1 < reg.box.size() ? reg.box.origin() + 1 : 0, 0.0}
                              : A.back();
    for (std::size_t il = 0; il < c.lambda.size(); ++il) {
      CoupledSystem cs(reg.box, reg.r, c.ground, c.lambda[il], c.delta);
      auto S = verify_switching(cs, kappa, rpr_opts(c, point_seed(c, iN, il)));
      t.add({std::to_string(c.N[iN]), fmt(reg.r), fmt(c.lambda[il]), fmt(c.delta), std::to_string(kappa.site),
             fmt(kappa.t), fmt(S.lhs.value), fmt(S.lhs.se), fmt(S.rhs.value), fmt(S.rhs.se), fmt(S.z), tf(S.holds)});
      if (!S.holds) R.failures.push_back("switching N=" + std::to_string(c.N[iN]) + " lambda=" + fmt(c.lambda[il]));
    }
  }
  R.tables.push_back(std::move(t));
  return R;
}

RunResult run_irb(const RunConfig& c) {
  RunResult R;
  ResultTable t{"irb", {"N", "beta", "lambda", "delta"}, {}};
  for (int i = 0; i < c.d; ++i) t.columns.push_back("k" + std::to_string(i + 1));
  for (const char* s : {"ell", "c_hat", "bound", "slack"}) t.columns.push_back(s);
  double worst = kInf;
  for (std::size_t iN = 0; iN < c.N.size(); ++iN)
    for (double lam : c.lambda) {
      SpectralModel m(Box(c.d, c.N[iN], BoxConvention::even_side), EdgeMode::periodic, lam, c.delta);
      IRBReport rep = irb_check(m, c.beta, c.l_max * std::numbers::pi);
      for (const auto& p : rep.points) {
        std::vector<std::string> row{std::to_string(c.N[iN]), fmt(c.beta), fmt(lam), fmt(c.delta)};
        for (double k : p.k) row.push_back(fmt(k));
        for (double v : {p.ell, p.c_hat, p.bound, p.slack}) row.push_back(fmt(v));
        t.add(std::move(row));
      }
      worst = std::min(worst, rep.worst_slack);
      if (!rep.passed)
        R.failures.push_back("infrared bound N=" + std::to_string(c.N[iN]) + " lambda=" + fmt(lam) +
                             " worst slack " + fmt(rep.worst_slack) + " at ell=" + fmt(rep.worst.ell));
    }
  R.summary["worst_slack"] = worst;
  R.tables.push_back(std::move(t));
  return R;
}

RunResult run_percolation(const RunConfig& c) {
  RunResult R;
  ResultTable t{"percolation",
                {"N", "r", "lambda", "delta", "p_origin_ghost", "se_p", "n_clusters", "se_clusters",
                 "boundary_touching", "se_boundary", "largest_fraction", "se_largest", "seed"},
                {}};
  ResultTable tr{"trifurcation",
                 {"N", "r", "lambda", "delta", "N0", "r0", "n_trifurcations", "se_trif", "n_boundary_intervals",
                  "se_boundary", "leaf_bound", "draws", "violations", "probes", "clipped"},
                 {}};
  for (std::size_t iN = 0; iN < c.N.size(); ++iN) {
    const SpaceTimeRegion reg = c.region(c.N[iN]);
    Estimate prev;
    for (std::size_t il = 0; il < c.lambda.size(); ++il) {
      CoupledSystem cs(reg.box, reg.r, c.ground, c.lambda[il], c.delta);
      const std::uint64_t seed = point_seed(c, iN, il);
      PercolationPoint p = percolation_point(cs, mcmc_opts(c, seed));
      t.add({std::to_string(c.N[iN]), fmt(reg.r), fmt(c.lambda[il]), fmt(c.delta), fmt(p.p_origin_ghost.value),
             fmt(p.p_origin_ghost.se), fmt(p.n_clusters.value), fmt(p.n_clusters.se), fmt(p.boundary_touching.value),
             fmt(p.boundary_touching.se), fmt(p.largest_fraction.value), fmt(p.largest_fraction.se),
             std::to_string(seed)});
      if (il > 0 && p.p_origin_ghost.value < prev.value - 3 * std::hypot(prev.se, p.p_origin_ghost.se))
        R.failures.push_back("P(origin<->ghost) not monotone at N=" + std::to_string(c.N[iN]) + " lambda=" +
                             fmt(c.lambda[il]));
      prev = p.p_origin_ghost;
      if (c.trifurcations) {
        TrifurcationReport T = trifurcation_diagnostic(cs, c.N0, c.r0, mcmc_opts(c, stream_seed(seed, 7)));
        tr.add({std::to_string(c.N[iN]), fmt(reg.r), fmt(c.lambda[il]), fmt(c.delta), std::to_string(c.N0),
                fmt(c.r0), fmt(T.n_trifurcations.value), fmt(T.n_trifurcations.se),
                fmt(T.n_boundary_intervals.value), fmt(T.n_boundary_intervals.se), fmt(T.leaf_bound),
                std::to_string(T.draws), std::to_string(T.violations), std::to_string(T.probes_per_draw),
                std::to_string(T.clipped_per_draw)});
        if (!T.per_config_holds) R.failures.push_back("trifurcations exceed boundary intervals");
        if (!T.expectation_holds) R.failures.push_back("mean boundary intervals above the leaf bound");
      }
    }
  }
  R.tables.push_back(std::move(t));
  if (c.trifurcations) R.tables.push_back(std::move(tr));
  return R;
}

RunResult run_identities(const RunConfig& c) {
  RunResult R;
  ResultTable t{"identities", {"identity", "params", "lhs", "se_lhs", "rhs", "se_rhs", "z", "n", "seed", "holds"}, {}};
  const std::uint64_t seed = c.seed_value();
  auto row = [&](const std::string& id, const std::string& params, const Estimate& l, const Estimate& r, double z,
                 bool holds, std::uint64_t s) {
    t.add({id, params, fmt(l.value), fmt(l.se), fmt(r.value), fmt(r.se), fmt(z), fmt(std::max(l.n, r.n)),
           std::to_string(s), tf(holds)});
    if (!holds) R.failures.push_back(id + " " + params);
  };
  const SpaceTimeRegion reg = c.region(c.N.front());
  const double lam = c.lambda.front();
  const std::string base = "N=" + std::to_string(c.N.front()) + " r=" + fmt(reg.r) + " lambda=" + fmt(lam);
  std::uint64_t k = 0;

  // holes and event probability at t = f
  {
    SpaceTimeRegion rf(reg.box, reg.r, BC::f, BC::f);
    IntervalSet J{{reg.box.origin(), -0.25, 0.25}};
    std::uint64_t s = stream_seed(seed, ++k);
    auto H = holes_identity_check(J, rf, lam, c.delta, rpr_opts(c, s));
    row("holes", base + " J=origin[-0.25,0.25]", H.lhs, H.rhs, H.z, H.holds, s);
    const Estimate Hc{H.rhs.value * H.factor, H.rhs.se * H.factor, H.rhs.n, H.rhs.n_eff};
    row("holes-bridge-factor", base + " factor=" + fmt(H.factor), H.lhs, Hc, H.z_corrected, H.holds_corrected, s);
    s = stream_seed(seed, ++k);
    auto E = event_probability_identity(J, rf, lam, c.delta, rpr_opts(c, s));
    row("event-probability", base + " cJ=" + fmt(E.cJ), E.lhs, E.rhs, E.z, E.holds, s);
    row("event-probability-segments", base, E.lhs, E.rhs_holes, E.z_holes, E.holds_holes, s);
  }
  // RN densities
  for (Scheme sc : {Scheme::delete_all, Scheme::add_two_if_empty, Scheme::add_or_delete})
    for (double at : {0.5, 1.0, 2.0}) {
      std::uint64_t s = stream_seed(seed, ++k);
      Rng rng(s, 0);
      auto g = [](const PointSet& X) { return std::exp(-0.3 * double(X.size())) + (X.size() == 2 ? 0.5 : 0.0); };
      RNReport rn = verify_rn_identity(g, sc, 1.0, at, c.n_samples, rng);
      const double z = std::abs(rn.diff.value) / std::max(rn.diff.se, 1e-300);
      row(std::string("rn-density-") + scheme_name(sc), "alpha*t=" + fmt(at), rn.modified, rn.weighted, z, z <= 3.0,
          s);
    }
  // coupled-measure identities
  {
    CoupledSystem cs(reg.box, reg.r, c.ground, lam, c.delta);
    const std::size_t o = reg.box.origin();
    const STPoint po{o, 0.0}, kappa{o + 1 < reg.box.size() ? o + 1 : o - 1, 0.0};
    std::uint64_t s = stream_seed(seed, ++k);
    auto S = verify_switching(cs, kappa, rpr_opts(c, s));
    row("switching", base, S.lhs, S.rhs, S.z, S.holds, s);
    s = stream_seed(seed, ++k);
    auto P = connectivity_product_identity(cs, po, kappa, rpr_opts(c, s));
    row("connectivity-product", base, P.p_conn, P.product, P.z, P.holds, s);
    s = stream_seed(seed, ++k);
    auto D = correlation_difference_bound(cs, kappa, rpr_opts(c, s));
    row("difference-lower", base, D.difference, Estimate{}, D.difference.value / std::max(D.difference.se, 1e-300),
        D.lower_holds, s);
    row("difference-upper", base, D.difference, D.bound,
        (D.difference.value - D.bound.value) / std::max(std::hypot(D.difference.se, D.bound.se), 1e-300),
        D.upper_holds, s);
  }
  R.tables.push_back(std::move(t));
  return R;
}

}  // namespace

RunResult run_experiment(const RunConfig& c) {
  validate(c);
  c.seed_value();
  switch (c.kind) {
    case Kind::correlation: return run_correlation(c);
    case Kind::magnetization_sweep: return run_magnetization(c);
    case Kind::switching_verify: return run_switching(c);
    case Kind::irb_check: return run_irb(c);
    case Kind::percolation_sweep: return run_percolation(c);
    case Kind::identity_suite: return run_identities(c);
  }
  throw ConfigError("unhandled kind");
}

LambdaCReport estimate_lambda_c_1d(const RunConfig& c0) {
  RunConfig c = c0;
  c.kind = Kind::magnetization_sweep;
  c.space = BC::w;
  c.time = BC::w;
  c.ground = true;
  if (c.d != 1) throw ConfigError("lambda_c estimate is for d = 1");
  if (c.N.size() < 2) throw EstimationError("crossing analysis needs at least two sizes");
  validate(c);
  ResultTable t = magnetization_table();
  auto pts = magnetization_points(c, t);
  LambdaCReport R = crossing_from(c, pts);
  R.table = std::move(t);
  return R;
}

GapScan gap_scan_reference(int L_max, double delta) {
  GapScan G;
  for (int L = 4; L + 2 <= L_max; L += 2)
    G.crossings.push_back(gap_crossing(L, L + 2, delta, 0.7 * delta, 1.3 * delta, 1e-7 * delta).lambda / delta);
  if (G.crossings.empty()) throw EstimationError("gap scan needs L_max >= 6");
  G.best = G.crossings.back();
  return G;
}

}  // namespace tfim
