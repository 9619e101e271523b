// tfim_cli: run, verify and sweep experiments from a config file.
// Exit codes: 0 ok, 1 failed verification or estimation, 2 usage or config error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tfim/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Args {
  std::string config, out, format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw tfim::ConfigError("cannot write '" + p.string() + "'");
  f << text;
  if (!f) throw tfim::ConfigError("write failed for '" + p.string() + "'");
}

int execute(const std::string& sub, const Args& a) {
  tfim::RunConfig c = tfim::load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.workers) c.workers = *a.workers;
  tfim::validate(c);
  c.seed_value();
  if (sub == "verify" && !tfim::is_verification(c.kind))
    throw tfim::ConfigError(std::string("'verify' runs verification kinds, not ") + tfim::kind_name(c.kind));
  if (sub == "sweep" && !tfim::is_sweep(c.kind))
    throw tfim::ConfigError(std::string("'sweep' runs sweep kinds, not ") + tfim::kind_name(c.kind));
  if (!a.out.empty()) {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw tfim::ConfigError("cannot create output directory '" + a.out + "'");
  }

  const auto t0 = std::chrono::steady_clock::now();
  tfim::RunResult r;
  std::string error;
  try {
    r = tfim::run_experiment(c);
  } catch (const tfim::EstimationError& e) {
    error = e.what();
    r.failures.push_back(std::string("estimation: ") + e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string kind = tfim::kind_name(c.kind);
  if (a.out.empty()) {
    if (a.format == "json") {
      std::cout << tfim::to_json(r);
    } else {
      for (std::size_t i = 0; i < r.tables.size(); ++i) {
        if (r.tables.size() > 1) std::cout << "# " << r.tables[i].name << "\n";
        std::cout << tfim::to_csv(r.tables[i]);
      }
    }
  } else {
    const fs::path dir(a.out);
    if (a.format == "json") {
      write_file(dir / (kind + ".json"), tfim::to_json(r));
    } else {
      for (std::size_t i = 0; i < r.tables.size(); ++i) {
        const std::string stem = i == 0 ? kind : kind + "." + r.tables[i].name;
        write_file(dir / (stem + ".csv"), tfim::to_csv(r.tables[i]));
      }
    }
    nlohmann::ordered_json m;
    m["kind"] = kind;
    m["config"] = fs::absolute(a.config).string();
    m["seed"] = c.seed_value();
    m["workers"] = c.workers;
    m["wall_seconds"] = wall;
    m["ok"] = r.ok();
    m["failures"] = r.failures;
    for (const auto& [k, v] : r.summary) m["summary"][k] = v;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
  }
  for (const auto& [k, v] : r.summary) std::cerr << k << " = " << tfim::fmt(v) << "\n";
  for (const auto& f : r.failures) std::cerr << "FAILED: " << f << "\n";
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transverse-field Ising experiments"};
  app.require_subcommand(1);
  Args a;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string chosen;
  for (const char* name : {"run", "verify", "sweep"}) {
    auto* s = app.add_subcommand(name, std::string(name) == "run"       ? "run any experiment kind"
                                       : std::string(name) == "verify" ? "run a verification suite"
                                                                       : "run a parameter sweep");
    s->add_option("--config", a.config, "config file (key = value or JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", seed, "master seed, overrides the config");
    s->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--out", a.out, "output directory (stdout when omitted)");
    s->add_option("--format", a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (auto* s : app.get_subcommands()) {
    if (s->count("--seed")) a.seed = seed;
    if (s->count("--workers")) a.workers = workers;
  }
  try {
    return execute(chosen, a);
  } catch (const tfim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
