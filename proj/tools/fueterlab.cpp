// fueterlab: run verification suites and print their descriptions.
//
//   fueterlab run --suite <id> [--target T] [--grid N] [--seed S] [--out DIR]
//                 [--config FILE] [--tol.<name> V] [--convention.<name> V]
//   fueterlab describe <id|all>
//
// Exit status: 0 all checks pass, 1 some check failed, 2 usage error,
// 3 library error while running.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fueterlab/cli/suites.hpp"

namespace fs = std::filesystem;
using namespace fueterlab;
using namespace fueterlab::cli;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

// --tol.<name> and --convention.<name>, as "--key=value" or "--key value"
void apply_dotted_flags(RunConfig& cfg, const std::vector<std::string>& rest) {
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const std::string& a = rest[i];
    if (a.rfind("--tol.", 0) != 0 && a.rfind("--convention.", 0) != 0)
      throw UsageError("unrecognized argument '" + a + "'");
    std::string key = a.substr(2), value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= rest.size()) throw UsageError("missing value for " + a);
      value = rest[++i];
    }
    apply_key(cfg, key, value);
  }
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
  if (!f) throw UsageError("cannot write " + p.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

fs::path prepare_output(const RunConfig& cfg, const std::string& target) {
  std::string base = cfg.out;
  if (base.empty())
    if (const char* env = std::getenv("FUETERLAB_OUT")) base = env;
  if (base.empty()) base = "fueterlab-out";
  fs::path dir = fs::path(base) / cfg.suite / target;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
  return dir;
}

int run(const RunConfig& cfg) {
  // validate everything before the output directory is touched
  const SuiteInfo& info = find_suite(cfg.suite);
  Context probe(info, cfg);
  fs::path dir = prepare_output(cfg, probe.result().target);

  SuiteResult r;
  try {
    r = run_suite(cfg);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "fueterlab: " << cfg.suite << ": " << e.what() << '\n';
    return kExitError;
  }

  Json manifest;
  manifest["tool"] = "fueterlab";
  manifest["versions"] = version_table();
  Json echo = config_echo(cfg);
  echo["target.id"] = r.target;
  echo["grid.n"] = r.grid;
  manifest["config"] = echo;
  manifest["rng"] = {{"engine", "mt19937_64"}, {"seed", cfg.seed}};
  manifest["conventions"] = convention_table(cfg);
  write_file(dir / "manifest.json", dump(manifest));
  write_file(dir / "report.json", dump(report_json(r)));
  write_file(dir / "failures.json", dump(failures_json(r)));
  for (auto& a : r.artifacts) write_file(dir / a.name, a.content);

  for (auto& c : r.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << c.value << ' ' << c.relation << ' ' << c.bound
              << '\n';
  std::cout << "report: " << (dir / "report.json").string() << '\n';
  if (!r.passed()) {
    std::cerr << failures_json(r).dump() << '\n';
    return kExitFailed;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification suites for Fueter sections and tri-holomorphic maps", "fueterlab"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_file, grid_text, seed_text;
  auto* run_cmd = app.add_subcommand("run", "run one verification suite");
  run_cmd->allow_extras();
  run_cmd->add_option("--suite", flags.suite, "suite id (see: describe all)");
  run_cmd->add_option("--target", flags.target, "target id: flat, taubnut, eguchi-hanson, atiyah-hitchin");
  run_cmd->add_option("--grid", grid_text, "grid resolution (meaning depends on the suite)");
  run_cmd->add_option("--seed", seed_text, "seed of the run's random generator");
  run_cmd->add_option("--out", flags.out, "output directory (default $FUETERLAB_OUT or ./fueterlab-out)");
  run_cmd->add_option("--config", config_file, "flat key = value config file");

  std::string describe_id;
  auto* describe_cmd = app.add_subcommand("describe", "print a suite's checks and default tolerances");
  describe_cmd->add_option("id", describe_id, "suite id or 'all'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*describe_cmd) {
      std::cout << describe(describe_id);
      return 0;
    }
    RunConfig cfg;
    if (!config_file.empty()) read_config_file(cfg, config_file);
    if (!flags.suite.empty()) cfg.suite = flags.suite;
    if (!flags.target.empty()) cfg.target = flags.target;
    if (!flags.out.empty()) cfg.out = flags.out;
    if (!grid_text.empty()) cfg.grid = parse_grid(grid_text);
    if (!seed_text.empty()) cfg.seed = parse_seed(seed_text);
    apply_dotted_flags(cfg, run_cmd->remaining());
    if (cfg.suite.empty()) throw UsageError("no suite given (--suite or suite.id)");
    return run(cfg);
  } catch (const UsageError& e) {
    std::cerr << "fueterlab: " << e.what() << '\n';
    return kExitUsage;
  }
}
