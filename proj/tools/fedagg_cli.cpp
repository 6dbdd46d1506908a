// SPDX-License-Identifier: Apache-2.0
//
// fedagg: run scenario sweeps, compare ILP against the heuristics on a
// static batch, validate or export topology files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fedagg/compare.hpp"
#include "fedagg/engine.hpp"
#include "fedagg/metrics.hpp"
#include "fedagg/scenario.hpp"
#include "fedagg/topology.hpp"

namespace fs = std::filesystem;
using namespace fedagg;

namespace {

constexpr const char* kJobsCapVar = "FEDAGG_MAX_JOBS";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::size_t effective_jobs(std::size_t requested) {
  if (requested == 0) requested = std::max(1U, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv(kJobsCapVar)) {
    char* end = nullptr;
    const auto v = std::strtoull(cap, &end, 10);
    if (end == cap || *end != '\0' || v == 0) throw ConfigError(std::string(kJobsCapVar) + " must be a positive integer");
    requested = std::min<std::size_t>(requested, v);
  }
  return requested;
}

struct RunFlags {
  std::string scenario_file;
  std::string out;
  std::size_t jobs = 1;
  std::vector<std::string> topologies;
  std::vector<std::string> strategies;
  std::vector<std::int64_t> xis;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::int64_t horizon = -1;
  std::string cloud_pricing;
  bool timing = false;
  bool logs = false;
  bool quiet = false;
};

int cmd_run(const RunFlags& f) {
  Scenario sc = f.scenario_file.empty() ? Scenario{} : parse_scenario(read_file(f.scenario_file));
  if (!f.topologies.empty()) sc.topologies = f.topologies;
  if (!f.strategies.empty()) {
    sc.strategies.clear();
    for (const auto& s : f.strategies) sc.strategies.push_back(parse_strategy(s));
  }
  if (!f.xis.empty()) sc.xis = f.xis;
  if (!f.lambdas.empty()) sc.lambdas = f.lambdas;
  if (!f.seeds.empty()) sc.seeds = f.seeds;
  if (f.horizon >= 0) sc.base.workload.horizon_requests = f.horizon;
  if (!f.cloud_pricing.empty()) sc.base.allocator.cloud_pricing = parse_cloud_pricing(f.cloud_pricing);
  if (f.timing) sc.base.record_timing = true;
  if (f.logs) sc.write_logs = true;
  if (!f.out.empty()) sc.out_dir = f.out;
  sc.validate();

  const fs::path out(sc.out_dir);
  fs::create_directories(out);
  if (sc.write_logs) fs::create_directories(out / "logs");
  const auto total = sc.run_count();
  const auto runs = run_sweep(sc, effective_jobs(f.jobs), [&](std::size_t i, const SweepRun& r) {
    if (f.quiet) return;
    std::cerr << "[" << i + 1 << "/" << total << "] " << r.config.topology << " " << to_string(r.config.allocator.strategy)
              << " xi=" << r.config.allocator.xi << " lambda=" << r.config.workload.lambda << " seed=" << r.config.workload.seed
              << (r.error.empty() ? "" : "  FAILED: " + r.error) << "\n";
  });

  std::vector<RunSummary> rows;
  int breaches = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].error.empty()) {
      ++breaches;
      continue;
    }
    rows.push_back(runs[i].summary);
    if (sc.write_logs) {
      std::ostringstream name;
      name << "run_" << i << ".ndjson";
      write_file(out / "logs" / name.str(), runs[i].ndjson);
    }
  }
  write_file(out / "summary.csv", to_csv(rows));
  write_file(out / "summary.json", to_json_text(rows));
  std::cout << rows.size() << " of " << total << " runs completed; results in " << out.string() << "\n";
  if (breaches) std::cerr << breaches << " run(s) aborted\n";
  return breaches ? 1 : 0;
}

int cmd_compare(const std::string& topology, std::int64_t requests, std::int64_t clients, std::uint64_t seed, std::int64_t xi,
                const std::string& out) {
  const auto g = resolve_topology(topology);
  const auto reqs = requests > 0 ? static_batch(g, requests, clients, seed) : std::vector<TrainingRoundRequest>{};
  CompareOptions o;
  o.xi = xi;
  const auto table = compare_methods(g, reqs, o);
  const auto text = table.to_text();
  std::cout << text;
  if (!out.empty()) write_file(out, text);
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto g = load_topology(read_file(path));
  std::cout << "ok: " << g.clients().size() << " clients, " << g.edges().size() << " edge nodes, " << g.clouds().size()
            << " cloud nodes, " << g.link_count() << " links\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-to-cloud model aggregation simulator"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run a scenario sweep and write summaries");
  run->add_option("--scenario", rf.scenario_file, "Scenario file (key = value)")->check(CLI::ExistingFile);
  run->add_option("--out", rf.out, "Output directory");
  run->add_option("--jobs", rf.jobs, std::string("Parallel runs (0 = all cores; capped by ") + kJobsCapVar + ")");
  run->add_option("--topology", rf.topologies, "medium, large or a topology file")->delimiter(',');
  run->add_option("--strategy", rf.strategies, "hfel, hfel_mesh")->delimiter(',');
  run->add_option("--xi", rf.xis, "Cloud cost parameter values")->delimiter(',');
  run->add_option("--lambda", rf.lambdas, "Arrival rates per ms")->delimiter(',');
  run->add_option("--seeds", rf.seeds, "Seeds")->delimiter(',');
  run->add_option("--horizon", rf.horizon, "Requests per run");
  run->add_option("--cloud-pricing", rf.cloud_pricing, "plain or route_scaled");
  run->add_flag("--timing", rf.timing, "Record wall-clock placement time (logs become nondeterministic)");
  run->add_flag("--logs", rf.logs, "Write one NDJSON event log per run");
  run->add_flag("--quiet", rf.quiet, "No per-run progress");

  std::string cmp_topology = "medium", cmp_out;
  std::int64_t cmp_requests = 1, cmp_clients = 4, cmp_xi = 2;
  std::uint64_t cmp_seed = 1;
  auto* compare = app.add_subcommand("compare", "ILP vs HFEL vs HFEL-MESH on one static batch");
  compare->add_option("--topology", cmp_topology, "medium, large or a topology file");
  compare->add_option("--requests", cmp_requests, "Requests in the batch")->check(CLI::NonNegativeNumber);
  compare->add_option("--clients", cmp_clients, "Clients per request")->check(CLI::PositiveNumber);
  compare->add_option("--seed", cmp_seed, "Seed");
  compare->add_option("--xi", cmp_xi, "Cloud cost parameter")->check(CLI::PositiveNumber);
  compare->add_option("--out", cmp_out, "Also write the table to this file");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a topology file");
  validate->add_option("file", validate_path, "Topology file")->required();

  std::string export_name;
  auto* exporter = app.add_subcommand("export", "Print a builtin topology as a topology file");
  exporter->add_option("name", export_name, "medium or large")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(rf);
    if (*compare) return cmd_compare(cmp_topology, cmp_requests, cmp_clients, cmp_seed, cmp_xi, cmp_out);
    if (*validate) return cmd_validate(validate_path);
    if (*exporter) {
      std::cout << save_topology(builtin_topology(export_name));
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return *run || *compare ? 2 : 1;
  }
  return 0;
}
