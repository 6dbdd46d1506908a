// SPDX-License-Identifier: Apache-2.0
//
// Scenario files (key = value, '#' comments, comma lists for sweep axes)
// and the sweep runner used by the CLI.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fedagg/engine.hpp"
#include "fedagg/errors.hpp"
#include "fedagg/metrics.hpp"

namespace fedagg {

struct Scenario {
  SimConfig base;
  std::vector<std::string> topologies{"medium"};
  std::vector<Strategy> strategies{Strategy::HfelMesh};
  std::vector<std::int64_t> xis{2};
  std::vector<double> lambdas{0.00062};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out_dir = "results";
  bool write_logs = false;

  std::size_t run_count() const { return topologies.size() * strategies.size() * xis.size() * lambdas.size() * seeds.size(); }

  void validate() const {
    if (topologies.empty() || strategies.empty() || xis.empty() || lambdas.empty() || seeds.empty())
      throw ConfigError("every sweep axis needs at least one value");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) throw ConfigError("seeds must be distinct");
    for (auto x : xis) CostParams{x, 1, 1}.validate();
    for (auto l : lambdas) {
      auto w = base.workload;
      w.lambda = l;
      w.validate();
    }
    base.validate();
  }

  // Expanded runs in a fixed order: topology, strategy, xi, lambda, seed.
  std::vector<SimConfig> expand() const {
    std::vector<SimConfig> out;
    for (const auto& t : topologies)
      for (auto s : strategies)
        for (auto x : xis)
          for (auto l : lambdas)
            for (auto seed : seeds) {
              SimConfig c = base;
              c.topology = t;
              c.allocator.strategy = s;
              c.allocator.xi = x;
              c.workload.lambda = l;
              c.workload.seed = seed;
              out.push_back(std::move(c));
            }
    return out;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(',');
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view v, std::size_t line, std::string_view key) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ParseError(line, "invalid value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

inline bool parse_bool(std::string_view v, std::size_t line, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(line, "invalid boolean '" + std::string(v) + "' for " + std::string(key));
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text) {
  using detail::parse_number;
  Scenario sc;
  std::size_t line_no = 0;
  std::set<std::string, std::less<>> seen;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(line_no, "empty value for " + std::string(key));
    if (!seen.insert(std::string(key)).second) throw ParseError(line_no, "duplicate key " + std::string(key));
    const auto items = detail::split_list(value);
    auto single = [&] {
      if (items.size() != 1) throw ParseError(line_no, std::string(key) + " takes a single value");
      return items.front();
    };
    auto& w = sc.base.workload;
    auto& wt = sc.base.weights;
    auto& lat = sc.base.latency;
    if (key == "topology") {
      sc.topologies.clear();
      for (auto i : items) sc.topologies.emplace_back(i);
    } else if (key == "strategy") {
      sc.strategies.clear();
      for (auto i : items) {
        try {
          sc.strategies.push_back(parse_strategy(i));
        } catch (const ConfigError& e) {
          throw ParseError(line_no, e.what());
        }
      }
    } else if (key == "xi") {
      sc.xis.clear();
      for (auto i : items) sc.xis.push_back(parse_number<std::int64_t>(i, line_no, key));
    } else if (key == "lambda") {
      sc.lambdas.clear();
      for (auto i : items) sc.lambdas.push_back(parse_number<double>(i, line_no, key));
    } else if (key == "seed" || key == "seeds") {
      sc.seeds.clear();
      for (auto i : items) sc.seeds.push_back(parse_number<std::uint64_t>(i, line_no, key));
    } else if (key == "cloud_pricing") {
      try {
        sc.base.allocator.cloud_pricing = parse_cloud_pricing(single());
      } catch (const ConfigError& e) {
        throw ParseError(line_no, e.what());
      }
    } else if (key == "horizon_requests") {
      w.horizon_requests = parse_number<std::int64_t>(single(), line_no, key);
    } else if (key == "horizon_ms") {
      w.horizon_ms = parse_number<double>(single(), line_no, key);
    } else if (key == "client_fraction_low") {
      w.client_fraction_low = parse_number<double>(single(), line_no, key);
    } else if (key == "client_fraction_high") {
      w.client_fraction_high = parse_number<double>(single(), line_no, key);
    } else if (key == "alpha_client") {
      wt.alpha_client = parse_number<double>(single(), line_no, key);
    } else if (key == "alpha_edge") {
      wt.alpha_edge = parse_number<double>(single(), line_no, key);
    } else if (key == "alpha_cloud") {
      wt.alpha_cloud = parse_number<double>(single(), line_no, key);
    } else if (key == "beta_end") {
      wt.beta_end = parse_number<double>(single(), line_no, key);
    } else if (key == "beta_edge") {
      wt.beta_edge = parse_number<double>(single(), line_no, key);
    } else if (key == "beta_cloud") {
      wt.beta_cloud = parse_number<double>(single(), line_no, key);
    } else if (key == "bits_per_weight") {
      lat.bits_per_weight = parse_number<double>(single(), line_no, key);
    } else if (key == "bytes_per_weight") {
      lat.bytes_per_weight = parse_number<double>(single(), line_no, key);
    } else if (key == "ops_per_unit_second") {
      lat.ops_per_unit_second = parse_number<double>(single(), line_no, key);
    } else if (key == "record_timing") {
      sc.base.record_timing = detail::parse_bool(single(), line_no, key);
    } else if (key == "write_logs") {
      sc.write_logs = detail::parse_bool(single(), line_no, key);
    } else if (key == "out") {
      sc.out_dir = std::string(single());
    } else {
      throw ParseError(line_no, "unknown key " + std::string(key));
    }
  }
  return sc;
}

struct SweepRun {
  SimConfig config;
  RunSummary summary;
  std::string ndjson;  // filled when the scenario asks for logs
  std::string error;   // nonempty if the run aborted
};

// Runs every expanded configuration on up to `jobs` threads. Output order
// follows Scenario::expand regardless of scheduling.
inline std::vector<SweepRun> run_sweep(const Scenario& sc, std::size_t jobs,
                                       const std::function<void(std::size_t, const SweepRun&)>& on_done = {}) {
  sc.validate();
  const auto configs = sc.expand();
  std::vector<SweepRun> runs(configs.size());
  // topologies are resolved once; each run copies what it needs
  std::map<std::string, PhysicalGraph> graphs;
  for (const auto& t : sc.topologies) graphs.emplace(t, resolve_topology(t, sc.base.weights));
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      auto& r = runs[i];
      r.config = configs[i];
      try {
        const auto log = run(graphs.at(r.config.topology), r.config);
        r.summary = summarize(log, r.config.topology);
        if (sc.write_logs) r.ndjson = log.to_ndjson();
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      if (on_done) {
        std::lock_guard lock(report);
        on_done(i, r);
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(configs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return runs;
}

}  // namespace fedagg
