// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fedagg/errors.hpp"
#include "fedagg/topology.hpp"

namespace fedagg {

struct ModelArch {
  std::string name;
  double per_image_train_ms = 0.0;
  std::int64_t weight_count = 0;

  bool operator==(const ModelArch&) const = default;
};

// Architectures with their single-image training time and parameter count.
inline const std::vector<ModelArch>& model_catalog() {
  static const std::vector<ModelArch> catalog = {
      {"Squeezenet", 26.4, 421098},     {"MobileNetV2", 38.4, 3400000}, {"MNas", 35.7, 3900000},
      {"GoogleNet", 35.9, 6797700},     {"Res18", 21.8, 11689512},      {"Res50", 77.8, 25557032},
  };
  return catalog;
}

inline const ModelArch& find_arch(std::string_view name) {
  for (const auto& a : model_catalog())
    if (a.name == name) return a;
  throw ConfigError("unknown model architecture '" + std::string(name) + "'");
}

struct TrainingRoundRequest {
  std::int64_t id = 0;
  double arrival_time = 0.0;  // ms
  std::vector<NodeIndex> clients;  // ascending, all of kind Client
  ModelArch arch;
  std::int64_t dataset_size = 0;  // images
  std::int64_t node_demand = 0;   // computing units per aggregating node
  std::int64_t link_demand = 0;   // Mbps per model transfer

  bool operator==(const TrainingRoundRequest&) const = default;
};

// The single accessor every module uses for the per-transfer link claim.
inline std::int64_t request_link_load(const TrainingRoundRequest& r) { return r.link_demand; }

struct DemandRanges {
  std::int64_t dataset_min = 59, dataset_max = 118;
  std::int64_t node_min = 1, node_max = 8;
  std::int64_t link_min = 20, link_max = 40;
};

struct WorkloadConfig {
  double lambda = 0.00062;  // arrivals per ms
  std::uint64_t seed = 1;
  std::int64_t horizon_requests = 1000;
  std::optional<double> horizon_ms;  // stop earlier when the next arrival passes this time
  double client_fraction_low = 0.25;
  double client_fraction_high = 0.5;
  DemandRanges ranges;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be > 0");
    if (horizon_requests < 0) throw ConfigError("horizon_requests must be >= 0");
    if (!(client_fraction_low > 0.0 && client_fraction_low <= 1.0 && client_fraction_high > 0.0 &&
          client_fraction_high <= 1.0 && client_fraction_low <= client_fraction_high))
      throw ConfigError("client fraction bounds must satisfy 0 < low <= high <= 1");
    if (ranges.dataset_min < 0 || ranges.dataset_min > ranges.dataset_max || ranges.node_min < 1 ||
        ranges.node_min > ranges.node_max || ranges.link_min < 1 || ranges.link_min > ranges.link_max)
      throw ConfigError("invalid demand ranges");
  }
};

// Seeded generator with distribution mappings written out explicitly so
// that a given seed yields the same stream with any standard library
// (std:: distributions are implementation-defined; std::mt19937_64 is not).
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], both inclusive (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw ConfigError("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  // Exp(rate) by inversion.
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

 private:
  std::mt19937_64 engine_;
};

// Bounds on the number of participating clients: fractions of the number of
// clients attached to an edge node.
inline std::pair<std::int64_t, std::int64_t> client_count_bounds(const PhysicalGraph& g, const WorkloadConfig& cfg) {
  const double per_edge = static_cast<double>(g.clients_per_edge());
  const auto total = static_cast<std::int64_t>(g.clients().size());
  std::int64_t lo = static_cast<std::int64_t>(std::ceil(per_edge * cfg.client_fraction_low - 1e-9));
  std::int64_t hi = static_cast<std::int64_t>(std::floor(per_edge * cfg.client_fraction_high + 1e-9));
  lo = std::clamp<std::int64_t>(lo, 1, total);
  hi = std::clamp<std::int64_t>(hi, lo, total);
  return {lo, hi};
}

// Poisson arrivals with uniformly drawn request parameters; fully
// determined by (g, cfg).
inline std::vector<TrainingRoundRequest> generate_requests(const PhysicalGraph& g, const WorkloadConfig& cfg) {
  cfg.validate();
  if (g.clients().empty()) throw ConfigError("topology has no clients");
  Rng rng(cfg.seed);
  const auto [lo, hi] = client_count_bounds(g, cfg);
  const auto& catalog = model_catalog();
  std::vector<NodeIndex> pool(g.clients().begin(), g.clients().end());
  std::vector<TrainingRoundRequest> out;
  out.reserve(static_cast<std::size_t>(cfg.horizon_requests));
  double t = 0.0;
  for (std::int64_t k = 0; k < cfg.horizon_requests; ++k) {
    t += rng.exponential(cfg.lambda);
    if (cfg.horizon_ms && t > *cfg.horizon_ms) break;
    TrainingRoundRequest r;
    r.id = k;
    r.arrival_time = t;
    const auto count = static_cast<std::size_t>(rng.uniform_int(lo, hi));
    // partial Fisher-Yates over a fresh copy keeps each draw independent of history
    std::copy(g.clients().begin(), g.clients().end(), pool.begin());
    for (std::size_t i = 0; i < count; ++i) {
      auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(pool.size()) - 1));
      std::swap(pool[i], pool[j]);
    }
    r.clients.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(r.clients.begin(), r.clients.end());
    r.arch = catalog[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(catalog.size()) - 1))];
    r.dataset_size = rng.uniform_int(cfg.ranges.dataset_min, cfg.ranges.dataset_max);
    r.node_demand = rng.uniform_int(cfg.ranges.node_min, cfg.ranges.node_max);
    r.link_demand = rng.uniform_int(cfg.ranges.link_min, cfg.ranges.link_max);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fedagg
