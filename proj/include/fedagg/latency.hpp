// SPDX-License-Identifier: Apache-2.0
//
// Task durations in milliseconds.

#pragma once

#include <cstdint>

#include "fedagg/errors.hpp"
#include "fedagg/workload.hpp"

namespace fedagg {

struct LatencyConstants {
  double bytes_per_weight = 4.0;
  double bits_per_weight = 32.0;
  double ops_per_unit_second = 1e9;  // weight-bytes one computing unit folds per second
  double mbps_to_bps = 1e6;
};

// Local training on the client's dataset.
inline double training_latency(const ModelArch& a, std::int64_t dataset_size) {
  if (dataset_size < 0) throw ConfigError("dataset size must be >= 0");
  return a.per_image_train_ms * static_cast<double>(dataset_size);
}

// Averaging `fan_in` incoming models with `units` computing units.
inline double aggregation_latency(const ModelArch& a, std::int64_t fan_in, std::int64_t units,
                                  const LatencyConstants& k = {}) {
  if (units < 1) throw ConfigError("aggregation needs at least one computing unit");
  if (fan_in < 0) throw ConfigError("fan-in must be >= 0");
  const double seconds = k.bytes_per_weight * static_cast<double>(a.weight_count) * static_cast<double>(fan_in) /
                         (k.ops_per_unit_second * static_cast<double>(units));
  return seconds * 1000.0;
}

// One model transfer at `mbps` reserved bandwidth.
inline double transfer_latency(const ModelArch& a, std::int64_t mbps, const LatencyConstants& k = {}) {
  if (mbps < 1) throw ConfigError("transfer bandwidth must be >= 1 Mbps");
  const double seconds = k.bits_per_weight * static_cast<double>(a.weight_count) / (static_cast<double>(mbps) * k.mbps_to_bps);
  return seconds * 1000.0;
}

}  // namespace fedagg
