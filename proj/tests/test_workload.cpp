// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fedagg/workload.hpp"

using namespace fedagg;

TEST(Catalog, HasSixArchitectures) {
  const auto& c = model_catalog();
  EXPECT_EQ(c.size(), 6U);
  const auto& sq = find_arch("Squeezenet");
  EXPECT_DOUBLE_EQ(sq.per_image_train_ms, 26.4);
  EXPECT_EQ(sq.weight_count, 421098);
  const auto& r50 = find_arch("Res50");
  EXPECT_DOUBLE_EQ(r50.per_image_train_ms, 77.8);
  EXPECT_EQ(r50.weight_count, 25557032);
  for (const auto& a : c) {
    EXPECT_GT(a.per_image_train_ms, 0.0);
    EXPECT_GT(a.weight_count, 0);
  }
  EXPECT_THROW(find_arch("VGG16"), ConfigError);
}

TEST(Rng, UniformIntStaysInRange) {
  Rng rng(3);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const auto v = rng.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5U);
  EXPECT_THROW(rng.uniform_int(2, 1), ConfigError);
}

TEST(Generate, DeterministicBySeed) {
  const auto g = builtin_topology("medium");
  WorkloadConfig cfg;
  cfg.seed = 42;
  cfg.horizon_requests = 500;
  EXPECT_EQ(generate_requests(g, cfg), generate_requests(g, cfg));
  auto other = cfg;
  other.seed = 43;
  EXPECT_NE(generate_requests(g, cfg), generate_requests(g, other));
}

TEST(Generate, FieldsWithinRanges) {
  const auto g = builtin_topology("medium");
  WorkloadConfig cfg;
  cfg.horizon_requests = 100000;
  const auto [lo, hi] = client_count_bounds(g, cfg);
  EXPECT_EQ(lo, 5);
  EXPECT_EQ(hi, 10);
  const auto reqs = generate_requests(g, cfg);
  ASSERT_EQ(reqs.size(), 100000U);
  double prev = 0.0;
  for (const auto& r : reqs) {
    ASSERT_GE(r.dataset_size, 59);
    ASSERT_LE(r.dataset_size, 118);
    ASSERT_GE(r.node_demand, 1);
    ASSERT_LE(r.node_demand, 8);
    ASSERT_GE(request_link_load(r), 20);
    ASSERT_LE(request_link_load(r), 40);
    ASSERT_GE(static_cast<std::int64_t>(r.clients.size()), lo);
    ASSERT_LE(static_cast<std::int64_t>(r.clients.size()), hi);
    ASSERT_TRUE(std::is_sorted(r.clients.begin(), r.clients.end()));
    ASSERT_TRUE(std::adjacent_find(r.clients.begin(), r.clients.end()) == r.clients.end());
    for (NodeIndex c : r.clients) ASSERT_EQ(g.node(c).kind, NodeKind::Client);
    ASSERT_GT(r.arrival_time, prev);
    prev = r.arrival_time;
  }
}

TEST(Generate, ClientsSpanWholeTopology) {
  const auto g = builtin_topology("medium");
  WorkloadConfig cfg;
  cfg.horizon_requests = 2000;
  std::set<NodeIndex> edges;
  for (const auto& r : generate_requests(g, cfg))
    for (NodeIndex c : r.clients) edges.insert(g.attachment(c));
  EXPECT_EQ(edges.size(), g.edges().size());
}

TEST(Generate, MeanInterArrival) {
  const auto g = builtin_topology("medium");
  WorkloadConfig cfg;
  cfg.lambda = 0.00062;
  cfg.horizon_requests = 20000;
  const auto reqs = generate_requests(g, cfg);
  const double mean = reqs.back().arrival_time / static_cast<double>(reqs.size());
  EXPECT_NEAR(mean, 1612.9, 0.05 * 1612.9);
}

TEST(Generate, InterArrivalPassesKolmogorovSmirnov) {
  const auto g = builtin_topology("large");
  WorkloadConfig cfg;
  cfg.lambda = 0.00085;
  cfg.seed = 9;
  cfg.horizon_requests = 10000;
  const auto reqs = generate_requests(g, cfg);
  std::vector<double> gaps;
  double prev = 0.0;
  for (const auto& r : reqs) {
    gaps.push_back(r.arrival_time - prev);
    prev = r.arrival_time;
  }
  std::sort(gaps.begin(), gaps.end());
  const double n = static_cast<double>(gaps.size());
  double d = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double cdf = 1.0 - std::exp(-cfg.lambda * gaps[i]);
    d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(n));  // alpha = 0.01
}

TEST(Generate, HorizonInMilliseconds) {
  const auto g = builtin_topology("medium");
  WorkloadConfig cfg;
  cfg.horizon_ms = 100000.0;
  const auto reqs = generate_requests(g, cfg);
  ASSERT_FALSE(reqs.empty());
  EXPECT_LE(reqs.back().arrival_time, 100000.0);
  EXPECT_LT(reqs.size(), 1000U);
}

TEST(Config, RejectsInvalidValues) {
  WorkloadConfig cfg;
  cfg.lambda = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.client_fraction_low = 0.6;
  cfg.client_fraction_high = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.client_fraction_high = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(LinkLoad, ReturnsLinkDemand) {
  TrainingRoundRequest r;
  r.link_demand = 20;
  EXPECT_EQ(request_link_load(r), 20);
  r.link_demand = 40;
  EXPECT_EQ(request_link_load(r), 40);
}
