// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fedagg/ilp.hpp"
#include "fedagg/metrics.hpp"
#include "support.hpp"

using namespace fedagg;
using fixtures::make_request;

namespace {

// hand-built log on the line graph: cloud link usage given as (time, used)
ResultsLog line_log(const std::vector<std::pair<double, std::int64_t>>& cloud_usage, double end_time) {
  const auto g = fixtures::line_graph();
  ResultsLog log;
  log.graph = std::make_shared<const PhysicalGraph>(g);
  const auto cl = *g.link_between(g.at_id(1), g.at_id(999));
  for (auto [t, used] : cloud_usage) {
    UsageSample s{t, std::vector<std::int64_t>(g.node_count(), 0), std::vector<std::int64_t>(g.link_count(), 0)};
    s.link_used[cl] = used;
    log.usage.push_back(std::move(s));
  }
  log.end_time = end_time;
  return log;
}

RunSummary sample_summary() {
  RunSummary s;
  s.topology = "medium";
  s.strategy = "hfel_mesh";
  s.xi = 4;
  s.lambda = 0.00062;
  s.seed = 3;
  s.t_total = 10;
  s.t_failed = 3;
  s.trfr = 0.3;
  s.mur_cloud_link = 0.1234567890123;
  s.mur_edge_link = 1.0 / 3.0;
  s.mur_edge_node = 2e-7;
  s.weighted_capacity = 98765.25;
  s.mean_round_ms = 23456.0625;
  s.mean_placement_ms = 0.0;
  return s;
}

}  // namespace

TEST(Trfr, Fractions) {
  ResultsLog log;
  log.t_total = 10;
  EXPECT_EQ(trfr(log), 0.0);
  log.t_failed = 3;
  EXPECT_DOUBLE_EQ(trfr(log), 0.3);
  log.t_total = 0;
  log.t_failed = 0;
  EXPECT_THROW(trfr(log), MetricError);
}

TEST(Mur, IdleRunIsZero) {
  const auto log = line_log({{0.0, 0}}, 100.0);
  EXPECT_EQ(mur(log, ComponentKind::CloudLink), 0.0);
  EXPECT_EQ(mur(log, ComponentKind::EdgeNode), 0.0);
}

TEST(Mur, FullLinkWholeRunIsOne) {
  const auto log = line_log({{0.0, 4000}}, 50.0);
  EXPECT_DOUBLE_EQ(mur(log, ComponentKind::CloudLink), 1.0);
}

TEST(Mur, TwoSamplesTimeWeighted) {
  // 0 for [0,4), half for [4,10): 6 * 0.5 / 10
  const auto log = line_log({{0.0, 0}, {4.0, 2000}}, 10.0);
  EXPECT_DOUBLE_EQ(mur(log, ComponentKind::CloudLink), 0.3);
}

TEST(Mur, SplittingAnIntervalChangesNothing) {
  const auto a = line_log({{0.0, 0}, {4.0, 2000}, {8.0, 1000}}, 10.0);
  const auto b = line_log({{0.0, 0}, {4.0, 2000}, {6.0, 2000}, {8.0, 1000}, {9.0, 1000}}, 10.0);
  EXPECT_DOUBLE_EQ(mur(a, ComponentKind::CloudLink), mur(b, ComponentKind::CloudLink));
  EXPECT_DOUBLE_EQ(mur(a, ComponentKind::CloudLink), (4.0 * 0.5 + 2.0 * 0.25) / 10.0);
}

TEST(Mur, EmptyKindIsAnError) {
  const auto log = line_log({{0.0, 0}}, 10.0);  // the line has no edge-edge link
  EXPECT_THROW(mur(log, ComponentKind::EdgeLink), MetricError);
}

TEST(Mur, SnapshotAveragesAcrossComponents) {
  const auto g = builtin_topology("medium");
  std::vector<std::int64_t> nodes(g.node_count(), 0), links(g.link_count(), 0);
  nodes[g.edges()[0]] = 200;
  nodes[g.edges()[1]] = 100;
  EXPECT_DOUBLE_EQ(snapshot_mur(g, nodes, links, ComponentKind::EdgeNode), 1.5 / 11.0);
}

TEST(Capacity, IdleRunIsZero) {
  const auto log = line_log({{0.0, 0}}, 10.0);
  EXPECT_EQ(cumulative_weighted_capacity(log), 0.0);
}

TEST(Capacity, SingleLineRequestMatchesIlp) {
  const auto g = fixtures::line_graph();
  const std::vector<TrainingRoundRequest> reqs{make_request(0, {g.at_id(1000)}, 3, 20, 1.0)};
  const auto log = run(g, SimConfig{}, reqs);
  const auto aux = build_auxiliary_graph(g, g.edges());
  const auto sol = solve_exact(build_model(g, aux, reqs));
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(cumulative_weighted_capacity(log), sol.objective);
}

TEST(Capacity, CloudWeightScalesOnlyCloudPart) {
  const auto g = fixtures::line_graph();
  const auto log = run(g, SimConfig{}, {make_request(0, {g.at_id(1000)}, 3, 20, 1.0)});
  auto w = ComponentWeights::of(g);
  const double base = cumulative_weighted_capacity(log, w);
  const auto cl = *g.link_between(g.at_id(1), g.at_id(999));
  const double cloud_part = w.link_beta[cl] * 20;
  w.link_beta[cl] *= 2;
  EXPECT_DOUBLE_EQ(cumulative_weighted_capacity(log, w), base + cloud_part);
}

TEST(Capacity, MissingWeightNamesComponent) {
  const auto g = fixtures::line_graph();
  const auto log = run(g, SimConfig{}, {make_request(0, {g.at_id(1000)}, 3, 20, 1.0)});
  auto w = ComponentWeights::of(g);
  const auto cl = *g.link_between(g.at_id(1), g.at_id(999));
  w.link_beta[cl] = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)cumulative_weighted_capacity(log, w);
    FAIL() << "expected MetricError";
  } catch (const MetricError& e) {
    EXPECT_NE(std::string(e.what()).find(g.link_name(cl)), std::string::npos) << e.what();
  }
  w = ComponentWeights::of(g);
  w.node_alpha.resize(1);
  EXPECT_THROW(cumulative_weighted_capacity(log, w), MetricError);
}

TEST(Capacity, RepeatedClaimsCountTwice) {
  const auto g = fixtures::line_graph();
  const Claims c{{}, {{g.end_link(g.at_id(1000)), 20}, {g.end_link(g.at_id(1000)), 20}}};
  EXPECT_DOUBLE_EQ(weighted_claims(g, c, ComponentWeights::of(g)), 40.0);
}

TEST(Export, EmptyCsvIsHeaderOnly) { EXPECT_EQ(to_csv({}), std::string(kSummaryCsvHeader) + "\n"); }

TEST(Export, OneRowHasEveryField) {
  const auto csv = to_csv({sample_summary()});
  const auto nl = csv.find('\n');
  const auto row = csv.substr(nl + 1);
  ASSERT_EQ(std::count(row.begin(), row.end(), '\n'), 1);
  const auto header = csv.substr(0, nl);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.rfind("medium,hfel_mesh,4,", 0), 0U) << row;
}

TEST(Export, JsonRoundTrip) {
  auto a = sample_summary();
  auto b = a;
  b.seed = 4;
  b.topology = "a \"quoted\" path";
  const std::vector<RunSummary> rows{a, b};
  EXPECT_EQ(summaries_from_json(to_json_text(rows)), rows);
  EXPECT_TRUE(summaries_from_json(to_json_text({})).empty());
  EXPECT_THROW(summaries_from_json("[{\"topology\": 1}]"), ParseError);
  EXPECT_THROW(summaries_from_json("not json"), ParseError);
}

TEST(Summary, FromRun) {
  auto g = builtin_topology("medium");
  SimConfig c;
  c.workload.horizon_requests = 30;
  const auto log = run(g, c);
  const auto s = summarize(log, "medium");
  EXPECT_EQ(s.t_total, 30);
  EXPECT_EQ(s.strategy, "hfel_mesh");
  EXPECT_EQ(s.xi, c.allocator.xi);
  EXPECT_GT(s.mean_round_ms, 0.0);
  EXPECT_EQ(s.mean_placement_ms, 0.0);
  EXPECT_GT(s.weighted_capacity, 0.0);
  EXPECT_GE(s.mur_cloud_link, 0.0);
  EXPECT_LE(s.mur_cloud_link, 1.0);
}
