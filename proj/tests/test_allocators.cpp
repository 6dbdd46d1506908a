// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <variant>

#include "fedagg/allocators.hpp"
#include "support.hpp"

using namespace fedagg;
using fixtures::make_request;

namespace {

// edge 1 (small) and edge 2 joined by an edge link; cloud behind edge 2;
// clients 1000 and 1001 both on edge 1.
PhysicalGraph crowded_pair(std::int64_t edge1_capacity) {
  return load_topology("node 1 edge " + std::to_string(edge1_capacity) +
                       "\nnode 2 edge 200\nnode 999 cloud 4000\nnode 1000 client 1\nnode 1001 client 1\n"
                       "link 1 2 edge 2000\nlink 2 999 cloud 4000\nlink 1000 1 end 200\nlink 1001 1 end 200\n");
}

// one client on each of edges 1 and 2; only edge 2 reaches the cloud.
PhysicalGraph shared_uplink(std::int64_t cloud_link_capacity) {
  return load_topology("node 1 edge 200\nnode 2 edge 200\nnode 999 cloud 4000\nnode 1000 client 1\nnode 1001 client 1\n"
                       "link 1 2 edge 2000\nlink 2 999 cloud " +
                       std::to_string(cloud_link_capacity) + "\nlink 1000 1 end 200\nlink 1001 2 end 200\n");
}

UsageView idle(const NetworkState& s) { return UsageView::of(s); }

}  // namespace

TEST(CloudCost, Substitution) {
  EXPECT_DOUBLE_EQ(cloud_report_cost({2, 4, 1}), 2.0);
  EXPECT_DOUBLE_EQ(cloud_report_cost({2, 4, 4}), 0.5);
  for (std::int64_t v = 1; v <= 5; ++v) EXPECT_DOUBLE_EQ(cloud_report_cost({6, 5, v}), cloud_report_cost({3, 5, v}) / 2.0);
}

TEST(CloudCost, RejectsBadParameters) {
  EXPECT_THROW(cloud_report_cost({0, 1, 1}), ConfigError);
  EXPECT_THROW(cloud_report_cost({1, 2, 3}), ConfigError);
  EXPECT_THROW(cloud_report_cost({1, 2, 0}), ConfigError);
}

TEST(CloudCost, PricingNames) {
  EXPECT_EQ(parse_cloud_pricing("plain"), CloudPricing::Plain);
  EXPECT_EQ(parse_cloud_pricing("route_scaled"), CloudPricing::RouteScaled);
  EXPECT_EQ(to_string(CloudPricing::RouteScaled), "route_scaled");
  EXPECT_THROW(parse_cloud_pricing("flat"), ConfigError);
  EXPECT_EQ(parse_strategy("hfel"), Strategy::Hfel);
  EXPECT_THROW(parse_strategy("ilp"), ConfigError);
}

TEST(PairCost, SaturatedRouteIsInfinite) {
  const auto g = fixtures::fig3_graph();
  NetworkState s(g);
  std::vector<std::int64_t> links(s.link_used().begin(), s.link_used().end());
  links[*g.link_between(g.at_id(1), g.at_id(4))] = 2000;
  const UsageView u{s.node_used(), links};
  EXPECT_TRUE(std::isinf(aggregator_edge_cost(g, u, g.at_id(2), g.at_id(4), 20, 4)));
  EXPECT_TRUE(std::isfinite(aggregator_edge_cost(g, u, g.at_id(2), g.at_id(1), 20, 4)));
}

TEST(PairCost, FewerHopsIsCheaperWhenIdle) {
  const auto g = fixtures::fig3_graph();
  NetworkState s(g);
  const double one_hop = aggregator_edge_cost(g, idle(s), g.at_id(5), g.at_id(4), 20, 4);
  const double two_hops = aggregator_edge_cost(g, idle(s), g.at_id(5), g.at_id(3), 20, 4);
  EXPECT_LT(one_hop, two_hops);
}

TEST(PairCost, MonotoneInUtilization) {
  const auto g = fixtures::fig3_graph();
  NetworkState s(g);
  const auto l = *g.link_between(g.at_id(1), g.at_id(4));
  std::vector<std::int64_t> links(g.link_count(), 0), nodes(g.node_count(), 0);
  double prev = aggregator_edge_cost(g, {nodes, links}, g.at_id(2), g.at_id(4), 20, 4);
  for (std::int64_t used : {100, 500, 1500, 1980}) {
    links[l] = used;
    const double c = aggregator_edge_cost(g, {nodes, links}, g.at_id(2), g.at_id(4), 20, 4);
    EXPECT_GE(c, prev);
    prev = c;
  }
  nodes[g.at_id(4)] = 150;
  EXPECT_GE(aggregator_edge_cost(g, {nodes, links}, g.at_id(2), g.at_id(4), 20, 4), prev);
}

TEST(Association, SingleClientSingleEdge) {
  const auto g = fixtures::line_graph();
  NetworkState s(g);
  const auto a = hfel_edge_association(g, make_request(0, {g.at_id(1000)}, 4, 20), idle(s));
  ASSERT_EQ(a.edge_of.size(), 1U);
  EXPECT_EQ(a.edge_of.at(g.at_id(1000)), g.at_id(1));
  EXPECT_TRUE(a.unplaceable.empty());
}

TEST(Association, TransferRelievesOverloadedEdge) {
  const auto g = crowded_pair(10);
  NetworkState s(g);
  const auto r = make_request(0, {g.at_id(1000), g.at_id(1001)}, 8, 20);
  const auto a = hfel_edge_association(g, r, idle(s));
  ASSERT_EQ(a.edge_of.size(), 2U);
  // both on edge 1 would need 16 units of its 10
  EXPECT_EQ(a.clients_at(g.at_id(1)).size() + a.clients_at(g.at_id(2)).size(), 2U);
  EXPECT_GE(a.clients_at(g.at_id(2)).size(), 1U);

  AssociationCost cost(g, idle(s), 20, 8);
  auto total = [&](const Assignment& x) {
    return cost.edge_cost(g.at_id(1), x.clients_at(g.at_id(1))) + cost.edge_cost(g.at_id(2), x.clients_at(g.at_id(2)));
  };
  double best = kInfiniteCost;
  for (int mask = 0; mask < 4; ++mask) {
    Assignment x;
    x.edge_of[g.at_id(1000)] = (mask & 1) ? g.at_id(2) : g.at_id(1);
    x.edge_of[g.at_id(1001)] = (mask & 2) ? g.at_id(2) : g.at_id(1);
    best = std::min(best, total(x));
  }
  EXPECT_NEAR(total(a), best, 1e-12);
}

TEST(Association, FixedPoint) {
  const auto g = builtin_topology("medium");
  NetworkState s(g);
  WorkloadConfig w;
  w.horizon_requests = 5;
  for (const auto& r : generate_requests(g, w)) {
    const auto a = hfel_edge_association(g, r, idle(s));
    EXPECT_EQ(hfel_edge_association(g, r, idle(s)), a);
    EXPECT_EQ(a.edge_of.size(), r.clients.size());
  }
}

TEST(Association, SaturatedEndLinkMarksClient) {
  const auto g = fixtures::line_graph();
  NetworkState s(g);
  std::vector<std::int64_t> links(g.link_count(), 0);
  links[g.end_link(g.at_id(1000))] = 190;
  const auto a = hfel_edge_association(g, make_request(0, {g.at_id(1000)}, 4, 20), {s.node_used(), links});
  EXPECT_EQ(a.unplaceable, std::vector<NodeIndex>{g.at_id(1000)});
}

TEST(OverlaySelect, SingleAggregatorGoesToCloud) {
  const std::vector<NodeIndex> aggs{3};
  OverlayWeights w{{{kInfiniteCost}}, {{{9, 1.0}}}};
  const auto picked = std::get<std::vector<SelectedEdge>>(select_overlay_edges(aggs, w, 2));
  ASSERT_EQ(picked.size(), 1U);
  EXPECT_EQ(picked[0].target, 9U);
}

TEST(OverlaySelect, MutualPairNeverBothChosen) {
  // A = 3, B = 7, cloud 9. Pair costs 1, cloud costs 5 at v = 1 (psi = 1).
  const std::vector<NodeIndex> aggs{3, 7};
  OverlayWeights w{{{kInfiniteCost, 1.0}, {1.0, kInfiniteCost}}, {{{9, 5.0}}, {{9, 5.0}}}};
  const auto picked = std::get<std::vector<SelectedEdge>>(select_overlay_edges(aggs, w, 2));
  ASSERT_EQ(picked.size(), 2U);
  EXPECT_EQ(aggs[picked[0].source], 3U);  // tie goes to the lower id
  EXPECT_EQ(picked[0].target, 7U);
  EXPECT_EQ(aggs[picked[1].source], 7U);
  EXPECT_EQ(picked[1].target, 9U);
  EXPECT_DOUBLE_EQ(picked[1].weight, 5.0 * cloud_report_cost({2, 2, 2}));

  // the result is the cheapest of all acyclic two-edge configurations
  // (A->B, B->c), (B->A, A->c), (A->c, B->c)
  const double chosen = picked[0].weight + picked[1].weight;
  EXPECT_LE(chosen, 1.0 + 5.0 * 0.5);
  EXPECT_LE(chosen, 5.0 + 5.0 * 0.5);
}

TEST(OverlaySelect, LargeXiSendsEveryoneToCloud) {
  const std::vector<NodeIndex> aggs{1, 2, 4};
  OverlayWeights w;
  w.pair.assign(3, std::vector<double>(3, 0.01));
  w.cloud.assign(3, {{9, 1.0}});
  const auto picked = std::get<std::vector<SelectedEdge>>(select_overlay_edges(aggs, w, 100000));
  ASSERT_EQ(picked.size(), 3U);
  for (const auto& e : picked) EXPECT_EQ(e.target, 9U);
}

TEST(OverlaySelect, StuckAggregatorReported) {
  const std::vector<NodeIndex> aggs{1, 2};
  OverlayWeights w{{{kInfiniteCost, kInfiniteCost}, {kInfiniteCost, kInfiniteCost}}, {{{9, 1.0}}, {}}};
  const auto r = select_overlay_edges(aggs, w, 2);
  ASSERT_TRUE(std::holds_alternative<std::size_t>(r));
  EXPECT_EQ(std::get<std::size_t>(r), 1U);
}

TEST(Overlay, MeshOverlayIsCloudRootedForest) {
  const auto g = builtin_topology("medium");
  NetworkState s(g);
  const std::vector<NodeIndex> aggs{g.at_id(2), g.at_id(5), g.at_id(9)};
  for (auto pricing : {CloudPricing::Plain, CloudPricing::RouteScaled}) {
    const auto res = hfel_mesh_overlay(g, idle(s), aggs, 2, 20, 4, pricing);
    ASSERT_FALSE(res.failure) << *res.failure;
    EXPECT_TRUE(res.overlay.is_cloud_rooted_forest(g, aggs));
  }
}

TEST(Place, TinyRequestClaimsEveryComponent) {
  const auto g = fixtures::line_graph();
  NetworkState s(g);
  for (auto strat : {Strategy::Hfel, Strategy::HfelMesh}) {
    const auto d = place_request(g, make_request(0, {g.at_id(1000)}, 3, 20), s, {strat, 2});
    ASSERT_TRUE(d.placed()) << d.reason;
    const Claims want{{{g.at_id(1), 3}, {g.at_id(999), 3}},
                      {{g.end_link(g.at_id(1000)), 20}, {*g.link_between(g.at_id(1), g.at_id(999)), 20}}};
    EXPECT_EQ(d.claims.node_totals(), want.node_totals());
    EXPECT_EQ(d.claims.link_totals(), want.link_totals());
  }
}

TEST(Place, SharedUplinkFailsHfelButNotMesh) {
  // two aggregators, cloud link fits one 20 Mbps flow but not two
  const auto g = shared_uplink(30);
  NetworkState s(g);
  const auto r = make_request(0, {g.at_id(1000), g.at_id(1001)}, 8, 20);
  const auto hfel = place_request(g, r, s, {Strategy::Hfel, 2});
  EXPECT_FALSE(hfel.placed());
  EXPECT_NE(hfel.reason.find("999"), std::string::npos) << hfel.reason;
  const auto mesh = place_request(g, r, s, {Strategy::HfelMesh, 2});
  ASSERT_TRUE(mesh.placed()) << mesh.reason;
  EXPECT_EQ(mesh.aggregators.size(), 2U);
  EXPECT_EQ(mesh.overlay.cloud_flows(g), 1U);
  const auto cl = *g.link_between(g.at_id(2), g.at_id(999));
  for (auto [l, v] : mesh.claims.link_totals()) {
    if (l == cl) {
      EXPECT_EQ(v, 20);
    }
  }
}

TEST(Place, FailureClaimsNothing) {
  const auto g = fixtures::line_graph(10);
  NetworkState s(g);
  const auto before = s;
  const auto d = place_request(g, make_request(0, {g.at_id(1000)}, 3, 20), s, {});
  EXPECT_FALSE(d.placed());
  EXPECT_TRUE(d.claims.empty());
  EXPECT_FALSE(d.reason.empty());
  EXPECT_TRUE(s == before);
  EXPECT_TRUE(s.idle());
}

TEST(Place, ClaimsFitResiduals) {
  const auto g = builtin_topology("large");
  NetworkState s(g);
  WorkloadConfig w;
  w.horizon_requests = 40;
  for (const auto& r : generate_requests(g, w)) {
    const auto d = place_request(g, r, s, {});
    if (!d.placed()) continue;
    EXPECT_FALSE(s.first_violation(d.claims));
    s.apply(r.id, d.claims);
    EXPECT_TRUE(s.audit());
  }
}
