// SPDX-License-Identifier: Apache-2.0
//
// Small fixtures shared by the unit tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fedagg/topology.hpp"
#include "fedagg/workload.hpp"

namespace fedagg::fixtures {

// Edge nodes 1..5 and cloud 999: links 2-1, 1-4, 5-4, 4-3, 3-cloud.
// Client 1000 hangs off node 2 and client 1001 off node 5.
inline PhysicalGraph fig3_graph(const WeightConfig& w = {}) {
  TopologyDocument doc;
  for (NodeId e = 1; e <= 5; ++e) doc.nodes.push_back({e, NodeKind::Edge, 200, 0});
  doc.nodes.push_back({999, NodeKind::Cloud, 4000, 0});
  doc.nodes.push_back({1000, NodeKind::Client, 1, 0});
  doc.nodes.push_back({1001, NodeKind::Client, 1, 0});
  doc.links = {{2, 1, LinkKind::Edge, 2000, 0},   {1, 4, LinkKind::Edge, 2000, 0},    {5, 4, LinkKind::Edge, 2000, 0},
               {4, 3, LinkKind::Edge, 2000, 0},   {3, 999, LinkKind::Cloud, 4000, 0}, {1000, 2, LinkKind::End, 200, 0},
               {1001, 5, LinkKind::End, 200, 0}};
  return PhysicalGraph::from_document(doc, w);
}

// client 1000 - edge 1 - cloud 999.
inline PhysicalGraph line_graph(std::int64_t cloud_link_capacity = 4000, const WeightConfig& w = {}) {
  TopologyDocument doc;
  doc.nodes = {{1, NodeKind::Edge, 200, 0}, {999, NodeKind::Cloud, 4000, 0}, {1000, NodeKind::Client, 1, 0}};
  doc.links = {{1000, 1, LinkKind::End, 200, 0}, {1, 999, LinkKind::Cloud, cloud_link_capacity, 0}};
  return PhysicalGraph::from_document(doc, w);
}

inline TrainingRoundRequest make_request(std::int64_t id, std::vector<NodeIndex> clients, std::int64_t node_demand,
                                         std::int64_t link_demand, double arrival = 0.0) {
  TrainingRoundRequest r;
  r.id = id;
  r.arrival_time = arrival;
  std::sort(clients.begin(), clients.end());
  r.clients = std::move(clients);
  r.arch = find_arch("Squeezenet");
  r.dataset_size = 100;
  r.node_demand = node_demand;
  r.link_demand = link_demand;
  return r;
}

struct SmallInstance {
  PhysicalGraph graph;
  std::vector<TrainingRoundRequest> requests;
};

// Random instance with 1-5 edge nodes, tight capacities, integer weights
// and 0-2 requests.
inline SmallInstance random_small_instance(std::uint64_t seed) {
  Rng rng(seed);
  const auto E = static_cast<int>(rng.uniform_int(1, 5));
  TopologyDocument d;
  for (int e = 1; e <= E; ++e) d.nodes.push_back({e, NodeKind::Edge, rng.uniform_int(4, 20), 0});
  d.nodes.push_back({99, NodeKind::Cloud, rng.uniform_int(8, 40), 0});
  for (int e = 2; e <= E; ++e) d.links.push_back({rng.uniform_int(1, e - 1), e, LinkKind::Edge, rng.uniform_int(20, 120), 0});
  for (int a = 1; a <= E; ++a)
    for (int b = a + 1; b <= E; ++b) {
      if (!(rng.uniform01() < 0.3)) continue;
      const bool dup = std::any_of(d.links.begin(), d.links.end(), [&](const LinkRecord& l) { return l.a == a && l.b == b; });
      if (!dup) d.links.push_back({a, b, LinkKind::Edge, rng.uniform_int(20, 120), 0});
    }
  d.links.push_back({1, 99, LinkKind::Cloud, rng.uniform_int(20, 160), 0});
  if (E > 2 && rng.uniform01() < 0.5) d.links.push_back({E, 99, LinkKind::Cloud, rng.uniform_int(20, 160), 0});
  NodeId cid = 100;
  for (int e = 1; e <= E; ++e) {
    const auto c = rng.uniform_int(1, 3);
    for (std::int64_t i = 0; i < c; ++i, ++cid) {
      d.nodes.push_back({cid, NodeKind::Client, 1, 0});
      d.links.push_back({cid, e, LinkKind::End, rng.uniform_int(40, 120), 0});
    }
  }
  SmallInstance inst{PhysicalGraph::from_document(d), {}};
  auto& g = inst.graph;
  for (NodeIndex i = 0; i < g.node_count(); ++i) g.set_alpha(i, static_cast<double>(rng.uniform_int(1, 3)));
  for (LinkIndex l = 0; l < g.link_count(); ++l) g.set_beta(l, static_cast<double>(rng.uniform_int(1, 5)));
  const auto K = rng.uniform_int(0, 2);
  for (std::int64_t k = 0; k < K; ++k) {
    std::vector<NodeIndex> clients;
    for (NodeIndex c : g.clients())
      if (rng.uniform01() < 0.5) clients.push_back(c);
    if (clients.empty()) clients.push_back(g.clients().front());
    inst.requests.push_back(make_request(k, clients, rng.uniform_int(1, 8), rng.uniform_int(20, 40)));
  }
  return inst;
}

}  // namespace fedagg::fixtures
