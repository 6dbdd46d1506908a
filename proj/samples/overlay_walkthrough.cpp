// SPDX-License-Identifier: Apache-2.0
//
// Five edge nodes and a cloud wired as 2-1-4-3-cloud with 5 hanging off 4.
// One request from clients at nodes 2 and 5: place it with HFEL-MESH, then
// solve the same instance exactly.

#include <iostream>

#include "fedagg/allocators.hpp"
#include "fedagg/ilp.hpp"

int main() {
  using namespace fedagg;
  TopologyDocument doc;
  for (NodeId e = 1; e <= 5; ++e) doc.nodes.push_back({e, NodeKind::Edge, 200, 0});
  doc.nodes.push_back({999, NodeKind::Cloud, 4000, 0});
  doc.nodes.push_back({1000, NodeKind::Client, 1, 0});
  doc.nodes.push_back({1001, NodeKind::Client, 1, 0});
  doc.links = {{2, 1, LinkKind::Edge, 2000, 0},  {1, 4, LinkKind::Edge, 2000, 0},   {5, 4, LinkKind::Edge, 2000, 0},
               {4, 3, LinkKind::Edge, 2000, 0},  {3, 999, LinkKind::Cloud, 4000, 0}, {1000, 2, LinkKind::End, 200, 0},
               {1001, 5, LinkKind::End, 200, 0}};
  const PhysicalGraph g = PhysicalGraph::from_document(doc);

  TrainingRoundRequest r;
  r.id = 0;
  r.clients = {g.at_id(1000), g.at_id(1001)};
  r.arch = find_arch("Squeezenet");
  r.dataset_size = 100;
  r.node_demand = 4;
  r.link_demand = 20;

  NetworkState state(g);
  const auto d = place_request(g, r, state, AllocatorConfig{Strategy::HfelMesh, 2});
  std::cout << "heuristic: " << (d.placed() ? "placed" : d.reason) << "\n";
  for (const auto& e : d.overlay.edges) {
    std::cout << "  " << g.name(e.source) << " -> " << g.name(e.target) << " via";
    for (NodeIndex n : e.route.nodes) std::cout << ' ' << g.node(n).id;
    std::cout << "\n";
  }

  const auto aux = build_auxiliary_graph(g, g.edges());
  const std::vector<TrainingRoundRequest> reqs{r};
  const auto model = build_model(g, aux, reqs);
  const auto sol = solve_exact(model);
  std::cout << "exact: " << to_string(sol.status) << " objective " << sol.objective << " ("
            << model.variables.size() << " variables, " << model.rows.size() << " rows)\n";
  return d.placed() && sol.status == SolveStatus::Optimal ? 0 : 1;
}
