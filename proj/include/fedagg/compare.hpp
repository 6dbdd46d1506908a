// SPDX-License-Identifier: Apache-2.0
//
// Static three-way comparison on one batch of requests: the exact ILP
// optimum against both heuristics placing the batch in id order on an
// otherwise empty network. Nothing is released in between.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fedagg/allocators.hpp"
#include "fedagg/engine.hpp"
#include "fedagg/ilp.hpp"
#include "fedagg/metrics.hpp"
#include "fedagg/topology.hpp"
#include "fedagg/workload.hpp"

namespace fedagg {

// `count` requests with exactly `clients` participants each.
inline std::vector<TrainingRoundRequest> static_batch(const PhysicalGraph& g, std::int64_t count, std::int64_t clients,
                                                      std::uint64_t seed) {
  const auto per_edge = static_cast<double>(g.clients_per_edge());
  if (clients < 1 || static_cast<double>(clients) > per_edge)
    throw ConfigError("clients per request must lie in [1, clients per edge node]");
  WorkloadConfig w;
  w.seed = seed;
  w.horizon_requests = count;
  w.client_fraction_low = w.client_fraction_high = static_cast<double>(clients) / per_edge;
  return generate_requests(g, w);
}

struct MethodResult {
  std::string method;
  bool skipped = false;
  std::string note;         // reason for skip or failure
  bool all_placed = false;  // heuristics: every request placed
  double objective = 0.0;   // cumulative weighted capacity
  double mur_cloud_link = 0.0;
  double mur_edge_link = 0.0;
  double mur_edge_node = 0.0;
  double seconds = 0.0;
};

struct ComparisonTable {
  std::vector<MethodResult> rows;  // ilp, hfel, hfel_mesh

  const MethodResult& row(std::string_view method) const {
    for (const auto& r : rows)
      if (r.method == method) return r;
    throw ConfigError("no row for " + std::string(method));
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "method,objective,mur_cloud_link,mur_edge_link,mur_edge_node,seconds,note\n";
    for (const auto& r : rows) {
      os << r.method << ',';
      if (r.skipped)
        os << "skipped,,,,,";
      else
        os << detail::fmt(r.objective) << ',' << detail::fmt(r.mur_cloud_link) << ',' << detail::fmt(r.mur_edge_link) << ','
           << detail::fmt(r.mur_edge_node) << ',' << detail::fmt(r.seconds) << ',';
      os << r.note << '\n';
    }
    return os.str();
  }
};

struct CompareOptions {
  std::int64_t xi = 2;
  std::size_t ilp_request_limit = 10;
  SolveLimits limits;
};

inline MethodResult compare_heuristic(const PhysicalGraph& g, const std::vector<TrainingRoundRequest>& reqs, Strategy s,
                                      std::int64_t xi) {
  MethodResult r;
  r.method = std::string(to_string(s));
  const auto t0 = std::chrono::steady_clock::now();
  NetworkState state(g);
  const auto w = ComponentWeights::of(g);
  r.all_placed = true;
  for (const auto& q : reqs) {
    const auto d = place_request(g, q, state, AllocatorConfig{s, xi});
    if (!d.placed()) {
      r.all_placed = false;
      r.note = "request " + std::to_string(q.id) + ": " + d.reason;
      continue;
    }
    state.apply(q.id, d.claims);
    r.objective += weighted_claims(g, d.claims, w);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.mur_cloud_link = snapshot_mur(state, g, ComponentKind::CloudLink);
  r.mur_edge_link = snapshot_mur(state, g, ComponentKind::EdgeLink);
  r.mur_edge_node = snapshot_mur(state, g, ComponentKind::EdgeNode);
  return r;
}

inline MethodResult compare_ilp(const PhysicalGraph& g, const std::vector<TrainingRoundRequest>& reqs, const CompareOptions& o) {
  MethodResult r;
  r.method = "ilp";
  if (reqs.size() > o.ilp_request_limit) {
    r.skipped = true;
    r.note = "more than " + std::to_string(o.ilp_request_limit) + " requests";
    return r;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto aux = build_auxiliary_graph(g, g.edges());
  const auto model = build_model(g, aux, reqs);
  const auto sol = solve_exact(model, o.limits);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sol.status != SolveStatus::Optimal) {
    r.skipped = true;
    r.note = std::string(to_string(sol.status));
    return r;
  }
  r.all_placed = true;
  r.objective = sol.objective;
  std::vector<std::int64_t> node_used(g.node_count(), 0), link_used(g.link_count(), 0);
  for (NodeIndex n = 0; n < g.node_count(); ++n)
    if (auto i = model.find(names::etan(g, n))) node_used[n] = static_cast<std::int64_t>(std::llround(sol.values[*i]));
  for (LinkIndex l = 0; l < g.link_count(); ++l)
    if (auto i = model.find(names::etae(g, l))) link_used[l] = static_cast<std::int64_t>(std::llround(sol.values[*i]));
  r.mur_cloud_link = snapshot_mur(g, node_used, link_used, ComponentKind::CloudLink);
  r.mur_edge_link = snapshot_mur(g, node_used, link_used, ComponentKind::EdgeLink);
  r.mur_edge_node = snapshot_mur(g, node_used, link_used, ComponentKind::EdgeNode);
  return r;
}

inline ComparisonTable compare_methods(const PhysicalGraph& g, const std::vector<TrainingRoundRequest>& reqs,
                                       const CompareOptions& o = {}) {
  ComparisonTable t;
  t.rows.push_back(compare_ilp(g, reqs, o));
  t.rows.push_back(compare_heuristic(g, reqs, Strategy::Hfel, o.xi));
  t.rows.push_back(compare_heuristic(g, reqs, Strategy::HfelMesh, o.xi));
  return t;
}

}  // namespace fedagg
