// SPDX-License-Identifier: Apache-2.0
//
// Online placement strategies. HFEL: clients are associated with edge
// aggregators by device transfer / device exchange local search, and every
// aggregator reports straight to the cloud. HFEL-MESH: same association,
// then aggregators are greedily linked into a cloud-rooted overlay forest
// where an aggregator may report to another aggregator.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fedagg/errors.hpp"
#include "fedagg/network_state.hpp"
#include "fedagg/topology.hpp"
#include "fedagg/workload.hpp"

namespace fedagg {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

enum class Strategy { Hfel, HfelMesh };

inline std::string_view to_string(Strategy s) { return s == Strategy::Hfel ? "hfel" : "hfel_mesh"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "hfel") return Strategy::Hfel;
  if (s == "hfel_mesh" || s == "hfel-mesh" || s == "mesh") return Strategy::HfelMesh;
  throw ConfigError("unknown strategy '" + std::string(s) + "' (expected hfel or hfel_mesh)");
}

// Read-only view of used capacity; either the live NetworkState or a
// scratch copy that already includes part of the request being placed.
struct UsageView {
  std::span<const std::int64_t> node_used;
  std::span<const std::int64_t> link_used;

  static UsageView of(const NetworkState& s) { return {s.node_used(), s.link_used()}; }
};

// ---------------------------------------------------------------------------
// Cost terms
// ---------------------------------------------------------------------------

// beta * d / (C - used + d): grows with load, equals beta*d/C on an idle link.
inline double link_load_cost(const PhysicalGraph& g, const UsageView& u, LinkIndex l, std::int64_t demand) {
  const double free = static_cast<double>(g.link(l).capacity - u.link_used[l]);
  return g.beta(l) * static_cast<double>(demand) / (free + static_cast<double>(demand));
}

inline double node_load_cost(const PhysicalGraph& g, const UsageView& u, NodeIndex n, std::int64_t demand) {
  const double free = static_cast<double>(g.node(n).capacity - u.node_used[n]);
  return g.alpha(n) * static_cast<double>(demand) / (free + static_cast<double>(demand));
}

inline double route_load_cost(const PhysicalGraph& g, const UsageView& u, const PhysicalRoute& r, std::int64_t demand) {
  double c = 0.0;
  for (LinkIndex l : r.links) c += link_load_cost(g, u, l, demand);
  return c;
}

struct PricedRoute {
  double cost = kInfiniteCost;
  std::optional<PhysicalRoute> route;
};

// Cost of sending one aggregated model from `src` to aggregator `tgt`:
// load-aware price of the min-hop feasible route plus the price of
// aggregating at the target. +inf when either is infeasible.
inline PricedRoute price_aggregator_edge(const PhysicalGraph& g, const UsageView& u, NodeIndex src, NodeIndex tgt,
                                         std::int64_t link_demand, std::int64_t node_demand) {
  if (g.node(tgt).capacity - u.node_used[tgt] < node_demand) return {};
  auto route = shortest_physical_route(g, u.link_used, src, tgt, link_demand);
  if (!route) return {};
  const double c = route_load_cost(g, u, *route, link_demand) + node_load_cost(g, u, tgt, node_demand);
  return {c, std::move(route)};
}

inline double aggregator_edge_cost(const PhysicalGraph& g, const UsageView& u, NodeIndex src, NodeIndex tgt,
                                   std::int64_t link_demand, std::int64_t node_demand) {
  return price_aggregator_edge(g, u, src, tgt, link_demand, node_demand).cost;
}

// Parameters of the cloud-reporting price V / (xi * v).
struct CostParams {
  std::int64_t xi = 2;
  std::int64_t aggregator_count = 1;  // V
  std::int64_t iteration = 1;         // v, 1-based

  void validate() const {
    if (xi < 1) throw ConfigError("xi must be >= 1");
    if (aggregator_count < 1 || iteration < 1 || iteration > aggregator_count)
      throw ConfigError("cloud cost needs 1 <= v <= V");
  }
};

inline double cloud_report_cost(const CostParams& p) {
  p.validate();
  return static_cast<double>(p.aggregator_count) / (static_cast<double>(p.xi) * static_cast<double>(p.iteration));
}

// How the overlay prices an aggregator->cloud edge. Plain uses V / (xi * v)
// as is. RouteScaled multiplies it by the load price of the aggregator's
// cloud route (links plus the cloud node), which puts it on the same scale
// as the pair prices.
enum class CloudPricing { Plain, RouteScaled };

inline std::string_view to_string(CloudPricing p) { return p == CloudPricing::Plain ? "plain" : "route_scaled"; }

inline CloudPricing parse_cloud_pricing(std::string_view s) {
  if (s == "plain") return CloudPricing::Plain;
  if (s == "route_scaled") return CloudPricing::RouteScaled;
  throw ConfigError("unknown cloud pricing '" + std::string(s) + "' (expected plain or route_scaled)");
}

// ---------------------------------------------------------------------------
// Edge association
// ---------------------------------------------------------------------------

struct Assignment {
  std::map<NodeIndex, NodeIndex> edge_of;  // client -> edge
  std::vector<NodeIndex> unplaceable;      // ascending

  // Edge nodes holding at least one client, ascending.
  std::vector<NodeIndex> aggregators() const {
    std::vector<NodeIndex> a;
    for (auto [_, e] : edge_of) a.push_back(e);
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  }
  std::vector<NodeIndex> clients_at(NodeIndex edge) const {
    std::vector<NodeIndex> c;
    for (auto [cl, e] : edge_of)
      if (e == edge) c.push_back(cl);
    return c;
  }
  bool operator==(const Assignment&) const = default;
};

// Cost model used by the association local search. The aggregation term
// is convex in fan-in so that an edge shedding load to an idle neighbour
// pays off only once the shed client's longer access route is covered.
class AssociationCost {
 public:
  AssociationCost(const PhysicalGraph& g, const UsageView& u, std::int64_t link_demand, std::int64_t node_demand)
      : g_(g), u_(u), link_demand_(link_demand), node_demand_(node_demand) {}

  double access(NodeIndex client, NodeIndex edge) {
    auto key = std::make_pair(client, edge);
    if (auto it = access_.find(key); it != access_.end()) return it->second;
    double c = kInfiniteCost;
    if (auto r = shortest_physical_route(g_, u_.link_used, client, edge, link_demand_))
      c = route_load_cost(g_, u_, *r, link_demand_);
    access_.emplace(key, c);
    return c;
  }

  double load(NodeIndex edge, std::size_t fan_in) const {
    if (fan_in == 0) return 0.0;
    const auto free = g_.node(edge).capacity - u_.node_used[edge];
    if (free < node_demand_) return kInfiniteCost;
    const double d = static_cast<double>(node_demand_);
    const double m = static_cast<double>(fan_in);
    const double denom = std::max(d, static_cast<double>(free) + d - (m - 1.0) * d);
    return g_.alpha(edge) * m * d / denom;
  }

  double edge_cost(NodeIndex edge, const std::vector<NodeIndex>& clients) {
    double c = load(edge, clients.size());
    for (NodeIndex cl : clients) c += access(cl, edge);
    return c;
  }

 private:
  const PhysicalGraph& g_;
  UsageView u_;
  std::int64_t link_demand_, node_demand_;
  std::map<std::pair<NodeIndex, NodeIndex>, double> access_;
};

// Starts from the nearest-edge assignment and applies device transfers and
// device exchanges over all edge-node pairs (ascending order) while any
// move strictly lowers the pair's cost.
inline Assignment hfel_edge_association(const PhysicalGraph& g, const TrainingRoundRequest& r, const UsageView& u) {
  constexpr double kEps = 1e-12;
  const std::int64_t sigma_e = request_link_load(r);
  AssociationCost cost(g, u, sigma_e, r.node_demand);
  const auto edges = g.edges();
  std::map<NodeIndex, std::vector<NodeIndex>> members;  // edge -> clients (ascending)
  Assignment out;
  for (NodeIndex c : r.clients) {
    if (g.node(c).kind != NodeKind::Client) throw ConfigError(g.name(c) + " is not a client");
    if (u.link_used[g.end_link(c)] + sigma_e > g.link(g.end_link(c)).capacity) {
      out.unplaceable.push_back(c);
      continue;
    }
    members[g.attachment(c)].push_back(c);
  }
  auto sorted_insert = [](std::vector<NodeIndex>& v, NodeIndex x) { v.insert(std::upper_bound(v.begin(), v.end(), x), x); };
  auto erase = [](std::vector<NodeIndex>& v, NodeIndex x) { v.erase(std::find(v.begin(), v.end(), x)); };

  bool any = true;
  for (int pass = 0; any && pass < 64; ++pass) {
    any = false;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        const NodeIndex v1 = edges[i], v2 = edges[j];
        auto& s1 = members[v1];
        auto& s2 = members[v2];
        if (s1.empty() && s2.empty()) continue;
        bool improved = true;
        while (improved) {
          improved = false;
          const double base = cost.edge_cost(v1, s1) + cost.edge_cost(v2, s2);
          // device transfer, both directions
          for (int dir = 0; dir < 2 && !improved; ++dir) {
            auto& from = dir == 0 ? s1 : s2;
            auto& to = dir == 0 ? s2 : s1;
            const NodeIndex vf = dir == 0 ? v1 : v2, vt = dir == 0 ? v2 : v1;
            for (NodeIndex c : std::vector<NodeIndex>(from)) {
              auto f2 = from;
              erase(f2, c);
              auto t2 = to;
              sorted_insert(t2, c);
              const double after = cost.edge_cost(vf, f2) + cost.edge_cost(vt, t2);
              if (after < base - kEps || (std::isinf(base) && !std::isinf(after))) {
                from = std::move(f2);
                to = std::move(t2);
                improved = true;
                break;
              }
            }
          }
          // device exchange
          if (!improved) {
            for (NodeIndex c1 : std::vector<NodeIndex>(s1)) {
              for (NodeIndex c2 : std::vector<NodeIndex>(s2)) {
                auto a = s1, b = s2;
                erase(a, c1);
                sorted_insert(a, c2);
                erase(b, c2);
                sorted_insert(b, c1);
                const double after = cost.edge_cost(v1, a) + cost.edge_cost(v2, b);
                if (after < base - kEps || (std::isinf(base) && !std::isinf(after))) {
                  s1 = std::move(a);
                  s2 = std::move(b);
                  improved = true;
                  break;
                }
              }
              if (improved) break;
            }
          }
          any = any || improved;
        }
      }
    }
  }
  for (auto& [edge, cl] : members) {
    if (cl.empty()) continue;
    const bool edge_ok = !std::isinf(cost.load(edge, cl.size()));
    for (NodeIndex c : cl) {
      if (edge_ok && !std::isinf(cost.access(c, edge)))
        out.edge_of[c] = edge;
      else
        out.unplaceable.push_back(c);
    }
  }
  std::sort(out.unplaceable.begin(), out.unplaceable.end());
  return out;
}

// ---------------------------------------------------------------------------
// Overlay
// ---------------------------------------------------------------------------

struct OverlayEdge {
  NodeIndex source = kNoNode;
  NodeIndex target = kNoNode;
  double weight = 0.0;
  PhysicalRoute route;
};

// Directed aggregator forest; edges kept in commit order.
struct OverlayTopology {
  std::vector<OverlayEdge> edges;

  std::optional<NodeIndex> parent(NodeIndex n) const {
    for (const auto& e : edges)
      if (e.source == n) return e.target;
    return std::nullopt;
  }
  std::vector<NodeIndex> children(NodeIndex n) const {
    std::vector<NodeIndex> c;
    for (const auto& e : edges)
      if (e.target == n) c.push_back(e.source);
    std::sort(c.begin(), c.end());
    return c;
  }
  // Overlay edges ending at a cloud node (model flows over cloud links).
  std::size_t cloud_flows(const PhysicalGraph& g) const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const OverlayEdge& e) {
      return g.node(e.target).kind == NodeKind::Cloud;
    }));
  }
  // Every aggregator has exactly one outgoing edge, no cycles, all chains
  // end at a cloud node, and each route realizes its edge.
  bool is_cloud_rooted_forest(const PhysicalGraph& g, std::span<const NodeIndex> aggregators) const {
    std::map<NodeIndex, NodeIndex> par;
    for (const auto& e : edges) {
      if (!par.emplace(e.source, e.target).second) return false;
      if (e.route.source != e.source || e.route.destination != e.target) return false;
      if (e.route.nodes.empty() || e.route.nodes.front() != e.source || e.route.nodes.back() != e.target) return false;
    }
    if (par.size() != aggregators.size()) return false;
    for (NodeIndex a : aggregators) {
      if (!par.count(a)) return false;
      NodeIndex cur = a;
      for (std::size_t steps = 0; steps <= par.size(); ++steps) {
        if (g.node(cur).kind == NodeKind::Cloud) break;
        auto it = par.find(cur);
        if (it == par.end()) return false;
        cur = it->second;
      }
      if (g.node(cur).kind != NodeKind::Cloud) return false;
    }
    return true;
  }
};

struct OverlayResult {
  OverlayTopology overlay;
  std::optional<std::string> failure;
};

// Min-hop feasible route to the nearest cloud (ties: lowest cloud id).
inline std::optional<PhysicalRoute> route_to_cloud(const PhysicalGraph& g, std::span<const std::int64_t> link_used,
                                                   NodeIndex src, std::int64_t demand) {
  std::optional<PhysicalRoute> best;
  for (NodeIndex c : g.clouds()) {
    auto r = shortest_physical_route(g, link_used, src, c, demand);
    if (r && (!best || r->hops() < best->hops())) best = std::move(r);
  }
  return best;
}

namespace detail {

inline bool reaches(const std::map<NodeIndex, NodeIndex>& parent, NodeIndex from, NodeIndex to) {
  NodeIndex cur = from;
  for (std::size_t guard = 0; guard <= parent.size(); ++guard) {
    if (cur == to) return true;
    auto it = parent.find(cur);
    if (it == parent.end()) return false;
    cur = it->second;
  }
  return false;
}

// First link lacking residual on the capacity-blind min-hop route, if the
// shortfall is what blocks src -> dst.
inline std::optional<std::string> bottleneck(const PhysicalGraph& g, std::span<const std::int64_t> link_used, NodeIndex src,
                                             NodeIndex dst, std::int64_t demand) {
  const auto r = shortest_physical_route(g, link_used, src, dst, 0);
  if (!r) return std::nullopt;
  for (LinkIndex l : r->links)
    if (g.link(l).capacity - link_used[l] < demand) return g.link_name(l);
  return std::nullopt;
}

// Maps overlay edges onto physical routes in commit order, charging each
// route's demand on the scratch usage before routing the next one.
inline std::optional<std::string> route_overlay(const PhysicalGraph& g, std::vector<std::int64_t>& scratch_links,
                                                OverlayTopology& ov, std::int64_t link_demand) {
  for (auto& e : ov.edges) {
    auto r = shortest_physical_route(g, scratch_links, e.source, e.target, link_demand);
    if (!r) {
      if (auto b = bottleneck(g, scratch_links, e.source, e.target, link_demand)) return "capacity exceeded on " + *b;
      return "no feasible route for overlay edge " + g.name(e.source) + " -> " + g.name(e.target);
    }
    for (LinkIndex l : r->links) scratch_links[l] += link_demand;
    e.route = std::move(*r);
  }
  return std::nullopt;
}

}  // namespace detail

// Weights fed to the greedy overlay selection. `pair[i][j]` prices
// aggregator i -> aggregator j (+inf when infeasible); `cloud[i]` lists the
// reachable clouds of aggregator i with the factor applied to V / (xi * v).
struct OverlayWeights {
  std::vector<std::vector<double>> pair;
  std::vector<std::vector<std::pair<NodeIndex, double>>> cloud;
};

struct SelectedEdge {
  std::size_t source = 0;  // index into the aggregator list
  NodeIndex target = kNoNode;
  double weight = 0.0;
};

// Greedy forest selection: the globally cheapest remaining edge is
// committed unless it closes a cycle; its source then stops being a source
// (it stays a valid target). v counts committed edges + 1. Ties go to the
// lowest (source id, target id). Returns edges in commit order, or the index
// of an aggregator left without any feasible edge.
inline std::variant<std::vector<SelectedEdge>, std::size_t> select_overlay_edges(std::span<const NodeIndex> aggregators,
                                                                                   const OverlayWeights& w, std::int64_t xi) {
  const std::size_t n = aggregators.size();
  std::vector<SelectedEdge> chosen;
  if (n == 0) return chosen;
  std::map<NodeIndex, NodeIndex> parent;
  std::vector<char> open(n, 1);
  const auto V = static_cast<std::int64_t>(n);
  while (std::find(open.begin(), open.end(), 1) != open.end()) {
    const std::int64_t v = static_cast<std::int64_t>(parent.size()) + 1;
    const double psi = cloud_report_cost({xi, V, v});
    std::set<std::pair<NodeIndex, NodeIndex>> rejected;  // cycle-closing edges, this round only
    while (true) {
      double best = kInfiniteCost;
      std::size_t bi = n;
      NodeIndex bt = kNoNode;
      auto consider = [&](std::size_t i, NodeIndex t, double wt) {
        if (std::isinf(wt) || rejected.count({aggregators[i], t})) return;
        const NodeIndex s = aggregators[i];
        if (wt < best || (wt == best && bi < n && std::make_pair(s, t) < std::make_pair(aggregators[bi], bt))) {
          best = wt;
          bi = i;
          bt = t;
        }
      };
      for (std::size_t i = 0; i < n; ++i) {
        if (!open[i]) continue;
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) consider(i, aggregators[j], w.pair[i][j]);
        for (auto [c, factor] : w.cloud[i]) consider(i, c, psi * factor);
      }
      if (bi == n) {
        std::size_t stuck = 0;
        while (!open[stuck]) ++stuck;
        return stuck;
      }
      if (detail::reaches(parent, bt, aggregators[bi])) {
        rejected.emplace(aggregators[bi], bt);
        continue;
      }
      parent[aggregators[bi]] = bt;
      open[bi] = 0;
      chosen.push_back({bi, bt, best});
      break;
    }
  }
  return chosen;
}

// HFEL-MESH overlay: aggregator pairs are priced with aggregator_edge_cost,
// aggregator->cloud edges with V / (xi * v) scaled per `pricing`, then
// select_overlay_edges picks the forest. Routes are assigned afterwards
// against `u` plus the routes already placed.
inline OverlayResult hfel_mesh_overlay(const PhysicalGraph& g, const UsageView& u, std::span<const NodeIndex> aggregators,
                                       std::int64_t xi, std::int64_t link_demand, std::int64_t node_demand,
                                       CloudPricing pricing = CloudPricing::RouteScaled) {
  OverlayResult res;
  if (aggregators.empty()) return res;
  const std::size_t n = aggregators.size();
  OverlayWeights w;
  w.pair.assign(n, std::vector<double>(n, kInfiniteCost));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) w.pair[i][j] = aggregator_edge_cost(g, u, aggregators[i], aggregators[j], link_demand, node_demand);
  w.cloud.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (NodeIndex c : g.clouds()) {
      if (g.node(c).capacity - u.node_used[c] < node_demand) continue;
      const auto r = shortest_physical_route(g, u.link_used, aggregators[i], c, link_demand);
      if (!r) continue;
      const double factor = pricing == CloudPricing::Plain
                                ? 1.0
                                : route_load_cost(g, u, *r, link_demand) + node_load_cost(g, u, c, node_demand);
      w.cloud[i].emplace_back(c, factor);
    }
  auto picked = select_overlay_edges(aggregators, w, xi);
  if (auto* stuck = std::get_if<std::size_t>(&picked)) {
    res.failure = "aggregator " + g.name(aggregators[*stuck]) + " has no feasible overlay edge";
    return res;
  }
  for (const auto& e : std::get<std::vector<SelectedEdge>>(picked))
    res.overlay.edges.push_back({aggregators[e.source], e.target, e.weight, {}});
  std::vector<std::int64_t> scratch(u.link_used.begin(), u.link_used.end());
  res.failure = detail::route_overlay(g, scratch, res.overlay, link_demand);
  return res;
}

// Two-level overlay: every aggregator reports to its nearest cloud.
inline OverlayResult hfel_overlay(const PhysicalGraph& g, const UsageView& u, std::span<const NodeIndex> aggregators,
                                  std::int64_t link_demand) {
  OverlayResult res;
  for (NodeIndex a : aggregators) {
    auto r = route_to_cloud(g, u.link_used, a, link_demand);
    if (!r) {
      for (NodeIndex c : g.clouds())
        if (auto b = detail::bottleneck(g, u.link_used, a, c, link_demand)) {
          res.failure = "capacity exceeded on " + *b;
          return res;
        }
      res.failure = "aggregator " + g.name(a) + " cannot reach a cloud node";
      return res;
    }
    res.overlay.edges.push_back({a, r->destination, 0.0, {}});
  }
  std::vector<std::int64_t> scratch(u.link_used.begin(), u.link_used.end());
  res.failure = detail::route_overlay(g, scratch, res.overlay, link_demand);
  return res;
}

// ---------------------------------------------------------------------------
// Placement
// ---------------------------------------------------------------------------

struct AllocatorConfig {
  Strategy strategy = Strategy::HfelMesh;
  std::int64_t xi = 2;
  CloudPricing cloud_pricing = CloudPricing::RouteScaled;
};

enum class PlacementStatus { Placed, Failed };

struct PlacementDecision {
  std::int64_t request = 0;
  Strategy strategy = Strategy::HfelMesh;
  PlacementStatus status = PlacementStatus::Failed;
  std::string reason;  // empty when placed
  Assignment assignment;
  std::vector<NodeIndex> aggregators;
  std::vector<std::pair<NodeIndex, PhysicalRoute>> client_routes;  // client -> its aggregator
  OverlayTopology overlay;
  Claims claims;  // empty when failed

  bool placed() const { return status == PlacementStatus::Placed; }
};

// Decides association, overlay and physical routes for one request against
// the current state. Pure: the caller applies `claims` on success. A failed
// decision claims nothing; `reason` names the first infeasible component.
inline PlacementDecision place_request(const PhysicalGraph& g, const TrainingRoundRequest& r, const NetworkState& state,
                                       const AllocatorConfig& cfg) {
  PlacementDecision d;
  d.request = r.id;
  d.strategy = cfg.strategy;
  auto fail = [&](std::string why) {
    d.status = PlacementStatus::Failed;
    d.reason = std::move(why);
    d.claims = {};
    return d;
  };
  if (r.clients.empty()) return fail("request has no clients");
  const std::int64_t sigma_e = request_link_load(r);
  const std::int64_t sigma_n = r.node_demand;
  const UsageView live = UsageView::of(state);

  d.assignment = hfel_edge_association(g, r, live);
  if (!d.assignment.unplaceable.empty())
    return fail("client " + std::to_string(g.node(d.assignment.unplaceable.front()).id) + " unplaceable");
  d.aggregators = d.assignment.aggregators();

  // client uploads first, so the overlay sees the load they add
  std::vector<std::int64_t> scratch_links(state.link_used().begin(), state.link_used().end());
  for (auto [client, edge] : d.assignment.edge_of) {
    auto route = shortest_physical_route(g, scratch_links, client, edge, sigma_e);
    if (!route) return fail("no feasible route from client " + std::to_string(g.node(client).id));
    for (LinkIndex l : route->links) scratch_links[l] += sigma_e;
    d.client_routes.emplace_back(client, std::move(*route));
  }
  const UsageView after_uploads{state.node_used(), scratch_links};
  OverlayResult ov = cfg.strategy == Strategy::Hfel
                         ? hfel_overlay(g, after_uploads, d.aggregators, sigma_e)
                         : hfel_mesh_overlay(g, after_uploads, d.aggregators, cfg.xi, sigma_e, sigma_n, cfg.cloud_pricing);
  if (ov.failure) return fail(*ov.failure);
  d.overlay = std::move(ov.overlay);

  Claims c;
  for (const auto& [_, route] : d.client_routes)
    for (LinkIndex l : route.links) c.links.emplace_back(l, sigma_e);
  for (const auto& e : d.overlay.edges)
    for (LinkIndex l : e.route.links) c.links.emplace_back(l, sigma_e);
  for (NodeIndex a : d.aggregators) c.nodes.emplace_back(a, sigma_n);
  std::vector<NodeIndex> clouds;
  for (const auto& e : d.overlay.edges)
    if (g.node(e.target).kind == NodeKind::Cloud) clouds.push_back(e.target);
  std::sort(clouds.begin(), clouds.end());
  clouds.erase(std::unique(clouds.begin(), clouds.end()), clouds.end());
  for (NodeIndex cl : clouds) c.nodes.emplace_back(cl, sigma_n);

  if (auto bad = state.first_violation(c)) return fail("capacity exceeded on " + *bad);
  d.claims = std::move(c);
  d.status = PlacementStatus::Placed;
  return d;
}

}  // namespace fedagg
