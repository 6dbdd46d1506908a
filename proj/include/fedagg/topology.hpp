// SPDX-License-Identifier: Apache-2.0
//
// Physical MEC/SD-WAN graph: typed nodes (client, edge, cloud), typed
// capacitated bidirectional links (end, edge, cloud), the text document
// format used to load and save it, capacity-aware min-hop routing, and the
// complete auxiliary graph over aggregator candidates plus cloud nodes.

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedagg/errors.hpp"

namespace fedagg {

// Dense position of a node inside a PhysicalGraph. Nodes are stored sorted
// by their external id, so index order equals id order.
using NodeIndex = std::uint32_t;
using LinkIndex = std::uint32_t;
// Identifier as written in topology documents.
using NodeId = std::int64_t;

inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();

enum class NodeKind { Client, Edge, Cloud };
enum class LinkKind { End, Edge, Cloud };

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Client: return "client";
    case NodeKind::Edge: return "edge";
    case NodeKind::Cloud: return "cloud";
  }
  return "?";
}

inline std::string_view to_string(LinkKind k) {
  switch (k) {
    case LinkKind::End: return "end";
    case LinkKind::Edge: return "edge";
    case LinkKind::Cloud: return "cloud";
  }
  return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
  if (s == "client") return NodeKind::Client;
  if (s == "edge") return NodeKind::Edge;
  if (s == "cloud") return NodeKind::Cloud;
  return std::nullopt;
}

inline std::optional<LinkKind> parse_link_kind(std::string_view s) {
  if (s == "end") return LinkKind::End;
  if (s == "edge") return LinkKind::Edge;
  if (s == "cloud") return LinkKind::Cloud;
  return std::nullopt;
}

struct PhysicalNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Edge;
  std::int64_t capacity = 0;  // computing units

  bool operator==(const PhysicalNode&) const = default;
};

struct PhysicalLink {
  NodeIndex a = kNoNode;  // a < b
  NodeIndex b = kNoNode;
  LinkKind kind = LinkKind::Edge;
  std::int64_t capacity = 0;  // Mbps, shared by both directions

  NodeIndex other(NodeIndex n) const { return n == a ? b : a; }
  bool operator==(const PhysicalLink&) const = default;
};

// Per-kind objective weights (alpha for nodes, beta for links).
struct WeightConfig {
  double alpha_client = 1.0;
  double alpha_edge = 1.0;
  double alpha_cloud = 1.0;
  double beta_end = 1.0;
  double beta_edge = 1.0;
  double beta_cloud = 10.0;

  double alpha(NodeKind k) const {
    switch (k) {
      case NodeKind::Client: return alpha_client;
      case NodeKind::Edge: return alpha_edge;
      case NodeKind::Cloud: return alpha_cloud;
    }
    return 0.0;
  }
  double beta(LinkKind k) const {
    switch (k) {
      case LinkKind::End: return beta_end;
      case LinkKind::Edge: return beta_edge;
      case LinkKind::Cloud: return beta_cloud;
    }
    return 0.0;
  }
};

// ---------------------------------------------------------------------------
// Topology document
// ---------------------------------------------------------------------------

struct NodeRecord {
  NodeId id = 0;
  NodeKind kind = NodeKind::Edge;
  std::int64_t capacity = 0;
  std::size_t line = 0;
};

struct LinkRecord {
  NodeId a = 0;
  NodeId b = 0;
  LinkKind kind = LinkKind::Edge;
  std::int64_t capacity = 0;
  std::size_t line = 0;
};

struct TopologyDocument {
  std::vector<NodeRecord> nodes;
  std::vector<LinkRecord> links;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream is{std::string(line)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline std::optional<std::int64_t> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  try {
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace detail

// Parses the line-oriented topology format:
//   node <id> <client|edge|cloud> <capacity>
//   link <id_a> <id_b> <end|edge|cloud> <capacity_mbps>
// `#` starts a comment; blank lines are ignored. Structural validation is
// left to PhysicalGraph::from_document.
inline TopologyDocument parse_topology(std::string_view text) {
  TopologyDocument doc;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++lineno;
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = detail::split_ws(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (tok[0] == "node") {
      if (tok.size() != 4) throw ParseError(lineno, "node record needs: node <id> <kind> <capacity>");
      auto id = detail::parse_int(tok[1]);
      auto kind = parse_node_kind(tok[2]);
      auto cap = detail::parse_int(tok[3]);
      if (!id) throw ParseError(lineno, "bad node id '" + tok[1] + "'");
      if (!kind) throw ParseError(lineno, "unknown node kind '" + tok[2] + "'");
      if (!cap) throw ParseError(lineno, "bad node capacity '" + tok[3] + "'");
      doc.nodes.push_back({*id, *kind, *cap, lineno});
    } else if (tok[0] == "link") {
      if (tok.size() != 5) throw ParseError(lineno, "link record needs: link <id_a> <id_b> <kind> <capacity_mbps>");
      auto a = detail::parse_int(tok[1]);
      auto b = detail::parse_int(tok[2]);
      auto kind = parse_link_kind(tok[3]);
      auto cap = detail::parse_int(tok[4]);
      if (!a || !b) throw ParseError(lineno, "bad link endpoint");
      if (!kind) throw ParseError(lineno, "unknown link kind '" + tok[3] + "'");
      if (!cap) throw ParseError(lineno, "bad link capacity '" + tok[4] + "'");
      doc.links.push_back({*a, *b, *kind, *cap, lineno});
    } else {
      throw ParseError(lineno, "unknown record '" + tok[0] + "'");
    }
    if (end == text.size()) break;
  }
  return doc;
}

// ---------------------------------------------------------------------------
// PhysicalGraph
// ---------------------------------------------------------------------------

struct Adjacent {
  NodeIndex node;
  LinkIndex link;
};

// Validated physical substrate. Immutable after construction except for
// the objective weights; used capacity lives in NetworkState.
class PhysicalGraph {
 public:
  PhysicalGraph() = default;

  // Validates and indexes a document. Throws ValidationError naming the
  // offending element.
  static PhysicalGraph from_document(const TopologyDocument& doc, const WeightConfig& weights = {}) {
    PhysicalGraph g;
    std::vector<NodeRecord> nodes = doc.nodes;
    std::sort(nodes.begin(), nodes.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    std::map<NodeId, NodeIndex> index;
    for (const auto& n : nodes) {
      if (n.capacity < 0)
        throw ValidationError("negative capacity on node " + std::to_string(n.id));
      if (!index.emplace(n.id, static_cast<NodeIndex>(g.nodes_.size())).second)
        throw ValidationError("duplicate node " + std::to_string(n.id));
      g.nodes_.push_back({n.id, n.kind, n.capacity});
    }
    std::set<std::pair<NodeIndex, NodeIndex>> seen;
    for (const auto& l : doc.links) {
      const std::string name = "link (" + std::to_string(l.a) + "," + std::to_string(l.b) + ")";
      auto ia = index.find(l.a);
      auto ib = index.find(l.b);
      if (ia == index.end() || ib == index.end())
        throw ValidationError(name + " references an unknown node");
      if (ia->second == ib->second) throw ValidationError(name + " is a self-loop");
      if (l.capacity < 0) throw ValidationError("negative capacity on " + name);
      NodeIndex a = std::min(ia->second, ib->second);
      NodeIndex b = std::max(ia->second, ib->second);
      if (!seen.emplace(a, b).second) throw ValidationError("duplicate " + name);
      const NodeKind ka = g.nodes_[a].kind;
      const NodeKind kb = g.nodes_[b].kind;
      const bool has_client = ka == NodeKind::Client || kb == NodeKind::Client;
      const bool has_cloud = ka == NodeKind::Cloud || kb == NodeKind::Cloud;
      const bool has_edge = ka == NodeKind::Edge || kb == NodeKind::Edge;
      if (has_client && !(has_edge && l.kind == LinkKind::End))
        throw ValidationError(name + ": a client must attach to an edge node via an end link");
      if (!has_client && l.kind == LinkKind::End)
        throw ValidationError(name + ": end link without a client endpoint");
      if (has_cloud && !has_client && !(has_edge && l.kind == LinkKind::Cloud))
        throw ValidationError(name + ": cloud links must join an edge node and a cloud node");
      if (!has_cloud && l.kind == LinkKind::Cloud)
        throw ValidationError(name + ": cloud link without a cloud endpoint");
      if (l.kind == LinkKind::Edge && !(ka == NodeKind::Edge && kb == NodeKind::Edge))
        throw ValidationError(name + ": edge links must join two edge nodes");
      g.links_.push_back({a, b, l.kind, l.capacity});
    }
    g.finish(weights);
    return g;
  }

  std::span<const PhysicalNode> nodes() const { return nodes_; }
  std::span<const PhysicalLink> links() const { return links_; }
  const PhysicalNode& node(NodeIndex i) const { return nodes_.at(i); }
  const PhysicalLink& link(LinkIndex l) const { return links_.at(l); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }

  // Neighbours sorted by node index.
  std::span<const Adjacent> adjacent(NodeIndex i) const { return adjacency_.at(i); }

  std::span<const NodeIndex> clients() const { return clients_; }
  std::span<const NodeIndex> edges() const { return edges_; }
  std::span<const NodeIndex> clouds() const { return clouds_; }

  std::optional<NodeIndex> index_of(NodeId id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const PhysicalNode& n, NodeId v) { return n.id < v; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<NodeIndex>(it - nodes_.begin());
  }
  NodeIndex at_id(NodeId id) const {
    auto i = index_of(id);
    if (!i) throw ConfigError("no node with id " + std::to_string(id));
    return *i;
  }

  std::optional<LinkIndex> link_between(NodeIndex a, NodeIndex b) const {
    for (const auto& adj : adjacency_.at(a))
      if (adj.node == b) return adj.link;
    return std::nullopt;
  }

  // Edge node a client is attached to.
  NodeIndex attachment(NodeIndex client) const { return attachment_.at(client); }
  LinkIndex end_link(NodeIndex client) const { return end_link_.at(client); }
  // Clients attached to an edge node, ascending.
  std::span<const NodeIndex> clients_of(NodeIndex edge) const { return clients_of_.at(edge); }
  // Largest number of clients attached to any one edge node.
  std::size_t clients_per_edge() const {
    std::size_t m = 0;
    for (auto e : edges_) m = std::max(m, clients_of_[e].size());
    return m;
  }

  double alpha(NodeIndex n) const { return alpha_.at(n); }
  double beta(LinkIndex l) const { return beta_.at(l); }
  std::span<const double> alphas() const { return alpha_; }
  std::span<const double> betas() const { return beta_; }
  const WeightConfig& weight_config() const { return weights_; }
  void set_weights(const WeightConfig& w) {
    weights_ = w;
    alpha_.resize(nodes_.size());
    beta_.resize(links_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) alpha_[i] = w.alpha(nodes_[i].kind);
    for (std::size_t l = 0; l < links_.size(); ++l) beta_[l] = w.beta(links_[l].kind);
  }
  void set_alpha(NodeIndex n, double v) { alpha_.at(n) = v; }
  void set_beta(LinkIndex l, double v) { beta_.at(l) = v; }

  // Structural equality (ids, kinds, capacities, link set); weights ignored.
  bool same_structure(const PhysicalGraph& o) const { return nodes_ == o.nodes_ && sorted_links() == o.sorted_links(); }

  std::string name(NodeIndex n) const { return std::string(to_string(nodes_.at(n).kind)) + " " + std::to_string(nodes_.at(n).id); }
  std::string link_name(LinkIndex l) const {
    const auto& k = links_.at(l);
    return std::string(to_string(k.kind)) + " link (" + std::to_string(nodes_[k.a].id) + "," +
           std::to_string(nodes_[k.b].id) + ")";
  }

 private:
  std::vector<PhysicalLink> sorted_links() const {
    auto v = links_;
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    return v;
  }

  void finish(const WeightConfig& w) {
    const std::size_t n = nodes_.size();
    adjacency_.assign(n, {});
    for (LinkIndex l = 0; l < links_.size(); ++l) {
      adjacency_[links_[l].a].push_back({links_[l].b, l});
      adjacency_[links_[l].b].push_back({links_[l].a, l});
    }
    for (auto& adj : adjacency_)
      std::sort(adj.begin(), adj.end(), [](const Adjacent& x, const Adjacent& y) { return x.node < y.node; });
    attachment_.assign(n, kNoNode);
    end_link_.assign(n, std::numeric_limits<LinkIndex>::max());
    clients_of_.assign(n, {});
    for (NodeIndex i = 0; i < n; ++i) {
      switch (nodes_[i].kind) {
        case NodeKind::Client: clients_.push_back(i); break;
        case NodeKind::Edge: edges_.push_back(i); break;
        case NodeKind::Cloud: clouds_.push_back(i); break;
      }
    }
    if (clouds_.empty()) throw ValidationError("no cloud node");
    for (NodeIndex c : clients_) {
      const auto& adj = adjacency_[c];
      if (adj.empty()) throw ValidationError("client " + std::to_string(nodes_[c].id) + " has no end link");
      if (adj.size() > 1)
        throw ValidationError("client multi-homing: client " + std::to_string(nodes_[c].id) + " has " +
                              std::to_string(adj.size()) + " end links");
      attachment_[c] = adj[0].node;
      end_link_[c] = adj[0].link;
      clients_of_[adj[0].node].push_back(c);
    }
    // connectivity
    if (n > 0) {
      std::vector<char> seen(n, 0);
      std::deque<NodeIndex> queue{0};
      seen[0] = 1;
      std::size_t count = 1;
      while (!queue.empty()) {
        NodeIndex u = queue.front();
        queue.pop_front();
        for (const auto& a : adjacency_[u])
          if (!seen[a.node]) {
            seen[a.node] = 1;
            ++count;
            queue.push_back(a.node);
          }
      }
      if (count != n) {
        NodeIndex first = 0;
        while (seen[first]) ++first;
        throw ValidationError("graph is disconnected: " + name(first) + " unreachable from " + name(0));
      }
    }
    set_weights(w);
  }

  std::vector<PhysicalNode> nodes_;
  std::vector<PhysicalLink> links_;
  std::vector<std::vector<Adjacent>> adjacency_;
  std::vector<NodeIndex> clients_, edges_, clouds_;
  std::vector<NodeIndex> attachment_;
  std::vector<LinkIndex> end_link_;
  std::vector<std::vector<NodeIndex>> clients_of_;
  std::vector<double> alpha_, beta_;
  WeightConfig weights_;
};

inline PhysicalGraph load_topology(std::string_view text, const WeightConfig& w = {}) {
  return PhysicalGraph::from_document(parse_topology(text), w);
}

// Serializes a graph in the topology document format (nodes by id, then
// links in storage order).
inline std::string save_topology(const PhysicalGraph& g) {
  std::ostringstream os;
  os << "# nodes: " << g.node_count() << ", links: " << g.link_count() << "\n";
  for (const auto& n : g.nodes()) os << "node " << n.id << ' ' << to_string(n.kind) << ' ' << n.capacity << "\n";
  for (const auto& l : g.links())
    os << "link " << g.node(l.a).id << ' ' << g.node(l.b).id << ' ' << to_string(l.kind) << ' ' << l.capacity << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

struct PhysicalRoute {
  NodeIndex source = kNoNode;
  NodeIndex destination = kNoNode;
  std::vector<NodeIndex> nodes;  // source ... destination
  std::vector<LinkIndex> links;  // nodes.size() - 1 entries

  std::size_t hops() const { return links.size(); }
  bool operator==(const PhysicalRoute&) const = default;
};

// Only edge nodes forward traffic; clients and clouds are route endpoints.
inline bool can_transit(const PhysicalGraph& g, NodeIndex n) { return g.node(n).kind == NodeKind::Edge; }

// Minimum-hop route from src to dst using only links whose residual
// capacity (capacity - used) is at least `demand`. Among minimum-hop routes
// the lexicographically smallest node-id sequence wins. Returns nullopt when
// no feasible route exists.
inline std::optional<PhysicalRoute> shortest_physical_route(const PhysicalGraph& g,
                                                            std::span<const std::int64_t> link_used,
                                                            NodeIndex src, NodeIndex dst, std::int64_t demand) {
  if (src == dst) throw ConfigError("route endpoints must differ");
  const std::size_t n = g.node_count();
  auto usable = [&](LinkIndex l) {
    const std::int64_t used = link_used.empty() ? 0 : link_used[l];
    return g.link(l).capacity - used >= demand;
  };
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> dist(n, kInf);
  std::deque<NodeIndex> queue{dst};
  dist[dst] = 0;
  while (!queue.empty()) {
    NodeIndex v = queue.front();
    queue.pop_front();
    if (v != dst && !can_transit(g, v)) continue;
    for (const auto& a : g.adjacent(v)) {
      if (dist[a.node] != kInf || !usable(a.link)) continue;
      if (a.node != src && !can_transit(g, a.node)) continue;
      dist[a.node] = dist[v] + 1;
      if (a.node != src) queue.push_back(a.node);
    }
  }
  if (dist[src] == kInf) return std::nullopt;
  PhysicalRoute r{src, dst, {src}, {}};
  NodeIndex cur = src;
  while (cur != dst) {
    bool advanced = false;
    for (const auto& a : g.adjacent(cur)) {  // ascending node index == ascending id
      if (dist[a.node] == kInf || dist[a.node] + 1 != dist[cur] || !usable(a.link)) continue;
      if (a.node != dst && !can_transit(g, a.node)) continue;
      r.nodes.push_back(a.node);
      r.links.push_back(a.link);
      cur = a.node;
      advanced = true;
      break;
    }
    if (!advanced) return std::nullopt;  // unreachable with a consistent BFS
  }
  return r;
}

// ---------------------------------------------------------------------------
// Auxiliary graph
// ---------------------------------------------------------------------------

struct AuxiliaryArc {
  NodeIndex source = kNoNode;
  NodeIndex target = kNoNode;
  std::optional<double> weight;  // unset until an allocator assigns it
};

// Complete directed graph over aggregator candidates plus all cloud nodes.
// An auxiliary arc may bypass intermediate physical nodes.
struct AuxiliaryGraph {
  std::vector<NodeIndex> nodes;  // ascending
  std::vector<AuxiliaryArc> arcs;

  bool contains(NodeIndex n) const { return std::binary_search(nodes.begin(), nodes.end(), n); }
  std::optional<std::size_t> arc_index(NodeIndex s, NodeIndex t) const {
    for (std::size_t i = 0; i < arcs.size(); ++i)
      if (arcs[i].source == s && arcs[i].target == t) return i;
    return std::nullopt;
  }
};

inline AuxiliaryGraph build_auxiliary_graph(const PhysicalGraph& g, std::span<const NodeIndex> candidates) {
  AuxiliaryGraph a;
  for (NodeIndex c : candidates) {
    if (c >= g.node_count() || g.node(c).kind != NodeKind::Edge)
      throw ConfigError("aggregator candidate " + (c < g.node_count() ? g.name(c) : std::to_string(c)) +
                        " is not an edge node");
    a.nodes.push_back(c);
  }
  for (NodeIndex r : g.clouds()) a.nodes.push_back(r);
  std::sort(a.nodes.begin(), a.nodes.end());
  a.nodes.erase(std::unique(a.nodes.begin(), a.nodes.end()), a.nodes.end());
  for (NodeIndex s : a.nodes)
    for (NodeIndex t : a.nodes)
      if (s != t) a.arcs.push_back({s, t, std::nullopt});
  return a;
}

// ---------------------------------------------------------------------------
// Builtin topologies
// ---------------------------------------------------------------------------

// Table-IV capacities.
struct CapacityProfile {
  std::int64_t client = 1;
  std::int64_t edge_node = 200;
  std::int64_t cloud_node = 4000;
  std::int64_t end_link = 200;
  std::int64_t edge_link = 2000;
  std::int64_t cloud_link = 4000;
};

// Ring over `edge_count` edge nodes plus explicit chords, with the cloud
// reachable through the listed gateway edge nodes. Edge ids are 1..E, the
// cloud is 999 and clients are numbered from 1000 in edge order.
inline TopologyDocument ring_topology_document(int edge_count, int clients_per_edge,
                                               const std::vector<std::pair<int, int>>& chords,
                                               const std::vector<int>& gateways, const CapacityProfile& cap = {}) {
  TopologyDocument doc;
  constexpr NodeId kCloud = 999;
  for (int e = 1; e <= edge_count; ++e) doc.nodes.push_back({e, NodeKind::Edge, cap.edge_node, 0});
  doc.nodes.push_back({kCloud, NodeKind::Cloud, cap.cloud_node, 0});
  NodeId next_client = 1000;
  for (int e = 1; e <= edge_count; ++e)
    for (int c = 0; c < clients_per_edge; ++c) {
      doc.nodes.push_back({next_client, NodeKind::Client, cap.client, 0});
      doc.links.push_back({next_client, e, LinkKind::End, cap.end_link, 0});
      ++next_client;
    }
  for (int e = 1; e <= edge_count; ++e) {
    int f = e % edge_count + 1;
    if (edge_count > 2 || e < f) doc.links.push_back({e, f, LinkKind::Edge, cap.edge_link, 0});
  }
  for (auto [a, b] : chords) doc.links.push_back({a, b, LinkKind::Edge, cap.edge_link, 0});
  for (int gw : gateways) doc.links.push_back({gw, kCloud, LinkKind::Cloud, cap.cloud_link, 0});
  return doc;
}

inline TopologyDocument builtin_topology_document(std::string_view name) {
  if (name == "medium")
    return ring_topology_document(11, 20, {{1, 6}, {3, 9}, {4, 8}, {7, 11}}, {1});
  if (name == "large")
    return ring_topology_document(24, 10, {{1, 13}, {4, 10}, {7, 19}, {16, 22}, {5, 20}, {11, 17}}, {1});
  throw ConfigError("unknown builtin topology '" + std::string(name) + "' (expected medium or large)");
}

inline PhysicalGraph builtin_topology(std::string_view name, const WeightConfig& w = {}) {
  return PhysicalGraph::from_document(builtin_topology_document(name), w);
}

}  // namespace fedagg
