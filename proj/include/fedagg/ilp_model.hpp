// SPDX-License-Identifier: Apache-2.0
//
// Exact aggregation-placement model: variables, rows, verification and a
// free-format MPS writer. All variables are integer; most are binary.
//
// Scope per request: one node pair per distinct attachment edge of its
// clients (source) towards the lowest-id cloud (root). Auxiliary arcs run
// from every candidate to every other candidate or to the root; each active
// auxiliary arc is realized by a physical flow over edge-edge links, with
// cloud links usable only on the final hop into the root.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fedagg/errors.hpp"
#include "fedagg/topology.hpp"
#include "fedagg/workload.hpp"

namespace fedagg {

enum class VarKind { AuxFlow, AuxArc, Realization, ArcUse, LinkUse, NodeUse, Merge, NodeCharge, NodeCost, LinkCost };

enum class RowFamily {
  Bounds,
  AuxFlow,
  AuxArcUse,
  AggregatorUse,
  PhysicalFlow,
  ArcUse,
  LinkUse,
  Merge,
  NodeCharge,
  NodeCost,
  NodeCapacity,
  LinkCost,
  LinkCapacity,
};

inline std::string_view to_string(RowFamily f) {
  switch (f) {
    case RowFamily::Bounds: return "Bounds";
    case RowFamily::AuxFlow: return "AuxFlow";
    case RowFamily::AuxArcUse: return "AuxArcUse";
    case RowFamily::AggregatorUse: return "AggregatorUse";
    case RowFamily::PhysicalFlow: return "PhysicalFlow";
    case RowFamily::ArcUse: return "ArcUse";
    case RowFamily::LinkUse: return "LinkUse";
    case RowFamily::Merge: return "Merge";
    case RowFamily::NodeCharge: return "NodeCharge";
    case RowFamily::NodeCost: return "NodeCost";
    case RowFamily::NodeCapacity: return "NodeCapacity";
    case RowFamily::LinkCost: return "LinkCost";
    case RowFamily::LinkCapacity: return "LinkCapacity";
  }
  return "?";
}

enum class RowSense { Le, Ge, Eq };

struct IlpVariable {
  std::string name;
  VarKind kind = VarKind::AuxFlow;
  double lower = 0.0;
  double upper = 1.0;  // +inf for cost variables
  double objective = 0.0;
};

struct IlpRow {
  std::string name;
  RowFamily family = RowFamily::AuxFlow;
  RowSense sense = RowSense::Eq;
  double rhs = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;
};

struct DirectedArc {
  NodeIndex tail = kNoNode;
  NodeIndex head = kNoNode;
  LinkIndex link = 0;
};

struct ModelArc {
  NodeIndex source = kNoNode;
  NodeIndex target = kNoNode;
};

struct RequestScope {
  std::int64_t id = 0;
  std::vector<NodeIndex> sources;             // ascending
  std::map<NodeIndex, std::int64_t> clients_at;  // source -> participating clients there
  std::vector<LinkIndex> end_links;           // ascending
  std::int64_t node_demand = 0;
  std::int64_t link_demand = 0;
};

struct IlpModel {
  const PhysicalGraph* graph = nullptr;
  NodeIndex root = kNoNode;
  std::vector<NodeIndex> candidates;  // ascending edge nodes of the auxiliary graph
  std::vector<ModelArc> aux_arcs;
  std::vector<DirectedArc> arcs;  // physical arcs, sorted by (tail, head)
  std::vector<RequestScope> requests;
  std::vector<IlpVariable> variables;
  std::vector<IlpRow> rows;
  std::unordered_map<std::string, std::size_t> by_name;

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) return std::nullopt;
    return it->second;
  }
  std::size_t at(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw InvariantError("model has no variable " + name);
    return it->second;
  }
  // Physical arc f may carry auxiliary arc a.
  bool realizes(const DirectedArc& f, const ModelArc& a) const {
    if (graph->node(f.head).kind == NodeKind::Cloud) return f.head == root && a.target == root;
    return true;
  }
  // Nodes that carry physical flow: every edge node plus the root.
  std::vector<NodeIndex> flow_nodes() const {
    std::vector<NodeIndex> n(graph->edges().begin(), graph->edges().end());
    if (root != kNoNode) n.push_back(root);
    std::sort(n.begin(), n.end());
    return n;
  }
  double objective_of(const std::vector<double>& values) const {
    double v = 0.0;
    for (std::size_t i = 0; i < variables.size(); ++i) v += variables[i].objective * values.at(i);
    return v;
  }
};

namespace names {

inline std::string id(const PhysicalGraph& g, NodeIndex n) { return std::to_string(g.node(n).id); }
inline std::string k(std::int64_t r) { return std::to_string(r); }

inline std::string q(const PhysicalGraph& g, ModelArc a, NodeIndex s, std::int64_t r) {
  return "q_" + id(g, a.source) + "_" + id(g, a.target) + "_" + id(g, s) + "_" + k(r);
}
inline std::string w(const PhysicalGraph& g, ModelArc a, std::int64_t r) {
  return "w_" + id(g, a.source) + "_" + id(g, a.target) + "_" + k(r);
}
inline std::string x(const PhysicalGraph& g, DirectedArc f, ModelArc a, std::int64_t r) {
  return "x_" + id(g, f.tail) + "_" + id(g, f.head) + "_" + id(g, a.source) + "_" + id(g, a.target) + "_" + k(r);
}
inline std::string m(const PhysicalGraph& g, DirectedArc f, std::int64_t r) {
  return "m_" + id(g, f.tail) + "_" + id(g, f.head) + "_" + k(r);
}
inline std::string link(const PhysicalGraph& g, LinkIndex l) {
  return id(g, g.link(l).a) + "_" + id(g, g.link(l).b);
}
inline std::string mul(const PhysicalGraph& g, LinkIndex l, std::int64_t r) { return "mul_" + link(g, l) + "_" + k(r); }
inline std::string mu(const PhysicalGraph& g, NodeIndex n, std::int64_t r) { return "mu_" + id(g, n) + "_" + k(r); }
inline std::string zeta(const PhysicalGraph& g, NodeIndex n, std::int64_t r) { return "zeta_" + id(g, n) + "_" + k(r); }
inline std::string gor(const PhysicalGraph& g, NodeIndex n, std::int64_t r) { return "g_" + id(g, n) + "_" + k(r); }
inline std::string etan(const PhysicalGraph& g, NodeIndex n) { return "etan_" + id(g, n); }
inline std::string etae(const PhysicalGraph& g, LinkIndex l) { return "etae_" + link(g, l); }

}  // namespace names

namespace detail {

class ModelBuilder {
 public:
  explicit ModelBuilder(IlpModel& m) : m_(m) {}

  std::size_t var(std::string name, VarKind kind, double lo, double hi, double obj = 0.0) {
    const std::size_t i = m_.variables.size();
    if (!m_.by_name.emplace(name, i).second) throw InvariantError("duplicate variable " + name);
    m_.variables.push_back({std::move(name), kind, lo, hi, obj});
    return i;
  }
  void row(std::string name, RowFamily f, RowSense s, double rhs, std::vector<std::pair<std::size_t, double>> terms) {
    if (!row_names_.insert(name).second) throw InvariantError("duplicate row " + name);
    m_.rows.push_back({std::move(name), f, s, rhs, std::move(terms)});
  }

 private:
  IlpModel& m_;
  std::set<std::string> row_names_;
};

}  // namespace detail

// Builds the model for `reqs` on an idle network. An empty request set
// yields a model with no variables and objective 0.
inline IlpModel build_model(const PhysicalGraph& g, const AuxiliaryGraph& aux, std::span<const TrainingRoundRequest> reqs) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  IlpModel m;
  m.graph = &g;
  for (NodeIndex n : aux.nodes) {
    if (n >= g.node_count()) throw ConfigError("auxiliary graph does not match the physical graph");
    if (g.node(n).kind == NodeKind::Edge) m.candidates.push_back(n);
    if (g.node(n).kind == NodeKind::Cloud && m.root == kNoNode) m.root = n;
  }
  if (reqs.empty()) return m;
  if (m.root == kNoNode) throw ConfigError("auxiliary graph has no cloud node");
  const NodeIndex root = m.root;

  for (NodeIndex i : m.candidates) {
    for (NodeIndex j : m.candidates)
      if (i != j) m.aux_arcs.push_back({i, j});
    m.aux_arcs.push_back({i, root});
  }
  for (LinkIndex l = 0; l < g.link_count(); ++l) {
    const auto& L = g.link(l);
    if (L.kind == LinkKind::Edge) {
      m.arcs.push_back({L.a, L.b, l});
      m.arcs.push_back({L.b, L.a, l});
    } else if (L.kind == LinkKind::Cloud && (L.a == root || L.b == root)) {
      m.arcs.push_back({L.other(root), root, l});
    }
  }
  std::sort(m.arcs.begin(), m.arcs.end(),
            [](const DirectedArc& a, const DirectedArc& b) { return std::tie(a.tail, a.head) < std::tie(b.tail, b.head); });

  std::set<std::int64_t> seen_ids;
  for (const auto& r : reqs) {
    if (!seen_ids.insert(r.id).second) throw ConfigError("duplicate request id " + std::to_string(r.id));
    if (r.clients.empty()) throw ConfigError("request " + std::to_string(r.id) + " has no clients");
    RequestScope s;
    s.id = r.id;
    s.node_demand = r.node_demand;
    s.link_demand = request_link_load(r);
    for (NodeIndex c : r.clients) {
      if (c >= g.node_count() || g.node(c).kind != NodeKind::Client) throw ConfigError("request member is not a client");
      const NodeIndex e = g.attachment(c);
      if (!std::binary_search(m.candidates.begin(), m.candidates.end(), e))
        throw ConfigError("source " + g.name(e) + " is not an aggregator candidate");
      ++s.clients_at[e];
      s.end_links.push_back(g.end_link(c));
    }
    for (auto [e, _] : s.clients_at) s.sources.push_back(e);
    std::sort(s.end_links.begin(), s.end_links.end());
    s.end_links.erase(std::unique(s.end_links.begin(), s.end_links.end()), s.end_links.end());
    m.requests.push_back(std::move(s));
  }

  detail::ModelBuilder b(m);
  const auto flow_nodes = m.flow_nodes();
  std::vector<NodeIndex> aux_nodes = m.candidates;
  aux_nodes.push_back(root);
  std::map<NodeIndex, std::vector<std::pair<std::size_t, double>>> node_cost_terms;
  std::map<LinkIndex, std::vector<std::pair<std::size_t, double>>> link_cost_terms;

  for (const auto& rq : m.requests) {
    const auto k = rq.id;
    const std::string ks = names::k(k);
    auto is_source = [&](NodeIndex n) { return rq.clients_at.count(n) != 0; };
    // variables
    std::vector<std::vector<std::size_t>> qv(m.aux_arcs.size());
    std::vector<std::size_t> wv(m.aux_arcs.size());
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> xv(m.aux_arcs.size());  // (arc, var)
    for (std::size_t a = 0; a < m.aux_arcs.size(); ++a) {
      for (NodeIndex s : rq.sources) qv[a].push_back(b.var(names::q(g, m.aux_arcs[a], s, k), VarKind::AuxFlow, 0, 1));
      wv[a] = b.var(names::w(g, m.aux_arcs[a], k), VarKind::AuxArc, 0, 1);
      for (std::size_t f = 0; f < m.arcs.size(); ++f)
        if (m.realizes(m.arcs[f], m.aux_arcs[a]))
          xv[a].emplace_back(f, b.var(names::x(g, m.arcs[f], m.aux_arcs[a], k), VarKind::Realization, 0, 1));
    }
    std::vector<std::size_t> mv(m.arcs.size());
    for (std::size_t f = 0; f < m.arcs.size(); ++f) mv[f] = b.var(names::m(g, m.arcs[f], k), VarKind::ArcUse, 0, 1);
    std::map<LinkIndex, std::size_t> mulv;
    for (std::size_t f = 0; f < m.arcs.size(); ++f) {
      const LinkIndex l = m.arcs[f].link;
      if (!mulv.count(l)) mulv[l] = b.var(names::mul(g, l, k), VarKind::LinkUse, 0, 1);
    }
    for (LinkIndex l : rq.end_links) mulv[l] = b.var(names::mul(g, l, k), VarKind::LinkUse, 1, 1);
    std::map<NodeIndex, std::size_t> muv, zetav, gv;
    for (NodeIndex n : aux_nodes)
      muv[n] = b.var(names::mu(g, n, k), VarKind::NodeUse, (is_source(n) || n == root) ? 1 : 0, 1);
    for (NodeIndex n : g.edges()) {
      const auto c = is_source(n) ? rq.clients_at.at(n) : 0;
      zetav[n] = b.var(names::zeta(g, n, k), VarKind::Merge, c >= 2 ? 1 : 0, 1);
    }
    for (NodeIndex n : flow_nodes) gv[n] = b.var(names::gor(g, n, k), VarKind::NodeCharge, 0, 1);

    // auxiliary flow per node pair
    for (std::size_t p = 0; p < rq.sources.size(); ++p) {
      const NodeIndex s = rq.sources[p];
      for (NodeIndex n : aux_nodes) {
        std::vector<std::pair<std::size_t, double>> t;
        for (std::size_t a = 0; a < m.aux_arcs.size(); ++a) {
          if (m.aux_arcs[a].source == n) t.emplace_back(qv[a][p], 1.0);
          if (m.aux_arcs[a].target == n) t.emplace_back(qv[a][p], -1.0);
        }
        const double rhs = n == s ? 1.0 : (n == root ? -1.0 : 0.0);
        b.row("auxflow_" + names::id(g, n) + "_" + names::id(g, s) + "_" + ks, RowFamily::AuxFlow, RowSense::Eq, rhs,
              std::move(t));
      }
    }
    // auxiliary arc activation and aggregator placement
    for (std::size_t a = 0; a < m.aux_arcs.size(); ++a) {
      const auto& A = m.aux_arcs[a];
      const std::string an = names::id(g, A.source) + "_" + names::id(g, A.target) + "_";
      std::vector<std::pair<std::size_t, double>> up{{wv[a], 1.0}};
      for (std::size_t p = 0; p < rq.sources.size(); ++p) {
        const std::string pn = an + names::id(g, rq.sources[p]) + "_" + ks;
        b.row("wlo_" + pn, RowFamily::AuxArcUse, RowSense::Ge, 0.0, {{wv[a], 1.0}, {qv[a][p], -1.0}});
        b.row("agg_" + pn, RowFamily::AggregatorUse, RowSense::Le, 0.0, {{qv[a][p], 1.0}, {muv.at(A.target), -1.0}});
        up.emplace_back(qv[a][p], -1.0);
      }
      b.row("whi_" + an + ks, RowFamily::AuxArcUse, RowSense::Le, 0.0, std::move(up));
    }
    for (NodeIndex n : aux_nodes) {
      if (is_source(n)) continue;
      std::vector<std::pair<std::size_t, double>> t{{muv.at(n), 1.0}};
      for (std::size_t a = 0; a < m.aux_arcs.size(); ++a)
        if (m.aux_arcs[a].target == n)
          for (std::size_t qi : qv[a]) t.emplace_back(qi, -1.0);
      b.row("aggin_" + names::id(g, n) + "_" + ks, RowFamily::AggregatorUse, RowSense::Le, 0.0, std::move(t));
    }
    // physical realization of each auxiliary arc
    for (std::size_t a = 0; a < m.aux_arcs.size(); ++a) {
      const auto& A = m.aux_arcs[a];
      for (NodeIndex n : flow_nodes) {
        std::vector<std::pair<std::size_t, double>> t;
        for (auto [f, xi] : xv[a]) {
          if (m.arcs[f].tail == n) t.emplace_back(xi, 1.0);
          if (m.arcs[f].head == n) t.emplace_back(xi, -1.0);
        }
        if (n == A.source) t.emplace_back(wv[a], -1.0);
        if (n == A.target) t.emplace_back(wv[a], 1.0);
        if (t.empty()) continue;
        b.row("phys_" + names::id(g, n) + "_" + names::id(g, A.source) + "_" + names::id(g, A.target) + "_" + ks,
              RowFamily::PhysicalFlow, RowSense::Eq, 0.0, std::move(t));
      }
    }
    // arc use = OR over auxiliary arcs
    std::vector<std::vector<std::pair<std::size_t, double>>> arc_up(m.arcs.size());
    for (std::size_t f = 0; f < m.arcs.size(); ++f) arc_up[f].emplace_back(mv[f], 1.0);
    for (std::size_t a = 0; a < m.aux_arcs.size(); ++a)
      for (auto [f, xi] : xv[a]) {
        const auto& F = m.arcs[f];
        const auto& A = m.aux_arcs[a];
        b.row("mlo_" + names::id(g, F.tail) + "_" + names::id(g, F.head) + "_" + names::id(g, A.source) + "_" +
                  names::id(g, A.target) + "_" + ks,
              RowFamily::ArcUse, RowSense::Ge, 0.0, {{mv[f], 1.0}, {xi, -1.0}});
        arc_up[f].emplace_back(xi, -1.0);
      }
    for (std::size_t f = 0; f < m.arcs.size(); ++f)
      b.row("mhi_" + names::id(g, m.arcs[f].tail) + "_" + names::id(g, m.arcs[f].head) + "_" + ks, RowFamily::ArcUse,
            RowSense::Le, 0.0, std::move(arc_up[f]));
    // link use = OR over its two directions
    std::map<LinkIndex, std::vector<std::pair<std::size_t, double>>> link_up;
    for (std::size_t f = 0; f < m.arcs.size(); ++f) {
      const LinkIndex l = m.arcs[f].link;
      b.row("llo_" + names::id(g, m.arcs[f].tail) + "_" + names::id(g, m.arcs[f].head) + "_" + ks, RowFamily::LinkUse,
            RowSense::Ge, 0.0, {{mulv.at(l), 1.0}, {mv[f], -1.0}});
      auto& t = link_up[l];
      if (t.empty()) t.emplace_back(mulv.at(l), 1.0);
      t.emplace_back(mv[f], -1.0);
    }
    for (auto& [l, t] : link_up)
      b.row("lhi_" + names::link(g, l) + "_" + ks, RowFamily::LinkUse, RowSense::Le, 0.0, std::move(t));
    // merge: two or more inbound update flows at an edge node
    for (NodeIndex n : g.edges()) {
      const std::int64_t c = is_source(n) ? rq.clients_at.at(n) : 0;
      std::vector<std::size_t> in;
      for (std::size_t f = 0; f < m.arcs.size(); ++f)
        if (m.arcs[f].head == n) in.push_back(f);
      const std::string nn = names::id(g, n);
      for (std::size_t i = 0; i < in.size(); ++i)
        for (std::size_t j = i + 1; j < in.size(); ++j)
          b.row("mpair_" + nn + "_" + names::id(g, m.arcs[in[i]].tail) + "_" + names::id(g, m.arcs[in[j]].tail) + "_" + ks,
                RowFamily::Merge, RowSense::Ge, -1.0, {{zetav.at(n), 1.0}, {mv[in[i]], -1.0}, {mv[in[j]], -1.0}});
      if (c >= 1)
        for (std::size_t f : in)
          b.row("mclient_" + nn + "_" + names::id(g, m.arcs[f].tail) + "_" + ks, RowFamily::Merge, RowSense::Ge, 0.0,
                {{zetav.at(n), 1.0}, {mv[f], -1.0}});
      std::vector<std::pair<std::size_t, double>> t{{zetav.at(n), 2.0}};
      for (std::size_t f : in) t.emplace_back(mv[f], -1.0);
      b.row("mup_" + nn + "_" + ks, RowFamily::Merge, RowSense::Le, static_cast<double>(c), std::move(t));
    }
    // charged = used as aggregator OR merging
    for (NodeIndex n : flow_nodes) {
      std::vector<std::pair<std::size_t, double>> up{{gv.at(n), 1.0}};
      const std::string nn = names::id(g, n) + "_" + ks;
      if (auto it = muv.find(n); it != muv.end()) {
        b.row("glo_mu_" + nn, RowFamily::NodeCharge, RowSense::Ge, 0.0, {{gv.at(n), 1.0}, {it->second, -1.0}});
        up.emplace_back(it->second, -1.0);
      }
      if (auto it = zetav.find(n); it != zetav.end()) {
        b.row("glo_zeta_" + nn, RowFamily::NodeCharge, RowSense::Ge, 0.0, {{gv.at(n), 1.0}, {it->second, -1.0}});
        up.emplace_back(it->second, -1.0);
      }
      b.row("ghi_" + nn, RowFamily::NodeCharge, RowSense::Le, 0.0, std::move(up));
      node_cost_terms[n].emplace_back(gv.at(n), -static_cast<double>(rq.node_demand));
    }
    for (auto [l, v] : mulv) link_cost_terms[l].emplace_back(v, -static_cast<double>(rq.link_demand));
  }

  for (auto& [n, t] : node_cost_terms) {
    const auto e = b.var(names::etan(g, n), VarKind::NodeCost, 0, kInf, g.alpha(n));
    t.insert(t.begin(), {e, 1.0});
    b.row("ncost_" + names::id(g, n), RowFamily::NodeCost, RowSense::Eq, 0.0, std::move(t));
    b.row("ncap_" + names::id(g, n), RowFamily::NodeCapacity, RowSense::Le, static_cast<double>(g.node(n).capacity),
          {{e, 1.0}});
  }
  for (auto& [l, t] : link_cost_terms) {
    const auto e = b.var(names::etae(g, l), VarKind::LinkCost, 0, kInf, g.beta(l));
    t.insert(t.begin(), {e, 1.0});
    b.row("lcost_" + names::link(g, l), RowFamily::LinkCost, RowSense::Eq, 0.0, std::move(t));
    b.row("lcap_" + names::link(g, l), RowFamily::LinkCapacity, RowSense::Le, static_cast<double>(g.link(l).capacity),
          {{e, 1.0}});
  }
  return m;
}

inline IlpModel build_model(const PhysicalGraph& g, const AuxiliaryGraph& aux, const std::vector<TrainingRoundRequest>& reqs) {
  return build_model(g, aux, std::span<const TrainingRoundRequest>(reqs));
}

// ---------------------------------------------------------------------------
// Solutions and verification
// ---------------------------------------------------------------------------

enum class SolveStatus { Optimal, Infeasible, LimitReached };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::LimitReached: return "limit_reached";
  }
  return "?";
}

struct IlpSolution {
  std::vector<double> values;  // one per model variable; empty if none found
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  std::size_t nodes_explored = 0;
};

struct Violation {
  std::string name;  // row or variable
  RowFamily family = RowFamily::Bounds;
  double residual = 0.0;  // amount by which the constraint is missed

  std::string describe() const {
    std::ostringstream os;
    os << to_string(family) << " " << name << " residual " << residual;
    return os.str();
  }
};

struct ViolationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  bool mentions(RowFamily f, std::string_view name_part = {}) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) {
      return v.family == f && (name_part.empty() || v.name.find(name_part) != std::string::npos);
    });
  }
};

inline ViolationReport verify_solution(const IlpModel& m, const std::vector<double>& values, double tol = 1e-9) {
  ViolationReport rep;
  if (values.size() != m.variables.size()) {
    rep.violations.push_back({"assignment size", RowFamily::Bounds,
                              std::abs(static_cast<double>(values.size()) - static_cast<double>(m.variables.size()))});
    return rep;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& v = m.variables[i];
    const double x = values[i];
    if (!std::isfinite(x)) {
      rep.violations.push_back({v.name, RowFamily::Bounds, std::numeric_limits<double>::infinity()});
      continue;
    }
    if (x < v.lower - tol) rep.violations.push_back({v.name, RowFamily::Bounds, v.lower - x});
    if (x > v.upper + tol) rep.violations.push_back({v.name, RowFamily::Bounds, x - v.upper});
    if (std::abs(x - std::round(x)) > tol) rep.violations.push_back({v.name, RowFamily::Bounds, std::abs(x - std::round(x))});
  }
  for (const auto& r : m.rows) {
    double lhs = 0.0;
    for (auto [i, c] : r.terms) lhs += c * values[i];
    double miss = 0.0;
    switch (r.sense) {
      case RowSense::Le: miss = lhs - r.rhs; break;
      case RowSense::Ge: miss = r.rhs - lhs; break;
      case RowSense::Eq: miss = std::abs(lhs - r.rhs); break;
    }
    if (miss > tol) rep.violations.push_back({r.name, r.family, miss});
  }
  return rep;
}

inline ViolationReport verify_solution(const IlpModel& m, const IlpSolution& s, double tol = 1e-9) {
  return verify_solution(m, s.values, tol);
}

// ---------------------------------------------------------------------------
// Free-format MPS
// ---------------------------------------------------------------------------

namespace detail {
inline std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InvariantError("number formatting failed");
  return std::string(buf, p);
}
}  // namespace detail

// Free MPS. Rows keep their model names; the objective row is "obj". All
// columns sit inside one integer marker block with explicit bounds.
inline std::string export_standard_form(const IlpModel& m, std::string_view name = "fedagg") {
  std::ostringstream os;
  os << "NAME " << name << "\nROWS\n N obj\n";
  for (const auto& r : m.rows)
    os << ' ' << (r.sense == RowSense::Le ? 'L' : r.sense == RowSense::Ge ? 'G' : 'E') << ' ' << r.name << '\n';
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(m.variables.size());
  for (std::size_t r = 0; r < m.rows.size(); ++r)
    for (auto [i, c] : m.rows[r].terms)
      if (c != 0.0) cols[i].emplace_back(r, c);
  os << "COLUMNS\n";
  if (!m.variables.empty()) os << " MARKER 'MARKER' 'INTORG'\n";
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    const auto& v = m.variables[i];
    if (v.objective != 0.0) os << ' ' << v.name << " obj " << detail::num(v.objective) << '\n';
    for (auto [r, c] : cols[i]) os << ' ' << v.name << ' ' << m.rows[r].name << ' ' << detail::num(c) << '\n';
    if (v.objective == 0.0 && cols[i].empty()) os << ' ' << v.name << " obj 0\n";
  }
  if (!m.variables.empty()) os << " MARKER 'MARKER' 'INTEND'\n";
  os << "RHS\n";
  for (const auto& r : m.rows)
    if (r.rhs != 0.0) os << " rhs " << r.name << ' ' << detail::num(r.rhs) << '\n';
  os << "BOUNDS\n";
  for (const auto& v : m.variables) {
    if (v.lower == v.upper) {
      os << " FX bnd " << v.name << ' ' << detail::num(v.lower) << '\n';
      continue;
    }
    os << " LO bnd " << v.name << ' ' << detail::num(v.lower) << '\n';
    if (std::isinf(v.upper))
      os << " PL bnd " << v.name << '\n';
    else
      os << " UP bnd " << v.name << ' ' << detail::num(v.upper) << '\n';
  }
  os << "ENDATA\n";
  return os.str();
}

}  // namespace fedagg
