// SPDX-License-Identifier: Apache-2.0
//
// Exact solver for IlpModel.
//
// Per request, the optimum is a minimum-cost in-arborescence towards the
// root spanning the sources, where each link costs beta*sigma_e and an
// intermediate edge node with two or more children costs alpha*sigma_n.
// That subproblem is solved with a terminal-subset dynamic program; a
// repaired tree whose true cost matches the program's lower bound is
// optimal, otherwise the request falls back to bounded enumeration.
// Capacity coupling between requests is resolved by branch-and-bound:
// children forbid the first overloaded component for one of its users.

#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedagg/ilp_model.hpp"

namespace fedagg {

struct SolveLimits {
  double time_seconds = 60.0;
  std::size_t node_budget = 200000;          // branch-and-bound nodes
  std::size_t enumeration_budget = 4000000;  // fallback tree enumeration leaves, per request

  void validate() const {
    if (!(time_seconds > 0.0) || node_budget == 0 || enumeration_budget == 0) throw ConfigError("solve limits must be positive");
  }
};

namespace detail {

struct Restriction {
  std::vector<NodeIndex> nodes;  // may not be charged (no aggregation or merge)
  std::vector<LinkIndex> links;  // may not be used

  std::string key() const {
    std::string s;
    for (auto n : nodes) s += std::to_string(n) + ",";
    s += "|";
    for (auto l : links) s += std::to_string(l) + ",";
    return s;
  }
};

struct RequestTree {
  std::vector<std::size_t> arcs;  // model arc indices, one parent arc per non-root tree node
  std::vector<NodeIndex> charged;
  std::vector<LinkIndex> links;  // tree links and end links
  double cost = 0.0;
};

enum class TreeStatus { Found, Infeasible, Limit };

struct TreeResult {
  TreeStatus status = TreeStatus::Infeasible;
  RequestTree tree;
};

class SteinerTreeSolver {
 public:
  SteinerTreeSolver(const IlpModel& m, const RequestScope& rq, const Restriction& res, std::size_t enum_budget)
      : m_(m), g_(*m.graph), rq_(rq), res_(res), enum_budget_(enum_budget) {}

  TreeResult solve() {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const auto sn = rq_.node_demand, se = rq_.link_demand;
    auto node_blocked = [&](NodeIndex n) {
      return std::binary_search(res_.nodes.begin(), res_.nodes.end(), n) || sn > g_.node(n).capacity;
    };
    auto link_blocked = [&](LinkIndex l) {
      return std::binary_search(res_.links.begin(), res_.links.end(), l) || se > g_.link(l).capacity;
    };
    for (NodeIndex s : rq_.sources)
      if (node_blocked(s)) return {};
    if (node_blocked(m_.root)) return {};
    for (LinkIndex l : rq_.end_links)
      if (link_blocked(l)) return {};

    nodes_ = m_.flow_nodes();
    local_.assign(g_.node_count(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) local_[nodes_[i]] = static_cast<int>(i);
    n_ = nodes_.size();
    root_ = static_cast<std::size_t>(local_[m_.root]);
    term_bit_.assign(n_, -1);
    for (std::size_t b = 0; b < rq_.sources.size(); ++b) term_bit_[static_cast<std::size_t>(local_[rq_.sources[b]])] = static_cast<int>(b);
    charge_.assign(n_, 0.0);
    may_branch_.assign(n_, 1);
    for (std::size_t v = 0; v < n_; ++v) {
      if (term_bit_[v] >= 0 || v == root_) continue;
      charge_[v] = g_.alpha(nodes_[v]) * static_cast<double>(sn);
      if (node_blocked(nodes_[v])) may_branch_[v] = 0;
    }
    out_.assign(n_, {});
    arc_w_.assign(m_.arcs.size(), kInf);
    for (std::size_t f = 0; f < m_.arcs.size(); ++f) {
      if (link_blocked(m_.arcs[f].link)) continue;
      arc_w_[f] = g_.beta(m_.arcs[f].link) * static_cast<double>(se);
      out_[static_cast<std::size_t>(local_[m_.arcs[f].tail])].push_back(f);
    }
    constant_ = g_.alpha(m_.root) * static_cast<double>(sn);
    for (NodeIndex s : rq_.sources) constant_ += g_.alpha(s) * static_cast<double>(sn);
    for (LinkIndex l : rq_.end_links) constant_ += g_.beta(l) * static_cast<double>(se);

    const std::size_t t = rq_.sources.size();
    if (t > 20) return enumerate();
    const double bound = run_program(t);
    if (std::isinf(bound)) return {};
    std::set<std::size_t> used;
    const std::size_t full = (std::size_t{1} << t) - 1;
    collect_in(full, root_, used);
    if (auto tree = repair(used)) {
      const double lb = bound + constant_;
      if (std::abs(tree->cost - lb) <= 1e-9 * std::max(1.0, std::abs(lb))) return {TreeStatus::Found, std::move(*tree)};
    }
    return enumerate();
  }

 private:
  enum Choice : std::uint8_t { kTerminal = 0, kArrive = 1, kMerge = 2 };

  std::size_t at(std::size_t mask, std::size_t v) const { return mask * n_ + v; }
  bool in_mask(std::size_t v, std::size_t mask) const { return term_bit_[v] >= 0 && ((mask >> term_bit_[v]) & 1U); }

  double run_program(std::size_t t) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const std::size_t masks = std::size_t{1} << t;
    in_.assign(masks * n_, kInf);
    leave_.assign(masks * n_, kInf);
    a1_.assign(masks * n_, kInf);
    pred_.assign(masks * n_, 0);
    split_.assign(masks * n_, 0);
    in_choice_.assign(masks * n_, kTerminal);
    leave_choice_.assign(masks * n_, kTerminal);
    std::vector<double> merged(n_);
    for (std::size_t mask = 1; mask < masks; ++mask) {
      const std::size_t low = mask & (~mask + 1);
      for (std::size_t v = 0; v < n_; ++v) {
        const std::size_t i = at(mask, v);
        merged[v] = kInf;
        if (in_mask(v, mask)) {
          const std::size_t rest = mask ^ (std::size_t{1} << term_bit_[v]);
          in_[i] = rest ? in_[at(rest, v)] : 0.0;
          in_choice_[i] = kTerminal;
          continue;
        }
        if (std::popcount(mask) >= 2) {
          for (std::size_t sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
            if (!(sub & low)) continue;
            const double val = in_[at(sub, v)] + in_[at(mask ^ sub, v)];
            if (val < merged[v]) {
              merged[v] = val;
              split_[i] = static_cast<std::uint32_t>(sub);
            }
          }
        }
        in_[i] = merged[v];
        in_choice_[i] = kMerge;
      }
      using Item = std::pair<double, std::size_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      for (std::size_t v = 0; v < n_; ++v) {
        const std::size_t i = at(mask, v);
        if (v == root_) continue;
        if (in_mask(v, mask)) {
          leave_[i] = in_[i];
          leave_choice_[i] = kTerminal;
        } else if (term_bit_[v] >= 0) {
          leave_[i] = merged[v];
          leave_choice_[i] = kMerge;
        } else if (may_branch_[v]) {
          leave_[i] = merged[v] + charge_[v];
          leave_choice_[i] = kMerge;
        }
        if (!std::isinf(leave_[i])) pq.emplace(leave_[i], v);
      }
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > leave_[at(mask, u)]) continue;
        for (std::size_t f : out_[u]) {
          const auto v = static_cast<std::size_t>(local_[m_.arcs[f].head]);
          if (in_mask(v, mask)) continue;
          const double cand = d + arc_w_[f];
          const std::size_t i = at(mask, v);
          if (!(cand < a1_[i])) continue;
          a1_[i] = cand;
          pred_[i] = static_cast<std::uint32_t>(f);
          if (cand < in_[i]) {
            in_[i] = cand;
            in_choice_[i] = kArrive;
          }
          if (v != root_ && cand < leave_[i]) {
            leave_[i] = cand;
            leave_choice_[i] = kArrive;
            pq.emplace(cand, v);
          }
        }
      }
    }
    return in_[at(masks - 1, root_)];
  }

  void collect_in(std::size_t mask, std::size_t v, std::set<std::size_t>& used) const {
    const std::size_t i = at(mask, v);
    switch (in_choice_[i]) {
      case kTerminal: {
        const std::size_t rest = mask ^ (std::size_t{1} << term_bit_[v]);
        if (rest) collect_in(rest, v, used);
        return;
      }
      case kArrive: collect_arrival(mask, v, used); return;
      case kMerge:
        collect_in(split_[i], v, used);
        collect_in(mask ^ split_[i], v, used);
        return;
    }
  }
  void collect_arrival(std::size_t mask, std::size_t v, std::set<std::size_t>& used) const {
    const std::size_t f = pred_[at(mask, v)];
    used.insert(f);
    collect_leave(mask, static_cast<std::size_t>(local_[m_.arcs[f].tail]), used);
  }
  void collect_leave(std::size_t mask, std::size_t u, std::set<std::size_t>& used) const {
    const std::size_t i = at(mask, u);
    switch (leave_choice_[i]) {
      case kTerminal: collect_in(mask, u, used); return;
      case kArrive: collect_arrival(mask, u, used); return;
      case kMerge:
        collect_in(split_[i], u, used);
        collect_in(mask ^ split_[i], u, used);
        return;
    }
  }

  // Cost of the structure given by one parent arc per node, restricted to
  // the source-to-root paths. nullopt if a source cannot reach the root or
  // a blocked node would merge.
  std::optional<RequestTree> evaluate(const std::vector<std::optional<std::size_t>>& parent) const {
    std::vector<char> on(n_, 0);
    std::set<std::size_t> arcs;
    for (NodeIndex s : rq_.sources) {
      auto v = static_cast<std::size_t>(local_[s]);
      for (std::size_t steps = 0; v != root_; ++steps) {
        if (steps > n_ || !parent[v]) return std::nullopt;
        on[v] = 1;
        arcs.insert(*parent[v]);
        v = static_cast<std::size_t>(local_[m_.arcs[*parent[v]].head]);
      }
    }
    std::vector<int> children(n_, 0);
    for (std::size_t f : arcs) ++children[static_cast<std::size_t>(local_[m_.arcs[f].head])];
    RequestTree t;
    const auto sn = static_cast<double>(rq_.node_demand), se = static_cast<double>(rq_.link_demand);
    std::set<NodeIndex> charged(rq_.sources.begin(), rq_.sources.end());
    charged.insert(m_.root);
    for (std::size_t v = 0; v < n_; ++v) {
      if (term_bit_[v] >= 0 || v == root_ || children[v] < 2) continue;
      if (!may_branch_[v]) return std::nullopt;
      charged.insert(nodes_[v]);
    }
    std::set<LinkIndex> links(rq_.end_links.begin(), rq_.end_links.end());
    for (std::size_t f : arcs) links.insert(m_.arcs[f].link);
    for (NodeIndex n : charged) t.cost += g_.alpha(n) * sn;
    for (LinkIndex l : links) t.cost += g_.beta(l) * se;
    t.arcs.assign(arcs.begin(), arcs.end());
    t.charged.assign(charged.begin(), charged.end());
    t.links.assign(links.begin(), links.end());
    return t;
  }

  // Shortest-path in-tree inside the program's arc union.
  std::optional<RequestTree> repair(const std::set<std::size_t>& used) const {
    constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(n_, kUnreached);
    dist[root_] = 0;
    std::deque<std::size_t> q{root_};
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      for (std::size_t f : used) {
        if (static_cast<std::size_t>(local_[m_.arcs[f].head]) != v) continue;
        const auto u = static_cast<std::size_t>(local_[m_.arcs[f].tail]);
        if (dist[u] != kUnreached) continue;
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
    }
    std::vector<std::optional<std::size_t>> parent(n_);
    for (std::size_t f : used) {  // ascending arc index
      const auto u = static_cast<std::size_t>(local_[m_.arcs[f].tail]);
      const auto v = static_cast<std::size_t>(local_[m_.arcs[f].head]);
      if (!parent[u] && dist[u] != kUnreached && dist[v] != kUnreached && dist[v] + 1 == dist[u]) parent[u] = f;
    }
    return evaluate(parent);
  }

  TreeResult enumerate() const {
    std::vector<std::size_t> order;
    for (std::size_t v = 0; v < n_; ++v)
      if (v != root_) order.push_back(v);
    std::vector<std::optional<std::size_t>> parent(n_);
    std::optional<RequestTree> best;
    std::size_t leaves = 0;
    bool exhausted = false;
    auto rec = [&](auto&& self, std::size_t idx) -> void {
      if (exhausted) return;
      if (idx == order.size()) {
        if (++leaves > enum_budget_) {
          exhausted = true;
          return;
        }
        auto t = evaluate(parent);
        if (t && (!best || t->cost < best->cost)) best = std::move(t);
        return;
      }
      const std::size_t v = order[idx];
      if (term_bit_[v] < 0) {
        parent[v].reset();
        self(self, idx + 1);
      }
      for (std::size_t f : out_[v]) {
        parent[v] = f;
        self(self, idx + 1);
      }
      parent[v].reset();
    };
    rec(rec, 0);
    if (exhausted) return {TreeStatus::Limit, {}};
    if (!best) return {};
    return {TreeStatus::Found, std::move(*best)};
  }

  const IlpModel& m_;
  const PhysicalGraph& g_;
  const RequestScope& rq_;
  const Restriction& res_;
  std::size_t enum_budget_;
  std::vector<NodeIndex> nodes_;
  std::vector<int> local_;
  std::size_t n_ = 0, root_ = 0;
  std::vector<int> term_bit_;
  std::vector<double> charge_;
  std::vector<char> may_branch_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<double> arc_w_;
  double constant_ = 0.0;
  std::vector<double> in_, leave_, a1_;
  std::vector<std::uint32_t> pred_, split_;
  std::vector<std::uint8_t> in_choice_, leave_choice_;
};

// Full variable assignment for one tree per request.
inline std::vector<double> assignment_from_trees(const IlpModel& m, const std::vector<RequestTree>& trees) {
  const PhysicalGraph& g = *m.graph;
  std::vector<double> v(m.variables.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.variables[i].lower;
  std::map<NodeIndex, double> etan;
  std::map<LinkIndex, double> etae;
  for (std::size_t k = 0; k < m.requests.size(); ++k) {
    const auto& rq = m.requests[k];
    const auto& t = trees[k];
    std::map<NodeIndex, std::size_t> parent;
    std::map<NodeIndex, int> indeg;
    for (std::size_t f : t.arcs) {
      parent[m.arcs[f].tail] = f;
      ++indeg[m.arcs[f].head];
      v[m.at(names::m(g, m.arcs[f], rq.id))] = 1.0;
    }
    const ModelArc* direct = nullptr;
    for (NodeIndex s : rq.sources) {
      for (const auto& a : m.aux_arcs)
        if (a.source == s && a.target == m.root) direct = &a;
      v[m.at(names::q(g, *direct, s, rq.id))] = 1.0;
      v[m.at(names::w(g, *direct, rq.id))] = 1.0;
      for (NodeIndex n = s; n != m.root;) {
        const auto f = parent.at(n);
        v[m.at(names::x(g, m.arcs[f], *direct, rq.id))] = 1.0;
        n = m.arcs[f].head;
      }
    }
    for (LinkIndex l : t.links) {
      v[m.at(names::mul(g, l, rq.id))] = 1.0;
      etae[l] += static_cast<double>(rq.link_demand);
    }
    for (NodeIndex n : g.edges()) {
      const auto c = rq.clients_at.count(n) ? rq.clients_at.at(n) : 0;
      if ((indeg.count(n) ? indeg.at(n) : 0) + c >= 2) v[m.at(names::zeta(g, n, rq.id))] = 1.0;
    }
    for (NodeIndex n : t.charged) {
      v[m.at(names::gor(g, n, rq.id))] = 1.0;
      etan[n] += static_cast<double>(rq.node_demand);
    }
  }
  for (auto [n, e] : etan) v[m.at(names::etan(g, n))] = e;
  for (auto [l, e] : etae) v[m.at(names::etae(g, l))] = e;
  return v;
}

}  // namespace detail

// Deterministic exact solve. With status optimal the objective is the true
// minimum; limit_reached carries the best incumbent, if any.
inline IlpSolution solve_exact(const IlpModel& m, const SolveLimits& limits = {}) {
  limits.validate();
  IlpSolution sol;
  if (m.requests.empty()) {
    sol.values.assign(m.variables.size(), 0.0);
    sol.status = SolveStatus::Optimal;
    return sol;
  }
  using detail::Restriction;
  using detail::RequestTree;
  using detail::TreeResult;
  using detail::TreeStatus;
  const PhysicalGraph& g = *m.graph;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const std::size_t K = m.requests.size();

  std::map<std::pair<std::size_t, std::string>, TreeResult> memo;
  auto tree_for = [&](std::size_t k, const Restriction& r) -> const TreeResult& {
    auto key = std::make_pair(k, r.key());
    auto it = memo.find(key);
    if (it == memo.end())
      it = memo.emplace(key, detail::SteinerTreeSolver(m, m.requests[k], r, limits.enumeration_budget).solve()).first;
    return it->second;
  };

  struct Node {
    double bound;
    std::size_t seq;
    std::vector<Restriction> res;
  };
  auto cmp = [](const Node& a, const Node& b) { return a.bound != b.bound ? a.bound > b.bound : a.seq > b.seq; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
  std::set<std::string> visited;
  auto signature = [](const std::vector<Restriction>& res) {
    std::string s;
    for (const auto& r : res) s += r.key() + ";";
    return s;
  };
  bool hit_limit = false;
  std::size_t seq = 0;
  // returns bound, or nullopt if pruned (infeasible) / unresolved (limit)
  auto bound_of = [&](const std::vector<Restriction>& res) -> std::optional<double> {
    double b = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& tr = tree_for(k, res[k]);
      if (tr.status == TreeStatus::Limit) hit_limit = true;
      if (tr.status != TreeStatus::Found) return std::nullopt;
      b += tr.tree.cost;
    }
    return b;
  };
  std::vector<Restriction> root_res(K);
  visited.insert(signature(root_res));
  if (auto b = bound_of(root_res)) open.push({*b, seq++, root_res});

  std::optional<std::vector<RequestTree>> incumbent;
  while (!open.empty()) {
    if (sol.nodes_explored >= limits.node_budget || elapsed() > limits.time_seconds) {
      hit_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    ++sol.nodes_explored;
    std::vector<const RequestTree*> trees(K);
    for (std::size_t k = 0; k < K; ++k) trees[k] = &tree_for(k, node.res[k]).tree;
    std::vector<std::int64_t> node_use(g.node_count(), 0), link_use(g.link_count(), 0);
    for (std::size_t k = 0; k < K; ++k) {
      for (NodeIndex n : trees[k]->charged) node_use[n] += m.requests[k].node_demand;
      for (LinkIndex l : trees[k]->links) link_use[l] += m.requests[k].link_demand;
    }
    std::optional<std::pair<bool, std::uint32_t>> violated;  // (is_node, index)
    for (NodeIndex n = 0; n < g.node_count() && !violated; ++n)
      if (node_use[n] > g.node(n).capacity) violated = std::make_pair(true, n);
    for (LinkIndex l = 0; l < g.link_count() && !violated; ++l)
      if (link_use[l] > g.link(l).capacity) violated = std::make_pair(false, l);
    if (!violated) {
      incumbent.emplace();
      for (std::size_t k = 0; k < K; ++k) incumbent->push_back(*trees[k]);
      break;  // best-first: the first capacity-feasible node is optimal
    }
    const auto [is_node, comp] = *violated;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& t = *trees[k];
      const bool uses = is_node ? std::binary_search(t.charged.begin(), t.charged.end(), comp)
                                : std::binary_search(t.links.begin(), t.links.end(), comp);
      if (!uses) continue;
      auto res = node.res;
      auto& list = is_node ? res[k].nodes : res[k].links;
      list.insert(std::upper_bound(list.begin(), list.end(), comp), comp);
      if (!visited.insert(signature(res)).second) continue;
      if (auto b = bound_of(res)) open.push({*b, seq++, std::move(res)});
    }
  }
  if (incumbent) {
    sol.values = detail::assignment_from_trees(m, *incumbent);
    sol.objective = m.objective_of(sol.values);
    sol.status = hit_limit ? SolveStatus::LimitReached : SolveStatus::Optimal;
    return sol;
  }
  sol.status = hit_limit ? SolveStatus::LimitReached : SolveStatus::Infeasible;
  return sol;
}

}  // namespace fedagg
