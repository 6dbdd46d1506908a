// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive reference for tiny instances. Shares no code with the model
// builder or the solver: it enumerates aggregator sets, overlay forests
// over them and every simple physical path for each overlay edge.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fedagg/errors.hpp"
#include "fedagg/topology.hpp"
#include "fedagg/workload.hpp"

namespace fedagg {

namespace oracle_detail {

struct Option {
  std::uint32_t charged = 0;  // local node mask
  std::uint32_t links = 0;    // local link mask
  double cost = 0.0;
};

}  // namespace oracle_detail

// Minimum total weighted capacity over all feasible joint placements, or
// +inf if none exists. Refuses instances with more than 6 edge nodes or
// more than 3 requests.
inline double brute_force_oracle(const PhysicalGraph& g, const AuxiliaryGraph& aux, std::span<const TrainingRoundRequest> reqs) {
  using oracle_detail::Option;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (g.edges().size() > 6) throw ConfigError("oracle refuses instances with more than 6 edge nodes");
  if (reqs.size() > 3) throw ConfigError("oracle refuses instances with more than 3 requests");
  if (reqs.empty()) return 0.0;

  NodeIndex cloud = kNoNode;
  std::vector<NodeIndex> cand;
  for (NodeIndex n : aux.nodes) {
    if (g.node(n).kind == NodeKind::Cloud && (cloud == kNoNode || n < cloud)) cloud = n;
    if (g.node(n).kind == NodeKind::Edge) cand.push_back(n);
  }
  if (cloud == kNoNode) throw ConfigError("no cloud node in the auxiliary graph");

  // local numbering: edge nodes then the cloud; non-end links touching them
  std::vector<NodeIndex> local_nodes(g.edges().begin(), g.edges().end());
  local_nodes.push_back(cloud);
  const int R = static_cast<int>(local_nodes.size()) - 1;
  std::map<NodeIndex, int> lid;
  for (int i = 0; i <= R; ++i) lid[local_nodes[static_cast<std::size_t>(i)]] = i;
  std::vector<LinkIndex> local_links;
  std::vector<std::vector<std::pair<int, int>>> nbr(local_nodes.size());  // (node, link)
  for (LinkIndex l = 0; l < g.link_count(); ++l) {
    const auto& L = g.link(l);
    if (L.kind == LinkKind::End || !lid.count(L.a) || !lid.count(L.b)) continue;
    const int li = static_cast<int>(local_links.size());
    local_links.push_back(l);
    nbr[static_cast<std::size_t>(lid[L.a])].emplace_back(lid[L.b], li);
    nbr[static_cast<std::size_t>(lid[L.b])].emplace_back(lid[L.a], li);
  }
  if (local_links.size() > 32) throw ConfigError("oracle refuses instances with more than 32 inner links");

  // directed arc 2*l runs from the link's lower local end to the higher one
  std::vector<std::pair<int, int>> arc_ends;
  for (LinkIndex l : local_links) {
    const int a = lid[g.link(l).a], b = lid[g.link(l).b];
    arc_ends.emplace_back(std::min(a, b), std::max(a, b));
    arc_ends.emplace_back(std::max(a, b), std::min(a, b));
  }
  // every simple path from a to b as an arc mask; only edge nodes are
  // crossed and the cloud is entered last
  std::map<std::pair<int, int>, std::vector<std::uint64_t>> path_cache;
  auto paths = [&](int a, int b) -> const std::vector<std::uint64_t>& {
    auto key = std::make_pair(a, b);
    if (auto it = path_cache.find(key); it != path_cache.end()) return it->second;
    std::vector<std::uint64_t> out;
    std::vector<char> seen(local_nodes.size(), 0);
    auto dfs = [&](auto&& self, int v, std::uint64_t mask) -> void {
      if (v == b) {
        out.push_back(mask);
        return;
      }
      seen[static_cast<std::size_t>(v)] = 1;
      for (auto [w, l] : nbr[static_cast<std::size_t>(v)]) {
        if (seen[static_cast<std::size_t>(w)]) continue;
        if (w == R && b != R) continue;
        const std::size_t arc = static_cast<std::size_t>(2 * l) + (v < w ? 0 : 1);
        self(self, w, mask | (std::uint64_t{1} << arc));
      }
      seen[static_cast<std::size_t>(v)] = 0;
    };
    dfs(dfs, a, 0);
    return path_cache.emplace(key, std::move(out)).first->second;
  };

  struct Need {
    std::int64_t sn, se;
    std::vector<LinkIndex> end_links;
    std::vector<Option> options;
  };
  std::vector<Need> needs;

  for (const auto& r : reqs) {
    Need need{r.node_demand, request_link_load(r), {}, {}};
    std::map<int, std::int64_t> clients_at;
    for (NodeIndex c : r.clients) {
      const NodeIndex e = g.attachment(c);
      if (std::find(cand.begin(), cand.end(), e) == cand.end()) throw ConfigError("source is not a candidate");
      ++clients_at[lid.at(e)];
      need.end_links.push_back(g.end_link(c));
    }
    std::sort(need.end_links.begin(), need.end_links.end());
    need.end_links.erase(std::unique(need.end_links.begin(), need.end_links.end()), need.end_links.end());
    std::vector<int> sources;
    for (auto [s, _] : clients_at) sources.push_back(s);
    std::vector<int> extra;
    for (NodeIndex c : cand)
      if (!clients_at.count(lid.at(c))) extra.push_back(lid.at(c));

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> found;
    auto record = [&](std::uint32_t charged, std::uint32_t links) {
      double cost = 0.0;
      for (int i = 0; i <= R; ++i)
        if (charged >> i & 1U) cost += g.alpha(local_nodes[static_cast<std::size_t>(i)]) * static_cast<double>(need.sn);
      for (std::size_t i = 0; i < local_links.size(); ++i)
        if (links >> i & 1U) cost += g.beta(local_links[i]) * static_cast<double>(need.se);
      for (LinkIndex l : need.end_links) cost += g.beta(l) * static_cast<double>(need.se);
      found.emplace(std::make_pair(charged, links), cost);
    };

    for (std::uint32_t xs = 0; xs < (1U << extra.size()); ++xs) {
      std::vector<int> members = sources;
      for (std::size_t i = 0; i < extra.size(); ++i)
        if (xs >> i & 1U) members.push_back(extra[i]);
      const std::size_t F = members.size();
      // parent choice per member: index into members, or F for the cloud
      std::vector<std::size_t> par(F, 0);
      auto forest_ok = [&] {
        for (std::size_t i = 0; i < F; ++i) {
          std::size_t cur = i;
          for (std::size_t steps = 0; cur != F; ++steps) {
            if (steps > F || par[cur] == cur) return false;
            cur = par[cur];
          }
        }
        return true;
      };
      auto realize = [&] {
        // union states after routing the first i overlay edges, deduplicated
        std::set<std::uint64_t> states{0};
        for (std::size_t i = 0; i < F; ++i) {
          const int head = par[i] == F ? R : members[par[i]];
          const auto& ps = paths(members[i], head);
          std::set<std::uint64_t> next;
          for (std::uint64_t st : states)
            for (std::uint64_t p : ps) next.insert(st | p);
          states = std::move(next);
          if (states.empty()) return;
        }
        for (std::uint64_t arcs : states) {
          std::uint32_t links = 0;
          std::vector<std::int64_t> indeg(local_nodes.size(), 0);
          for (std::size_t a = 0; a < arc_ends.size(); ++a)
            if (arcs >> a & 1U) {
              links |= 1U << (a / 2);
              ++indeg[static_cast<std::size_t>(arc_ends[a].second)];
            }
          std::uint32_t charged = 1U << R;
          for (int m : members) charged |= 1U << m;
          for (int v = 0; v < R; ++v) {
            const auto c = clients_at.count(v) ? clients_at.at(v) : 0;
            if (indeg[static_cast<std::size_t>(v)] + c >= 2) charged |= 1U << v;
          }
          record(charged, links);
        }
      };
      auto extras_have_children = [&] {
        for (std::size_t i = sources.size(); i < F; ++i)
          if (std::find(par.begin(), par.end(), i) == par.end()) return false;
        return true;
      };
      while (true) {
        if (forest_ok() && extras_have_children()) realize();
        std::size_t i = 0;
        while (i < F && ++par[i] > F) par[i++] = 0;
        if (i == F) break;
      }
    }
    for (auto& [key, cost] : found) {
      bool alone_ok = true;
      for (int i = 0; i <= R; ++i)
        if ((key.first >> i & 1U) && need.sn > g.node(local_nodes[static_cast<std::size_t>(i)]).capacity) alone_ok = false;
      for (std::size_t i = 0; i < local_links.size(); ++i)
        if ((key.second >> i & 1U) && need.se > g.link(local_links[i]).capacity) alone_ok = false;
      for (LinkIndex l : need.end_links)
        if (need.se > g.link(l).capacity) alone_ok = false;
      if (alone_ok) need.options.push_back({key.first, key.second, cost});
    }
    std::sort(need.options.begin(), need.options.end(), [](const Option& a, const Option& b) { return a.cost < b.cost; });
    if (need.options.empty()) return kInf;
    needs.push_back(std::move(need));
  }

  // joint choice under shared capacities
  std::vector<double> min_rest(needs.size() + 1, 0.0);
  for (std::size_t k = needs.size(); k-- > 0;) min_rest[k] = min_rest[k + 1] + needs[k].options.front().cost;
  std::vector<std::int64_t> node_use(g.node_count(), 0), link_use(g.link_count(), 0);
  double best = kInf;
  auto search = [&](auto&& self, std::size_t k, double acc) -> void {
    if (acc + min_rest[k] >= best) return;
    if (k == needs.size()) {
      best = acc;
      return;
    }
    const auto& nd = needs[k];
    for (const auto& o : nd.options) {
      if (acc + o.cost + min_rest[k + 1] >= best) break;
      std::vector<NodeIndex> ns;
      std::vector<LinkIndex> ls(nd.end_links);
      for (int i = 0; i <= R; ++i)
        if (o.charged >> i & 1U) ns.push_back(local_nodes[static_cast<std::size_t>(i)]);
      for (std::size_t i = 0; i < local_links.size(); ++i)
        if (o.links >> i & 1U) ls.push_back(local_links[i]);
      bool ok = true;
      for (NodeIndex n : ns) ok = ok && node_use[n] + nd.sn <= g.node(n).capacity;
      for (LinkIndex l : ls) ok = ok && link_use[l] + nd.se <= g.link(l).capacity;
      if (!ok) continue;
      for (NodeIndex n : ns) node_use[n] += nd.sn;
      for (LinkIndex l : ls) link_use[l] += nd.se;
      self(self, k + 1, acc + o.cost);
      for (NodeIndex n : ns) node_use[n] -= nd.sn;
      for (LinkIndex l : ls) link_use[l] -= nd.se;
    }
  };
  search(search, 0, 0.0);
  return best;
}

inline double brute_force_oracle(const PhysicalGraph& g, const AuxiliaryGraph& aux, const std::vector<TrainingRoundRequest>& reqs) {
  return brute_force_oracle(g, aux, std::span<const TrainingRoundRequest>(reqs));
}

}  // namespace fedagg
