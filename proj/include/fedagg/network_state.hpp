// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedagg/errors.hpp"
#include "fedagg/topology.hpp"

namespace fedagg {

// Resource claims of one placed request. The same component may appear
// more than once (e.g. two model transfers crossing one link).
struct Claims {
  std::vector<std::pair<NodeIndex, std::int64_t>> nodes;
  std::vector<std::pair<LinkIndex, std::int64_t>> links;

  bool empty() const { return nodes.empty() && links.empty(); }

  // Per-component totals, sorted by index.
  std::vector<std::pair<NodeIndex, std::int64_t>> node_totals() const { return totals(nodes); }
  std::vector<std::pair<LinkIndex, std::int64_t>> link_totals() const { return totals(links); }

 private:
  template <typename Index>
  static std::vector<std::pair<Index, std::int64_t>> totals(const std::vector<std::pair<Index, std::int64_t>>& in) {
    std::map<Index, std::int64_t> acc;
    for (auto [i, v] : in) acc[i] += v;
    return {acc.begin(), acc.end()};
  }
};

// Used capacity per node and link plus the per-request claim ledger.
// Single writer: only the engine mutates it.
class NetworkState {
 public:
  NetworkState() = default;
  explicit NetworkState(const PhysicalGraph& g)
      : graph_(&g), node_used_(g.node_count(), 0), link_used_(g.link_count(), 0) {}

  const PhysicalGraph& graph() const { return *graph_; }
  std::span<const std::int64_t> node_used() const { return node_used_; }
  std::span<const std::int64_t> link_used() const { return link_used_; }
  std::int64_t node_used(NodeIndex n) const { return node_used_.at(n); }
  std::int64_t link_used(LinkIndex l) const { return link_used_.at(l); }
  std::int64_t node_residual(NodeIndex n) const { return graph_->node(n).capacity - node_used_.at(n); }
  std::int64_t link_residual(LinkIndex l) const { return graph_->link(l).capacity - link_used_.at(l); }

  // First component (nodes by index, then links by index) whose capacity
  // would be exceeded by adding `c`, described for failure reporting.
  std::optional<std::string> first_violation(const Claims& c) const {
    for (auto [n, v] : c.node_totals())
      if (node_used_.at(n) + v > graph_->node(n).capacity) return graph_->name(n);
    for (auto [l, v] : c.link_totals())
      if (link_used_.at(l) + v > graph_->link(l).capacity) return graph_->link_name(l);
    return std::nullopt;
  }

  void apply(std::int64_t request, Claims c) {
    if (auto bad = first_violation(c)) throw InvariantError("claim exceeds capacity on " + *bad);
    if (ledger_.count(request)) throw InvariantError("request " + std::to_string(request) + " already holds claims");
    for (auto [n, v] : c.nodes) node_used_[n] += v;
    for (auto [l, v] : c.links) link_used_[l] += v;
    ledger_.emplace(request, std::move(c));
  }

  Claims release(std::int64_t request) {
    auto it = ledger_.find(request);
    if (it == ledger_.end()) throw InvariantError("request " + std::to_string(request) + " holds no claims");
    Claims c = std::move(it->second);
    ledger_.erase(it);
    for (auto [n, v] : c.nodes) node_used_[n] -= v;
    for (auto [l, v] : c.links) link_used_[l] -= v;
    return c;
  }

  bool holds(std::int64_t request) const { return ledger_.count(request) != 0; }
  const std::map<std::int64_t, Claims>& ledger() const { return ledger_; }

  // Ledger sums equal used capacity and every component is within [0, C].
  bool audit() const {
    std::vector<std::int64_t> n(node_used_.size(), 0), l(link_used_.size(), 0);
    for (const auto& [_, c] : ledger_) {
      for (auto [i, v] : c.nodes) n[i] += v;
      for (auto [i, v] : c.links) l[i] += v;
    }
    if (n != node_used_ || l != link_used_) return false;
    for (NodeIndex i = 0; i < node_used_.size(); ++i)
      if (node_used_[i] < 0 || node_used_[i] > graph_->node(i).capacity) return false;
    for (LinkIndex i = 0; i < link_used_.size(); ++i)
      if (link_used_[i] < 0 || link_used_[i] > graph_->link(i).capacity) return false;
    return true;
  }

  bool idle() const {
    return ledger_.empty() && std::all_of(node_used_.begin(), node_used_.end(), [](auto v) { return v == 0; }) &&
           std::all_of(link_used_.begin(), link_used_.end(), [](auto v) { return v == 0; });
  }

  bool operator==(const NetworkState& o) const {
    return node_used_ == o.node_used_ && link_used_ == o.link_used_ && ledger_keys() == o.ledger_keys();
  }

 private:
  std::vector<std::int64_t> ledger_keys() const {
    std::vector<std::int64_t> k;
    for (const auto& [r, _] : ledger_) k.push_back(r);
    return k;
  }

  const PhysicalGraph* graph_ = nullptr;
  std::vector<std::int64_t> node_used_;
  std::vector<std::int64_t> link_used_;
  std::map<std::int64_t, Claims> ledger_;
};

}  // namespace fedagg
