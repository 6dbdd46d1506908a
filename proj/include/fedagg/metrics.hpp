// SPDX-License-Identifier: Apache-2.0
//
// Post-processing of a ResultsLog: failure rate, utilization ratios,
// weighted capacity, and CSV/JSON export of run summaries.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedagg/engine.hpp"
#include "fedagg/errors.hpp"
#include "fedagg/topology.hpp"

namespace fedagg {

enum class ComponentKind { CloudLink, EdgeLink, EdgeNode };

inline std::string_view to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::CloudLink: return "cloud_link";
    case ComponentKind::EdgeLink: return "edge_link";
    case ComponentKind::EdgeNode: return "edge_node";
  }
  return "?";
}

inline double trfr(const ResultsLog& log) {
  if (log.t_total == 0) throw MetricError("TRFR undefined: no training rounds were requested");
  if (log.t_failed < 0 || log.t_failed > log.t_total) throw MetricError("failed count outside [0, total]");
  return static_cast<double>(log.t_failed) / static_cast<double>(log.t_total);
}

namespace detail {

inline bool in_kind(const PhysicalGraph& g, ComponentKind k, std::size_t i, bool node) {
  if (node) return k == ComponentKind::EdgeNode && g.node(i).kind == NodeKind::Edge;
  if (k == ComponentKind::CloudLink) return g.link(i).kind == LinkKind::Cloud;
  if (k == ComponentKind::EdgeLink) return g.link(i).kind == LinkKind::Edge;
  return false;
}

}  // namespace detail

// Mean of used/capacity over the components of one kind, for one state.
inline double snapshot_mur(const PhysicalGraph& g, std::span<const std::int64_t> node_used,
                           std::span<const std::int64_t> link_used, ComponentKind k) {
  const bool node = k == ComponentKind::EdgeNode;
  const std::size_t n = node ? g.node_count() : g.link_count();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!detail::in_kind(g, k, i, node)) continue;
    const double cap = static_cast<double>(node ? g.node(i).capacity : g.link(i).capacity);
    const double used = static_cast<double>(node ? node_used[i] : link_used[i]);
    sum += cap > 0 ? used / cap : 0.0;
    ++count;
  }
  if (count == 0) throw MetricError("MUR undefined: topology has no " + std::string(to_string(k)) + " components");
  return sum / static_cast<double>(count);
}

inline double snapshot_mur(const NetworkState& s, const PhysicalGraph& g, ComponentKind k) {
  return snapshot_mur(g, s.node_used(), s.link_used(), k);
}

// Time-weighted over [0, end_time], usage held constant between samples.
// A run of zero length reports the last sample.
inline double mur(const ResultsLog& log, ComponentKind k) {
  if (!log.graph) throw MetricError("log carries no topology");
  if (log.usage.empty()) throw MetricError("log has no usage samples");
  const auto& g = *log.graph;
  if (!(log.end_time > 0.0)) return snapshot_mur(g, log.usage.back().node_used, log.usage.back().link_used, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < log.usage.size(); ++i) {
    const double from = log.usage[i].time;
    const double to = i + 1 < log.usage.size() ? log.usage[i + 1].time : log.end_time;
    if (to <= from) continue;
    acc += (to - from) * snapshot_mur(g, log.usage[i].node_used, log.usage[i].link_used, k);
  }
  // validates the kind even when every interval is empty
  (void)snapshot_mur(g, log.usage.front().node_used, log.usage.front().link_used, k);
  return acc / log.end_time;
}

// Per-component weights; NaN or a short vector means "missing".
struct ComponentWeights {
  std::vector<double> node_alpha;
  std::vector<double> link_beta;

  static ComponentWeights of(const PhysicalGraph& g) {
    ComponentWeights w;
    for (NodeIndex n = 0; n < g.node_count(); ++n) w.node_alpha.push_back(g.alpha(n));
    for (LinkIndex l = 0; l < g.link_count(); ++l) w.link_beta.push_back(g.beta(l));
    return w;
  }
};

// Sum over served requests of their weighted claims. A link crossed by two
// transfers of one request counts twice.
inline double weighted_claims(const PhysicalGraph& g, const Claims& c, const ComponentWeights& w) {
  double total = 0.0;
  for (auto [n, v] : c.nodes) {
    if (n >= w.node_alpha.size() || std::isnan(w.node_alpha[n])) throw MetricError("missing weight for node " + g.name(n));
    total += w.node_alpha[n] * static_cast<double>(v);
  }
  for (auto [l, v] : c.links) {
    if (l >= w.link_beta.size() || std::isnan(w.link_beta[l])) throw MetricError("missing weight for link " + g.link_name(l));
    total += w.link_beta[l] * static_cast<double>(v);
  }
  return total;
}

inline double cumulative_weighted_capacity(const ResultsLog& log, const ComponentWeights& w) {
  if (!log.graph) throw MetricError("log carries no topology");
  double total = 0.0;
  for (const auto& d : log.decisions)
    if (d.placed) total += weighted_claims(*log.graph, d.claims, w);
  return total;
}

inline double cumulative_weighted_capacity(const ResultsLog& log) {
  if (!log.graph) throw MetricError("log carries no topology");
  return cumulative_weighted_capacity(log, ComponentWeights::of(*log.graph));
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

struct RunSummary {
  std::string topology;
  std::string strategy;
  std::int64_t xi = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::int64_t t_total = 0;
  std::int64_t t_failed = 0;
  double trfr = 0.0;
  double mur_cloud_link = 0.0;
  double mur_edge_link = 0.0;
  double mur_edge_node = 0.0;
  double weighted_capacity = 0.0;
  double mean_round_ms = 0.0;
  double mean_placement_ms = 0.0;

  bool operator==(const RunSummary&) const = default;
};

inline RunSummary summarize(const ResultsLog& log, std::string topology = {}) {
  RunSummary s;
  s.topology = std::move(topology);
  s.strategy = log.strategy;
  s.xi = log.xi;
  s.lambda = log.lambda;
  s.seed = log.seed;
  s.t_total = log.t_total;
  s.t_failed = log.t_failed;
  s.trfr = log.t_total > 0 ? trfr(log) : 0.0;
  s.mur_cloud_link = mur(log, ComponentKind::CloudLink);
  s.mur_edge_link = mur(log, ComponentKind::EdgeLink);
  s.mur_edge_node = mur(log, ComponentKind::EdgeNode);
  s.weighted_capacity = cumulative_weighted_capacity(log);
  double dur = 0.0, placement = 0.0;
  std::size_t done = 0;
  for (const auto& d : log.decisions) {
    placement += d.placement_ms;
    if (d.placed && d.completion_time >= 0) {
      dur += d.completion_time - d.time;
      ++done;
    }
  }
  s.mean_round_ms = done ? dur / static_cast<double>(done) : 0.0;
  s.mean_placement_ms = log.decisions.empty() ? 0.0 : placement / static_cast<double>(log.decisions.size());
  return s;
}

inline constexpr std::string_view kSummaryCsvHeader =
    "topology,strategy,xi,lambda,seed,t_total,t_failed,trfr,mur_cloud_link,mur_edge_link,mur_edge_node,"
    "weighted_capacity,mean_round_ms,mean_placement_ms";

inline std::string to_csv_row(const RunSummary& s) {
  using detail::fmt;
  std::ostringstream os;
  os << s.topology << ',' << s.strategy << ',' << s.xi << ',' << fmt(s.lambda) << ',' << s.seed << ',' << s.t_total << ','
     << s.t_failed << ',' << fmt(s.trfr) << ',' << fmt(s.mur_cloud_link) << ',' << fmt(s.mur_edge_link) << ','
     << fmt(s.mur_edge_node) << ',' << fmt(s.weighted_capacity) << ',' << fmt(s.mean_round_ms) << ','
     << fmt(s.mean_placement_ms);
  return os.str();
}

inline std::string to_csv(const std::vector<RunSummary>& rows) {
  std::string out(kSummaryCsvHeader);
  out += '\n';
  for (const auto& r : rows) out += to_csv_row(r) + '\n';
  return out;
}

inline void to_json(nlohmann::ordered_json& j, const RunSummary& s) {
  j = nlohmann::ordered_json{{"topology", s.topology},
                             {"strategy", s.strategy},
                             {"xi", s.xi},
                             {"lambda", s.lambda},
                             {"seed", s.seed},
                             {"t_total", s.t_total},
                             {"t_failed", s.t_failed},
                             {"trfr", s.trfr},
                             {"mur_cloud_link", s.mur_cloud_link},
                             {"mur_edge_link", s.mur_edge_link},
                             {"mur_edge_node", s.mur_edge_node},
                             {"weighted_capacity", s.weighted_capacity},
                             {"mean_round_ms", s.mean_round_ms},
                             {"mean_placement_ms", s.mean_placement_ms}};
}

inline void from_json(const nlohmann::ordered_json& j, RunSummary& s) {
  j.at("topology").get_to(s.topology);
  j.at("strategy").get_to(s.strategy);
  j.at("xi").get_to(s.xi);
  j.at("lambda").get_to(s.lambda);
  j.at("seed").get_to(s.seed);
  j.at("t_total").get_to(s.t_total);
  j.at("t_failed").get_to(s.t_failed);
  j.at("trfr").get_to(s.trfr);
  j.at("mur_cloud_link").get_to(s.mur_cloud_link);
  j.at("mur_edge_link").get_to(s.mur_edge_link);
  j.at("mur_edge_node").get_to(s.mur_edge_node);
  j.at("weighted_capacity").get_to(s.weighted_capacity);
  j.at("mean_round_ms").get_to(s.mean_round_ms);
  j.at("mean_placement_ms").get_to(s.mean_placement_ms);
}

inline std::string to_json_text(const std::vector<RunSummary>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) arr.push_back(r);
  return arr.dump(2) + "\n";
}

inline std::vector<RunSummary> summaries_from_json(std::string_view text) {
  std::vector<RunSummary> out;
  try {
    for (const auto& j : nlohmann::ordered_json::parse(text)) out.push_back(j.get<RunSummary>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("summary JSON: ") + e.what());
  }
  return out;
}

}  // namespace fedagg
