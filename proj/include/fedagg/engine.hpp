// SPDX-License-Identifier: Apache-2.0
//
// Discrete-event core. Requests arrive, the allocator places them against
// the shared network state, and each placed round runs as a task DAG:
// train -> upload -> edge aggregate -> forward -> ... -> cloud aggregate.
// Claims are held from placement until the round completes.

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "fedagg/allocators.hpp"
#include "fedagg/errors.hpp"
#include "fedagg/latency.hpp"
#include "fedagg/network_state.hpp"
#include "fedagg/topology.hpp"
#include "fedagg/workload.hpp"

namespace fedagg {

// Same-time ordering: completions first, so that freed capacity is visible
// to a request arriving at the same instant.
enum class EventKind : std::uint8_t { TaskComplete = 0, TaskStart = 1, RoundComplete = 2, ResourceRelease = 3, RequestArrival = 4 };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::TaskComplete: return "task_complete";
    case EventKind::TaskStart: return "task_start";
    case EventKind::RoundComplete: return "round_complete";
    case EventKind::ResourceRelease: return "resource_release";
    case EventKind::RequestArrival: return "request_arrival";
  }
  return "?";
}

enum class TaskKind : std::uint8_t { Train, Upload, Aggregate, Forward };

inline std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Train: return "train";
    case TaskKind::Upload: return "upload";
    case TaskKind::Aggregate: return "aggregate";
    case TaskKind::Forward: return "forward";
  }
  return "?";
}

struct Task {
  TaskKind kind = TaskKind::Train;
  NodeIndex node = kNoNode;  // client for train/upload, aggregator otherwise
  NodeIndex peer = kNoNode;  // transfer destination
  std::int64_t fan_in = 0;   // aggregate only
  double duration = 0.0;     // ms
  std::vector<std::size_t> successors;
  std::size_t pending = 0;  // unfinished predecessors
};

// Task DAG of one placed round.
struct EventGraph {
  std::int64_t request = 0;
  std::vector<Task> tasks;

  std::vector<std::size_t> roots() const {
    std::vector<std::size_t> r;
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (tasks[i].pending == 0) r.push_back(i);
    return r;
  }
  bool acyclic() const {
    std::vector<std::size_t> indeg(tasks.size(), 0);
    for (const auto& t : tasks)
      for (auto s : t.successors) ++indeg[s];
    std::vector<std::size_t> q;
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (indeg[i] == 0) q.push_back(i);
    std::size_t seen = 0;
    while (!q.empty()) {
      auto v = q.back();
      q.pop_back();
      ++seen;
      for (auto s : tasks[v].successors)
        if (--indeg[s] == 0) q.push_back(s);
    }
    return seen == tasks.size();
  }
};

inline EventGraph build_event_graph(const PhysicalGraph&, const TrainingRoundRequest& r, const PlacementDecision& d,
                                    const LatencyConstants& k = {}) {
  if (!d.placed()) throw InvariantError("event graph for an unplaced request");
  EventGraph eg;
  eg.request = r.id;
  std::map<NodeIndex, std::size_t> agg_task;
  std::map<NodeIndex, std::int64_t> fan_in;
  for (auto [c, e] : d.assignment.edge_of) ++fan_in[e];
  for (const auto& e : d.overlay.edges) ++fan_in[e.target];
  auto add = [&](Task t) {
    eg.tasks.push_back(std::move(t));
    return eg.tasks.size() - 1;
  };
  for (auto [n, f] : fan_in) {
    Task t;
    t.kind = TaskKind::Aggregate;
    t.node = n;
    t.fan_in = f;
    t.duration = aggregation_latency(r.arch, f, r.node_demand, k);
    agg_task[n] = add(std::move(t));
  }
  const double upload = transfer_latency(r.arch, request_link_load(r), k);
  auto link = [&](std::size_t from, std::size_t to) {
    eg.tasks[from].successors.push_back(to);
    ++eg.tasks[to].pending;
  };
  for (auto [c, e] : d.assignment.edge_of) {
    Task tr;
    tr.kind = TaskKind::Train;
    tr.node = c;
    tr.duration = training_latency(r.arch, r.dataset_size);
    const auto ti = add(std::move(tr));
    Task up;
    up.kind = TaskKind::Upload;
    up.node = c;
    up.peer = e;
    up.duration = upload;
    const auto ui = add(std::move(up));
    link(ti, ui);
    link(ui, agg_task.at(e));
  }
  for (const auto& e : d.overlay.edges) {
    Task fw;
    fw.kind = TaskKind::Forward;
    fw.node = e.source;
    fw.peer = e.target;
    fw.duration = upload;
    const auto fi = add(std::move(fw));
    link(agg_task.at(e.source), fi);
    link(fi, agg_task.at(e.target));
  }
  return eg;
}

// ---------------------------------------------------------------------------
// Configuration and log
// ---------------------------------------------------------------------------

struct SimConfig {
  std::string topology = "medium";  // builtin name or topology file path
  WorkloadConfig workload;
  AllocatorConfig allocator;
  WeightConfig weights;
  LatencyConstants latency;
  bool record_timing = false;  // wall-clock placement time; makes logs nondeterministic
  bool check_invariants = true;

  void validate() const {
    workload.validate();
    CostParams{allocator.xi, 1, 1}.validate();
    if (!(latency.bits_per_weight > 0 && latency.bytes_per_weight > 0 && latency.ops_per_unit_second > 0 &&
          latency.mbps_to_bps > 0))
      throw ConfigError("latency constants must be positive");
  }
};

inline PhysicalGraph resolve_topology(const std::string& spec, const WeightConfig& w = {}) {
  if (spec == "medium" || spec == "large") return builtin_topology(spec, w);
  std::ifstream in(spec);
  if (!in) throw ConfigError("topology '" + spec + "' is neither a builtin name nor a readable file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_topology(ss.str(), w);
}

struct LogEvent {
  double time = 0.0;
  EventKind kind = EventKind::RequestArrival;
  std::int64_t request = 0;
  std::optional<TaskKind> task;
  NodeId node = 0;
  NodeId peer = 0;
};

struct DecisionRecord {
  std::int64_t request = 0;
  double time = 0.0;
  bool placed = false;
  std::string reason;
  std::size_t clients = 0;
  std::size_t aggregators = 0;
  std::size_t cloud_flows = 0;
  std::size_t overlay_edges = 0;
  Claims claims;
  double completion_time = -1.0;  // set at RoundComplete
  double placement_ms = 0.0;
};

struct UsageSample {
  double time = 0.0;
  std::vector<std::int64_t> node_used;
  std::vector<std::int64_t> link_used;
};

struct ResultsLog {
  static constexpr int kSchemaVersion = 1;

  std::shared_ptr<const PhysicalGraph> graph;
  std::string strategy;
  std::int64_t xi = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::vector<LogEvent> events;
  std::vector<DecisionRecord> decisions;
  std::vector<UsageSample> usage;  // state after each change; usage.front() is the idle state at t=0
  std::int64_t t_total = 0;
  std::int64_t t_failed = 0;
  double end_time = 0.0;
  bool final_idle = false;
  bool overlays_valid = true;
  bool capacity_respected = true;

  std::string to_ndjson() const;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string escape(std::string_view s) {
  std::string o;
  for (char c : s) {
    if (c == '"' || c == '\\') o += '\\';
    o += c;
  }
  return o;
}

}  // namespace detail

// One JSON object per line: a header, then events, decisions and usage
// changes in time order of creation, then a summary line.
inline std::string ResultsLog::to_ndjson() const {
  using detail::fmt;
  std::ostringstream os;
  os << "{\"record\":\"header\",\"schema\":" << kSchemaVersion << ",\"strategy\":\"" << strategy << "\",\"xi\":" << xi
     << ",\"lambda\":" << fmt(lambda) << ",\"seed\":" << seed << ",\"rng\":\"" << Rng::kAlgorithm << "\"}\n";
  for (const auto& e : events) {
    os << "{\"record\":\"event\",\"t\":" << fmt(e.time) << ",\"kind\":\"" << to_string(e.kind) << "\",\"request\":" << e.request;
    if (e.task) os << ",\"task\":\"" << to_string(*e.task) << "\",\"node\":" << e.node << ",\"peer\":" << e.peer;
    os << "}\n";
  }
  for (const auto& d : decisions) {
    os << "{\"record\":\"decision\",\"request\":" << d.request << ",\"t\":" << fmt(d.time)
       << ",\"placed\":" << (d.placed ? "true" : "false") << ",\"reason\":\"" << detail::escape(d.reason)
       << "\",\"clients\":" << d.clients << ",\"aggregators\":" << d.aggregators << ",\"cloud_flows\":" << d.cloud_flows
       << ",\"overlay_edges\":" << d.overlay_edges << ",\"completed\":" << fmt(d.completion_time);
    if (d.placement_ms > 0) os << ",\"placement_ms\":" << fmt(d.placement_ms);
    os << "}\n";
  }
  for (std::size_t i = 1; i < usage.size(); ++i) {
    os << "{\"record\":\"usage\",\"t\":" << fmt(usage[i].time) << ",\"nodes\":{";
    bool first = true;
    for (NodeIndex n = 0; n < usage[i].node_used.size(); ++n)
      if (usage[i].node_used[n] != usage[i - 1].node_used[n]) {
        os << (first ? "" : ",") << '"' << graph->node(n).id << "\":" << usage[i].node_used[n];
        first = false;
      }
    os << "},\"links\":{";
    first = true;
    for (LinkIndex l = 0; l < usage[i].link_used.size(); ++l)
      if (usage[i].link_used[l] != usage[i - 1].link_used[l]) {
        os << (first ? "" : ",") << '"' << graph->node(graph->link(l).a).id << "-" << graph->node(graph->link(l).b).id
           << "\":" << usage[i].link_used[l];
        first = false;
      }
    os << "}}\n";
  }
  os << "{\"record\":\"summary\",\"t_total\":" << t_total << ",\"t_failed\":" << t_failed << ",\"end_time\":" << fmt(end_time)
     << ",\"final_idle\":" << (final_idle ? "true" : "false") << ",\"overlays_valid\":" << (overlays_valid ? "true" : "false")
     << ",\"capacity_respected\":" << (capacity_respected ? "true" : "false") << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace detail {

struct QueuedEvent {
  double time;
  EventKind kind;
  std::int64_t request;
  std::uint64_t seq;
  std::size_t task;

  bool operator>(const QueuedEvent& o) const {
    return std::tie(time, kind, request, seq) > std::tie(o.time, o.kind, o.request, o.seq);
  }
};

}  // namespace detail

// Runs `requests` (sorted by arrival) on `g`. Single-threaded and
// deterministic unless cfg.record_timing is set.
inline ResultsLog run(const PhysicalGraph& g, const SimConfig& cfg, const std::vector<TrainingRoundRequest>& requests) {
  cfg.validate();
  ResultsLog log;
  log.graph = std::make_shared<const PhysicalGraph>(g);
  log.strategy = std::string(to_string(cfg.allocator.strategy));
  log.xi = cfg.allocator.xi;
  log.lambda = cfg.workload.lambda;
  log.seed = cfg.workload.seed;
  NetworkState state(g);
  log.usage.push_back({0.0, {state.node_used().begin(), state.node_used().end()},
                       {state.link_used().begin(), state.link_used().end()}});
  auto sample = [&](double t) {
    UsageSample s{t, {state.node_used().begin(), state.node_used().end()}, {state.link_used().begin(), state.link_used().end()}};
    if (log.usage.back().time == t)
      log.usage.back() = std::move(s);
    else
      log.usage.push_back(std::move(s));
  };

  std::priority_queue<detail::QueuedEvent, std::vector<detail::QueuedEvent>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::map<std::int64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!by_id.emplace(requests[i].id, i).second) throw ConfigError("duplicate request id");
    queue.push({requests[i].arrival_time, EventKind::RequestArrival, requests[i].id, seq++, 0});
  }
  std::map<std::int64_t, EventGraph> active;
  std::map<std::int64_t, std::size_t> remaining;
  std::map<std::int64_t, std::size_t> decision_of;
  double clock = 0.0;

  while (!queue.empty()) {
    const auto ev = queue.top();
    queue.pop();
    if (ev.time < clock) throw InvariantError("event scheduled in the past");
    clock = ev.time;
    LogEvent le{ev.time, ev.kind, ev.request, std::nullopt, 0, 0};
    switch (ev.kind) {
      case EventKind::RequestArrival: {
        const auto& r = requests[by_id.at(ev.request)];
        ++log.t_total;
        const auto t0 = std::chrono::steady_clock::now();
        PlacementDecision d = place_request(g, r, state, cfg.allocator);
        const auto t1 = std::chrono::steady_clock::now();
        DecisionRecord rec;
        rec.request = r.id;
        rec.time = ev.time;
        rec.placed = d.placed();
        rec.reason = d.reason;
        rec.clients = r.clients.size();
        rec.aggregators = d.aggregators.size();
        rec.cloud_flows = d.overlay.cloud_flows(g);
        rec.overlay_edges = d.overlay.edges.size();
        if (cfg.record_timing) rec.placement_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        log.events.push_back(le);
        if (!d.placed()) {
          ++log.t_failed;
          log.decisions.push_back(std::move(rec));
          break;
        }
        if (cfg.check_invariants && !d.overlay.is_cloud_rooted_forest(g, d.aggregators)) {
          log.overlays_valid = false;
          throw InvariantError("overlay of request " + std::to_string(r.id) + " is not a cloud-rooted forest");
        }
        rec.claims = d.claims;
        state.apply(r.id, d.claims);
        if (cfg.check_invariants && !state.audit()) {
          log.capacity_respected = false;
          throw InvariantError("state audit failed after placing request " + std::to_string(r.id));
        }
        sample(ev.time);
        decision_of[r.id] = log.decisions.size();
        log.decisions.push_back(std::move(rec));
        EventGraph eg = build_event_graph(g, r, d, cfg.latency);
        if (cfg.check_invariants && !eg.acyclic()) throw InvariantError("cyclic event graph");
        remaining[r.id] = eg.tasks.size();
        for (auto t : eg.roots()) queue.push({ev.time, EventKind::TaskStart, r.id, seq++, t});
        active.emplace(r.id, std::move(eg));
        break;
      }
      case EventKind::TaskStart: {
        auto& eg = active.at(ev.request);
        const auto& t = eg.tasks[ev.task];
        if (t.pending != 0) throw InvariantError("task started before its predecessors completed");
        le.task = t.kind;
        le.node = g.node(t.node).id;
        le.peer = t.peer == kNoNode ? 0 : g.node(t.peer).id;
        log.events.push_back(le);
        queue.push({ev.time + t.duration, EventKind::TaskComplete, ev.request, seq++, ev.task});
        break;
      }
      case EventKind::TaskComplete: {
        auto& eg = active.at(ev.request);
        const auto& t = eg.tasks[ev.task];
        le.task = t.kind;
        le.node = g.node(t.node).id;
        le.peer = t.peer == kNoNode ? 0 : g.node(t.peer).id;
        log.events.push_back(le);
        for (auto s : t.successors)
          if (--eg.tasks[s].pending == 0) queue.push({ev.time, EventKind::TaskStart, ev.request, seq++, s});
        if (--remaining.at(ev.request) == 0) queue.push({ev.time, EventKind::RoundComplete, ev.request, seq++, 0});
        break;
      }
      case EventKind::RoundComplete: {
        log.events.push_back(le);
        log.decisions[decision_of.at(ev.request)].completion_time = ev.time;
        queue.push({ev.time, EventKind::ResourceRelease, ev.request, seq++, 0});
        break;
      }
      case EventKind::ResourceRelease: {
        log.events.push_back(le);
        state.release(ev.request);
        active.erase(ev.request);
        remaining.erase(ev.request);
        if (cfg.check_invariants && !state.audit()) {
          log.capacity_respected = false;
          throw InvariantError("state audit failed after releasing request " + std::to_string(ev.request));
        }
        sample(ev.time);
        break;
      }
    }
  }
  log.end_time = clock;
  log.final_idle = state.idle();
  if (cfg.check_invariants && !log.final_idle) throw InvariantError("resources still claimed at end of run");
  return log;
}

inline ResultsLog run(const PhysicalGraph& g, const SimConfig& cfg) { return run(g, cfg, generate_requests(g, cfg.workload)); }

inline ResultsLog run(const SimConfig& cfg) {
  cfg.validate();
  return run(resolve_topology(cfg.topology, cfg.weights), cfg);
}

}  // namespace fedagg
