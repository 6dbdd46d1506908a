// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "fedagg/ilp.hpp"
#include "fedagg/ilp_oracle.hpp"
#include "support.hpp"

using namespace fedagg;
using fixtures::make_request;

namespace {

struct Built {
  PhysicalGraph g;
  AuxiliaryGraph aux;
  std::vector<TrainingRoundRequest> reqs;
};

Built line_instance(std::int64_t cloud_link = 4000, std::int64_t sn = 3, std::int64_t se = 20) {
  Built b{fixtures::line_graph(cloud_link), {}, {}};
  b.aux = build_auxiliary_graph(b.g, b.g.edges());
  b.reqs.push_back(make_request(0, {b.g.at_id(1000)}, sn, se));
  return b;
}

double value_of(const IlpModel& m, const IlpSolution& s, const std::string& name) { return s.values.at(m.at(name)); }

// columns named in the COLUMNS section of a free MPS text
std::set<std::string> mps_columns(const std::string& text) {
  std::set<std::string> cols;
  std::istringstream in(text);
  std::string line;
  bool in_cols = false;
  while (std::getline(in, line)) {
    if (line == "COLUMNS") {
      in_cols = true;
      continue;
    }
    if (!line.empty() && line[0] != ' ') in_cols = false;
    if (!in_cols) continue;
    std::istringstream ls(line);
    std::string name, second;
    ls >> name >> second;
    if (second == "'MARKER'") continue;
    cols.insert(name);
  }
  return cols;
}

}  // namespace

TEST(Model, EmptyRequestSetIsZero) {
  const auto g = fixtures::fig3_graph();
  const auto aux = build_auxiliary_graph(g, g.edges());
  const auto m = build_model(g, aux, std::vector<TrainingRoundRequest>{});
  EXPECT_TRUE(m.variables.empty());
  const auto s = solve_exact(m);
  EXPECT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_EQ(s.objective, 0.0);
  EXPECT_EQ(brute_force_oracle(g, aux, std::vector<TrainingRoundRequest>{}), 0.0);
  const auto text = export_standard_form(m);
  EXPECT_TRUE(mps_columns(text).empty());
  EXPECT_NE(text.find(" N obj"), std::string::npos);
}

TEST(Model, LineHandComputedOptimum) {
  // one routing exists: client -> edge -> cloud. Charged: edge and cloud
  // node (sigma_n each), end link (beta 1) and cloud link (beta 10).
  const auto b = line_instance();
  const auto m = build_model(b.g, b.aux, b.reqs);
  const auto s = solve_exact(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  const double hand = 1.0 * 3 + 1.0 * 3 + 1.0 * 20 + 10.0 * 20;
  EXPECT_DOUBLE_EQ(s.objective, hand);
  EXPECT_DOUBLE_EQ(brute_force_oracle(b.g, b.aux, b.reqs), hand);
  EXPECT_TRUE(verify_solution(m, s).empty());
}

TEST(Model, Fig3AggregatesAtNodeFour) {
  const auto g = fixtures::fig3_graph();
  const auto aux = build_auxiliary_graph(g, g.edges());
  const std::vector<TrainingRoundRequest> reqs{make_request(0, {g.at_id(1000), g.at_id(1001)}, 4, 20)};
  const auto m = build_model(g, aux, reqs);
  const auto s = solve_exact(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_TRUE(verify_solution(m, s).empty());
  EXPECT_DOUBLE_EQ(s.objective, brute_force_oracle(g, aux, reqs));
  // both updates meet at node 4 before the single cloud transfer
  EXPECT_EQ(value_of(m, s, names::gor(g, g.at_id(4), 0)), 1.0);
  const auto cl = *g.link_between(g.at_id(3), g.at_id(999));
  EXPECT_EQ(value_of(m, s, names::etae(g, cl)), 20.0);
  // the aux arc 2 -> 4 is realized through 1
  DirectedArc f21{}, f14{};
  for (const auto& f : m.arcs) {
    if (f.tail == g.at_id(2) && f.head == g.at_id(1)) f21 = f;
    if (f.tail == g.at_id(1) && f.head == g.at_id(4)) f14 = f;
  }
  const ModelArc a24{g.at_id(2), g.at_id(4)};
  if (value_of(m, s, names::w(g, a24, 0)) == 1.0) {
    EXPECT_EQ(value_of(m, s, names::x(g, f21, a24, 0)), 1.0);
    EXPECT_EQ(value_of(m, s, names::x(g, f14, a24, 0)), 1.0);
  }
  EXPECT_DOUBLE_EQ(s.objective, 4.0 * 4 + 20.0 * 4 + 200.0 + 2 * 20.0);
}

TEST(Model, InfeasibleWhenCloudLinkTooSmall) {
  const auto b = line_instance(10);
  const auto s = solve_exact(build_model(b.g, b.aux, b.reqs));
  EXPECT_EQ(s.status, SolveStatus::Infeasible);
}

TEST(Model, VariableCountMatchesIndexSets) {
  const auto g = fixtures::fig3_graph();
  const auto aux = build_auxiliary_graph(g, g.edges());
  const std::vector<TrainingRoundRequest> reqs{make_request(0, {g.at_id(1000), g.at_id(1001)}, 4, 20),
                                               make_request(1, {g.at_id(1001)}, 2, 30)};
  const auto m = build_model(g, aux, reqs);

  const std::size_t C = g.edges().size();
  const std::size_t A = C * (C - 1) + C;  // candidate pairs plus candidate -> root
  std::size_t edge_links = 0, cloud_links = 0;
  for (LinkIndex l = 0; l < g.link_count(); ++l) {
    if (g.link(l).kind == LinkKind::Edge) ++edge_links;
    if (g.link(l).kind == LinkKind::Cloud) ++cloud_links;
  }
  const std::size_t F = 2 * edge_links + cloud_links;
  std::size_t expected = 0;
  std::set<LinkIndex> charged_links;
  for (const auto& r : reqs) {
    std::set<NodeIndex> sources;
    std::set<LinkIndex> ends;
    for (NodeIndex c : r.clients) {
      sources.insert(g.attachment(c));
      ends.insert(g.end_link(c));
    }
    expected += A * sources.size();                        // q
    expected += A;                                         // w
    expected += A * 2 * edge_links + C * cloud_links;      // x
    expected += F;                                         // m
    expected += edge_links + cloud_links + ends.size();    // mu_e
    expected += C + 1;                                     // mu_n
    expected += C;                                         // zeta
    expected += C + 1;                                     // node charge
    charged_links.insert(ends.begin(), ends.end());
  }
  expected += C + 1;                                       // eta_n
  expected += edge_links + cloud_links + charged_links.size();  // eta_e
  EXPECT_EQ(m.variables.size(), expected);
  EXPECT_EQ(mps_columns(export_standard_form(m)).size(), expected);
}

TEST(Model, ExportListsEveryRow) {
  const auto b = line_instance();
  const auto m = build_model(b.g, b.aux, b.reqs);
  const auto text = export_standard_form(m, "line");
  EXPECT_EQ(text.rfind("NAME line", 0), 0U);
  for (const auto& r : m.rows) EXPECT_NE(text.find(" " + r.name + "\n"), std::string::npos) << r.name;
  EXPECT_NE(text.find("ENDATA"), std::string::npos);
}

TEST(Verify, CapacityOvershootNamed) {
  const auto b = line_instance();
  const auto m = build_model(b.g, b.aux, b.reqs);
  const auto s = solve_exact(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  const auto cl = *b.g.link_between(b.g.at_id(1), b.g.at_id(999));
  auto bad = s.values;
  bad[m.at(names::etae(b.g, cl))] = 4001;
  const auto rep = verify_solution(m, bad);
  EXPECT_TRUE(rep.mentions(RowFamily::LinkCapacity, names::link(b.g, cl)));

  auto bad_node = s.values;
  bad_node[m.at(names::etan(b.g, b.g.at_id(1)))] = 201;
  EXPECT_TRUE(verify_solution(m, bad_node).mentions(RowFamily::NodeCapacity, "ncap_1"));
}

TEST(Verify, RandomAssignmentsMatchSecondEvaluation) {
  const auto g = fixtures::fig3_graph();
  const auto aux = build_auxiliary_graph(g, g.edges());
  const std::vector<TrainingRoundRequest> reqs{make_request(0, {g.at_id(1000), g.at_id(1001)}, 4, 20)};
  const auto m = build_model(g, aux, reqs);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(m.variables.size());
    for (auto& v : x) v = static_cast<double>(rng() & 1U);
    std::set<std::string> expect;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < m.variables[i].lower || x[i] > m.variables[i].upper) expect.insert(m.variables[i].name);
    for (const auto& r : m.rows) {
      long double lhs = 0;
      for (auto [i, c] : r.terms) lhs += static_cast<long double>(c) * x[i];
      const long double rhs = r.rhs;
      const bool ok = r.sense == RowSense::Le ? lhs <= rhs : r.sense == RowSense::Ge ? lhs >= rhs : lhs == rhs;
      if (!ok) expect.insert(r.name);
    }
    std::set<std::string> got;
    for (const auto& v : verify_solution(m, x).violations) got.insert(v.name);
    EXPECT_EQ(got, expect);
  }
}

TEST(Solve, MatchesOracleOnRandomSmallInstances) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto inst = fixtures::random_small_instance(seed);
    const auto aux = build_auxiliary_graph(inst.graph, inst.graph.edges());
    const auto m = build_model(inst.graph, aux, inst.requests);
    const auto s = solve_exact(m);
    const double oracle = brute_force_oracle(inst.graph, aux, inst.requests);
    if (std::isinf(oracle)) {
      EXPECT_EQ(s.status, SolveStatus::Infeasible) << "seed " << seed;
      continue;
    }
    ASSERT_EQ(s.status, SolveStatus::Optimal) << "seed " << seed;
    EXPECT_DOUBLE_EQ(s.objective, oracle) << "seed " << seed;
    EXPECT_TRUE(verify_solution(m, s).empty()) << "seed " << seed;
  }
}

TEST(Solve, AddingRequestNeverLowersOptimum) {
  const auto g = fixtures::fig3_graph();
  const auto aux = build_auxiliary_graph(g, g.edges());
  std::vector<TrainingRoundRequest> reqs{make_request(0, {g.at_id(1000)}, 4, 20)};
  const auto one = solve_exact(build_model(g, aux, reqs));
  reqs.push_back(make_request(1, {g.at_id(1001)}, 2, 25));
  const auto two = solve_exact(build_model(g, aux, reqs));
  ASSERT_EQ(one.status, SolveStatus::Optimal);
  ASSERT_EQ(two.status, SolveStatus::Optimal);
  EXPECT_GE(two.objective, one.objective);
}

TEST(Solve, Deterministic) {
  const auto inst = fixtures::random_small_instance(11);
  const auto aux = build_auxiliary_graph(inst.graph, inst.graph.edges());
  const auto m = build_model(inst.graph, aux, inst.requests);
  const auto a = solve_exact(m), b = solve_exact(m);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Model, RejectsBadInput) {
  const auto g = fixtures::fig3_graph();
  const auto aux = build_auxiliary_graph(g, g.edges());
  EXPECT_THROW(build_model(g, aux, std::vector<TrainingRoundRequest>{make_request(0, {}, 1, 20)}), ConfigError);
  EXPECT_THROW(build_model(g, aux,
                           std::vector<TrainingRoundRequest>{make_request(0, {g.at_id(1000)}, 1, 20),
                                                             make_request(0, {g.at_id(1001)}, 1, 20)}),
               ConfigError);
  EXPECT_THROW(build_model(g, aux, std::vector<TrainingRoundRequest>{make_request(0, {g.at_id(3)}, 1, 20)}), ConfigError);
}
