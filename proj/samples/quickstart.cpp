// SPDX-License-Identifier: Apache-2.0
//
// Simulate 300 training rounds on the medium topology with both heuristics
// and print the run summaries as CSV.

#include <iostream>

#include "fedagg/engine.hpp"
#include "fedagg/metrics.hpp"

int main() {
  using namespace fedagg;
  const PhysicalGraph g = builtin_topology("medium");
  std::vector<RunSummary> rows;
  for (Strategy s : {Strategy::Hfel, Strategy::HfelMesh}) {
    SimConfig cfg;
    cfg.workload.lambda = 0.00085;
    cfg.workload.horizon_requests = 300;
    cfg.workload.seed = 7;
    cfg.allocator.strategy = s;
    const ResultsLog log = run(g, cfg);
    rows.push_back(summarize(log, "medium"));
  }
  std::cout << to_csv(rows);
  return rows.size() == 2 ? 0 : 1;
}
