// SPDX-License-Identifier: Apache-2.0
//
// Two requests on the medium topology: exact optimum, a check of every
// constraint, and the model written out in MPS form for an external solver.

#include <fstream>
#include <iostream>

#include "fedagg/compare.hpp"
#include "fedagg/ilp.hpp"

int main(int argc, char** argv) {
  using namespace fedagg;
  const PhysicalGraph g = builtin_topology("medium");
  const auto reqs = static_batch(g, 2, 6, 11);
  const auto aux = build_auxiliary_graph(g, g.edges());
  const auto model = build_model(g, aux, reqs);
  const auto sol = solve_exact(model);
  const auto report = verify_solution(model, sol);
  std::cout << to_string(sol.status) << " objective " << sol.objective << ", " << report.violations.size()
            << " violated constraints\n";
  if (argc > 1) {
    std::ofstream(argv[1]) << export_standard_form(model, "crosscheck");
    std::cout << "model written to " << argv[1] << "\n";
  }
  std::cout << compare_methods(g, reqs).to_text();
  return sol.status == SolveStatus::Optimal && report.empty() ? 0 : 1;
}
