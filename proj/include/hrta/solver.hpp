#pragma once

#include <Eigen/Dense>
#include <optional>

#include "hrta/milp.hpp"

namespace hrta {

struct SolverConfig {
  double integrality_tol = 1e-6;
  double lp_tol = 1e-9;
  std::optional<double> time_limit;  // wall-clock seconds
  std::optional<long> node_limit;
  bool deterministic = true;  // cold-start every node LP; fully reproducible
};

enum class SolveStatus { Optimal, Infeasible, TimeLimit, NodeLimit };

const char* solve_status_name(SolveStatus status);

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  Eigen::VectorXd values;  // aligned with problem columns; empty if no incumbent
  double objective = 0.0;
  long nodes_explored = 0;
  double best_bound = 0.0;
  long lp_iterations = 0;
  double solve_seconds = 0.0;
};

/// Exact branch-and-bound over the bounded-simplex relaxation. Best-bound
/// node selection with depth-first tie breaking; branches the most
/// fractional binary (lowest column on ties), child fixing it to 0 first.
/// Disjunctive rows marked lazy in the problem join the relaxation the
/// first time an integral candidate violates them.
MilpSolution solve(const MilpProblem& problem, const SolverConfig& config = {});

}  // namespace hrta
