#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hrta/model.hpp"
#include "hrta/solver.hpp"

namespace hrta {

struct TaskAssignment {
  int task = -1;                 // scenario task id
  std::vector<int> executors;    // 1 + C_i agent ids, ascending
  std::vector<int> supervisors;  // human agent ids, ascending (usually 0 or 1)
  double start = 0.0;
  double end = 0.0;
};

struct CostBreakdown {
  double makespan_term = 0.0;  // (max_i t_end) / T_M
  double quality_sum = 0.0;
  double workload_sum = 0.0;
  double total = 0.0;          // makespan_term - quality_sum + workload_sum
};

struct Allocation {
  std::vector<TaskAssignment> tasks;  // ascending task id
  double makespan = 0.0;
  double plan_cost = 0.0;

  const TaskAssignment* find(int task_id) const;
};

struct NonIntegralSolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rounds binaries at 0.5 and extracts executors, supervisors and times.
/// Throws NonIntegralSolution if any binary sits farther than
/// integrality_tol from {0, 1}. The problem supplies the column layout and
/// the task-id mapping (re-planning problems cover a subset of tasks).
Allocation decode_solution(const MilpSolution& solution, const MilpProblem& problem,
                           const ValidatedScenario& scenario,
                           double integrality_tol = 1e-6);

enum class ViolationKind {
  AgentCount,
  ExecSupervisionOverlap,
  RobotSupervision,
  QualityFloor,
  DurationFloor,
  PrecedenceOrder,
  AgentOverlap,
  SpatialOverlap,
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int i = -1;  // task
  int k = -1;  // second task, where applicable
  int j = -1;  // agent, where applicable
  double magnitude = 0.0;
  std::string message;
};

struct ViolationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Re-checks every constraint family of the formulation directly on the
/// decoded allocation, independently of the MILP rows. Intervals are
/// half-open: back-to-back tasks do not overlap. params lets the caller
/// check against belief values instead of the scenario's nominal ones.
ViolationReport check_feasibility(const Allocation& allocation,
                                  const ValidatedScenario& scenario,
                                  const ParamMatrices& params, double tol = 1e-6);

CostBreakdown evaluate_cost(const Allocation& allocation, const ParamMatrices& params,
                            double horizon);

enum class GanttFormat { Text, Svg };

/// One lane per agent; execution bars solid, supervision bars dashed
/// (text: '#' vs '/'). Output is a pure function of its inputs.
std::string render_gantt(const Allocation& allocation, const ValidatedScenario& scenario,
                         GanttFormat format);

/// Schema-versioned allocation report (assignments, supervisions, times,
/// cost breakdown, solver stats); the CLI writes exactly these bytes.
std::string allocation_json(const Allocation& allocation, const CostBreakdown& cost,
                            const MilpSolution& solution);

}  // namespace hrta
