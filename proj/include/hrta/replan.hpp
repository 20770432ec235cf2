#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "hrta/milp.hpp"
#include "hrta/model.hpp"
#include "hrta/schedule.hpp"

namespace hrta {

/// Current best estimates of every task/agent parameter, revised after
/// each task completion. Group-consistent by construction: a quality
/// update always rewrites the whole group column of the touched agent.
struct Belief {
  ParamMatrices params;

  static Belief from_scenario(const Scenario& s) { return Belief{s.params}; }
};

struct TaskOutcome {
  int task = -1;
  double measured_quality = 0.0;   // [0,1]
  double measured_duration = 0.0;  // seconds, length of the realized interval
  std::map<int, double> measured_exec_workload;  // per executing agent
  std::map<int, double> measured_sup_workload;   // per supervising agent
  bool supervised = false;
  bool intervened = false;  // meaningful only when supervised
};

struct ReplanConfig {
  double delta_threshold = 0.15;
};

struct UnknownTask : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AgentNotInvolved : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyRemainingSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Post-completion monitoring update:
///  - unsupervised (or supervised without intervention): the measured
///    quality becomes the executors' execution quality, split evenly
///    between the executors of a collaborative task;
///  - supervised with intervention: the measured quality becomes the
///    supervisor's supervision quality, executors untouched;
///  - durations and workloads of the involved agents take the measured
///    values, and same-group cells of the same agent scale by the same
///    measured/nominal ratio.
/// Qualities are clamped to [0,1]; only involved agents are modified.
Belief update_parameters(Belief belief, const TaskOutcome& outcome,
                         const Allocation& allocation, const ValidatedScenario& scenario);

/// Relative change |C_hat - C| / |C_hat| of the remaining-task cost when
/// re-evaluated under updated parameters. Re-estimated durations shift the
/// planned end times forward along each agent's chain before the updated
/// makespan term is taken. Returns +inf when C_hat is 0 but C is not.
double compute_delta(const ParamMatrices& at_planning, const ParamMatrices& updated,
                     const Allocation& allocation, const std::vector<int>& remaining_tasks,
                     double horizon);

enum class ReplanReason { FeasibilityViolated, DeltaExceeded, NewBatch, ResourceChange };

const char* replan_reason_name(ReplanReason reason);

struct ReplanEvents {
  bool new_batch = false;
  bool resource_change = false;
};

struct ReplanDecision {
  bool replan = false;
  std::vector<ReplanReason> reasons;  // feasibility first
};

ReplanDecision should_replan(const ParamMatrices& updated, const Allocation& allocation,
                             const std::vector<int>& remaining_tasks, double delta,
                             const ReplanConfig& config, const ValidatedScenario& scenario,
                             const ReplanEvents& events = {});

/// Restricted MILP over the remaining tasks under the updated belief.
/// Start times are floored at `now`; an agent still busy releases its next
/// assignment at its release time; precedence pairs whose predecessor is
/// done are dropped, while a predecessor still running floors the
/// successor's start at its expected end (pending_predecessor_end).
/// T_M is kept from the original plan so cost normalization is comparable.
MilpProblem build_replan_problem(const ValidatedScenario& scenario,
                                 const ParamMatrices& belief,
                                 const std::vector<int>& remaining_tasks,
                                 const std::vector<double>& agent_release_times, double now,
                                 const std::map<int, double>& pending_predecessor_end = {});

}  // namespace hrta
