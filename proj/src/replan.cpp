#include "hrta/replan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hrta {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Rewrites agent j's quality column for every task in `group`.
void set_group_quality(Eigen::MatrixXd& q, const Scenario& s, int group, int j, double value) {
  for (int i = 0; i < s.task_count(); ++i)
    if (s.tasks[i].group == group) q(i, j) = value;
}

void scale_group(Eigen::MatrixXd& mtx, const Scenario& s, int group, int j, double ratio) {
  const double cutoff = s.big_M * (1.0 - 1e-12);
  for (int i = 0; i < s.task_count(); ++i) {
    if (s.tasks[i].group != group) continue;
    if (mtx(i, j) >= cutoff) continue;  // sentinels stay sentinels
    mtx(i, j) *= ratio;
  }
}

}  // namespace

const char* replan_reason_name(ReplanReason reason) {
  switch (reason) {
    case ReplanReason::FeasibilityViolated: return "feasibility_violated";
    case ReplanReason::DeltaExceeded: return "delta_exceeded";
    case ReplanReason::NewBatch: return "new_batch";
    case ReplanReason::ResourceChange: return "resource_change";
  }
  return "unknown";
}

Belief update_parameters(Belief belief, const TaskOutcome& outcome,
                         const Allocation& allocation, const ValidatedScenario& validated) {
  const Scenario& s = validated.scenario();
  const TaskAssignment* assign = allocation.find(outcome.task);
  if (!assign) {
    std::ostringstream os;
    os << "outcome refers to task " << outcome.task << " absent from the allocation";
    throw UnknownTask(os.str());
  }
  auto involved = [&](int j) {
    return std::find(assign->executors.begin(), assign->executors.end(), j) !=
               assign->executors.end() ||
           std::find(assign->supervisors.begin(), assign->supervisors.end(), j) !=
               assign->supervisors.end();
  };
  for (const auto& [j, w] : outcome.measured_exec_workload) {
    (void)w;
    if (std::find(assign->executors.begin(), assign->executors.end(), j) ==
        assign->executors.end()) {
      std::ostringstream os;
      os << "measured execution workload for agent " << j << " not executing task "
         << outcome.task;
      throw AgentNotInvolved(os.str());
    }
  }
  for (const auto& [j, w] : outcome.measured_sup_workload) {
    (void)w;
    if (std::find(assign->supervisors.begin(), assign->supervisors.end(), j) ==
        assign->supervisors.end()) {
      std::ostringstream os;
      os << "measured supervision workload for agent " << j << " not supervising task "
         << outcome.task;
      throw AgentNotInvolved(os.str());
    }
  }
  (void)involved;

  const int group = s.tasks[outcome.task].group;
  ParamMatrices& p = belief.params;

  // Quality attribution.
  if (outcome.supervised && outcome.intervened) {
    for (int j : assign->supervisors)
      set_group_quality(p.sup_quality, s, group, j, clamp01(outcome.measured_quality));
  } else {
    const double share =
        outcome.measured_quality / std::max<size_t>(assign->executors.size(), 1);
    for (int j : assign->executors)
      set_group_quality(p.exec_quality, s, group, j, clamp01(share));
  }

  // Durations: the realized interval belongs to the executing agents.
  const double cutoff = s.big_M * (1.0 - 1e-12);
  if (outcome.measured_duration > 0.0) {
    for (int j : assign->executors) {
      const double nominal = p.duration(outcome.task, j);
      if (nominal <= 0.0 || nominal >= cutoff) continue;
      scale_group(p.duration, s, group, j, outcome.measured_duration / nominal);
    }
  }

  // Workloads: measured values for this task, proportional for the group.
  for (const auto& [j, w] : outcome.measured_exec_workload) {
    const double nominal = p.exec_workload(outcome.task, j);
    if (nominal > 0.0 && nominal < cutoff) {
      scale_group(p.exec_workload, s, group, j, w / nominal);
    } else if (nominal == 0.0) {
      p.exec_workload(outcome.task, j) = w;
    }
  }
  for (const auto& [j, w] : outcome.measured_sup_workload) {
    const double nominal = p.sup_workload(outcome.task, j);
    if (nominal > 0.0 && nominal < cutoff) {
      scale_group(p.sup_workload, s, group, j, w / nominal);
    } else if (nominal == 0.0) {
      p.sup_workload(outcome.task, j) = w;
    }
  }

  return belief;
}

namespace {

struct RemainingCost {
  double makespan_term = 0.0;
  double total = 0.0;
};

// Cost of the remaining tasks' planned assignments under `par`. When
// durations differ from plan, ends are re-estimated by shifting each
// involved agent's chain forward in planned start order.
RemainingCost remaining_cost(const ParamMatrices& plan_par, const ParamMatrices& par,
                             const Allocation& alloc, const std::vector<int>& remaining,
                             double horizon, bool shift) {
  RemainingCost out;
  if (remaining.empty()) return out;

  std::vector<const TaskAssignment*> tasks;
  tasks.reserve(remaining.size());
  for (int id : remaining) {
    const TaskAssignment* t = alloc.find(id);
    if (!t) {
      std::ostringstream os;
      os << "remaining task " << id << " absent from the allocation";
      throw UnknownTask(os.str());
    }
    tasks.push_back(t);
  }
  std::sort(tasks.begin(), tasks.end(), [](const TaskAssignment* a, const TaskAssignment* b) {
    if (a->start != b->start) return a->start < b->start;
    return a->task < b->task;
  });

  std::map<int, double> avail;
  double latest = 0.0;
  double qual = 0.0, work = 0.0;
  for (const TaskAssignment* t : tasks) {
    double end = t->end;
    if (shift) {
      double plan_dur = 0.0, new_dur = 0.0;
      for (int j : t->executors) {
        plan_dur = std::max(plan_dur, plan_par.duration(t->task, j));
        new_dur = std::max(new_dur, par.duration(t->task, j));
      }
      const double planned_span = t->end - t->start;
      const double span = plan_dur > 0.0 ? planned_span * (new_dur / plan_dur) : planned_span;
      double start = t->start;
      for (int j : t->executors) start = std::max(start, avail.count(j) ? avail[j] : 0.0);
      for (int j : t->supervisors) start = std::max(start, avail.count(j) ? avail[j] : 0.0);
      end = start + span;
      for (int j : t->executors) avail[j] = end;
      for (int j : t->supervisors) avail[j] = end;
    }
    latest = std::max(latest, end);
    for (int j : t->executors) {
      qual += par.exec_quality(t->task, j);
      work += par.exec_workload(t->task, j);
    }
    for (int j : t->supervisors) {
      qual += par.sup_quality(t->task, j);
      work += par.sup_workload(t->task, j);
    }
  }
  out.makespan_term = latest / horizon;
  out.total = out.makespan_term - qual + work;
  return out;
}

}  // namespace

double compute_delta(const ParamMatrices& at_planning, const ParamMatrices& updated,
                     const Allocation& allocation, const std::vector<int>& remaining_tasks,
                     double horizon) {
  if (remaining_tasks.empty()) return 0.0;
  const double c_hat =
      remaining_cost(at_planning, at_planning, allocation, remaining_tasks, horizon, false)
          .total;
  const double c_new =
      remaining_cost(at_planning, updated, allocation, remaining_tasks, horizon, true).total;
  if (c_hat == 0.0)
    return c_new == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(c_hat - c_new) / std::abs(c_hat);
}

ReplanDecision should_replan(const ParamMatrices& updated, const Allocation& allocation,
                             const std::vector<int>& remaining_tasks, double delta,
                             const ReplanConfig& config, const ValidatedScenario& scenario,
                             const ReplanEvents& events) {
  ReplanDecision decision;
  const Scenario& s = scenario.scenario();
  const double cutoff = s.big_M * (1.0 - 1e-12);

  bool infeasible = false;
  const double qtol = 1e-9;
  for (int id : remaining_tasks) {
    const TaskAssignment* t = allocation.find(id);
    if (!t) continue;
    double quality = 0.0;
    for (int j : t->executors) {
      quality += updated.exec_quality(id, j);
      if (updated.duration(id, j) >= cutoff) infeasible = true;  // executor now excluded
    }
    for (int j : t->supervisors) quality += updated.sup_quality(id, j);
    if (quality < s.min_quality - qtol) infeasible = true;
  }

  if (infeasible) decision.reasons.push_back(ReplanReason::FeasibilityViolated);
  if (delta > config.delta_threshold) decision.reasons.push_back(ReplanReason::DeltaExceeded);
  if (events.new_batch) decision.reasons.push_back(ReplanReason::NewBatch);
  if (events.resource_change) decision.reasons.push_back(ReplanReason::ResourceChange);
  decision.replan = !decision.reasons.empty();
  return decision;
}

MilpProblem build_replan_problem(const ValidatedScenario& scenario,
                                 const ParamMatrices& belief,
                                 const std::vector<int>& remaining_tasks,
                                 const std::vector<double>& agent_release_times, double now,
                                 const std::map<int, double>& pending_predecessor_end) {
  if (remaining_tasks.empty())
    throw EmptyRemainingSet("build_replan_problem: no remaining tasks");

  BuildOptions opts;
  opts.params = &belief;
  opts.tasks = remaining_tasks;
  opts.start_floor = std::max(now, 0.0);
  opts.agent_release = agent_release_times;

  const Scenario& s = scenario.scenario();
  opts.predecessor_floor.assign(s.task_count(), 0.0);
  auto in_remaining = [&](int id) {
    return std::find(remaining_tasks.begin(), remaining_tasks.end(), id) !=
           remaining_tasks.end();
  };
  for (const auto& [pred, end] : pending_predecessor_end) {
    if (in_remaining(pred)) continue;
    for (int k = 0; k < s.task_count(); ++k) {
      if (s.constraints.precedence(pred, k) == 1 && in_remaining(k))
        opts.predecessor_floor[k] = std::max(opts.predecessor_floor[k], end);
    }
  }

  return build_milp(scenario, opts);
}

}  // namespace hrta
