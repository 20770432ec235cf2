#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hrta/replan.hpp"
#include "hrta/schedule.hpp"
#include "hrta/solver.hpp"

namespace hrta {

struct NoiseConfig {
  double quality_sigma = 0.1;
  double duration_sigma = 0.02;        // relative: duration *= 1 + N(0, sigma^2)
  double workload_sigma = 0.1;
  double initial_quality_sigma = 0.2;  // draw initial qualities around the floor; 0 keeps
                                       // the scenario's nominal values
  double intervention_probability = 0.5;
  bool feasibility_guard = true;
};

enum class Policy { Static, ReplanEnabled };

struct ReplanRecord {
  int after_completion = 0;  // 1-based count of completed tasks when it fired
  double at_time = 0.0;
  std::vector<ReplanReason> reasons;
  double delta = 0.0;
};

struct ExecutionTrace {
  bool completed = false;  // false when a solve came back infeasible (guard off)
  std::vector<TaskOutcome> outcomes;  // completion order
  std::vector<double> deltas;         // one entry per completed task
  std::vector<ReplanRecord> replans;
  CostBreakdown realized;
  Allocation initial_plan;
  std::vector<TaskAssignment> realized_tasks;  // realized times, ascending task id
  double solver_seconds = 0.0;
  long solver_nodes = 0;
};

/// Perturbs the planned outcome of one task start. The credited quality is
/// the supervisor's when the (sampled) intervention happens, the executors'
/// summed execution quality otherwise. With the feasibility guard on, the
/// quality sample is re-drawn (bounded retries, then clamped up from the
/// floor) until `guard` accepts the outcome.
TaskOutcome sample_outcome(const TaskAssignment& assignment, const ValidatedScenario& scenario,
                           const ParamMatrices& belief, const NoiseConfig& noise,
                           std::mt19937_64& rng,
                           const std::function<bool(const TaskOutcome&)>& guard = {});

ExecutionTrace run_execution(const ValidatedScenario& scenario, const NoiseConfig& noise,
                             uint64_t seed, Policy policy,
                             const ReplanConfig& replan_cfg = {},
                             const SolverConfig& solver_cfg = {});

struct PolicyStats {
  std::vector<double> delta_mean;  // per completion index
  std::vector<double> delta_std;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  double mean_replans = 0.0;
  std::vector<double> trial_costs;
  std::vector<int> trial_replans;
  std::vector<std::vector<double>> trial_deltas;
};

struct CampaignReport {
  int trials = 0;
  uint64_t seed_base = 0;
  int task_count = 0;
  NoiseConfig noise;
  double delta_threshold = 0.15;
  PolicyStats replan;
  PolicyStats fixed;  // static allocation, no re-planning
};

/// Runs both policies on identical per-trial seeds (seed_base + trial) and
/// aggregates per-completion-index delta statistics and realized costs.
CampaignReport run_campaign(const ValidatedScenario& scenario, const NoiseConfig& noise,
                            int trials, uint64_t seed_base,
                            const ReplanConfig& replan_cfg = {},
                            const SolverConfig& solver_cfg = {});

std::string campaign_report_json(const CampaignReport& report);
std::string campaign_report_csv(const CampaignReport& report);
std::string execution_trace_json(const ExecutionTrace& trace);

/// Newline-delimited JSON log of task outcomes, and its reader.
std::string outcome_log_ndjson(const std::vector<TaskOutcome>& outcomes);
std::vector<TaskOutcome> parse_outcome_log(const std::string& ndjson);

/// Re-runs the monitoring/delta pipeline over a recorded outcome log
/// against a fresh solve of the scenario. No re-planning is performed;
/// remaining tasks after the k-th record are the not-yet-completed ones.
struct ReplayResult {
  std::vector<double> deltas;
  Allocation plan;
};
ReplayResult replay_outcomes(const ValidatedScenario& scenario,
                             const std::vector<TaskOutcome>& outcomes,
                             const SolverConfig& solver_cfg = {});

}  // namespace hrta
