#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace hrta {

enum class AgentKind { Human, Robot };

struct Agent {
  int id = 0;
  AgentKind kind = AgentKind::Robot;
  std::string label;
};

struct Task {
  int id = 0;
  int group = 0;
  bool collaborative = false;
  std::optional<Eigen::Vector3d> position;
};

/// Per-(task, agent) parameter estimates. All matrices are m x n_a.
/// A cell equal to the scenario big-M marks the pairing as excluded
/// (duration) or prohibitively costly (workload).
struct ParamMatrices {
  Eigen::MatrixXd duration;       // seconds, or M sentinel
  Eigen::MatrixXd exec_quality;   // in [0,1]
  Eigen::MatrixXd sup_quality;    // in [0,1], zero for robots
  Eigen::MatrixXd exec_workload;  // >= 0, or M sentinel
  Eigen::MatrixXd sup_workload;   // >= 0, or M sentinel
};

struct ConstraintMatrices {
  Eigen::MatrixXi precedence;  // P[i][k] = 1: task i must end before k starts
  Eigen::MatrixXi spatial;     // D[i][k] = 1: tasks i,k may not overlap in time
};

struct Scenario {
  std::vector<Agent> agents;
  std::vector<Task> tasks;
  ParamMatrices params;
  ConstraintMatrices constraints;  // spatial may be empty (derived from positions)
  double min_quality = 0.8;
  double big_M = 1000.0;
  double epsilon = 0.0;            // spatial proximity threshold, meters
  std::optional<double> horizon;   // T_M override, seconds

  int task_count() const { return static_cast<int>(tasks.size()); }
  int agent_count() const { return static_cast<int>(agents.size()); }
  int human_count() const;
  /// Agent ids of the human agents, ascending.
  std::vector<int> human_ids() const;
  bool is_sentinel(double v) const { return v >= big_M * (1.0 - 1e-12); }
};

enum class IssueCode {
  DimensionMismatch,
  InvalidIds,
  QualityOutOfRange,
  GroupInconsistency,
  NegativeWorkload,
  AsymmetricSpatialMatrix,
  PrecedenceCycle,
  BigMTooSmall,
  MissingPosition,
  TaskInfeasibleForAllAgents,
  InvalidConfig,
};

const char* issue_code_name(IssueCode code);

struct ValidationIssue {
  IssueCode code;
  std::string message;  // names the invariant and the offending indices
};

struct ValidationResult;

/// A scenario whose invariants have been checked, with the spatial matrix
/// derived (when absent) and the horizon resolved.
class ValidatedScenario {
 public:
  const Scenario& scenario() const { return scenario_; }
  double horizon() const { return horizon_; }

 private:
  friend ValidationResult validate_scenario(Scenario raw);
  Scenario scenario_;
  double horizon_ = 0.0;
};

struct ValidationResult {
  std::optional<ValidatedScenario> scenario;
  std::vector<ValidationIssue> issues;
  bool ok() const { return scenario.has_value(); }
};

/// Checks every structural invariant, derives the spatial-conflict matrix
/// from task positions when none is given, and fills in the horizon T_M.
/// On failure returns the full list of violations instead of a scenario.
ValidationResult validate_scenario(Scenario raw);

/// D[i][k] = 1 iff i != k and ||p_i - p_k|| < eps (strict, Euclidean).
/// Throws std::invalid_argument if eps <= 0.
Eigen::MatrixXi derive_spatial_conflicts(const std::vector<Eigen::Vector3d>& positions,
                                         double eps);

/// T_M = sum over tasks of the worst finite duration across agents.
/// Returns an issue if some task has no finite duration at all.
struct HorizonResult {
  std::optional<double> value;
  std::vector<ValidationIssue> issues;
};
HorizonResult compute_horizon(const Eigen::MatrixXd& duration, double big_M);

}  // namespace hrta
