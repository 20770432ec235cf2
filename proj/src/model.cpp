#include "hrta/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hrta {

namespace {

std::string fmt_issue(const char* what, int i, int k) {
  std::ostringstream os;
  os << what << " at (" << i << "," << k << ")";
  return os.str();
}

void check_matrix_shape(const Eigen::MatrixXd& m, int rows, int cols, const char* name,
                        std::vector<ValidationIssue>& issues) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << m.rows() << "x"
       << m.cols();
    issues.push_back({IssueCode::DimensionMismatch, os.str()});
  }
}

// Kahn topological check; returns the ids of tasks stuck on a cycle, empty if acyclic.
std::vector<int> precedence_cycle(const Eigen::MatrixXi& P) {
  const int m = static_cast<int>(P.rows());
  std::vector<int> indeg(m, 0);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      if (P(i, k) == 1) ++indeg[k];
  std::vector<int> stack;
  for (int i = 0; i < m; ++i)
    if (indeg[i] == 0) stack.push_back(i);
  int seen = 0;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    ++seen;
    for (int k = 0; k < m; ++k) {
      if (P(i, k) == 1 && --indeg[k] == 0) stack.push_back(k);
    }
  }
  std::vector<int> cyc;
  if (seen < m) {
    for (int i = 0; i < m; ++i)
      if (indeg[i] > 0) cyc.push_back(i);
  }
  return cyc;
}

}  // namespace

int Scenario::human_count() const {
  return static_cast<int>(std::count_if(agents.begin(), agents.end(), [](const Agent& a) {
    return a.kind == AgentKind::Human;
  }));
}

std::vector<int> Scenario::human_ids() const {
  std::vector<int> ids;
  for (const Agent& a : agents)
    if (a.kind == AgentKind::Human) ids.push_back(a.id);
  return ids;
}

const char* issue_code_name(IssueCode code) {
  switch (code) {
    case IssueCode::DimensionMismatch: return "DimensionMismatch";
    case IssueCode::InvalidIds: return "InvalidIds";
    case IssueCode::QualityOutOfRange: return "QualityOutOfRange";
    case IssueCode::GroupInconsistency: return "GroupInconsistency";
    case IssueCode::NegativeWorkload: return "NegativeWorkload";
    case IssueCode::AsymmetricSpatialMatrix: return "AsymmetricSpatialMatrix";
    case IssueCode::PrecedenceCycle: return "PrecedenceCycle";
    case IssueCode::BigMTooSmall: return "BigMTooSmall";
    case IssueCode::MissingPosition: return "MissingPosition";
    case IssueCode::TaskInfeasibleForAllAgents: return "TaskInfeasibleForAllAgents";
    case IssueCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Eigen::MatrixXi derive_spatial_conflicts(const std::vector<Eigen::Vector3d>& positions,
                                         double eps) {
  if (eps <= 0.0) throw std::invalid_argument("epsilon must be positive");
  const int m = static_cast<int>(positions.size());
  Eigen::MatrixXi D = Eigen::MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      if ((positions[i] - positions[k]).norm() < eps) {
        D(i, k) = 1;
        D(k, i) = 1;
      }
    }
  }
  return D;
}

HorizonResult compute_horizon(const Eigen::MatrixXd& duration, double big_M) {
  HorizonResult res;
  const double cutoff = big_M * (1.0 - 1e-12);
  double total = 0.0;
  for (int i = 0; i < duration.rows(); ++i) {
    double worst = -1.0;
    for (int j = 0; j < duration.cols(); ++j) {
      const double d = duration(i, j);
      if (d < cutoff) worst = std::max(worst, d);
    }
    if (worst < 0.0) {
      std::ostringstream os;
      os << "task " << i << " has no finite duration for any agent";
      res.issues.push_back({IssueCode::TaskInfeasibleForAllAgents, os.str()});
    } else {
      total += worst;
    }
  }
  if (res.issues.empty()) res.value = total;
  return res;
}

ValidationResult validate_scenario(Scenario raw) {
  ValidationResult result;
  std::vector<ValidationIssue>& issues = result.issues;

  const int m = raw.task_count();
  const int n_a = raw.agent_count();

  if (n_a < 1) issues.push_back({IssueCode::InvalidIds, "at least one agent is required"});
  if (m < 1) issues.push_back({IssueCode::InvalidIds, "at least one task is required"});

  for (int j = 0; j < n_a; ++j) {
    if (raw.agents[j].id != j) {
      std::ostringstream os;
      os << "agent ids must be 0.." << n_a - 1 << " in order; slot " << j << " has id "
         << raw.agents[j].id;
      issues.push_back({IssueCode::InvalidIds, os.str()});
      break;
    }
  }
  for (int i = 0; i < m; ++i) {
    if (raw.tasks[i].id != i) {
      std::ostringstream os;
      os << "task ids must be 0.." << m - 1 << " in order; slot " << i << " has id "
         << raw.tasks[i].id;
      issues.push_back({IssueCode::InvalidIds, os.str()});
      break;
    }
  }
  if (!issues.empty()) return result;

  check_matrix_shape(raw.params.duration, m, n_a, "duration", issues);
  check_matrix_shape(raw.params.exec_quality, m, n_a, "exec_quality", issues);
  check_matrix_shape(raw.params.sup_quality, m, n_a, "sup_quality", issues);
  check_matrix_shape(raw.params.exec_workload, m, n_a, "exec_workload", issues);
  check_matrix_shape(raw.params.sup_workload, m, n_a, "sup_workload", issues);
  if (raw.constraints.precedence.size() == 0)
    raw.constraints.precedence = Eigen::MatrixXi::Zero(m, m);
  if (raw.constraints.precedence.rows() != m || raw.constraints.precedence.cols() != m)
    issues.push_back({IssueCode::DimensionMismatch, "precedence matrix must be m x m"});
  if (!issues.empty()) return result;

  const double M = raw.big_M;
  if (M <= 0.0) issues.push_back({IssueCode::InvalidConfig, "big_M must be positive"});
  if (raw.min_quality <= 0.0 || raw.min_quality > 1.0)
    issues.push_back({IssueCode::InvalidConfig, "min_quality must lie in (0,1]"});

  const double cutoff = M * (1.0 - 1e-12);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n_a; ++j) {
      const double d = raw.params.duration(i, j);
      const double q = raw.params.exec_quality(i, j);
      const double qs = raw.params.sup_quality(i, j);
      const double w = raw.params.exec_workload(i, j);
      const double ws = raw.params.sup_workload(i, j);
      if (d <= 0.0) issues.push_back({IssueCode::InvalidConfig, fmt_issue("duration must be positive", i, j)});
      if (d > M * (1.0 + 1e-12))
        issues.push_back({IssueCode::BigMTooSmall, fmt_issue("duration exceeds big_M", i, j)});
      const bool excluded = d >= cutoff;
      if (!excluded && (q < 0.0 || q > 1.0))
        issues.push_back({IssueCode::QualityOutOfRange, fmt_issue("exec_quality outside [0,1]", i, j)});
      if (qs < 0.0 || qs > 1.0)
        issues.push_back({IssueCode::QualityOutOfRange, fmt_issue("sup_quality outside [0,1]", i, j)});
      if (raw.agents[j].kind == AgentKind::Robot && qs != 0.0)
        issues.push_back({IssueCode::QualityOutOfRange,
                          fmt_issue("sup_quality must be 0 for robot agent", i, j)});
      if (w < 0.0) issues.push_back({IssueCode::NegativeWorkload, fmt_issue("exec_workload negative", i, j)});
      if (ws < 0.0) issues.push_back({IssueCode::NegativeWorkload, fmt_issue("sup_workload negative", i, j)});
      if (w > M * (1.0 + 1e-12))
        issues.push_back({IssueCode::BigMTooSmall, fmt_issue("exec_workload exceeds big_M", i, j)});
    }
  }

  // Same-group tasks share quality columns (execution and supervision).
  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      if (raw.tasks[i].group != raw.tasks[k].group) continue;
      for (int j = 0; j < n_a; ++j) {
        const bool excl_i = raw.params.duration(i, j) >= cutoff;
        const bool excl_k = raw.params.duration(k, j) >= cutoff;
        if (!excl_i && !excl_k &&
            raw.params.exec_quality(i, j) != raw.params.exec_quality(k, j)) {
          std::ostringstream os;
          os << "exec_quality differs within group " << raw.tasks[i].group << " for agent "
             << j << " between tasks " << i << " and " << k;
          issues.push_back({IssueCode::GroupInconsistency, os.str()});
        }
        if (raw.params.sup_quality(i, j) != raw.params.sup_quality(k, j)) {
          std::ostringstream os;
          os << "sup_quality differs within group " << raw.tasks[i].group << " for agent "
             << j << " between tasks " << i << " and " << k;
          issues.push_back({IssueCode::GroupInconsistency, os.str()});
        }
      }
    }
  }

  // Collaborative tasks need two distinct executors with finite durations.
  for (int i = 0; i < m; ++i) {
    int finite = 0;
    for (int j = 0; j < n_a; ++j)
      if (raw.params.duration(i, j) < cutoff) ++finite;
    const int needed = raw.tasks[i].collaborative ? 2 : 1;
    if (finite < needed) {
      std::ostringstream os;
      os << "task " << i << " needs " << needed << " executor(s) but only " << finite
         << " agent(s) have finite duration";
      issues.push_back({IssueCode::TaskInfeasibleForAllAgents, os.str()});
    }
  }

  // Precedence: no self loops, no mutual pairs, acyclic overall.
  const Eigen::MatrixXi& P = raw.constraints.precedence;
  for (int i = 0; i < m; ++i) {
    if (P(i, i) != 0)
      issues.push_back({IssueCode::PrecedenceCycle, fmt_issue("self precedence", i, i)});
    for (int k = i + 1; k < m; ++k) {
      if (P(i, k) == 1 && P(k, i) == 1)
        issues.push_back({IssueCode::PrecedenceCycle, fmt_issue("mutual precedence", i, k)});
    }
  }
  if (issues.empty()) {
    std::vector<int> cyc = precedence_cycle(P);
    if (!cyc.empty()) {
      std::ostringstream os;
      os << "precedence graph has a cycle through tasks:";
      for (int t : cyc) os << " " << t;
      issues.push_back({IssueCode::PrecedenceCycle, os.str()});
    }
  }

  // Spatial matrix: validate if present, derive from positions otherwise.
  if (raw.constraints.spatial.size() != 0) {
    if (raw.constraints.spatial.rows() != m || raw.constraints.spatial.cols() != m) {
      issues.push_back({IssueCode::DimensionMismatch, "spatial matrix must be m x m"});
    } else {
      for (int i = 0; i < m; ++i) {
        raw.constraints.spatial(i, i) = 0;  // a task cannot conflict with itself
        for (int k = i + 1; k < m; ++k) {
          if (raw.constraints.spatial(i, k) != raw.constraints.spatial(k, i))
            issues.push_back(
                {IssueCode::AsymmetricSpatialMatrix, fmt_issue("spatial asymmetry", i, k)});
        }
      }
    }
  } else {
    std::vector<Eigen::Vector3d> pos;
    bool missing = false;
    for (int i = 0; i < m; ++i) {
      if (!raw.tasks[i].position) {
        std::ostringstream os;
        os << "task " << i << " has no position and no spatial matrix was given";
        issues.push_back({IssueCode::MissingPosition, os.str()});
        missing = true;
      } else {
        pos.push_back(*raw.tasks[i].position);
      }
    }
    if (!missing) {
      if (raw.epsilon <= 0.0) {
        issues.push_back(
            {IssueCode::InvalidConfig, "epsilon must be positive to derive spatial conflicts"});
      } else {
        raw.constraints.spatial = derive_spatial_conflicts(pos, raw.epsilon);
      }
    }
  }

  // Horizon: honor an override, otherwise sum of worst finite durations.
  double horizon = 0.0;
  if (raw.horizon) {
    horizon = *raw.horizon;
    if (horizon <= 0.0)
      issues.push_back({IssueCode::InvalidConfig, "horizon override must be positive"});
  } else {
    HorizonResult h = compute_horizon(raw.params.duration, M);
    for (auto& is : h.issues) issues.push_back(is);
    if (h.value) horizon = *h.value;
  }
  if (horizon > 0.0 && M <= horizon) {
    std::ostringstream os;
    os << "big_M (" << M << ") must exceed the horizon T_M (" << horizon << ")";
    issues.push_back({IssueCode::BigMTooSmall, os.str()});
  }

  if (!issues.empty()) return result;

  ValidatedScenario v;
  v.scenario_ = std::move(raw);
  v.scenario_.horizon = horizon;
  v.horizon_ = horizon;
  result.scenario = std::move(v);
  return result;
}

}  // namespace hrta
