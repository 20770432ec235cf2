#include "hrta/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace hrta {

namespace {

std::string fnum(double v, int prec = 2) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

bool overlap(double s1, double e1, double s2, double e2) {
  return s1 < e2 && s2 < e1;  // half-open intervals
}

}  // namespace

const TaskAssignment* Allocation::find(int task_id) const {
  for (const TaskAssignment& t : tasks)
    if (t.task == task_id) return &t;
  return nullptr;
}

const char* violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::AgentCount: return "agent_count";
    case ViolationKind::ExecSupervisionOverlap: return "exec_supervision_overlap";
    case ViolationKind::RobotSupervision: return "robot_supervision";
    case ViolationKind::QualityFloor: return "quality_floor";
    case ViolationKind::DurationFloor: return "duration_floor";
    case ViolationKind::PrecedenceOrder: return "precedence_order";
    case ViolationKind::AgentOverlap: return "agent_overlap";
    case ViolationKind::SpatialOverlap: return "spatial_overlap";
  }
  return "unknown";
}

Allocation decode_solution(const MilpSolution& solution, const MilpProblem& problem,
                           const ValidatedScenario& scenario, double integrality_tol) {
  if (solution.values.size() != problem.column_count())
    throw std::invalid_argument("decode_solution: value vector does not match problem");
  for (int c = 0; c < problem.column_count(); ++c) {
    if (!problem.columns[c].integral) continue;
    const double v = solution.values[c];
    if (std::abs(v - std::round(v)) > integrality_tol) {
      std::ostringstream os;
      os << "column " << problem.column_name(c) << " = " << v << " is not integral";
      throw NonIntegralSolution(os.str());
    }
  }

  Allocation alloc;
  for (int i = 0; i < problem.m; ++i) {
    TaskAssignment ta;
    ta.task = problem.task_ids[i];
    for (int j = 0; j < problem.n_a; ++j)
      if (solution.values[problem.col_x(i, j)] > 0.5) ta.executors.push_back(j);
    for (int h = 0; h < problem.n_h; ++h)
      if (solution.values[problem.col_s(i, h)] > 0.5)
        ta.supervisors.push_back(problem.human_ids[h]);
    ta.start = solution.values[problem.col_tstart(i)];
    ta.end = solution.values[problem.col_tend(i)];
    alloc.makespan = std::max(alloc.makespan, ta.end);
    alloc.tasks.push_back(std::move(ta));
  }
  std::sort(alloc.tasks.begin(), alloc.tasks.end(),
            [](const TaskAssignment& a, const TaskAssignment& b) { return a.task < b.task; });
  alloc.plan_cost = evaluate_cost(alloc, scenario.scenario().params, scenario.horizon()).total;
  return alloc;
}

ViolationReport check_feasibility(const Allocation& allocation,
                                  const ValidatedScenario& validated,
                                  const ParamMatrices& params, double tol) {
  const Scenario& s = validated.scenario();
  ViolationReport report;
  auto add = [&](ViolationKind kind, int i, int k, int j, double mag, std::string msg) {
    report.violations.push_back({kind, i, k, j, mag, std::move(msg)});
  };

  for (const TaskAssignment& t : allocation.tasks) {
    const Task& task = s.tasks[t.task];
    const int expected = task.collaborative ? 2 : 1;
    if (static_cast<int>(t.executors.size()) != expected) {
      std::ostringstream os;
      os << "task " << t.task << " has " << t.executors.size() << " executors, expected "
         << expected;
      add(ViolationKind::AgentCount, t.task, -1, -1,
          std::abs(static_cast<double>(t.executors.size()) - expected), os.str());
    }
    for (int j : t.supervisors) {
      if (s.agents[j].kind != AgentKind::Human) {
        std::ostringstream os;
        os << "task " << t.task << " supervised by non-human agent " << j;
        add(ViolationKind::RobotSupervision, t.task, -1, j, 1.0, os.str());
      }
      if (std::find(t.executors.begin(), t.executors.end(), j) != t.executors.end()) {
        std::ostringstream os;
        os << "agent " << j << " both executes and supervises task " << t.task;
        add(ViolationKind::ExecSupervisionOverlap, t.task, -1, j, 1.0, os.str());
      }
    }

    double quality = 0.0;
    for (int j : t.executors) quality += params.exec_quality(t.task, j);
    for (int j : t.supervisors) quality += params.sup_quality(t.task, j);
    if (quality < s.min_quality - tol) {
      std::ostringstream os;
      os << "task " << t.task << " total quality " << quality << " below floor "
         << s.min_quality;
      add(ViolationKind::QualityFloor, t.task, -1, -1, s.min_quality - quality, os.str());
    }

    for (int j : t.executors) {
      const double d = params.duration(t.task, j);
      const double span = t.end - t.start;
      if (span < d - tol * (1.0 + d)) {
        std::ostringstream os;
        os << "task " << t.task << " interval " << span << " shorter than duration " << d
           << " of agent " << j;
        add(ViolationKind::DurationFloor, t.task, -1, j, d - span, os.str());
      }
    }
  }

  for (const TaskAssignment& a : allocation.tasks) {
    for (const TaskAssignment& b : allocation.tasks) {
      if (s.constraints.precedence(a.task, b.task) == 1 && b.start < a.end - tol) {
        std::ostringstream os;
        os << "task " << b.task << " starts at " << b.start << " before predecessor "
           << a.task << " ends at " << a.end;
        add(ViolationKind::PrecedenceOrder, a.task, b.task, -1, a.end - b.start, os.str());
      }
    }
  }

  // Per-agent disjointness over executed and supervised intervals together.
  for (size_t x = 0; x < allocation.tasks.size(); ++x) {
    for (size_t y = x + 1; y < allocation.tasks.size(); ++y) {
      const TaskAssignment& a = allocation.tasks[x];
      const TaskAssignment& b = allocation.tasks[y];
      if (!overlap(a.start, a.end, b.start, b.end)) continue;
      const double amount = std::min(a.end, b.end) - std::max(a.start, b.start);
      if (amount <= tol) continue;
      auto involved = [](const TaskAssignment& t, int j) {
        return std::find(t.executors.begin(), t.executors.end(), j) != t.executors.end() ||
               std::find(t.supervisors.begin(), t.supervisors.end(), j) !=
                   t.supervisors.end();
      };
      for (int j = 0; j < s.agent_count(); ++j) {
        if (involved(a, j) && involved(b, j)) {
          std::ostringstream os;
          os << "agent " << j << " busy on overlapping tasks " << a.task << " ["
             << a.start << "," << a.end << ") and " << b.task << " [" << b.start << ","
             << b.end << ")";
          add(ViolationKind::AgentOverlap, a.task, b.task, j, amount, os.str());
        }
      }
      if (s.constraints.spatial(a.task, b.task) == 1) {
        std::ostringstream os;
        os << "spatially conflicting tasks " << a.task << " and " << b.task
           << " overlap in time";
        add(ViolationKind::SpatialOverlap, a.task, b.task, -1, amount, os.str());
      }
    }
  }

  return report;
}

CostBreakdown evaluate_cost(const Allocation& allocation, const ParamMatrices& params,
                            double horizon) {
  CostBreakdown cost;
  double latest = 0.0;
  for (const TaskAssignment& t : allocation.tasks) {
    latest = std::max(latest, t.end);
    for (int j : t.executors) {
      cost.quality_sum += params.exec_quality(t.task, j);
      cost.workload_sum += params.exec_workload(t.task, j);
    }
    for (int j : t.supervisors) {
      cost.quality_sum += params.sup_quality(t.task, j);
      cost.workload_sum += params.sup_workload(t.task, j);
    }
  }
  cost.makespan_term = allocation.tasks.empty() ? 0.0 : latest / horizon;
  cost.total = cost.makespan_term - cost.quality_sum + cost.workload_sum;
  return cost;
}

namespace {

std::string render_text(const Allocation& alloc, const Scenario& s) {
  constexpr int kWidth = 96;
  const double span = std::max(alloc.makespan, 1e-9);
  std::ostringstream os;
  os << "makespan " << fnum(alloc.makespan) << " s, scale " << fnum(span / kWidth, 3)
     << " s/col ('#' execute, '/' supervise)\n";
  for (int j = 0; j < s.agent_count(); ++j) {
    std::string lane(kWidth, '.');
    for (const TaskAssignment& t : alloc.tasks) {
      const bool exec =
          std::find(t.executors.begin(), t.executors.end(), j) != t.executors.end();
      const bool sup =
          std::find(t.supervisors.begin(), t.supervisors.end(), j) != t.supervisors.end();
      if (!exec && !sup) continue;
      int c0 = static_cast<int>(std::floor(t.start / span * kWidth));
      int c1 = static_cast<int>(std::ceil(t.end / span * kWidth));
      c0 = std::clamp(c0, 0, kWidth - 1);
      c1 = std::clamp(c1, c0 + 1, kWidth);
      for (int c = c0; c < c1; ++c) lane[c] = exec ? '#' : '/';
    }
    std::string name = s.agents[j].label.empty()
                           ? (s.agents[j].kind == AgentKind::Human ? "human" : "robot") +
                                 std::string(" ") + std::to_string(j)
                           : s.agents[j].label;
    name.resize(12, ' ');
    os << name << " |" << lane << "|\n";
  }
  os << "tasks:\n";
  for (const TaskAssignment& t : alloc.tasks) {
    os << "  t" << t.task << "  [" << fnum(t.start) << ", " << fnum(t.end) << ")  exec";
    for (int j : t.executors) os << " a" << j;
    if (!t.supervisors.empty()) {
      os << "  sup";
      for (int j : t.supervisors) os << " a" << j;
    }
    os << "\n";
  }
  return os.str();
}

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string render_svg(const Allocation& alloc, const Scenario& s) {
  const int lane_h = 32, left = 90, top = 24;
  const int plot_w = 820;
  const int n_a = s.agent_count();
  const int height = top + lane_h * n_a + 40;
  const double span = std::max(alloc.makespan, 1e-9);
  const double scale = plot_w / span;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + plot_w + 20
     << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  for (int j = 0; j < n_a; ++j) {
    const int y = top + j * lane_h;
    os << "<line x1=\"" << left << "\" y1=\"" << y + lane_h << "\" x2=\"" << left + plot_w
       << "\" y2=\"" << y + lane_h << "\" stroke=\"#ddd\"/>\n";
    std::string name = s.agents[j].label.empty() ? "a" + std::to_string(j) : s.agents[j].label;
    os << "<text x=\"8\" y=\"" << y + lane_h / 2 + 4 << "\">" << name << "</text>\n";
  }
  for (const TaskAssignment& t : alloc.tasks) {
    const char* color = kPalette[t.task % 10];
    const double x = left + t.start * scale;
    const double w = std::max((t.end - t.start) * scale, 1.0);
    for (int j : t.executors) {
      const int y = top + j * lane_h + 4;
      os << "<rect x=\"" << fnum(x) << "\" y=\"" << y << "\" width=\"" << fnum(w)
         << "\" height=\"" << lane_h - 8 << "\" fill=\"" << color
         << "\" stroke=\"#333\"/>\n";
      os << "<text x=\"" << fnum(x + 3) << "\" y=\"" << y + 14 << "\" fill=\"#fff\">t"
         << t.task << "</text>\n";
    }
    for (int j : t.supervisors) {
      const int y = top + j * lane_h + 4;
      os << "<rect x=\"" << fnum(x) << "\" y=\"" << y << "\" width=\"" << fnum(w)
         << "\" height=\"" << lane_h - 8 << "\" fill=\"" << color
         << "\" fill-opacity=\"0.25\" stroke=\"" << color
         << "\" stroke-dasharray=\"5,3\"/>\n";
      os << "<text x=\"" << fnum(x + 3) << "\" y=\"" << y + 14 << "\" fill=\"" << color
         << "\">t" << t.task << " sup</text>\n";
    }
  }
  // time axis ticks
  const int y_axis = top + n_a * lane_h;
  for (int tick = 0; tick <= 8; ++tick) {
    const double tv = span * tick / 8.0;
    const double x = left + tv * scale;
    os << "<line x1=\"" << fnum(x) << "\" y1=\"" << y_axis << "\" x2=\"" << fnum(x)
       << "\" y2=\"" << y_axis + 5 << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << fnum(x - 10) << "\" y=\"" << y_axis + 18 << "\">" << fnum(tv, 1)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string render_gantt(const Allocation& allocation, const ValidatedScenario& scenario,
                         GanttFormat format) {
  if (format == GanttFormat::Text) return render_text(allocation, scenario.scenario());
  return render_svg(allocation, scenario.scenario());
}

std::string allocation_json(const Allocation& alloc, const CostBreakdown& cost,
                            const MilpSolution& sol) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["status"] = solve_status_name(sol.status);
  j["objective"] = sol.objective;
  j["makespan"] = alloc.makespan;
  j["cost"] = {{"makespan_term", cost.makespan_term},
               {"quality_sum", cost.quality_sum},
               {"workload_sum", cost.workload_sum},
               {"total", cost.total}};
  j["assignments"] = nlohmann::json::array();
  for (const TaskAssignment& t : alloc.tasks) {
    j["assignments"].push_back({{"task", t.task},
                                {"executors", t.executors},
                                {"supervisors", t.supervisors},
                                {"start", t.start},
                                {"end", t.end}});
  }
  j["solver"] = {{"nodes", sol.nodes_explored},
                 {"best_bound", sol.best_bound},
                 {"lp_iterations", sol.lp_iterations}};
  return j.dump(2) + "\n";
}

}  // namespace hrta
