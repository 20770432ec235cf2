#include "hrta/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hrta {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double draw_normal(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(rng);
}

/// Best achievable total quality for one task under the given estimates,
/// over executor sets of the required size and any supervisor subset.
double best_achievable_quality(const Scenario& s, const ParamMatrices& par, int task) {
  const double cutoff = s.big_M * (1.0 - 1e-12);
  const int n_a = s.agent_count();
  std::vector<int> feasible;
  for (int j = 0; j < n_a; ++j)
    if (par.duration(task, j) < cutoff) feasible.push_back(j);
  const int need = s.tasks[task].collaborative ? 2 : 1;
  double best = -kInf;
  std::vector<int> execs;
  std::function<void(size_t)> rec = [&](size_t from) {
    if (static_cast<int>(execs.size()) == need) {
      double q = 0.0;
      for (int j : execs) q += par.exec_quality(task, j);
      for (const Agent& a : s.agents) {
        if (a.kind != AgentKind::Human) continue;
        if (std::find(execs.begin(), execs.end(), a.id) != execs.end()) continue;
        q += std::max(0.0, par.sup_quality(task, a.id));
      }
      best = std::max(best, q);
      return;
    }
    for (size_t t = from; t < feasible.size(); ++t) {
      execs.push_back(feasible[t]);
      rec(t + 1);
      execs.pop_back();
    }
  };
  rec(0);
  return best;
}

void set_group_column(Eigen::MatrixXd& mtx, const Scenario& s, int group, int j, double v) {
  for (int i = 0; i < s.task_count(); ++i)
    if (s.tasks[i].group == group) mtx(i, j) = v;
}

void randomize_initial_qualities(Belief& belief, const ValidatedScenario& validated,
                                 const NoiseConfig& noise, std::mt19937_64& rng) {
  const Scenario& s = validated.scenario();
  std::set<int> group_set;
  for (const Task& t : s.tasks) group_set.insert(t.group);
  const std::vector<int> groups(group_set.begin(), group_set.end());

  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int g : groups)
      for (int j = 0; j < s.agent_count(); ++j)
        set_group_column(belief.params.exec_quality, s, g, j,
                         clamp01(s.min_quality + draw_normal(rng, noise.initial_quality_sigma)));
    for (int g : groups)
      for (const Agent& a : s.agents) {
        if (a.kind != AgentKind::Human) continue;
        set_group_column(belief.params.sup_quality, s, g, a.id,
                         clamp01(s.min_quality + draw_normal(rng, noise.initial_quality_sigma)));
      }
    if (!noise.feasibility_guard) return;
    bool ok = true;
    for (int i = 0; i < s.task_count() && ok; ++i)
      ok = best_achievable_quality(s, belief.params, i) >= s.min_quality - 1e-9;
    if (ok) return;
  }

  // Out of retries: lift the first human's supervision quality (or, with no
  // human, the first capable agent's execution quality) to the floor.
  const double cutoff = s.big_M * (1.0 - 1e-12);
  for (int i = 0; i < s.task_count(); ++i) {
    if (best_achievable_quality(s, belief.params, i) >= s.min_quality - 1e-9) continue;
    const std::vector<int> humans = s.human_ids();
    if (!humans.empty()) {
      const int h = humans.front();
      set_group_column(belief.params.sup_quality, s, s.tasks[i].group, h,
                       std::max(s.min_quality, belief.params.sup_quality(i, h)));
    } else {
      for (int j = 0; j < s.agent_count(); ++j) {
        if (belief.params.duration(i, j) >= cutoff) continue;
        set_group_column(belief.params.exec_quality, s, s.tasks[i].group, j,
                         std::max(s.min_quality, belief.params.exec_quality(i, j)));
        break;
      }
    }
  }
}

}  // namespace

TaskOutcome sample_outcome(const TaskAssignment& assignment, const ValidatedScenario& validated,
                           const ParamMatrices& belief, const NoiseConfig& noise,
                           std::mt19937_64& rng,
                           const std::function<bool(const TaskOutcome&)>& guard) {
  const Scenario& s = validated.scenario();
  TaskOutcome out;
  out.task = assignment.task;
  out.supervised = !assignment.supervisors.empty();
  if (out.supervised && noise.intervention_probability > 0.0) {
    std::bernoulli_distribution flip(noise.intervention_probability);
    out.intervened = flip(rng);
  }

  double planned_quality = 0.0;
  if (out.supervised && out.intervened) {
    for (int j : assignment.supervisors) planned_quality += belief.sup_quality(out.task, j);
  } else {
    for (int j : assignment.executors) planned_quality += belief.exec_quality(out.task, j);
  }
  out.measured_quality = clamp01(planned_quality + draw_normal(rng, noise.quality_sigma));

  double planned_duration = 0.0;
  const double cutoff = s.big_M * (1.0 - 1e-12);
  for (int j : assignment.executors) {
    const double d = belief.duration(out.task, j);
    if (d < cutoff) planned_duration = std::max(planned_duration, d);
  }
  out.measured_duration =
      std::max(planned_duration * (1.0 + draw_normal(rng, noise.duration_sigma)), 1e-6);

  for (int j : assignment.executors)
    out.measured_exec_workload[j] =
        std::max(0.0, belief.exec_workload(out.task, j) + draw_normal(rng, noise.workload_sigma));
  for (int j : assignment.supervisors)
    out.measured_sup_workload[j] =
        std::max(0.0, belief.sup_workload(out.task, j) + draw_normal(rng, noise.workload_sigma));

  if (guard && noise.feasibility_guard && !guard(out)) {
    bool ok = false;
    for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
      out.measured_quality = clamp01(planned_quality + draw_normal(rng, noise.quality_sigma));
      ok = guard(out);
    }
    if (!ok) {
      out.measured_quality = clamp01(s.min_quality);
      ok = guard(out);
      for (double grid = s.min_quality; grid <= 1.0 && !ok; grid += 0.05) {
        out.measured_quality = clamp01(grid);
        ok = guard(out);
      }
    }
  }
  return out;
}

ExecutionTrace run_execution(const ValidatedScenario& validated, const NoiseConfig& noise,
                             uint64_t seed, Policy policy, const ReplanConfig& replan_cfg,
                             const SolverConfig& solver_cfg) {
  const Scenario& s = validated.scenario();
  const int m = s.task_count();
  const double horizon = validated.horizon();
  std::mt19937_64 rng(seed);

  ExecutionTrace trace;

  Belief belief = Belief::from_scenario(s);
  if (noise.initial_quality_sigma > 0.0)
    randomize_initial_qualities(belief, validated, noise, rng);

  BuildOptions build_opts;
  build_opts.params = &belief.params;
  MilpProblem problem = build_milp(validated, build_opts);
  MilpSolution solution = solve(problem, solver_cfg);
  trace.solver_seconds += solution.solve_seconds;
  trace.solver_nodes += solution.nodes_explored;
  if (solution.status != SolveStatus::Optimal) return trace;  // completed stays false

  Allocation plan = decode_solution(solution, problem, validated);
  trace.initial_plan = plan;
  ParamMatrices at_planning = belief.params;

  struct Live {
    bool started = false;
    bool done = false;
    double start = 0.0, end = 0.0;
    TaskOutcome outcome;
  };
  std::vector<Live> live(m);
  std::vector<double> avail(s.agent_count(), 0.0);
  int completed = 0;
  double now = 0.0;

  auto remaining_ids = [&]() {
    std::vector<int> ids;
    for (int i = 0; i < m; ++i)
      if (!live[i].started) ids.push_back(i);
    return ids;
  };

  while (completed < m) {
    double next_completion = kInf;
    int next_task = -1;
    for (int i = 0; i < m; ++i) {
      if (!live[i].started || live[i].done) continue;
      if (live[i].end < next_completion ||
          (live[i].end == next_completion && i < next_task)) {
        next_completion = live[i].end;
        next_task = i;
      }
    }

    // Start whatever the current plan allows before the next completion.
    std::vector<int> order;
    for (int i = 0; i < m; ++i)
      if (!live[i].started) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const TaskAssignment* ta = plan.find(a);
      const TaskAssignment* tb = plan.find(b);
      if (ta->start != tb->start) return ta->start < tb->start;
      return a < b;
    });

    bool started_any = false;
    for (int id : order) {
      const TaskAssignment* ta = plan.find(id);
      double candidate = now;
      bool ready = true;
      for (int p = 0; p < m && ready; ++p) {
        if (s.constraints.precedence(p, id) != 1) continue;
        if (!live[p].started) ready = false;  // must wait for it to run first
        else candidate = std::max(candidate, live[p].end);
      }
      if (!ready) continue;
      for (int p = 0; p < m; ++p) {
        if (p == id || s.constraints.spatial(p, id) != 1) continue;
        if (live[p].started && !live[p].done) candidate = std::max(candidate, live[p].end);
      }
      for (int j : ta->executors) candidate = std::max(candidate, avail[j]);
      for (int j : ta->supervisors) candidate = std::max(candidate, avail[j]);
      if (next_task >= 0 && candidate >= next_completion - 1e-12) continue;

      live[id].started = true;
      auto guard_fn = [&](const TaskOutcome& candidate_outcome) {
        Belief probe = belief;
        Belief after = update_parameters(std::move(probe), candidate_outcome, plan, validated);
        for (int rid = 0; rid < m; ++rid) {
          if (live[rid].started) continue;
          const TaskAssignment* rt = plan.find(rid);
          double q = 0.0;
          for (int j : rt->executors) q += after.params.exec_quality(rid, j);
          for (int j : rt->supervisors) q += after.params.sup_quality(rid, j);
          if (q < s.min_quality - 1e-9) return false;
        }
        return true;
      };
      TaskOutcome outcome = sample_outcome(
          *ta, validated, belief.params, noise, rng,
          noise.feasibility_guard ? std::function<bool(const TaskOutcome&)>(guard_fn)
                                  : std::function<bool(const TaskOutcome&)>{});
      live[id].start = candidate;
      live[id].end = candidate + outcome.measured_duration;
      live[id].outcome = std::move(outcome);
      for (int j : ta->executors) avail[j] = live[id].end;
      for (int j : ta->supervisors) avail[j] = live[id].end;
      started_any = true;
      if (live[id].end < next_completion) {
        next_completion = live[id].end;
        next_task = id;
      }
    }
    if (started_any) continue;

    // Process the earliest completion: monitor, evaluate delta, maybe re-plan.
    Live& fin = live[next_task];
    fin.done = true;
    ++completed;
    now = fin.end;
    trace.outcomes.push_back(fin.outcome);
    belief = update_parameters(std::move(belief), fin.outcome, plan, validated);

    const std::vector<int> remaining = remaining_ids();
    const double delta =
        compute_delta(at_planning, belief.params, plan, remaining, horizon);
    trace.deltas.push_back(delta);

    if (policy == Policy::ReplanEnabled && !remaining.empty()) {
      const ReplanDecision decision =
          should_replan(belief.params, plan, remaining, delta, replan_cfg, validated);
      if (decision.replan) {
        std::map<int, double> pending_end;
        for (int i = 0; i < m; ++i)
          if (live[i].started && !live[i].done) pending_end[i] = live[i].end;
        MilpProblem rp = build_replan_problem(validated, belief.params, remaining, avail,
                                              now, pending_end);
        MilpSolution rs = solve(rp, solver_cfg);
        trace.solver_seconds += rs.solve_seconds;
        trace.solver_nodes += rs.nodes_explored;
        if (rs.status != SolveStatus::Optimal) {
          trace.completed = false;  // only reachable with the guard off
          return trace;
        }
        Allocation fresh = decode_solution(rs, rp, validated);
        for (TaskAssignment& t : plan.tasks) {
          const TaskAssignment* nt = fresh.find(t.task);
          if (nt) t = *nt;
        }
        plan.makespan = 0.0;
        for (const TaskAssignment& t : plan.tasks)
          plan.makespan = std::max(plan.makespan, t.end);
        at_planning = belief.params;
        trace.replans.push_back({completed, now, decision.reasons, delta});
      }
    }
  }

  trace.completed = true;
  double latest = 0.0;
  for (int i = 0; i < m; ++i) latest = std::max(latest, live[i].end);
  trace.realized.makespan_term = latest / horizon;
  for (const TaskOutcome& o : trace.outcomes) {
    trace.realized.quality_sum += o.measured_quality;
    for (const auto& [j, w] : o.measured_exec_workload) trace.realized.workload_sum += w;
    for (const auto& [j, w] : o.measured_sup_workload) trace.realized.workload_sum += w;
  }
  trace.realized.total =
      trace.realized.makespan_term - trace.realized.quality_sum + trace.realized.workload_sum;
  for (int i = 0; i < m; ++i) {
    TaskAssignment t = *plan.find(i);
    t.start = live[i].start;
    t.end = live[i].end;
    trace.realized_tasks.push_back(std::move(t));
  }
  return trace;
}

namespace {

void accumulate(PolicyStats& stats, const ExecutionTrace& trace) {
  stats.trial_costs.push_back(trace.realized.total);
  stats.trial_replans.push_back(static_cast<int>(trace.replans.size()));
  stats.trial_deltas.push_back(trace.deltas);
}

void finalize(PolicyStats& stats, int m) {
  const int n = static_cast<int>(stats.trial_costs.size());
  if (n == 0) return;
  double sum = 0.0;
  for (double c : stats.trial_costs) sum += c;
  stats.cost_mean = sum / n;
  double var = 0.0;
  for (double c : stats.trial_costs) var += (c - stats.cost_mean) * (c - stats.cost_mean);
  stats.cost_std = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  double rsum = 0.0;
  for (int r : stats.trial_replans) rsum += r;
  stats.mean_replans = rsum / n;

  stats.delta_mean.assign(m, 0.0);
  stats.delta_std.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    int cnt = 0;
    for (const auto& d : stats.trial_deltas)
      if (i < static_cast<int>(d.size())) {
        s += d[i];
        ++cnt;
      }
    stats.delta_mean[i] = cnt > 0 ? s / cnt : 0.0;
    double v = 0.0;
    for (const auto& d : stats.trial_deltas)
      if (i < static_cast<int>(d.size()))
        v += (d[i] - stats.delta_mean[i]) * (d[i] - stats.delta_mean[i]);
    stats.delta_std[i] = cnt > 1 ? std::sqrt(v / (cnt - 1)) : 0.0;
  }
}

}  // namespace

CampaignReport run_campaign(const ValidatedScenario& scenario, const NoiseConfig& noise,
                            int trials, uint64_t seed_base, const ReplanConfig& replan_cfg,
                            const SolverConfig& solver_cfg) {
  CampaignReport report;
  report.trials = trials;
  report.seed_base = seed_base;
  report.task_count = scenario.scenario().task_count();
  report.noise = noise;
  report.delta_threshold = replan_cfg.delta_threshold;

  for (int t = 0; t < trials; ++t) {
    const uint64_t seed = seed_base + static_cast<uint64_t>(t);
    ExecutionTrace with = run_execution(scenario, noise, seed, Policy::ReplanEnabled,
                                        replan_cfg, solver_cfg);
    ExecutionTrace without =
        run_execution(scenario, noise, seed, Policy::Static, replan_cfg, solver_cfg);
    accumulate(report.replan, with);
    accumulate(report.fixed, without);
  }
  finalize(report.replan, report.task_count);
  finalize(report.fixed, report.task_count);
  return report;
}

namespace {

json outcome_to_json(const TaskOutcome& o) {
  json jw = json::object();
  for (const auto& [j, w] : o.measured_exec_workload) jw[std::to_string(j)] = w;
  json js = json::object();
  for (const auto& [j, w] : o.measured_sup_workload) js[std::to_string(j)] = w;
  return json{{"task", o.task},
              {"measured_quality", o.measured_quality},
              {"measured_duration", o.measured_duration},
              {"exec_workload", jw},
              {"sup_workload", js},
              {"supervised", o.supervised},
              {"intervened", o.intervened}};
}

TaskOutcome outcome_from_json(const json& j) {
  TaskOutcome o;
  o.task = j.at("task").get<int>();
  o.measured_quality = j.at("measured_quality").get<double>();
  o.measured_duration = j.at("measured_duration").get<double>();
  for (auto it = j.at("exec_workload").begin(); it != j.at("exec_workload").end(); ++it)
    o.measured_exec_workload[std::stoi(it.key())] = it.value().get<double>();
  for (auto it = j.at("sup_workload").begin(); it != j.at("sup_workload").end(); ++it)
    o.measured_sup_workload[std::stoi(it.key())] = it.value().get<double>();
  o.supervised = j.at("supervised").get<bool>();
  o.intervened = j.at("intervened").get<bool>();
  return o;
}

json assignment_to_json(const TaskAssignment& t) {
  return json{{"task", t.task},
              {"executors", t.executors},
              {"supervisors", t.supervisors},
              {"start", t.start},
              {"end", t.end}};
}

json stats_to_json(const PolicyStats& p) {
  return json{{"delta_mean", p.delta_mean},   {"delta_std", p.delta_std},
              {"cost_mean", p.cost_mean},     {"cost_std", p.cost_std},
              {"mean_replans", p.mean_replans}, {"trial_costs", p.trial_costs},
              {"trial_replans", p.trial_replans}};
}

}  // namespace

std::string campaign_report_json(const CampaignReport& r) {
  json j;
  j["schema_version"] = 1;
  j["trials"] = r.trials;
  j["seed_base"] = r.seed_base;
  j["task_count"] = r.task_count;
  j["delta_threshold"] = r.delta_threshold;
  j["noise"] = {{"quality_sigma", r.noise.quality_sigma},
                {"duration_sigma", r.noise.duration_sigma},
                {"workload_sigma", r.noise.workload_sigma},
                {"initial_quality_sigma", r.noise.initial_quality_sigma},
                {"intervention_probability", r.noise.intervention_probability},
                {"feasibility_guard", r.noise.feasibility_guard}};
  j["policies"] = {{"replan", stats_to_json(r.replan)}, {"static", stats_to_json(r.fixed)}};
  return j.dump(2) + "\n";
}

std::string campaign_report_csv(const CampaignReport& r) {
  std::ostringstream os;
  os << "trial,policy,realized_cost,replans";
  for (int i = 0; i < r.task_count; ++i) os << ",delta_" << i;
  os << "\n";
  auto rows = [&](const PolicyStats& p, const char* name) {
    for (size_t t = 0; t < p.trial_costs.size(); ++t) {
      os << t << "," << name << "," << p.trial_costs[t] << "," << p.trial_replans[t];
      for (int i = 0; i < r.task_count; ++i) {
        os << ",";
        if (i < static_cast<int>(p.trial_deltas[t].size())) os << p.trial_deltas[t][i];
      }
      os << "\n";
    }
  };
  rows(r.replan, "replan");
  rows(r.fixed, "static");
  return os.str();
}

std::string execution_trace_json(const ExecutionTrace& t) {
  json j;
  j["schema_version"] = 1;
  j["completed"] = t.completed;
  j["outcomes"] = json::array();
  for (const TaskOutcome& o : t.outcomes) j["outcomes"].push_back(outcome_to_json(o));
  j["deltas"] = t.deltas;
  j["replans"] = json::array();
  for (const ReplanRecord& r : t.replans) {
    json reasons = json::array();
    for (ReplanReason reason : r.reasons) reasons.push_back(replan_reason_name(reason));
    j["replans"].push_back({{"after_completion", r.after_completion},
                            {"at_time", r.at_time},
                            {"reasons", reasons},
                            {"delta", r.delta}});
  }
  j["realized_cost"] = {{"makespan_term", t.realized.makespan_term},
                        {"quality_sum", t.realized.quality_sum},
                        {"workload_sum", t.realized.workload_sum},
                        {"total", t.realized.total}};
  j["initial_plan"] = json::array();
  for (const TaskAssignment& a : t.initial_plan.tasks)
    j["initial_plan"].push_back(assignment_to_json(a));
  j["realized_tasks"] = json::array();
  for (const TaskAssignment& a : t.realized_tasks)
    j["realized_tasks"].push_back(assignment_to_json(a));
  j["solver"] = {{"seconds", t.solver_seconds}, {"nodes", t.solver_nodes}};
  return j.dump(2) + "\n";
}

std::string outcome_log_ndjson(const std::vector<TaskOutcome>& outcomes) {
  std::ostringstream os;
  for (const TaskOutcome& o : outcomes) os << outcome_to_json(o).dump() << "\n";
  return os.str();
}

std::vector<TaskOutcome> parse_outcome_log(const std::string& ndjson) {
  std::vector<TaskOutcome> out;
  std::istringstream is(ndjson);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(outcome_from_json(json::parse(line)));
  }
  return out;
}

ReplayResult replay_outcomes(const ValidatedScenario& validated,
                             const std::vector<TaskOutcome>& outcomes,
                             const SolverConfig& solver_cfg) {
  ReplayResult result;
  MilpProblem problem = build_milp(validated);
  MilpSolution solution = solve(problem, solver_cfg);
  if (solution.status != SolveStatus::Optimal) return result;
  Allocation plan = decode_solution(solution, problem, validated);
  result.plan = plan;

  Belief belief = Belief::from_scenario(validated.scenario());
  const ParamMatrices at_planning = belief.params;
  std::set<int> done;
  for (const TaskOutcome& o : outcomes) {
    belief = update_parameters(std::move(belief), o, plan, validated);
    done.insert(o.task);
    std::vector<int> remaining;
    for (int i = 0; i < validated.scenario().task_count(); ++i)
      if (!done.count(i)) remaining.push_back(i);
    result.deltas.push_back(compute_delta(at_planning, belief.params, plan, remaining,
                                          validated.horizon()));
  }
  return result;
}

}  // namespace hrta
