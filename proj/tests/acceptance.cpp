// Acceptance suite: end-to-end gate for the toolkit. Each criterion prints
// one PASS/FAIL line; the process exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "hrta/lp.hpp"
#include "hrta/milp.hpp"
#include "hrta/replan.hpp"
#include "hrta/scenario_io.hpp"
#include "hrta/schedule.hpp"
#include "hrta/sim.hpp"
#include "hrta/solver.hpp"
#include "oracle.hpp"

using namespace hrta;

namespace {

int failures = 0;

struct Criterion {
  int id;
  std::string name;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void report(bool ok, const std::string& detail) const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1f s) %s\n", ok ? "PASS" : "FAIL", id,
                name.c_str(), secs, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

ValidatedScenario bundled() {
  Scenario s = load_scenario_file(std::string(HRTA_DATA_DIR) + "/assembly.json");
  ValidationResult r = validate_scenario(std::move(s));
  if (!r.ok()) {
    std::fprintf(stderr, "bundled scenario invalid: %s\n", r.issues.front().message.c_str());
    std::exit(2);
  }
  return *r.scenario;
}

std::vector<ValidatedScenario> corpus(int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ValidatedScenario> out;
  while (static_cast<int>(out.size()) < count) {
    ValidationResult r = validate_scenario(oracle::random_scenario(rng));
    if (r.ok()) out.push_back(*r.scenario);
  }
  return out;
}

}  // namespace

int main() {
  const ValidatedScenario assembly = bundled();
  std::vector<ValidatedScenario> instances = corpus(50, 20260809);

  // Solved allocations collected along the way feed criterion 2.
  struct SolvedCase {
    const ValidatedScenario* scenario;
    MilpProblem problem;
    MilpSolution solution;
  };
  std::vector<SolvedCase> solved;

  {  // 1. Oracle equivalence on 50 random small instances.
    Criterion c{1, "oracle equivalence (50 random instances, tol 1e-6)"};
    int mismatches = 0, feasible = 0;
    std::ostringstream detail;
    for (size_t t = 0; t < instances.size(); ++t) {
      const ValidatedScenario& v = instances[t];
      oracle::BruteForceResult expect = oracle::brute_force_solve(v);
      MilpProblem p = build_milp(v);
      MilpSolution got = solve(p);
      if (expect.feasible != (got.status == SolveStatus::Optimal)) {
        ++mismatches;
        detail << " status-mismatch@" << t;
        continue;
      }
      if (expect.feasible) {
        ++feasible;
        if (std::abs(expect.objective - got.objective) > 1e-6) {
          ++mismatches;
          detail << " obj-mismatch@" << t << " (" << expect.objective << " vs "
                 << got.objective << ")";
        }
        solved.push_back({&v, std::move(p), std::move(got)});
      }
    }
    std::ostringstream d;
    d << feasible << " feasible, " << instances.size() - feasible << " infeasible"
      << detail.str();
    c.report(mismatches == 0, d.str());
  }

  {  // 2. Formulation fidelity: independent validator + cost equality.
    Criterion c{2, "formulation fidelity (validator + cost, tol 1e-6)"};
    int bad = 0;
    std::ostringstream detail;
    for (const SolvedCase& sc : solved) {
      Allocation alloc = decode_solution(sc.solution, sc.problem, *sc.scenario);
      ViolationReport report =
          check_feasibility(alloc, *sc.scenario, sc.scenario->scenario().params);
      if (!report.ok()) {
        ++bad;
        detail << " [" << report.violations.front().message << "]";
        continue;
      }
      CostBreakdown cost = evaluate_cost(alloc, sc.scenario->scenario().params,
                                         sc.scenario->horizon());
      if (std::abs(cost.total - sc.solution.objective) > 1e-6) {
        ++bad;
        detail << " cost-mismatch (" << cost.total << " vs " << sc.solution.objective << ")";
      }
    }
    std::ostringstream d;
    d << solved.size() << " solved instances checked across all eight families"
      << detail.str();
    c.report(bad == 0, d.str());
  }

  MilpSolution assembly_solution;
  MilpProblem assembly_problem;
  {  // 3. Paper-instance structure on the bundled 14-task scenario.
    Criterion c{3, "paper-instance structure (14 tasks, q_floor 0.8, M 1000)"};
    assembly_problem = build_milp(assembly);
    assembly_solution = solve(assembly_problem);
    bool ok = assembly_solution.status == SolveStatus::Optimal;
    std::ostringstream detail;
    if (!ok) detail << "solve status " << solve_status_name(assembly_solution.status);
    if (ok) {
      Allocation alloc = decode_solution(assembly_solution, assembly_problem, assembly);
      const Scenario& s = assembly.scenario();
      for (int id : {4, 9}) {  // the two collaborative surfaces
        const TaskAssignment* t = alloc.find(id);
        const bool two_robots = t && t->executors.size() == 2 &&
                                s.agents[t->executors[0]].kind == AgentKind::Robot &&
                                s.agents[t->executors[1]].kind == AgentKind::Robot;
        if (!two_robots) {
          ok = false;
          detail << " task " << id << " lacks two robot executors;";
        }
      }
      for (const TaskAssignment& t : alloc.tasks) {
        double q = 0.0;
        for (int j : t.executors) q += s.params.exec_quality(t.task, j);
        for (int j : t.supervisors) q += s.params.sup_quality(t.task, j);
        if (q < s.min_quality - 1e-9) {
          ok = false;
          detail << " task " << t.task << " quality " << q << " below floor;";
        }
      }
      int supervised_r2 = 0;
      for (const TaskAssignment& t : alloc.tasks) {
        if (s.tasks[t.task].group != 1) continue;
        if (t.executors == std::vector<int>{1}) {  // the 0.7-quality robot alone
          if (t.supervisors.empty()) {
            ok = false;
            detail << " task " << t.task << " solo on r2 without supervision;";
          } else {
            ++supervised_r2;
          }
        }
      }
      detail << " " << supervised_r2 << " group-1 tasks supervised on the 0.7 robot";
    }
    c.report(ok, detail.str());
  }

  CampaignReport campaign;
  {  // 4. Re-allocation benefit at paper noise levels, 50 paired trials.
    Criterion c{4, "re-allocation benefit (50 paired trials, paper noise)"};
    NoiseConfig noise;  // defaults are the campaign levels
    campaign = run_campaign(assembly, noise, 50, 7);
    double mean_delta_replan = 0.0, mean_delta_static = 0.0;
    int n_replan = 0, n_static = 0;
    for (const auto& d : campaign.replan.trial_deltas)
      for (double x : d) {
        mean_delta_replan += x;
        ++n_replan;
      }
    for (const auto& d : campaign.fixed.trial_deltas)
      for (double x : d) {
        mean_delta_static += x;
        ++n_static;
      }
    mean_delta_replan /= std::max(n_replan, 1);
    mean_delta_static /= std::max(n_static, 1);
    const double improvement =
        (campaign.fixed.cost_mean - campaign.replan.cost_mean) /
        std::abs(campaign.fixed.cost_mean);
    const bool ok = mean_delta_replan < mean_delta_static && improvement >= 0.20;
    std::ostringstream d;
    d << "mean delta " << mean_delta_replan << " (replan) vs " << mean_delta_static
      << " (static); cost " << campaign.replan.cost_mean << " +/- "
      << campaign.replan.cost_std << " vs " << campaign.fixed.cost_mean << " +/- "
      << campaign.fixed.cost_std << "; improvement " << improvement * 100.0 << "%";
    c.report(ok, d.str());
  }

  {  // 5. Delta boundary behavior across the campaign trials.
    Criterion c{5, "delta boundary (first equal across policies, final zero)"};
    bool ok = true;
    std::ostringstream detail;
    for (int t = 0; t < campaign.trials; ++t) {
      const auto& dr = campaign.replan.trial_deltas[t];
      const auto& ds = campaign.fixed.trial_deltas[t];
      if (dr.empty() || ds.empty()) {
        ok = false;
        detail << " empty trace@" << t;
        continue;
      }
      if (dr.front() != ds.front()) {
        ok = false;
        detail << " first-delta differs@" << t;
      }
      if (dr.back() != 0.0 || ds.back() != 0.0) {
        ok = false;
        detail << " final-delta nonzero@" << t;
      }
    }
    c.report(ok, detail.str().empty() ? "50 trials" : detail.str());
  }

  {  // 6. Big-M insensitivity on 20 corpus instances.
    Criterion c{6, "big-M insensitivity (1000 -> 2000, tol 1e-6)"};
    int checked = 0, bad = 0;
    std::ostringstream detail;
    for (const SolvedCase& sc : solved) {
      if (checked >= 20) break;
      Scenario s = sc.scenario->scenario();
      s.big_M = 2000.0;
      for (int i = 0; i < s.task_count(); ++i)
        for (int j = 0; j < s.agent_count(); ++j)
          if (s.params.duration(i, j) >= 999.0) s.params.duration(i, j) = 2000.0;
      ValidationResult r = validate_scenario(std::move(s));
      if (!r.ok()) continue;
      MilpSolution doubled = solve(build_milp(*r.scenario));
      if (doubled.status != SolveStatus::Optimal) {
        ++bad;
        detail << " lost-feasibility@" << checked;
      } else if (std::abs(doubled.objective - sc.solution.objective) > 1e-6) {
        ++bad;
        detail << " drift@" << checked << " (" << sc.solution.objective << " vs "
               << doubled.objective << ")";
      }
      ++checked;
    }
    std::ostringstream d;
    d << checked << " instances re-solved" << detail.str();
    c.report(bad == 0 && checked == 20, d.str());
  }

  {  // 7. Determinism of solve and campaign outputs.
    Criterion c{7, "determinism (byte-identical repeated outputs)"};
    MilpSolution again = solve(assembly_problem);
    bool ok = again.status == assembly_solution.status &&
              again.objective == assembly_solution.objective &&
              again.nodes_explored == assembly_solution.nodes_explored;
    std::ostringstream detail;
    if (!ok) detail << "solver state drifted across runs; ";
    Allocation a1 = decode_solution(assembly_solution, assembly_problem, assembly);
    Allocation a2 = decode_solution(again, assembly_problem, assembly);
    const std::string j1 = allocation_json(
        a1, evaluate_cost(a1, assembly.scenario().params, assembly.horizon()),
        assembly_solution);
    const std::string j2 = allocation_json(
        a2, evaluate_cost(a2, assembly.scenario().params, assembly.horizon()), again);
    if (j1 != j2) {
      ok = false;
      detail << "allocation json differs; ";
    }
    NoiseConfig noise;
    CampaignReport c1 = run_campaign(assembly, noise, 3, 31);
    CampaignReport c2 = run_campaign(assembly, noise, 3, 31);
    if (campaign_report_json(c1) != campaign_report_json(c2)) {
      ok = false;
      detail << "campaign json differs; ";
    }
    c.report(ok, detail.str());
  }

  {  // 8. The four update cases and proportional propagation, exact values.
    Criterion c{8, "update rules (four cases + 10% group propagation)"};
    bool ok = true;
    std::ostringstream detail;

    Scenario s;
    s.agents = {{0, AgentKind::Robot, "r1"}, {1, AgentKind::Robot, "r2"},
                {2, AgentKind::Human, "h"}};
    s.tasks = {{0, 0, false, std::nullopt}, {1, 0, false, std::nullopt},
               {2, 0, true, std::nullopt}};
    s.params.duration.resize(3, 3);
    s.params.duration << 10.0, 10.0, 12.0, 20.0, 20.0, 24.0, 10.0, 10.0, 12.0;
    s.params.exec_quality.setConstant(3, 3, 0.9);
    s.params.sup_quality.resize(3, 3);
    s.params.sup_quality.setZero();
    s.params.sup_quality.col(2).setConstant(0.95);
    s.params.exec_workload.setConstant(3, 3, 0.5);
    s.params.sup_workload.setConstant(3, 3, 0.4);
    s.constraints.precedence = Eigen::MatrixXi::Zero(3, 3);
    s.constraints.spatial = Eigen::MatrixXi::Zero(3, 3);
    s.min_quality = 0.5;
    ValidationResult vr = validate_scenario(std::move(s));
    if (!vr.ok()) {
      c.report(false, "fixture invalid");
      return 1;
    }
    const ValidatedScenario& v = *vr.scenario;
    Allocation alloc;
    alloc.tasks = {{0, {0}, {}, 0.0, 10.0},
                   {1, {0}, {2}, 10.0, 30.0},
                   {2, {0, 1}, {}, 30.0, 40.0}};

    auto expect = [&](bool cond, const char* what) {
      if (!cond) {
        ok = false;
        detail << " " << what << ";";
      }
    };

    {  // unsupervised solo: measured quality becomes the group quality
      Belief b = Belief::from_scenario(v.scenario());
      TaskOutcome o;
      o.task = 0;
      o.measured_quality = 0.6;
      o.measured_duration = 10.0;
      Belief after = update_parameters(b, o, alloc, v);
      expect(after.params.exec_quality(0, 0) == 0.6, "solo update");
      expect(after.params.exec_quality(1, 0) == 0.6, "solo group propagation");
      expect(after.params.exec_quality(0, 1) == 0.9, "solo other-agent untouched");
    }
    {  // collaborative: equal split
      Belief b = Belief::from_scenario(v.scenario());
      TaskOutcome o;
      o.task = 2;
      o.measured_quality = 0.8;
      o.measured_duration = 10.0;
      Belief after = update_parameters(b, o, alloc, v);
      expect(after.params.exec_quality(2, 0) == 0.4, "collab split agent 0");
      expect(after.params.exec_quality(2, 1) == 0.4, "collab split agent 1");
      expect(after.params.exec_quality(2, 2) == 0.9, "collab human untouched");
    }
    {  // supervised, no intervention: executors as above, supervisor kept
      Belief b = Belief::from_scenario(v.scenario());
      TaskOutcome o;
      o.task = 1;
      o.measured_quality = 0.7;
      o.measured_duration = 20.0;
      o.supervised = true;
      o.intervened = false;
      Belief after = update_parameters(b, o, alloc, v);
      expect(after.params.exec_quality(1, 0) == 0.7, "supervised-no-int executor");
      expect(after.params.sup_quality(1, 2) == 0.95, "supervised-no-int supervisor kept");
    }
    {  // supervised with intervention: supervisor quality, executor kept
      Belief b = Belief::from_scenario(v.scenario());
      TaskOutcome o;
      o.task = 1;
      o.measured_quality = 0.9;
      o.measured_duration = 20.0;
      o.supervised = true;
      o.intervened = true;
      Belief after = update_parameters(b, o, alloc, v);
      expect(after.params.sup_quality(1, 2) == 0.9, "intervention supervisor");
      expect(after.params.sup_quality(0, 2) == 0.9, "intervention group propagation");
      expect(after.params.exec_quality(1, 0) == 0.9, "intervention executor kept");
    }
    {  // 10% longer measured duration scales the agent's whole group
      Belief b = Belief::from_scenario(v.scenario());
      TaskOutcome o;
      o.task = 0;
      o.measured_quality = 0.9;
      o.measured_duration = 11.0;
      Belief after = update_parameters(b, o, alloc, v);
      expect(std::abs(after.params.duration(0, 0) - 11.0) < 1e-12, "duration measured");
      expect(std::abs(after.params.duration(1, 0) - 22.0) < 1e-12,
             "duration 10% propagation");
      expect(after.params.duration(1, 1) == 20.0, "duration other agent untouched");
    }
    c.report(ok, detail.str());
  }

  std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed"
                                    : "acceptance: FAILURES present");
  return failures == 0 ? 0 : 1;
}
