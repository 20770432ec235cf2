#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hrta/milp.hpp"
#include "hrta/scenario_io.hpp"
#include "hrta/schedule.hpp"
#include "hrta/solver.hpp"
#include "oracle.hpp"

using namespace hrta;

namespace {

ValidatedScenario validated(Scenario s) {
  ValidationResult r = validate_scenario(std::move(s));
  REQUIRE(r.ok());
  return *r.scenario;
}

Scenario single_robot_task() {
  Scenario s;
  s.agents = {{0, AgentKind::Robot, "r"}};
  s.tasks = {{0, 0, false, std::nullopt}};
  s.params.duration.setConstant(1, 1, 10.0);
  s.params.exec_quality.setConstant(1, 1, 0.9);
  s.params.sup_quality.setZero(1, 1);
  s.params.exec_workload.setConstant(1, 1, 0.5);
  s.params.sup_workload.setZero(1, 1);
  s.constraints.precedence = Eigen::MatrixXi::Zero(1, 1);
  s.constraints.spatial = Eigen::MatrixXi::Zero(1, 1);
  s.min_quality = 0.8;
  return s;
}

ValidatedScenario two_agents_two_tasks() {
  Scenario s;
  s.agents = {{0, AgentKind::Robot, "r"}, {1, AgentKind::Human, "h"}};
  s.tasks = {{0, 0, false, std::nullopt}, {1, 1, false, std::nullopt}};
  s.params.duration.setConstant(2, 2, 10.0);
  s.params.exec_quality.setConstant(2, 2, 0.9);
  s.params.sup_quality.resize(2, 2);
  s.params.sup_quality << 0.0, 1.0, 0.0, 1.0;
  s.params.exec_workload.setConstant(2, 2, 0.5);
  s.params.sup_workload.setConstant(2, 2, 0.5);
  s.constraints.precedence = Eigen::MatrixXi::Zero(2, 2);
  s.constraints.spatial = Eigen::MatrixXi::Zero(2, 2);
  s.min_quality = 0.8;
  return validated(std::move(s));
}

}  // namespace

TEST_CASE("decode the single-task instance") {
  ValidatedScenario v = validated(single_robot_task());
  MilpProblem p = build_milp(v);
  MilpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  Allocation alloc = decode_solution(sol, p, v);
  REQUIRE(alloc.tasks.size() == 1);
  CHECK(alloc.tasks[0].executors == std::vector<int>{0});
  CHECK(alloc.tasks[0].supervisors.empty());
  CHECK(alloc.tasks[0].start == doctest::Approx(0.0));
  CHECK(alloc.tasks[0].end == doctest::Approx(10.0));
  CHECK(alloc.makespan == doctest::Approx(10.0));
}

TEST_CASE("collaborative task decodes both executors") {
  Scenario s;
  s.agents = {{0, AgentKind::Robot, "r1"}, {1, AgentKind::Robot, "r2"}};
  s.tasks = {{0, 0, true, std::nullopt}};
  s.params.duration.setConstant(1, 2, 10.0);
  s.params.exec_quality.setConstant(1, 2, 0.5);
  s.params.sup_quality.setZero(1, 2);
  s.params.exec_workload.setConstant(1, 2, 0.5);
  s.params.sup_workload.setZero(1, 2);
  s.constraints.precedence = Eigen::MatrixXi::Zero(1, 1);
  s.constraints.spatial = Eigen::MatrixXi::Zero(1, 1);
  s.min_quality = 0.8;
  ValidatedScenario v = validated(std::move(s));
  MilpProblem p = build_milp(v);
  MilpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  Allocation alloc = decode_solution(sol, p, v);
  CHECK(alloc.tasks[0].executors == std::vector<int>{0, 1});
}

TEST_CASE("fractional binaries raise NonIntegralSolution") {
  ValidatedScenario v = validated(single_robot_task());
  MilpProblem p = build_milp(v);
  MilpSolution sol;
  sol.status = SolveStatus::Optimal;
  sol.values = Eigen::VectorXd::Zero(p.column_count());
  sol.values[p.col_x(0, 0)] = 0.4;
  CHECK_THROWS_AS(decode_solution(sol, p, v), NonIntegralSolution);
}

TEST_CASE("validator flags a hand-built agent overlap") {
  ValidatedScenario v = two_agents_two_tasks();
  Allocation alloc;
  alloc.tasks = {{0, {0}, {}, 0.0, 10.0}, {1, {0}, {}, 5.0, 15.0}};
  alloc.makespan = 15.0;
  ViolationReport report = check_feasibility(alloc, v, v.scenario().params);
  REQUIRE(!report.ok());
  bool found = false;
  for (const Violation& viol : report.violations)
    if (viol.kind == ViolationKind::AgentOverlap && viol.i == 0 && viol.k == 1 && viol.j == 0)
      found = true;
  CHECK(found);
}

TEST_CASE("validator covers each family") {
  ValidatedScenario v = two_agents_two_tasks();
  const ParamMatrices& par = v.scenario().params;

  SUBCASE("agent count") {
    Allocation a;
    a.tasks = {{0, {0, 1}, {}, 0.0, 10.0}, {1, {1}, {}, 20.0, 30.0}};
    ViolationReport r = check_feasibility(a, v, par);
    REQUIRE(!r.ok());
    CHECK(r.violations[0].kind == ViolationKind::AgentCount);
  }
  SUBCASE("exec and supervise the same task") {
    Allocation a;
    a.tasks = {{0, {1}, {1}, 0.0, 10.0}, {1, {0}, {}, 20.0, 30.0}};
    ViolationReport r = check_feasibility(a, v, par);
    bool found = false;
    for (const Violation& viol : r.violations)
      if (viol.kind == ViolationKind::ExecSupervisionOverlap) found = true;
    CHECK(found);
  }
  SUBCASE("robot supervision") {
    Allocation a;
    a.tasks = {{0, {1}, {0}, 0.0, 10.0}, {1, {0}, {}, 20.0, 30.0}};
    ViolationReport r = check_feasibility(a, v, par);
    bool found = false;
    for (const Violation& viol : r.violations)
      if (viol.kind == ViolationKind::RobotSupervision) found = true;
    CHECK(found);
  }
  SUBCASE("quality floor") {
    Scenario s2 = v.scenario();
    s2.params.exec_quality.setConstant(0.5);
    ValidatedScenario v2 = validated(std::move(s2));
    Allocation a;
    a.tasks = {{0, {0}, {}, 0.0, 10.0}, {1, {0}, {}, 20.0, 30.0}};
    ViolationReport r = check_feasibility(a, v2, v2.scenario().params);
    bool found = false;
    for (const Violation& viol : r.violations)
      if (viol.kind == ViolationKind::QualityFloor) found = true;
    CHECK(found);
  }
  SUBCASE("duration floor") {
    Allocation a;
    a.tasks = {{0, {0}, {}, 0.0, 5.0}, {1, {0}, {}, 20.0, 30.0}};
    ViolationReport r = check_feasibility(a, v, par);
    bool found = false;
    for (const Violation& viol : r.violations)
      if (viol.kind == ViolationKind::DurationFloor && viol.i == 0) found = true;
    CHECK(found);
  }
  SUBCASE("precedence order") {
    Scenario s2 = v.scenario();
    s2.constraints.precedence(0, 1) = 1;
    ValidatedScenario v2 = validated(std::move(s2));
    Allocation a;
    a.tasks = {{0, {0}, {}, 0.0, 10.0}, {1, {1}, {}, 5.0, 15.0}};
    ViolationReport r = check_feasibility(a, v2, par);
    bool found = false;
    for (const Violation& viol : r.violations)
      if (viol.kind == ViolationKind::PrecedenceOrder) found = true;
    CHECK(found);
  }
  SUBCASE("spatial overlap") {
    Scenario s2 = v.scenario();
    s2.constraints.spatial(0, 1) = s2.constraints.spatial(1, 0) = 1;
    ValidatedScenario v2 = validated(std::move(s2));
    Allocation a;
    a.tasks = {{0, {0}, {}, 0.0, 10.0}, {1, {1}, {}, 5.0, 15.0}};
    ViolationReport r = check_feasibility(a, v2, par);
    bool found = false;
    for (const Violation& viol : r.violations)
      if (viol.kind == ViolationKind::SpatialOverlap) found = true;
    CHECK(found);
  }
  SUBCASE("back-to-back intervals are legal") {
    Allocation a;
    a.tasks = {{0, {0}, {}, 0.0, 10.0}, {1, {0}, {}, 10.0, 20.0}};
    CHECK(check_feasibility(a, v, par).ok());
  }
}

TEST_CASE("cost breakdown matches the objective split") {
  ValidatedScenario v = validated(single_robot_task());
  MilpProblem p = build_milp(v);
  MilpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  Allocation alloc = decode_solution(sol, p, v);
  CostBreakdown cost = evaluate_cost(alloc, v.scenario().params, v.horizon());
  CHECK(cost.makespan_term == doctest::Approx(1.0));
  CHECK(cost.quality_sum == doctest::Approx(0.9));
  CHECK(cost.workload_sum == doctest::Approx(0.5));
  CHECK(cost.total == doctest::Approx(0.6));
  CHECK(cost.total ==
        doctest::Approx(cost.makespan_term - cost.quality_sum + cost.workload_sum));
}

TEST_CASE("empty allocation costs zero") {
  Allocation empty;
  ParamMatrices par;
  CostBreakdown cost = evaluate_cost(empty, par, 100.0);
  CHECK(cost.makespan_term == 0.0);
  CHECK(cost.quality_sum == 0.0);
  CHECK(cost.workload_sum == 0.0);
  CHECK(cost.total == 0.0);
}

TEST_CASE("cost equals solver objective across random instances") {
  std::mt19937_64 rng(1618);
  int solved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    ValidationResult r = validate_scenario(oracle::random_scenario(rng));
    REQUIRE(r.ok());
    MilpProblem p = build_milp(*r.scenario);
    MilpSolution sol = solve(p);
    if (sol.status != SolveStatus::Optimal) continue;
    Allocation alloc = decode_solution(sol, p, *r.scenario);
    CostBreakdown cost = evaluate_cost(alloc, r.scenario->scenario().params,
                                       r.scenario->horizon());
    CHECK(cost.total == doctest::Approx(sol.objective).epsilon(1e-6));
    ++solved;
  }
  CHECK(solved > 15);
}

TEST_CASE("gantt renderings are deterministic and structured") {
  Scenario s = load_scenario_file(std::string(HRTA_DATA_DIR) + "/assembly.json");
  ValidatedScenario v = validated(std::move(s));
  MilpProblem p = build_milp(v);
  MilpSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  Allocation alloc = decode_solution(sol, p, v);

  const std::string text1 = render_gantt(alloc, v, GanttFormat::Text);
  const std::string text2 = render_gantt(alloc, v, GanttFormat::Text);
  CHECK(text1 == text2);
  CHECK(text1.find("r1") != std::string::npos);
  CHECK(text1.find("h1") != std::string::npos);

  const std::string svg1 = render_gantt(alloc, v, GanttFormat::Svg);
  const std::string svg2 = render_gantt(alloc, v, GanttFormat::Svg);
  CHECK(svg1 == svg2);
  CHECK(svg1.rfind("<svg", 0) == 0);
  CHECK(svg1.find("</svg>") != std::string::npos);

  // supervised tasks draw dashed bars in the human lane
  bool any_supervision = false;
  for (const TaskAssignment& t : alloc.tasks) any_supervision |= !t.supervisors.empty();
  if (any_supervision) {
    CHECK(svg1.find("stroke-dasharray") != std::string::npos);
    CHECK(text1.find('/') != std::string::npos);
  }
}

TEST_CASE("single-task gantt shows one bar in the robot lane") {
  ValidatedScenario v = validated(single_robot_task());
  MilpProblem p = build_milp(v);
  MilpSolution sol = solve(p);
  Allocation alloc = decode_solution(sol, p, v);
  const std::string text = render_gantt(alloc, v, GanttFormat::Text);
  CHECK(text.find('#') != std::string::npos);
  const std::string svg = render_gantt(alloc, v, GanttFormat::Svg);
  CHECK(svg.find("<rect") != std::string::npos);
}
