#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "hrta/milp.hpp"
#include "hrta/scenario_io.hpp"

using namespace hrta;

namespace {

ValidatedScenario make_small(int m, int n_robots, int n_humans,
                             const std::vector<int>& collab = {}) {
  Scenario s;
  const int n_a = n_robots + n_humans;
  for (int j = 0; j < n_a; ++j)
    s.agents.push_back({j, j < n_robots ? AgentKind::Robot : AgentKind::Human, ""});
  for (int i = 0; i < m; ++i) {
    const bool c =
        std::find(collab.begin(), collab.end(), i) != collab.end() && n_a >= 2;
    s.tasks.push_back({i, i, c, std::nullopt});
  }
  s.params.duration.setConstant(m, n_a, 10.0);
  s.params.exec_quality.setConstant(m, n_a, 0.9);
  s.params.sup_quality.setZero(m, n_a);
  for (int j = n_robots; j < n_a; ++j) s.params.sup_quality.col(j).setConstant(1.0);
  s.params.exec_workload.setConstant(m, n_a, 0.5);
  s.params.sup_workload.setConstant(m, n_a, 0.5);
  s.constraints.precedence = Eigen::MatrixXi::Zero(m, m);
  s.constraints.spatial = Eigen::MatrixXi::Zero(m, m);
  s.min_quality = 0.8;
  ValidationResult r = validate_scenario(std::move(s));
  REQUIRE(r.ok());
  return *r.scenario;
}

ValidatedScenario bundled() {
  Scenario s = load_scenario_file(std::string(HRTA_DATA_DIR) + "/assembly.json");
  ValidationResult r = validate_scenario(std::move(s));
  REQUIRE(r.ok());
  return *r.scenario;
}

int expected_columns(int m, int n_a, int n_h) {
  const int p = m * (m - 1) / 2;
  return m * n_a + m * n_h + p * n_a + p + 2 * m + 1;
}

}  // namespace

TEST_CASE("column count follows the closed formula") {
  // m=2, n_a=2 (1 robot, 1 human): X:4 S:2 V:2 Z:1 times:4 tmax:1 = 14
  MilpProblem p = build_milp(make_small(2, 1, 1));
  CHECK(p.column_count() == 14);
  CHECK(p.column_count() == expected_columns(2, 2, 1));

  MilpProblem q = build_milp(make_small(3, 2, 1));
  CHECK(q.column_count() == expected_columns(3, 3, 1));
}

TEST_CASE("paper-scale scenario has 449 columns") {
  MilpProblem p = build_milp(bundled());
  // X:42 S:14 V:273 Z:91 times:28 tmax:1
  CHECK(p.column_count() == 449);
  CHECK(p.column_count() == expected_columns(14, 3, 1));
}

TEST_CASE("every row references existing columns, ascending") {
  MilpProblem p = build_milp(bundled());
  for (const Row& row : p.rows) {
    int prev = -1;
    for (const auto& [col, coef] : row.coeffs) {
      CHECK(col > prev);
      CHECK(col < p.column_count());
      CHECK(coef != 0.0);
      prev = col;
    }
  }
}

TEST_CASE("collaborative tasks demand exactly two executors") {
  ValidatedScenario v = make_small(2, 2, 0, {0});
  MilpProblem p = build_milp(v);
  bool found = false;
  for (const Row& row : p.rows) {
    if (row.sense != RowSense::Equal) continue;
    if (row.coeffs.size() == 2 && row.coeffs[0].first == p.col_x(0, 0) &&
        row.coeffs[1].first == p.col_x(0, 1)) {
      CHECK(row.rhs == doctest::Approx(2.0));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("excluded pairings have their X column fixed to zero") {
  Scenario s = bundled().scenario();
  ValidationResult r = validate_scenario(s);
  MilpProblem p = build_milp(*r.scenario);
  // task 0 is out of r1's reach in the bundled scenario
  CHECK(p.columns[p.col_x(0, 0)].ub == 0.0);
  CHECK(p.columns[p.col_x(0, 1)].ub == 1.0);
}

TEST_CASE("robot supervision columns do not exist") {
  MilpProblem p = build_milp(bundled());
  for (const Column& c : p.columns) {
    if (c.ref.kind != VarKind::S) continue;
    CHECK(c.ref.j == 2);  // the only human
  }
}

TEST_CASE("objective mirrors quality minus workload with normalized makespan") {
  ValidatedScenario v = make_small(1, 1, 0);
  MilpProblem p = build_milp(v);
  CHECK(p.objective[p.col_tmax()] == doctest::Approx(1.0 / v.horizon()));
  CHECK(p.objective[p.col_x(0, 0)] == doctest::Approx(0.5 - 0.9));
}

TEST_CASE("lp export names and sections") {
  ValidatedScenario v = make_small(1, 1, 0);
  MilpProblem p = build_milp(v);
  const std::string lp = export_lp(p);
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Subject To") != std::string::npos);
  CHECK(lp.find("Binaries") != std::string::npos);
  CHECK(lp.find("X_0_0") != std::string::npos);
  CHECK(lp.find("tmax") != std::string::npos);
  CHECK(lp.find("End") != std::string::npos);
}

TEST_CASE("lp export mentions every column exactly once in bounds/binaries") {
  MilpProblem p = build_milp(bundled());
  const std::string lp = export_lp(p);

  // Collect variable names from the Binaries section and the Bounds section.
  std::set<std::string> names;
  std::istringstream is(lp);
  std::string line;
  bool in_bounds = false, in_bin = false;
  while (std::getline(is, line)) {
    if (line == "Bounds") { in_bounds = true; in_bin = false; continue; }
    if (line == "Binaries") { in_bin = true; in_bounds = false; continue; }
    if (line == "End") break;
    if (in_bounds) {
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok)
        if (std::isalpha(static_cast<unsigned char>(tok[0]))) names.insert(tok);
    } else if (in_bin) {
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) names.insert(tok);
    }
  }
  // Binaries plus explicitly bounded continuous columns cover every column:
  // binaries appear in Binaries, time columns in Bounds.
  std::set<std::string> expected;
  for (int c = 0; c < p.column_count(); ++c) expected.insert(p.column_name(c));
  CHECK(names == expected);
}

TEST_CASE("replan-style restriction to all tasks is the identity") {
  ValidatedScenario v = bundled();
  BuildOptions opts;
  std::vector<int> all(14);
  for (int i = 0; i < 14; ++i) all[i] = i;
  opts.tasks = all;
  MilpProblem base = build_milp(v);
  MilpProblem restricted = build_milp(v, opts);
  CHECK(base.column_count() == restricted.column_count());
  CHECK(base.rows.size() == restricted.rows.size());
  CHECK(export_lp(base) == export_lp(restricted));
}

TEST_CASE("big-M rows are marked lazy, structural rows are not") {
  MilpProblem p = build_milp(bundled());
  int lazy = 0, eager = 0;
  for (const Row& row : p.rows) (row.lazy ? lazy : eager)++;
  // agent-overlap pairs: 2 * 91 * 3 = 546; spatial pairs (6,7),(12,13): 4
  CHECK(lazy == 550);
  CHECK(eager == static_cast<int>(p.rows.size()) - 550);
}
