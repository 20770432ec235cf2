#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hrta/scenario_io.hpp"
#include "hrta/sim.hpp"
#include "oracle.hpp"

using namespace hrta;

namespace {

ValidatedScenario bundled() {
  Scenario s = load_scenario_file(std::string(HRTA_DATA_DIR) + "/assembly.json");
  ValidationResult r = validate_scenario(std::move(s));
  REQUIRE(r.ok());
  return *r.scenario;
}

NoiseConfig zero_noise() {
  NoiseConfig n;
  n.quality_sigma = 0.0;
  n.duration_sigma = 0.0;
  n.workload_sigma = 0.0;
  n.initial_quality_sigma = 0.0;
  n.intervention_probability = 0.5;
  n.feasibility_guard = false;
  return n;
}

NoiseConfig paper_noise() {
  return NoiseConfig{};  // defaults mirror the campaign levels
}

TaskAssignment assignment(int task, std::vector<int> execs, std::vector<int> sups) {
  TaskAssignment t;
  t.task = task;
  t.executors = std::move(execs);
  t.supervisors = std::move(sups);
  t.start = 0.0;
  t.end = 10.0;
  return t;
}

}  // namespace

TEST_CASE("zero-sigma outcomes equal planned values exactly") {
  ValidatedScenario v = bundled();
  NoiseConfig noise = zero_noise();
  noise.intervention_probability = 0.0;
  std::mt19937_64 rng(1);
  // task 2 belongs to the r1-reachable cubes: solo executor, quality 0.8
  TaskOutcome o = sample_outcome(assignment(2, {0}, {}), v, v.scenario().params, noise, rng);
  CHECK(o.measured_quality == doctest::Approx(0.8));
  CHECK(o.measured_duration == doctest::Approx(65.0));
  CHECK(o.measured_exec_workload.at(0) == doctest::Approx(0.5));
  CHECK(!o.supervised);

  // supervised task with guaranteed intervention credits the supervisor
  noise.intervention_probability = 1.0;
  TaskOutcome os = sample_outcome(assignment(0, {1}, {2}), v, v.scenario().params, noise, rng);
  CHECK(os.supervised);
  CHECK(os.intervened);
  CHECK(os.measured_quality == doctest::Approx(1.0));  // human supervision quality
  CHECK(os.measured_sup_workload.at(2) == doctest::Approx(1.0));
}

TEST_CASE("fixed seed reproduces the sample") {
  ValidatedScenario v = bundled();
  NoiseConfig noise = paper_noise();
  std::mt19937_64 a(42), b(42);
  TaskOutcome oa = sample_outcome(assignment(0, {1}, {2}), v, v.scenario().params, noise, a);
  TaskOutcome ob = sample_outcome(assignment(0, {1}, {2}), v, v.scenario().params, noise, b);
  CHECK(oa.measured_quality == ob.measured_quality);
  CHECK(oa.measured_duration == ob.measured_duration);
  CHECK(oa.intervened == ob.intervened);
  CHECK(oa.measured_exec_workload == ob.measured_exec_workload);
}

TEST_CASE("quality sampler statistics match the configured noise") {
  // law-of-large-numbers check, pre-clamp values kept away from the clamp
  ValidatedScenario v = bundled();
  NoiseConfig noise = zero_noise();
  noise.quality_sigma = 0.1;
  std::mt19937_64 rng(7);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    // group-3 item on robot 0: planned quality 0.5, far from both clamps
    TaskOutcome o =
        sample_outcome(assignment(10, {0}, {}), v, v.scenario().params, noise, rng);
    sum += o.measured_quality;
    sum2 += o.measured_quality * o.measured_quality;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean - 0.5) < 0.01);
  CHECK(std::abs(std - 0.1) < 0.01);
}

TEST_CASE("zero noise executes the plan with all deltas zero") {
  ValidatedScenario v = bundled();
  for (Policy policy : {Policy::ReplanEnabled, Policy::Static}) {
    ExecutionTrace t = run_execution(v, zero_noise(), 3, policy);
    REQUIRE(t.completed);
    REQUIRE(t.deltas.size() == 14);
    for (double d : t.deltas) CHECK(d == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(t.replans.empty());
    CHECK(t.outcomes.size() == 14);
  }
}

TEST_CASE("static policy never replans even under heavy noise") {
  ValidatedScenario v = bundled();
  NoiseConfig noise = paper_noise();
  ExecutionTrace t = run_execution(v, noise, 11, Policy::Static);
  REQUIRE(t.completed);
  CHECK(t.replans.empty());
}

TEST_CASE("guarded paper-noise run completes with a valid executed schedule") {
  ValidatedScenario v = bundled();
  NoiseConfig noise = paper_noise();
  ExecutionTrace t = run_execution(v, noise, 5, Policy::ReplanEnabled);
  REQUIRE(t.completed);
  REQUIRE(t.outcomes.size() == 14);
  REQUIRE(t.deltas.size() == 14);
  CHECK(t.deltas.back() == doctest::Approx(0.0));

  // realized schedule respects precedence, spatial exclusion and agent
  // disjointness with the realized interval bounds
  const Scenario& s = v.scenario();
  auto find_task = [&](int id) {
    for (const TaskAssignment& ta : t.realized_tasks)
      if (ta.task == id) return &ta;
    return static_cast<const TaskAssignment*>(nullptr);
  };
  for (int i = 0; i < 14; ++i) {
    for (int k = 0; k < 14; ++k) {
      if (s.constraints.precedence(i, k) == 1)
        CHECK(find_task(k)->start >= find_task(i)->end - 1e-6);
    }
  }
  for (int i = 0; i < 14; ++i) {
    for (int k = i + 1; k < 14; ++k) {
      const TaskAssignment* a = find_task(i);
      const TaskAssignment* b = find_task(k);
      const double ov = std::min(a->end, b->end) - std::max(a->start, b->start);
      if (s.constraints.spatial(i, k) == 1) CHECK(ov <= 1e-6);
      for (int j = 0; j < 3; ++j) {
        auto uses = [&](const TaskAssignment* ta) {
          return std::find(ta->executors.begin(), ta->executors.end(), j) !=
                     ta->executors.end() ||
                 std::find(ta->supervisors.begin(), ta->supervisors.end(), j) !=
                     ta->supervisors.end();
        };
        if (uses(a) && uses(b)) CHECK(ov <= 1e-6);
      }
    }
  }
}

TEST_CASE("same seed gives byte-identical traces") {
  ValidatedScenario v = bundled();
  NoiseConfig noise = paper_noise();
  ExecutionTrace a = run_execution(v, noise, 99, Policy::ReplanEnabled);
  ExecutionTrace b = run_execution(v, noise, 99, Policy::ReplanEnabled);
  CHECK(execution_trace_json(a) == execution_trace_json(b));
}

TEST_CASE("campaign determinism and paired boundary behavior") {
  ValidatedScenario v = bundled();
  NoiseConfig noise = paper_noise();
  CampaignReport r1 = run_campaign(v, noise, 3, 1000);
  CampaignReport r2 = run_campaign(v, noise, 3, 1000);
  CHECK(campaign_report_json(r1) == campaign_report_json(r2));
  CHECK(campaign_report_csv(r1) == campaign_report_csv(r2));

  REQUIRE(r1.replan.trial_deltas.size() == 3);
  for (int t = 0; t < 3; ++t) {
    // same initial plan and same first draw: first delta identical
    CHECK(r1.replan.trial_deltas[t].front() ==
          doctest::Approx(r1.fixed.trial_deltas[t].front()));
    // empty remainder at the end: final delta zero for both policies
    CHECK(r1.replan.trial_deltas[t].back() == doctest::Approx(0.0));
    CHECK(r1.fixed.trial_deltas[t].back() == doctest::Approx(0.0));
  }
}

TEST_CASE("single zero-noise trial: policies coincide") {
  ValidatedScenario v = bundled();
  CampaignReport r = run_campaign(v, zero_noise(), 1, 5);
  CHECK(r.replan.cost_mean == doctest::Approx(r.fixed.cost_mean));
  for (double d : r.replan.delta_mean) CHECK(d == doctest::Approx(0.0).epsilon(1e-9));
  for (double d : r.fixed.delta_mean) CHECK(d == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.replan.mean_replans == doctest::Approx(0.0));
}

TEST_CASE("outcome log round-trips through ndjson") {
  ValidatedScenario v = bundled();
  ExecutionTrace t = run_execution(v, paper_noise(), 17, Policy::ReplanEnabled);
  REQUIRE(t.completed);
  const std::string log = outcome_log_ndjson(t.outcomes);
  std::vector<TaskOutcome> parsed = parse_outcome_log(log);
  REQUIRE(parsed.size() == t.outcomes.size());
  CHECK(outcome_log_ndjson(parsed) == log);
}

TEST_CASE("replay recomputes a delta per logged outcome") {
  ValidatedScenario v = bundled();
  ExecutionTrace t = run_execution(v, paper_noise(), 23, Policy::Static);
  REQUIRE(t.completed);
  ReplayResult rr = replay_outcomes(v, t.outcomes);
  REQUIRE(rr.deltas.size() == t.outcomes.size());
  CHECK(rr.deltas.back() == doctest::Approx(0.0));
}

TEST_CASE("with the guard on, paper-noise trials never terminate infeasible") {
  ValidatedScenario v = bundled();
  NoiseConfig noise = paper_noise();
  for (uint64_t seed = 200; seed < 212; ++seed) {
    ExecutionTrace t = run_execution(v, noise, seed, Policy::ReplanEnabled);
    CHECK_MESSAGE(t.completed, "seed " << seed);
  }
}
