// Command-line front end: validate scenarios, solve allocations, export LP
// files, render Gantt charts, run single executions and full campaigns.
//
// Exit codes: 0 success, 1 domain failure (invalid scenario, infeasible
// model), 2 usage or parse failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hrta/lp.hpp"
#include "hrta/milp.hpp"
#include "hrta/model.hpp"
#include "hrta/replan.hpp"
#include "hrta/scenario_io.hpp"
#include "hrta/schedule.hpp"
#include "hrta/sim.hpp"
#include "hrta/solver.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::optional<double> min_quality;
  std::optional<double> big_M;
};

int write_file(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  out << content;
  return 0;
}

std::optional<hrta::ValidatedScenario> load_and_validate(const std::string& path,
                                                         const Overrides& ov, int& exit_code,
                                                         bool print_issues = true) {
  hrta::Scenario raw;
  try {
    raw = hrta::load_scenario_file(path);
  } catch (const hrta::ScenarioParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    exit_code = 2;
    return std::nullopt;
  }
  if (ov.min_quality) raw.min_quality = *ov.min_quality;
  if (ov.big_M) raw.big_M = *ov.big_M;
  hrta::ValidationResult result = hrta::validate_scenario(std::move(raw));
  if (!result.ok()) {
    if (print_issues) {
      for (const auto& issue : result.issues)
        std::cerr << hrta::issue_code_name(issue.code) << ": " << issue.message << "\n";
    }
    exit_code = 1;
    return std::nullopt;
  }
  exit_code = 0;
  return result.scenario;
}

hrta::SolverConfig solver_config_from_env() {
  hrta::SolverConfig cfg;
  if (const char* env = std::getenv("HRTA_TIME_LIMIT")) {
    try {
      cfg.time_limit = std::stod(env);
    } catch (...) {
      std::cerr << "warning: ignoring malformed HRTA_TIME_LIMIT\n";
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"human-multi-robot task allocation toolkit"};
  app.require_subcommand(1);

  Overrides ov;
  std::string scenario_path;
  std::string out_path = "-";

  // --- validate ---
  auto* cmd_validate = app.add_subcommand("validate", "check a scenario file");
  cmd_validate->add_option("scenario", scenario_path, "scenario JSON")->required();

  // --- solve ---
  auto* cmd_solve = app.add_subcommand("solve", "solve the allocation problem");
  std::string gantt_fmt, gantt_out = "-", lp_out;
  cmd_solve->add_option("scenario", scenario_path, "scenario JSON")->required();
  cmd_solve->add_option("-o,--out", out_path, "allocation JSON output (default stdout)");
  cmd_solve->add_option("--gantt", gantt_fmt, "also render a gantt chart: text|svg")
      ->check(CLI::IsMember({"text", "svg"}));
  cmd_solve->add_option("--gantt-out", gantt_out, "gantt output path");
  cmd_solve->add_option("--export-lp", lp_out, "write the LP file instead of solving");
  cmd_solve->add_option("--min-quality", ov.min_quality, "override the quality floor");
  cmd_solve->add_option("--big-m", ov.big_M, "override big-M");

  // --- gantt ---
  auto* cmd_gantt = app.add_subcommand("gantt", "solve and render the schedule");
  std::string gantt_fmt2 = "text";
  cmd_gantt->add_option("scenario", scenario_path, "scenario JSON")->required();
  cmd_gantt->add_option("-f,--format", gantt_fmt2, "text|svg")
      ->check(CLI::IsMember({"text", "svg"}));
  cmd_gantt->add_option("-o,--out", out_path, "output path (default stdout)");

  // --- simulate ---
  auto* cmd_sim = app.add_subcommand("simulate", "run one stochastic execution");
  uint64_t seed = 1;
  std::string policy_name = "replan";
  std::string replay_path, log_path;
  hrta::NoiseConfig noise;
  double delta_threshold = 0.15;
  cmd_sim->add_option("scenario", scenario_path, "scenario JSON")->required();
  cmd_sim->add_option("--seed", seed, "rng seed");
  cmd_sim->add_option("--policy", policy_name, "replan|static")
      ->check(CLI::IsMember({"replan", "static"}));
  cmd_sim->add_option("-o,--out", out_path, "trace JSON output (default stdout)");
  cmd_sim->add_option("--replay-log", log_path, "also write the outcome log (ndjson)");
  cmd_sim->add_option("--replay", replay_path,
                      "replay a recorded outcome log through the monitor/delta pipeline");
  cmd_sim->add_option("--quality-sigma", noise.quality_sigma, "");
  cmd_sim->add_option("--duration-sigma", noise.duration_sigma, "");
  cmd_sim->add_option("--workload-sigma", noise.workload_sigma, "");
  cmd_sim->add_option("--initial-quality-sigma", noise.initial_quality_sigma, "");
  cmd_sim->add_option("--intervention-probability", noise.intervention_probability, "");
  bool no_guard = false;
  cmd_sim->add_flag("--no-guard", no_guard, "disable the feasibility guard");
  cmd_sim->add_option("--delta-threshold", delta_threshold, "re-allocation threshold");

  // --- campaign ---
  auto* cmd_campaign = app.add_subcommand("campaign", "paired-policy simulation campaign");
  int trials = 50;
  uint64_t seed_base = 1;
  std::string csv_path;
  hrta::NoiseConfig cnoise;
  double cdelta_threshold = 0.15;
  bool cno_guard = false;
  cmd_campaign->add_option("scenario", scenario_path, "scenario JSON")->required();
  cmd_campaign->add_option("--trials", trials, "number of paired trials")->check(CLI::PositiveNumber);
  cmd_campaign->add_option("--seed", seed_base, "base seed; trial t uses seed+t");
  cmd_campaign->add_option("-o,--out", out_path, "report JSON output (default stdout)");
  cmd_campaign->add_option("--csv", csv_path, "also write per-trial rows as CSV");
  cmd_campaign->add_option("--quality-sigma", cnoise.quality_sigma, "");
  cmd_campaign->add_option("--duration-sigma", cnoise.duration_sigma, "");
  cmd_campaign->add_option("--workload-sigma", cnoise.workload_sigma, "");
  cmd_campaign->add_option("--initial-quality-sigma", cnoise.initial_quality_sigma, "");
  cmd_campaign->add_option("--intervention-probability", cnoise.intervention_probability, "");
  cmd_campaign->add_flag("--no-guard", cno_guard, "disable the feasibility guard");
  cmd_campaign->add_option("--delta-threshold", cdelta_threshold, "re-allocation threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  int exit_code = 0;

  if (cmd_validate->parsed()) {
    auto validated = load_and_validate(scenario_path, ov, exit_code);
    if (!validated) return exit_code;
    const hrta::Scenario& s = validated->scenario();
    std::cout << "ok: " << s.task_count() << " tasks, " << s.agent_count() << " agents ("
              << s.human_count() << " human), horizon " << validated->horizon() << " s\n";
    return 0;
  }

  if (cmd_solve->parsed()) {
    auto validated = load_and_validate(scenario_path, ov, exit_code);
    if (!validated) return exit_code;
    hrta::MilpProblem problem = hrta::build_milp(*validated);
    if (!lp_out.empty()) return write_file(lp_out, hrta::export_lp(problem));

    hrta::MilpSolution sol = hrta::solve(problem, solver_config_from_env());
    if (sol.status != hrta::SolveStatus::Optimal) {
      json j{{"schema_version", 1}, {"status", hrta::solve_status_name(sol.status)}};
      write_file(out_path, j.dump(2) + "\n");
      return 1;
    }
    hrta::Allocation alloc = hrta::decode_solution(sol, problem, *validated);
    hrta::CostBreakdown cost =
        hrta::evaluate_cost(alloc, validated->scenario().params, validated->horizon());
    int rc = write_file(out_path, hrta::allocation_json(alloc, cost, sol));
    if (rc != 0) return rc;
    if (!gantt_fmt.empty()) {
      const auto fmt = gantt_fmt == "svg" ? hrta::GanttFormat::Svg : hrta::GanttFormat::Text;
      rc = write_file(gantt_out, hrta::render_gantt(alloc, *validated, fmt));
    }
    return rc;
  }

  if (cmd_gantt->parsed()) {
    auto validated = load_and_validate(scenario_path, ov, exit_code);
    if (!validated) return exit_code;
    hrta::MilpProblem problem = hrta::build_milp(*validated);
    hrta::MilpSolution sol = hrta::solve(problem, solver_config_from_env());
    if (sol.status != hrta::SolveStatus::Optimal) {
      std::cerr << "solve failed: " << hrta::solve_status_name(sol.status) << "\n";
      return 1;
    }
    hrta::Allocation alloc = hrta::decode_solution(sol, problem, *validated);
    const auto fmt = gantt_fmt2 == "svg" ? hrta::GanttFormat::Svg : hrta::GanttFormat::Text;
    return write_file(out_path, hrta::render_gantt(alloc, *validated, fmt));
  }

  if (cmd_sim->parsed()) {
    auto validated = load_and_validate(scenario_path, ov, exit_code);
    if (!validated) return exit_code;
    noise.feasibility_guard = !no_guard;
    hrta::ReplanConfig rcfg{delta_threshold};

    if (!replay_path.empty()) {
      std::ifstream in(replay_path);
      if (!in) {
        std::cerr << "error: cannot read " << replay_path << "\n";
        return 2;
      }
      std::ostringstream buf;
      buf << in.rdbuf();
      std::vector<hrta::TaskOutcome> outcomes;
      try {
        outcomes = hrta::parse_outcome_log(buf.str());
      } catch (const std::exception& e) {
        std::cerr << "replay parse error: " << e.what() << "\n";
        return 2;
      }
      hrta::ReplayResult rr =
          hrta::replay_outcomes(*validated, outcomes, solver_config_from_env());
      json j{{"schema_version", 1}, {"deltas", rr.deltas}};
      return write_file(out_path, j.dump(2) + "\n");
    }

    hrta::ExecutionTrace trace =
        hrta::run_execution(*validated, noise, seed,
                            policy_name == "static" ? hrta::Policy::Static
                                                    : hrta::Policy::ReplanEnabled,
                            rcfg, solver_config_from_env());
    int rc = write_file(out_path, hrta::execution_trace_json(trace));
    if (rc == 0 && !log_path.empty())
      rc = write_file(log_path, hrta::outcome_log_ndjson(trace.outcomes));
    if (!trace.completed) return 1;
    return rc;
  }

  if (cmd_campaign->parsed()) {
    auto validated = load_and_validate(scenario_path, ov, exit_code);
    if (!validated) return exit_code;
    cnoise.feasibility_guard = !cno_guard;
    hrta::ReplanConfig rcfg{cdelta_threshold};
    hrta::CampaignReport report = hrta::run_campaign(*validated, cnoise, trials, seed_base,
                                                     rcfg, solver_config_from_env());
    int rc = write_file(out_path, hrta::campaign_report_json(report));
    if (rc == 0 && !csv_path.empty())
      rc = write_file(csv_path, hrta::campaign_report_csv(report));
    return rc;
  }

  return 2;
}
