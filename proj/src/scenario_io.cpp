#include "hrta/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hrta {

using nlohmann::json;

namespace {

// Matrix cells may be numbers or the string "M" (scenario big-M sentinel).
double cell_value(const json& cell, double big_M, const char* key) {
  if (cell.is_string()) {
    if (cell.get<std::string>() == "M") return big_M;
    throw ScenarioParseError(std::string(key) + ": only the string \"M\" is allowed as sentinel");
  }
  if (!cell.is_number())
    throw ScenarioParseError(std::string(key) + ": matrix cells must be numbers or \"M\"");
  return cell.get<double>();
}

Eigen::MatrixXd parse_matrix(const json& j, const char* key, int m, int n_a, double big_M) {
  if (!j.contains(key)) throw ScenarioParseError(std::string("missing key: ") + key);
  const json& rows = j.at(key);
  if (!rows.is_array() || static_cast<int>(rows.size()) != m)
    throw ScenarioParseError(std::string(key) + ": expected " + std::to_string(m) + " rows");
  Eigen::MatrixXd out(m, n_a);
  for (int i = 0; i < m; ++i) {
    const json& row = rows.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != n_a)
      throw ScenarioParseError(std::string(key) + ": row " + std::to_string(i) + " must have " +
                               std::to_string(n_a) + " entries");
    for (int a = 0; a < n_a; ++a) out(i, a) = cell_value(row.at(a), big_M, key);
  }
  return out;
}

Eigen::MatrixXi parse_pairs(const json& j, const char* key, int m) {
  Eigen::MatrixXi out = Eigen::MatrixXi::Zero(m, m);
  if (!j.contains(key)) return out;
  for (const json& pair : j.at(key)) {
    if (!pair.is_array() || pair.size() != 2)
      throw ScenarioParseError(std::string(key) + ": entries must be [i,k] pairs");
    const int i = pair.at(0).get<int>();
    const int k = pair.at(1).get<int>();
    if (i < 0 || i >= m || k < 0 || k >= m)
      throw ScenarioParseError(std::string(key) + ": task index out of range");
    out(i, k) = 1;
    if (std::string(key) == "spatial") out(k, i) = 1;
  }
  return out;
}

}  // namespace

Scenario load_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ScenarioParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    Scenario s;
    s.big_M = j.value("big_M", 1000.0);
    s.min_quality = j.value("min_quality", 0.8);
    s.epsilon = j.value("epsilon", 0.0);
    if (j.contains("horizon")) s.horizon = j.at("horizon").get<double>();

    for (const json& ja : j.at("agents")) {
      Agent a;
      a.id = ja.at("id").get<int>();
      const std::string kind = ja.at("kind").get<std::string>();
      if (kind == "human")
        a.kind = AgentKind::Human;
      else if (kind == "robot")
        a.kind = AgentKind::Robot;
      else
        throw ScenarioParseError("agent kind must be \"human\" or \"robot\"");
      a.label = ja.value("label", std::string());
      s.agents.push_back(std::move(a));
    }
    for (const json& jt : j.at("tasks")) {
      Task t;
      t.id = jt.at("id").get<int>();
      t.group = jt.at("group").get<int>();
      t.collaborative = jt.value("collaborative", false);
      if (jt.contains("position")) {
        const json& p = jt.at("position");
        if (!p.is_array() || p.size() != 3)
          throw ScenarioParseError("task position must be a 3-vector");
        t.position = Eigen::Vector3d(p.at(0).get<double>(), p.at(1).get<double>(),
                                     p.at(2).get<double>());
      }
      s.tasks.push_back(std::move(t));
    }

    const int m = s.task_count();
    const int n_a = s.agent_count();
    s.params.duration = parse_matrix(j, "duration", m, n_a, s.big_M);
    s.params.exec_quality = parse_matrix(j, "exec_quality", m, n_a, s.big_M);
    s.params.sup_quality = parse_matrix(j, "sup_quality", m, n_a, s.big_M);
    s.params.exec_workload = parse_matrix(j, "exec_workload", m, n_a, s.big_M);
    s.params.sup_workload = parse_matrix(j, "sup_workload", m, n_a, s.big_M);
    s.constraints.precedence = parse_pairs(j, "precedence", m);
    if (j.contains("spatial")) s.constraints.spatial = parse_pairs(j, "spatial", m);
    return s;
  } catch (const json::exception& e) {
    throw ScenarioParseError(std::string("scenario schema error: ") + e.what());
  }
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = 1;
  j["big_M"] = s.big_M;
  j["min_quality"] = s.min_quality;
  if (s.epsilon > 0.0) j["epsilon"] = s.epsilon;
  if (s.horizon) j["horizon"] = *s.horizon;
  j["agents"] = json::array();
  for (const Agent& a : s.agents) {
    j["agents"].push_back({{"id", a.id},
                           {"kind", a.kind == AgentKind::Human ? "human" : "robot"},
                           {"label", a.label}});
  }
  j["tasks"] = json::array();
  for (const Task& t : s.tasks) {
    json jt{{"id", t.id}, {"group", t.group}, {"collaborative", t.collaborative}};
    if (t.position)
      jt["position"] = {t.position->x(), t.position->y(), t.position->z()};
    j["tasks"].push_back(std::move(jt));
  }
  auto dump_matrix = [&](const char* key, const Eigen::MatrixXd& mtx) {
    json rows = json::array();
    for (int i = 0; i < mtx.rows(); ++i) {
      json row = json::array();
      for (int a = 0; a < mtx.cols(); ++a) {
        if (s.is_sentinel(mtx(i, a)))
          row.push_back("M");
        else
          row.push_back(mtx(i, a));
      }
      rows.push_back(std::move(row));
    }
    j[key] = std::move(rows);
  };
  dump_matrix("duration", s.params.duration);
  dump_matrix("exec_quality", s.params.exec_quality);
  dump_matrix("sup_quality", s.params.sup_quality);
  dump_matrix("exec_workload", s.params.exec_workload);
  dump_matrix("sup_workload", s.params.sup_workload);
  auto dump_pairs = [&](const char* key, const Eigen::MatrixXi& mtx, bool upper_only) {
    json pairs = json::array();
    if (mtx.size() != 0) {
      for (int i = 0; i < mtx.rows(); ++i)
        for (int k = upper_only ? i + 1 : 0; k < mtx.cols(); ++k)
          if (mtx(i, k) == 1) pairs.push_back({i, k});
    }
    j[key] = std::move(pairs);
  };
  dump_pairs("precedence", s.constraints.precedence, false);
  dump_pairs("spatial", s.constraints.spatial, true);
  return j.dump(2) + "\n";
}

}  // namespace hrta
