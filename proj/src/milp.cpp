#include "hrta/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hrta {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int MilpProblem::human_ordinal(int j) const {
  for (int h = 0; h < static_cast<int>(human_ids.size()); ++h)
    if (human_ids[h] == j) return h;
  return -1;
}

std::string MilpProblem::column_name(int col) const {
  const VarRef& r = columns[col].ref;
  std::ostringstream os;
  switch (r.kind) {
    case VarKind::X: os << "X_" << r.i << "_" << r.j; break;
    case VarKind::S: os << "S_" << r.i << "_" << r.j; break;
    case VarKind::V: os << "V_" << r.i << "_" << r.k << "_" << r.j; break;
    case VarKind::Z: os << "Z_" << r.i << "_" << r.k; break;
    case VarKind::TStart: os << "ts_" << r.i; break;
    case VarKind::TEnd: os << "te_" << r.i; break;
    case VarKind::TMax: os << "tmax"; break;
  }
  return os.str();
}

MilpProblem build_milp(const ValidatedScenario& validated) {
  return build_milp(validated, BuildOptions{});
}

MilpProblem build_milp(const ValidatedScenario& validated, const BuildOptions& opts) {
  const Scenario& s = validated.scenario();
  const ParamMatrices& par = opts.params ? *opts.params : s.params;
  const double M = s.big_M;
  const double T_M = validated.horizon();
  const double cutoff = M * (1.0 - 1e-12);

  MilpProblem p;
  p.n_a = s.agent_count();
  p.n_h = s.human_count();
  p.human_ids = s.human_ids();
  p.horizon = T_M;
  p.big_M = M;
  if (opts.tasks.empty()) {
    p.task_ids.resize(s.task_count());
    for (int i = 0; i < s.task_count(); ++i) p.task_ids[i] = i;
  } else {
    p.task_ids = opts.tasks;
    for (int id : p.task_ids)
      if (id < 0 || id >= s.task_count())
        throw std::out_of_range("build_milp: task id out of range");
  }
  p.m = static_cast<int>(p.task_ids.size());

  const int m = p.m;
  const int n_a = p.n_a;
  const int n_h = p.n_h;
  const int pairs = p.pair_count();

  // Time variables share an upper bound. Re-planning may push schedules
  // past the nominal horizon, so widen when release times demand it, but
  // never past big-M (the disjunctive rows rely on M dominating any time).
  double time_ub = T_M;
  if (opts.start_floor > 0.0 || !opts.agent_release.empty()) {
    double base = opts.start_floor;
    for (double r : opts.agent_release) base = std::max(base, r);
    double span = 0.0;
    for (int ti = 0; ti < m; ++ti) {
      double worst = 0.0;
      for (int j = 0; j < n_a; ++j) {
        const double d = par.duration(p.task_ids[ti], j);
        if (d < cutoff) worst = std::max(worst, d);
      }
      span += worst;
    }
    time_ub = std::min(std::max(T_M, base + span), M * 0.999);
  }

  // Columns, in the documented layout order.
  p.columns.reserve(m * n_a + m * n_h + pairs * (n_a + 1) + 2 * m + 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n_a; ++j) {
      Column c;
      c.ref = {VarKind::X, i, -1, j};
      c.integral = true;
      if (par.duration(p.task_ids[i], j) >= cutoff) c.ub = 0.0;  // excluded pairing
      p.columns.push_back(c);
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int h = 0; h < n_h; ++h) {
      Column c;
      c.ref = {VarKind::S, i, -1, p.human_ids[h]};
      c.integral = true;
      p.columns.push_back(c);
    }
  }
  // Transitive closure of the precedence order on the task subset. A pair
  // already ordered by precedence has its disjunction decided: the V and Z
  // columns collapse to the matching constant (V=1 selects "i before k").
  std::vector<std::vector<char>> ordered(m, std::vector<char>(m, 0));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (a != b && s.constraints.precedence(p.task_ids[a], p.task_ids[b]) == 1)
        ordered[a][b] = 1;
  for (int k = 0; k < m; ++k)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (ordered[a][k] && ordered[k][b]) ordered[a][b] = 1;

  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      for (int j = 0; j < n_a; ++j) {
        Column c;
        c.ref = {VarKind::V, i, k, j};
        c.integral = true;
        if (ordered[i][k]) c.lb = c.ub = 1.0;
        if (ordered[k][i]) c.lb = c.ub = 0.0;
        p.columns.push_back(c);
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      Column c;
      c.ref = {VarKind::Z, i, k, -1};
      c.integral = true;
      if (ordered[i][k]) c.lb = c.ub = 1.0;
      if (ordered[k][i]) c.lb = c.ub = 0.0;
      p.columns.push_back(c);
    }
  }
  // Earliest-start propagation: any executor set needs at least the
  // smallest finite duration (second smallest for collaborative tasks), so
  // the longest precedence chain of those floors bounds every start/end
  // from below. Tightens the relaxation without touching the row set.
  std::vector<double> min_dur(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const int id = p.task_ids[i];
    std::vector<double> finite;
    for (int j = 0; j < n_a; ++j) {
      const double d = par.duration(id, j);
      if (d < cutoff) finite.push_back(d);
    }
    std::sort(finite.begin(), finite.end());
    const size_t need = s.tasks[id].collaborative ? 2 : 1;
    if (finite.size() >= need) min_dur[i] = finite[need - 1];
  }
  std::vector<double> start_lb(m, opts.start_floor);
  if (!opts.predecessor_floor.empty())
    for (int i = 0; i < m; ++i)
      start_lb[i] = std::max(start_lb[i], opts.predecessor_floor[p.task_ids[i]]);
  for (int pass = 0; pass < m; ++pass) {
    bool changed = false;
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        if (a == b || s.constraints.precedence(p.task_ids[a], p.task_ids[b]) != 1) continue;
        const double cand = start_lb[a] + min_dur[a];
        if (cand > start_lb[b] + 1e-12) {
          start_lb[b] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  double tmax_lb = 0.0;
  for (int i = 0; i < m; ++i) tmax_lb = std::max(tmax_lb, start_lb[i] + min_dur[i]);

  for (int i = 0; i < m; ++i) {
    Column c;
    c.ref = {VarKind::TStart, i, -1, -1};
    c.lb = start_lb[i];
    c.ub = time_ub;
    p.columns.push_back(c);
  }
  for (int i = 0; i < m; ++i) {
    Column c;
    c.ref = {VarKind::TEnd, i, -1, -1};
    c.lb = start_lb[i] + min_dur[i];
    c.ub = time_ub;
    p.columns.push_back(c);
  }
  {
    Column c;
    c.ref = {VarKind::TMax, -1, -1, -1};
    c.lb = tmax_lb;
    c.ub = time_ub;
    p.columns.push_back(c);
  }

  // Objective: makespan normalized by T_M, minus quality, plus workload.
  p.objective.assign(p.columns.size(), 0.0);
  p.objective[p.col_tmax()] = 1.0 / T_M;
  for (int i = 0; i < m; ++i) {
    const int id = p.task_ids[i];
    for (int j = 0; j < n_a; ++j) {
      if (par.duration(id, j) >= cutoff) continue;  // X fixed at 0
      p.objective[p.col_x(i, j)] = -par.exec_quality(id, j) + par.exec_workload(id, j);
    }
    for (int h = 0; h < n_h; ++h) {
      const int j = p.human_ids[h];
      p.objective[p.col_s(i, h)] = -par.sup_quality(id, j) + par.sup_workload(id, j);
    }
  }

  auto add_row = [&](std::vector<std::pair<int, double>> coeffs, RowSense sense, double rhs,
                     bool lazy = false) {
    std::sort(coeffs.begin(), coeffs.end());
    p.rows.push_back(Row{std::move(coeffs), sense, rhs, lazy});
  };

  // Makespan linearization: t_max >= t_end(i).
  for (int i = 0; i < m; ++i)
    add_row({{p.col_tmax(), 1.0}, {p.col_tend(i), -1.0}}, RowSense::GreaterEq, 0.0);

  // Exactly 1 + C_i executors per task.
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < n_a; ++j) coeffs.emplace_back(p.col_x(i, j), 1.0);
    const double rhs = s.tasks[p.task_ids[i]].collaborative ? 2.0 : 1.0;
    add_row(std::move(coeffs), RowSense::Equal, rhs);
  }

  // A human cannot execute and supervise the same task.
  for (int i = 0; i < m; ++i)
    for (int h = 0; h < n_h; ++h)
      add_row({{p.col_x(i, p.human_ids[h]), 1.0}, {p.col_s(i, h), 1.0}}, RowSense::LessEq, 1.0);

  // Minimum overall quality per task.
  for (int i = 0; i < m; ++i) {
    const int id = p.task_ids[i];
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < n_a; ++j) {
      if (par.duration(id, j) >= cutoff) continue;
      coeffs.emplace_back(p.col_x(i, j), par.exec_quality(id, j));
    }
    for (int h = 0; h < n_h; ++h)
      coeffs.emplace_back(p.col_s(i, h), par.sup_quality(id, p.human_ids[h]));
    add_row(std::move(coeffs), RowSense::GreaterEq, s.min_quality);
  }

  // Minimum duration when assigned: t_end - t_start >= Delta * X.
  for (int i = 0; i < m; ++i) {
    const int id = p.task_ids[i];
    for (int j = 0; j < n_a; ++j) {
      const double d = par.duration(id, j);
      if (d >= cutoff) continue;
      add_row({{p.col_tend(i), 1.0}, {p.col_tstart(i), -1.0}, {p.col_x(i, j), -d}},
              RowSense::GreaterEq, 0.0);
    }
  }

  // Precedence within the task set.
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      if (s.constraints.precedence(p.task_ids[a], p.task_ids[b]) == 1)
        add_row({{p.col_tstart(b), 1.0}, {p.col_tend(a), -1.0}}, RowSense::GreaterEq, 0.0);
    }
  }

  // Busy agents release their next task late: t_start >= release * (X or S).
  if (!opts.agent_release.empty()) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n_a; ++j) {
        const double rel = opts.agent_release[j];
        if (rel <= opts.start_floor + 1e-12) continue;
        if (par.duration(p.task_ids[i], j) < cutoff)
          add_row({{p.col_tstart(i), 1.0}, {p.col_x(i, j), -rel}}, RowSense::GreaterEq, 0.0);
        const int h = p.human_ordinal(j);
        if (h >= 0)
          add_row({{p.col_tstart(i), 1.0}, {p.col_s(i, h), -rel}}, RowSense::GreaterEq, 0.0);
      }
    }
  }

  // Agent overlap exclusion, one V per unordered pair and agent:
  //   ts_k - te_i >= -M(2 - X_ij - X_kj - S_ij - S_kj) - M(1 - V_ikj)
  //   ts_i - te_k >= -M(2 - X_ij - X_kj - S_ij - S_kj) - M V_ikj
  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      for (int j = 0; j < n_a; ++j) {
        std::vector<std::pair<int, double>> ind;
        ind.emplace_back(p.col_x(i, j), -M);
        ind.emplace_back(p.col_x(k, j), -M);
        const int h = p.human_ordinal(j);
        if (h >= 0) {
          ind.emplace_back(p.col_s(i, h), -M);
          ind.emplace_back(p.col_s(k, h), -M);
        }
        std::vector<std::pair<int, double>> r1 = ind;
        r1.emplace_back(p.col_tstart(k), 1.0);
        r1.emplace_back(p.col_tend(i), -1.0);
        r1.emplace_back(p.col_v(i, k, j), -M);
        add_row(std::move(r1), RowSense::GreaterEq, -3.0 * M, true);
        std::vector<std::pair<int, double>> r2 = std::move(ind);
        r2.emplace_back(p.col_tstart(i), 1.0);
        r2.emplace_back(p.col_tend(k), -1.0);
        r2.emplace_back(p.col_v(i, k, j), M);
        add_row(std::move(r2), RowSense::GreaterEq, -2.0 * M, true);
      }
    }
  }

  // Spatial exclusion for conflicting pairs:
  //   ts_k - te_i >= -M(1 - Z_ik),  ts_i - te_k >= -M Z_ik
  for (int i = 0; i < m; ++i) {
    for (int k = i + 1; k < m; ++k) {
      if (s.constraints.spatial(p.task_ids[i], p.task_ids[k]) != 1) continue;
      add_row({{p.col_tstart(k), 1.0}, {p.col_tend(i), -1.0}, {p.col_z(i, k), -M}},
              RowSense::GreaterEq, -M, true);
      add_row({{p.col_tstart(i), 1.0}, {p.col_tend(k), -1.0}, {p.col_z(i, k), M}},
              RowSense::GreaterEq, 0.0, true);
    }
  }

  return p;
}

std::string export_lp(const MilpProblem& p) {
  std::ostringstream os;
  os << "\\ hrta model export\n";
  os << "Minimize\n obj:";
  int line = 5;
  auto emit_term = [&](double coef, const std::string& name, bool first) {
    std::string tok;
    if (first) {
      tok = " " + (coef < 0 ? "-" + num(-coef) : num(coef)) + " " + name;
    } else {
      tok = (coef < 0 ? " - " + num(-coef) : " + " + num(coef)) + " " + name;
    }
    if (line + static_cast<int>(tok.size()) > 220) {
      os << "\n ";
      line = 1;
    }
    os << tok;
    line += static_cast<int>(tok.size());
  };
  bool first = true;
  for (int c = 0; c < p.column_count(); ++c) {
    if (p.objective[c] == 0.0) continue;
    emit_term(p.objective[c], p.column_name(c), first);
    first = false;
  }
  if (first) os << " 0 " << p.column_name(0);
  os << "\nSubject To\n";
  for (size_t r = 0; r < p.rows.size(); ++r) {
    const Row& row = p.rows[r];
    os << " c" << r << ":";
    line = 0;
    bool rf = true;
    for (const auto& [col, coef] : row.coeffs) {
      emit_term(coef, p.column_name(col), rf);
      rf = false;
    }
    switch (row.sense) {
      case RowSense::LessEq: os << " <= "; break;
      case RowSense::GreaterEq: os << " >= "; break;
      case RowSense::Equal: os << " = "; break;
    }
    os << num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (int c = 0; c < p.column_count(); ++c) {
    const Column& col = p.columns[c];
    if (col.lb == col.ub) {
      os << " " << p.column_name(c) << " = " << num(col.lb) << "\n";
    } else if (col.integral) {
      if (col.lb != 0.0 || col.ub != 1.0)
        os << " " << num(col.lb) << " <= " << p.column_name(c) << " <= " << num(col.ub) << "\n";
    } else {
      os << " " << num(col.lb) << " <= " << p.column_name(c) << " <= " << num(col.ub) << "\n";
    }
  }
  os << "Binaries\n";
  line = 0;
  for (int c = 0; c < p.column_count(); ++c) {
    if (!p.columns[c].integral) continue;
    const std::string name = p.column_name(c);
    if (line + static_cast<int>(name.size()) + 1 > 220) {
      os << "\n";
      line = 0;
    }
    os << " " << name;
    line += static_cast<int>(name.size()) + 1;
  }
  os << "\nEnd\n";
  return os.str();
}

}  // namespace hrta
