#pragma once

#include <string>
#include <vector>

#include "hrta/model.hpp"

namespace hrta {

enum class VarKind { X, S, V, Z, TStart, TEnd, TMax };

struct VarRef {
  VarKind kind = VarKind::X;
  int i = -1;  // task index (within the problem's task set)
  int k = -1;  // second task of a pair, for V and Z
  int j = -1;  // agent index, for X, S, V
};

struct Column {
  VarRef ref;
  double lb = 0.0;
  double ub = 1.0;
  bool integral = false;
};

enum class RowSense { LessEq, GreaterEq, Equal };

struct Row {
  std::vector<std::pair<int, double>> coeffs;  // (column, coefficient), ascending column
  RowSense sense = RowSense::GreaterEq;
  double rhs = 0.0;
  /// Disjunctive big-M rows (agent overlap, spatial exclusion) are marked
  /// lazy: the branch-and-bound activates them on demand. They are full
  /// members of the formulation either way.
  bool lazy = false;
};

/// Solver-agnostic sparse MILP. Column layout, in order:
///   X(i,j) for all tasks x agents, S(i,h) for all tasks x humans,
///   V(i,k,j) for ordered pairs i<k x agents, Z(i,k) for pairs i<k,
///   t_start(i), t_end(i), t_max.
struct MilpProblem {
  std::vector<Column> columns;
  std::vector<double> objective;  // dense, aligned with columns
  double objective_constant = 0.0;
  std::vector<Row> rows;

  // Shape of the underlying (sub)scenario, for decoding and naming.
  int m = 0;
  int n_a = 0;
  int n_h = 0;
  std::vector<int> human_ids;   // agent ids of humans, ascending
  std::vector<int> task_ids;    // original scenario task id per problem task index
  double horizon = 0.0;         // T_M used in the objective normalization
  double big_M = 0.0;

  int pair_count() const { return m * (m - 1) / 2; }
  int column_count() const { return static_cast<int>(columns.size()); }

  // Column lookups. pair_index expects i < k.
  int pair_index(int i, int k) const { return i * m - i * (i + 1) / 2 + (k - i - 1); }
  int col_x(int i, int j) const { return i * n_a + j; }
  int col_s(int i, int h_ord) const { return m * n_a + i * n_h + h_ord; }
  int col_v(int i, int k, int j) const { return m * n_a + m * n_h + pair_index(i, k) * n_a + j; }
  int col_z(int i, int k) const { return m * n_a + m * n_h + pair_count() * n_a + pair_index(i, k); }
  int col_tstart(int i) const { return m * n_a + m * n_h + pair_count() * (n_a + 1) + i; }
  int col_tend(int i) const { return col_tstart(i) + m; }
  int col_tmax() const { return column_count() - 1; }

  /// Ordinal of agent id j within human_ids, or -1 if j is not human.
  int human_ordinal(int j) const;

  /// Deterministic variable name (X_i_j, S_i_j, V_i_k_j, Z_i_k, ts_i, te_i,
  /// tmax). Indices are the problem-local task indices.
  std::string column_name(int col) const;
};

/// Extra knobs used by the re-planning builder; the default builds the
/// full problem anchored at time zero.
struct BuildOptions {
  const ParamMatrices* params = nullptr;       // belief override, else scenario params
  std::vector<int> tasks;                      // subset of task ids, else all
  double start_floor = 0.0;                    // every t_start >= this
  std::vector<double> agent_release;           // per agent id; start >= release if assigned
  std::vector<double> predecessor_floor;       // per original task id; extra t_start floor
};

MilpProblem build_milp(const ValidatedScenario& scenario);
MilpProblem build_milp(const ValidatedScenario& scenario, const BuildOptions& opts);

/// LP-format text (CPLEX dialect): objective, constraints, bounds and the
/// Binaries section, with the deterministic naming scheme above.
std::string export_lp(const MilpProblem& problem);

}  // namespace hrta
