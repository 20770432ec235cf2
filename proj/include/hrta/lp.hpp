#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hrta/milp.hpp"

namespace hrta {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::IterLimit;
  double objective = 0.0;
  Eigen::VectorXd x;  // structural column values
  Eigen::VectorXd reduced_costs;  // structural, zero for basic columns
  int iterations = 0;
};

/// Basis snapshot for warm starts across branch-and-bound nodes. One state
/// byte per global variable (structural columns first, then one logical
/// per problem row): 0 unseen, 1 at lower, 2 at upper, 3 basic. Rows not
/// yet activated at snapshot time stay "unseen" and later enter the basis
/// through their logicals, so snapshots survive lazy-row activation.
struct BasisSnapshot {
  std::vector<uint8_t> state;
  bool empty() const { return state.empty(); }
};

struct SimplexOptions {
  double feas_tol = 1e-9;   // relative to 1 + |bound|
  double opt_tol = 1e-9;    // reduced-cost threshold, scaled per column
  double pivot_tol = 1e-10;
  int stall_limit = 50;
  int refactor_every = 128;
  int max_iterations = 0;   // 0: scale with problem size
};

/// Bounded-variable primal simplex over the computational form
/// [A | -I] (x, r) = 0 with r the row activities. Phase 1 minimizes the
/// total bound violation of the basics, phase 2 the true objective.
/// Dantzig pricing, switching to Bland's rule after a stall of 50 pivots
/// without objective progress.
class SimplexSolver {
 public:
  using Options = SimplexOptions;

  /// active_rows: indices into problem.rows to include (ascending).
  SimplexSolver(const MilpProblem& problem, std::vector<int> active_rows,
                Options options = Options());

  /// Columns to start nonbasic at their upper bound on cold starts (a
  /// crash hint computed from the problem alone); ignored where fixed.
  void set_crash_hint(std::vector<int> at_upper_cols);

  LpResult solve(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub);
  LpResult solve(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                 const BasisSnapshot& warm);

  BasisSnapshot snapshot() const;
  int active_row_count() const { return m_; }

 private:
  enum class VState : uint8_t { Basic, AtLower, AtUpper };

  void install_cold_basis();
  bool install_warm_basis(const BasisSnapshot& warm);
  void refactorize();
  void compute_basics();
  LpResult run();

  double var_lb(int v) const { return bounds_lb_[v]; }
  double var_ub(int v) const { return bounds_ub_[v]; }
  double nonbasic_value(int v) const;
  double bound_tol(double b) const;

  const MilpProblem& problem_;
  std::vector<int> active_rows_;
  Options opt_;
  int n_ = 0;          // structural columns
  int m_ = 0;          // active rows
  int total_rows_ = 0; // rows in the full problem (for global logical ids)

  // Sparse structural columns of [A | -I] restricted to active rows, in
  // packed CSC form (logical columns are implicit unit columns).
  std::vector<int> col_start_;
  std::vector<int> entry_row_;
  std::vector<double> entry_coef_;
  std::vector<double> cost_;
  std::vector<double> col_scale_;

  std::vector<double> bounds_lb_, bounds_ub_;
  std::vector<VState> vstate_;
  std::vector<int> basic_;
  std::vector<int> crash_at_upper_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  int pivots_since_refactor_ = 0;
};

/// Solves the LP relaxation of the full problem (every row active, all
/// integrality dropped) from a cold start.
LpResult solve_lp(const MilpProblem& problem);

}  // namespace hrta
