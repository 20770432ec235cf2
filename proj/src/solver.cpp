#include "hrta/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <array>
#include <map>
#include <memory>
#include <queue>
#include <stdexcept>

#include "hrta/lp.hpp"

namespace hrta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NodeData {
  int parent = -1;
  int fixed_col = -1;
  double fixed_lb = 0.0;
  double fixed_ub = 1.0;
  double bound = -kInf;  // parent relaxation bound at creation
  int depth = 0;
  // columns pinned by reduced-cost fixing at the parent, inherited here
  std::vector<int32_t> rc_zero, rc_one;
  // parent's optimal basis, shared by both children as a warm start
  std::shared_ptr<const BasisSnapshot> warm;
};

struct QueueEntry {
  double bound;
  int depth;
  long id;
};

struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    if (a.depth != b.depth) return a.depth < b.depth;  // deeper first
    return a.id > b.id;                                // older first
  }
};

double row_activity(const Row& row, const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (const auto& [col, coef] : row.coeffs) acc += coef * x[col];
  return acc;
}

bool row_satisfied(const Row& row, const Eigen::VectorXd& x, double tol) {
  const double a = row_activity(row, x);
  const double t = tol * (1.0 + std::abs(row.rhs));
  switch (row.sense) {
    case RowSense::LessEq: return a <= row.rhs + t;
    case RowSense::GreaterEq: return a >= row.rhs - t;
    case RowSense::Equal: return std::abs(a - row.rhs) <= t;
  }
  return false;
}

}  // namespace

const char* solve_status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NodeLimit: return "node_limit";
  }
  return "unknown";
}

MilpSolution solve(const MilpProblem& problem, const SolverConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.column_count();
  const int total_rows = static_cast<int>(problem.rows.size());

  MilpSolution out;

  // Rows found violated by integral candidates join this global set; each
  // node's LP then carries the subset whose agent-overlap indicator is
  // still reachable under the node's bounds (a pair row with an executor
  // fixed away holds automatically and would only bloat the basis).
  std::vector<char> is_active(total_rows, 0);
  for (int r = 0; r < total_rows; ++r)
    if (!problem.rows[r].lazy) is_active[r] = 1;

  std::vector<std::vector<int>> indicator_cols(total_rows);
  for (int r = 0; r < total_rows; ++r) {
    if (!problem.rows[r].lazy) continue;
    for (const auto& [col, coef] : problem.rows[r].coeffs) {
      const VarKind kind = problem.columns[col].ref.kind;
      if ((kind == VarKind::X || kind == VarKind::S) &&
          std::abs(std::abs(coef) - problem.big_M) < 1e-9)
        indicator_cols[r].push_back(col);
    }
  }

  SimplexSolver::Options lp_opts;
  lp_opts.feas_tol = config.lp_tol;
  std::vector<int> built_rows;
  std::unique_ptr<SimplexSolver> simplex;
  Eigen::VectorXd lb(n), ub(n);

  // Crash data: per task, executor columns sorted by duration (taken from
  // the duration rows). Starting the shortest available executors at their
  // upper bound satisfies the count and duration rows immediately, which
  // removes most phase-1 work from every cold node solve.
  struct CrashChoice {
    double duration;
    int col;
  };
  std::vector<std::vector<CrashChoice>> crash(problem.m);
  std::vector<int> quota(problem.m, 1);
  std::vector<double> col_duration(n, 0.0);
  {
    for (const Row& row : problem.rows) {
      if (row.lazy || row.sense != RowSense::GreaterEq || row.coeffs.size() != 3) continue;
      int xcol = -1;
      double delta = 0.0;
      bool shape_ok = true;
      for (const auto& [col, coef] : row.coeffs) {
        const VarKind kind = problem.columns[col].ref.kind;
        if (kind == VarKind::X) {
          xcol = col;
          delta = -coef;
        } else if (kind != VarKind::TStart && kind != VarKind::TEnd) {
          shape_ok = false;
        }
      }
      if (shape_ok && xcol >= 0 && delta > 0.0) col_duration[xcol] = delta;
    }
    for (const Row& row : problem.rows) {
      if (row.sense != RowSense::Equal) continue;
      bool all_x = true;
      for (const auto& [col, coef] : row.coeffs) {
        (void)coef;
        if (problem.columns[col].ref.kind != VarKind::X) all_x = false;
      }
      if (!all_x || row.coeffs.empty()) continue;
      const int task = problem.columns[row.coeffs.front().first].ref.i;
      quota[task] = static_cast<int>(std::lround(row.rhs));
      for (const auto& [col, coef] : row.coeffs) {
        (void)coef;
        if (col_duration[col] > 0.0) crash[task].push_back({col_duration[col], col});
      }
      std::sort(crash[task].begin(), crash[task].end(), [](const CrashChoice& a,
                                                           const CrashChoice& b) {
        if (a.duration != b.duration) return a.duration < b.duration;
        return a.col < b.col;
      });
    }
  }
  double incumbent_obj = kInf;
  Eigen::VectorXd incumbent;
  double open_bound_floor = kInf;  // min bound among nodes cut off by limits

  // Combinatorial node bound. The LP relaxation satisfies the quality
  // floor with fractional supervision slivers, so its assignment term is
  // optimistic; the per-task minimum of (workload - quality) over integral
  // floor-feasible choices consistent with the node's fixings is a valid
  // and often tighter bound, and costs microseconds. The makespan term
  // adds the static critical path and each agent's forced load.
  struct TaskChoice {
    std::vector<int> cols;   // X and S columns selected by this choice
    double net = 0.0;        // sum of objective coefficients (w - q)
    double work = 0.0;       // interval length times occupied agents
    double duration = 0.0;   // interval length (max executor duration)
    uint32_t occupied = 0;   // bitmask of busy agents (executors+supervisors)
  };
  std::vector<std::vector<TaskChoice>> task_choices(problem.m);
  double tmax_lb_static = problem.columns[problem.col_tmax()].lb;
  {
    // executor/supervisor column pools per task, with quality from the
    // floor rows and net cost from the objective
    for (int i = 0; i < problem.m; ++i) {
      std::vector<int> xcols, scols;
      for (int j = 0; j < problem.n_a; ++j)
        if (problem.columns[problem.col_x(i, j)].ub > 0.0) xcols.push_back(problem.col_x(i, j));
      for (int h = 0; h < problem.n_h; ++h) scols.push_back(problem.col_s(i, h));
      // quality coefficients live in the floor row of task i
      std::map<int, double> quality;
      double floor_rhs = 0.0;
      for (const Row& row : problem.rows) {
        if (row.lazy || row.sense != RowSense::GreaterEq || row.coeffs.empty()) continue;
        bool matches = true;
        bool has_col_of_task = false;
        for (const auto& [col, coef] : row.coeffs) {
          (void)coef;
          const VarRef& ref = problem.columns[col].ref;
          if ((ref.kind != VarKind::X && ref.kind != VarKind::S) || ref.i != i) {
            matches = false;
            break;
          }
          has_col_of_task = true;
        }
        if (!matches || !has_col_of_task) continue;
        floor_rhs = row.rhs;
        for (const auto& [col, coef] : row.coeffs) quality[col] = coef;
        break;
      }
      const int need = quota[i];
      auto supervise_subsets = [&](const std::vector<int>& execs) {
        std::vector<int> free_sup;
        for (int sc : scols) {
          const int agent = problem.columns[sc].ref.j;
          bool executes = false;
          for (int xc : execs)
            if (problem.columns[xc].ref.j == agent) executes = true;
          if (!executes) free_sup.push_back(sc);
        }
        const int subsets = 1 << free_sup.size();
        for (int mask = 0; mask < subsets; ++mask) {
          TaskChoice choice;
          choice.cols = execs;
          double q = 0.0;
          for (int xc : execs) {
            choice.net += problem.objective[xc];
            auto it = quality.find(xc);
            if (it != quality.end()) q += it->second;
          }
          for (size_t b = 0; b < free_sup.size(); ++b) {
            if (!(mask & (1 << b))) continue;
            choice.cols.push_back(free_sup[b]);
            choice.net += problem.objective[free_sup[b]];
            auto it = quality.find(free_sup[b]);
            if (it != quality.end()) q += it->second;
          }
          if (q >= floor_rhs - 1e-9) {
            double dur = 0.0;
            for (int xc : execs) dur = std::max(dur, col_duration[xc]);
            choice.duration = dur;
            choice.work = dur * static_cast<double>(choice.cols.size());
            for (int col : choice.cols)
              choice.occupied |= 1u << problem.columns[col].ref.j;
            task_choices[i].push_back(std::move(choice));
          }
        }
      };
      if (need == 1) {
        for (int xc : xcols) supervise_subsets({xc});
      } else {
        for (size_t a = 0; a < xcols.size(); ++a)
          for (size_t b = a + 1; b < xcols.size(); ++b)
            supervise_subsets({xcols[a], xcols[b]});
      }
    }
  }
  auto choice_allowed = [&](int i, const TaskChoice& c) {
    for (int col : c.cols)
      if (ub[col] < 1.0) return false;
    for (int j = 0; j < problem.n_a; ++j) {
      const int col = problem.col_x(i, j);
      if (lb[col] >= 1.0 && std::find(c.cols.begin(), c.cols.end(), col) == c.cols.end())
        return false;
    }
    for (int h = 0; h < problem.n_h; ++h) {
      const int col = problem.col_s(i, h);
      if (lb[col] >= 1.0 && std::find(c.cols.begin(), c.cols.end(), col) == c.cols.end())
        return false;
    }
    return true;
  };

  std::vector<double> task_min_net(problem.m, 0.0);
  std::vector<double> unavoidable(problem.n_a, 0.0);
  auto combinatorial_bound = [&]() {
    double net_sum = 0.0;
    double work_sum = 0.0;
    std::fill(unavoidable.begin(), unavoidable.end(), 0.0);
    for (int i = 0; i < problem.m; ++i) {
      double best = kInf;
      double least_work = kInf;
      std::array<double, 32> busy;
      busy.fill(kInf);
      for (const TaskChoice& c : task_choices[i]) {
        if (!choice_allowed(i, c)) continue;
        best = std::min(best, c.net);
        least_work = std::min(least_work, c.work);
        for (int j = 0; j < problem.n_a; ++j)
          busy[j] = std::min(busy[j], (c.occupied >> j) & 1u ? c.duration : 0.0);
      }
      task_min_net[i] = best;
      if (!std::isfinite(best)) return kInf;
      net_sum += best;
      work_sum += least_work;
      for (int j = 0; j < problem.n_a; ++j) unavoidable[j] += busy[j];
    }
    // makespan floors: static critical path, total busy time spread across
    // all agents, and each agent's unavoidable own load
    double mk = std::max(tmax_lb_static, work_sum / problem.n_a);
    for (int j = 0; j < problem.n_a; ++j) mk = std::max(mk, unavoidable[j]);
    return mk / problem.horizon + net_sum;
  };

  // Columns whose cheapest compatible choice already pushes the node bound
  // past the incumbent cannot appear in an improving solution; pin them to
  // zero for this node (descendants re-derive the same conclusions).
  auto choice_fixing = [&](double comb) {
    if (!std::isfinite(incumbent_obj) || !std::isfinite(comb)) return;
    const double cutoff = incumbent_obj - 1e-9 * (1.0 + std::abs(incumbent_obj));
    for (int pass = 0; pass < 3; ++pass) {
      bool changed = false;
      for (int i = 0; i < problem.m; ++i) {
        for (const int col_kind : {0, 1}) {
          const int count = col_kind == 0 ? problem.n_a : problem.n_h;
          for (int a = 0; a < count; ++a) {
            const int col = col_kind == 0 ? problem.col_x(i, a) : problem.col_s(i, a);
            if (ub[col] < 1.0 || lb[col] >= 1.0) continue;
            double with_col = kInf;
            for (const TaskChoice& c : task_choices[i]) {
              if (std::find(c.cols.begin(), c.cols.end(), col) == c.cols.end()) continue;
              if (!choice_allowed(i, c)) continue;
              with_col = std::min(with_col, c.net);
            }
            if (comb - task_min_net[i] + with_col >= cutoff) {
              ub[col] = 0.0;
              changed = true;
            }
          }
        }
      }
      if (!changed) break;
      comb = combinatorial_bound();
      if (!std::isfinite(comb)) break;
    }
  };

  std::vector<int> crash_hint;
  auto compute_crash_hint = [&]() {
    crash_hint.clear();
    for (int i = 0; i < problem.m; ++i) {
      int picked = 0;
      for (const CrashChoice& c : crash[i]) {
        if (picked >= quota[i]) break;
        if (lb[c.col] >= 1.0) {
          ++picked;  // already fixed on by branching
          continue;
        }
        if (ub[c.col] < 1.0) continue;  // fixed off
        crash_hint.push_back(c.col);
        ++picked;
      }
    }
  };

  Eigen::VectorXd base_lb(n), base_ub(n);
  for (int j = 0; j < n; ++j) {
    base_lb[j] = problem.columns[j].lb;
    base_ub[j] = problem.columns[j].ub;
  }

  std::deque<NodeData> nodes;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> open;
  nodes.push_back(NodeData{});
  open.push(QueueEntry{-kInf, 0, 0});

  auto materialize_bounds = [&](int node_id) {
    lb = base_lb;
    ub = base_ub;
    for (int cur = node_id; cur > 0; cur = nodes[cur].parent) {
      const NodeData& nd = nodes[cur];
      lb[nd.fixed_col] = std::max(lb[nd.fixed_col], nd.fixed_lb);
      ub[nd.fixed_col] = std::min(ub[nd.fixed_col], nd.fixed_ub);
      for (int32_t col : nd.rc_zero) ub[col] = std::min(ub[col], 0.0);
      for (int32_t col : nd.rc_one) lb[col] = std::max(lb[col], 1.0);
    }
  };

  auto rebuild_solver = [&]() {
    std::vector<int> rows;
    rows.reserve(total_rows);
    for (int r = 0; r < total_rows; ++r) {
      if (!is_active[r]) continue;
      if (problem.rows[r].lazy && !indicator_cols[r].empty()) {
        double reach = 0.0;
        for (int col : indicator_cols[r]) reach += ub[col];
        if (reach < 2.0 - 1e-9) continue;  // overlap impossible here
      }
      rows.push_back(r);
    }
    if (rows != built_rows || !simplex) {
#ifdef HRTA_SOLVER_TRACE
      std::fprintf(stderr, "REBUILD rows=%zu\n", rows.size());
#endif
      simplex = std::make_unique<SimplexSolver>(problem, rows, lp_opts);
      built_rows = std::move(rows);
    }
  };

  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  bool hit_time = false, hit_nodes = false;
  long dive_id = -1;  // 0-child of the last branching, explored depth-first

  while (true) {
    if (config.time_limit && elapsed() > *config.time_limit) {
      hit_time = true;
      break;
    }
    if (config.node_limit && out.nodes_explored >= *config.node_limit) {
      hit_nodes = true;
      break;
    }

    QueueEntry entry;
    if (dive_id >= 0) {
      entry = QueueEntry{nodes[dive_id].bound, nodes[dive_id].depth, dive_id};
      dive_id = -1;
    } else if (!open.empty()) {
      entry = open.top();
      open.pop();
    } else {
      break;
    }
    const double cutoff = std::isfinite(incumbent_obj)
                              ? incumbent_obj - 1e-9 * (1.0 + std::abs(incumbent_obj))
                              : kInf;
    if (entry.bound >= cutoff) continue;

    materialize_bounds(static_cast<int>(entry.id));
    ++out.nodes_explored;

    double comb_bound = combinatorial_bound();
    if (comb_bound >= cutoff) continue;  // no LP needed
    choice_fixing(comb_bound);
    comb_bound = combinatorial_bound();
    if (comb_bound >= cutoff) continue;

    LpResult lp;
    std::shared_ptr<const BasisSnapshot> warm_out;
    double node_bound = comb_bound;
    bool node_done = false;
    while (true) {
      rebuild_solver();
      compute_crash_hint();
      simplex->set_crash_hint(crash_hint);
      const NodeData& nd = nodes[entry.id];
      lp = nd.warm ? simplex->solve(lb, ub, *nd.warm) : simplex->solve(lb, ub);
      out.lp_iterations += lp.iterations;
      if (lp.status == LpStatus::Infeasible) {
        node_done = true;
        break;
      }
      if (lp.status == LpStatus::Unbounded)
        throw std::logic_error("LP relaxation unbounded: malformed model (unbounded column)");
      if (lp.status == LpStatus::IterLimit)
        throw std::runtime_error("LP iteration limit exceeded; numerical trouble");

      node_bound = std::max(lp.objective, comb_bound);
      if (node_bound >= cutoff) {
        node_done = true;
        break;
      }
      warm_out = std::make_shared<const BasisSnapshot>(simplex->snapshot());

      // Integral? If so, any violated lazy row joins the relaxation and the
      // node is re-solved; otherwise we have an incumbent.
      bool integral = true;
      for (int j = 0; j < n && integral; ++j) {
        if (!problem.columns[j].integral) continue;
        if (std::abs(lp.x[j] - std::round(lp.x[j])) > config.integrality_tol) integral = false;
      }
      if (!integral) break;

      bool activated = false;
      for (int r = 0; r < total_rows; ++r) {
        if (is_active[r]) continue;
        if (!row_satisfied(problem.rows[r], lp.x, config.lp_tol)) {
          is_active[r] = 1;
          activated = true;
        }
      }
      if (activated) continue;

      if (lp.objective < incumbent_obj) {
        incumbent_obj = lp.objective;
        incumbent = lp.x;
      }
      node_done = true;
      break;
    }
    if (node_done) continue;

    // Branch the most fractional assignment binary (X, S); only when the
    // assignment is integral branch the sequencing binaries (V, Z). Pure
    // most-fractional across all classes stalls: the big-M disjunctions
    // keep V at 1/2, so sequencing would be branched before assignments.
    int branch_col = -1;
    double best_frac = -1.0;
    auto scan = [&](bool assignment_class) {
      for (int j = 0; j < n; ++j) {
        const Column& col = problem.columns[j];
        if (!col.integral) continue;
        const bool is_assign = col.ref.kind == VarKind::X || col.ref.kind == VarKind::S;
        if (is_assign != assignment_class) continue;
        const double f = std::abs(lp.x[j] - std::round(lp.x[j]));
        if (f > config.integrality_tol && f > best_frac + 1e-12) {
          best_frac = f;
          branch_col = j;
        }
      }
    };
    scan(true);
    if (branch_col < 0) scan(false);
    if (branch_col < 0) continue;  // unreachable: integral handled above

    // Reduced-cost fixing: a nonbasic binary whose reduced cost alone
    // closes the gap to the incumbent can never flip in this subtree.
    std::vector<int32_t> rc_zero, rc_one;
    if (std::isfinite(incumbent_obj) && lp.reduced_costs.size() == n) {
      const double cutoff = incumbent_obj - 1e-9 * (1.0 + std::abs(incumbent_obj));
      for (int j = 0; j < n; ++j) {
        if (!problem.columns[j].integral || j == branch_col) continue;
        if (ub[j] <= lb[j]) continue;
        const double d = lp.reduced_costs[j];
        if (lp.x[j] < 0.5 && d > 0.0 && lp.objective + d >= cutoff)
          rc_zero.push_back(j);
        else if (lp.x[j] > 0.5 && d < 0.0 && lp.objective - d >= cutoff)
          rc_one.push_back(j);
      }
    }
#ifdef HRTA_SOLVER_TRACE
    {
      const VarRef& br = problem.columns[branch_col].ref;
      std::fprintf(stderr, "node=%ld depth=%d bound=%.6f inc=%.6f branch=%d kind=%d frac=%.3f\n",
                   out.nodes_explored, entry.depth, lp.objective, incumbent_obj,
                   branch_col, static_cast<int>(br.kind), best_frac);
    }
#endif

    const int depth = entry.depth + 1;
    NodeData zero;
    zero.parent = static_cast<int>(entry.id);
    zero.fixed_col = branch_col;
    zero.fixed_lb = 0.0;
    zero.fixed_ub = 0.0;
    zero.bound = node_bound;
    zero.depth = depth;
    zero.rc_zero = rc_zero;
    zero.rc_one = rc_one;
    zero.warm = warm_out;
    nodes.push_back(std::move(zero));
    const long zero_id = static_cast<long>(nodes.size() - 1);

    NodeData one;
    one.parent = static_cast<int>(entry.id);
    one.fixed_col = branch_col;
    one.fixed_lb = 1.0;
    one.fixed_ub = 1.0;
    one.bound = node_bound;
    one.depth = depth;
    one.rc_zero = std::move(rc_zero);
    one.rc_one = std::move(rc_one);
    one.warm = warm_out;
    nodes.push_back(std::move(one));
    const long one_id = static_cast<long>(nodes.size() - 1);

    // Dive on the child the relaxation already prefers; the sibling waits
    // in the best-bound queue. Diving away from the LP value first walks
    // straight to poor incumbents.
    const bool prefer_one = lp.x[branch_col] >= 0.5;
    dive_id = prefer_one ? one_id : zero_id;
    open.push(QueueEntry{node_bound, depth, prefer_one ? zero_id : one_id});
  }

  if (hit_time || hit_nodes) {
    if (dive_id >= 0) open_bound_floor = std::min(open_bound_floor, nodes[dive_id].bound);
    while (!open.empty()) {
      open_bound_floor = std::min(open_bound_floor, open.top().bound);
      open.pop();
    }
  }

  out.solve_seconds = elapsed();
  if (incumbent.size() > 0) {
    out.values = incumbent;
    out.objective = incumbent_obj;
    if (hit_time)
      out.status = SolveStatus::TimeLimit;
    else if (hit_nodes)
      out.status = SolveStatus::NodeLimit;
    else
      out.status = SolveStatus::Optimal;
    out.best_bound = out.status == SolveStatus::Optimal
                         ? incumbent_obj
                         : std::min(open_bound_floor, incumbent_obj);
  } else {
    out.status = hit_time ? SolveStatus::TimeLimit
                          : (hit_nodes ? SolveStatus::NodeLimit : SolveStatus::Infeasible);
    out.best_bound = out.status == SolveStatus::Infeasible ? kInf : -kInf;
  }
  return out;
}

}  // namespace hrta
