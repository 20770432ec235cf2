#include "hrta/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hrta {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SimplexSolver::SimplexSolver(const MilpProblem& problem, std::vector<int> active_rows,
                             Options options)
    : problem_(problem), active_rows_(std::move(active_rows)), opt_(options) {
  n_ = problem_.column_count();
  m_ = static_cast<int>(active_rows_.size());
  total_rows_ = static_cast<int>(problem_.rows.size());

  std::vector<int> counts(n_ + 1, 0);
  for (int r = 0; r < m_; ++r)
    for (const auto& [col, coef] : problem_.rows[active_rows_[r]].coeffs) {
      (void)coef;
      ++counts[col + 1];
    }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j + 1];
  entry_row_.resize(col_start_[n_]);
  entry_coef_.resize(col_start_[n_]);
  std::vector<int> fill(n_, 0);
  for (int r = 0; r < m_; ++r) {
    for (const auto& [col, coef] : problem_.rows[active_rows_[r]].coeffs) {
      const int at = col_start_[col] + fill[col]++;
      entry_row_[at] = r;
      entry_coef_[at] = coef;
    }
  }

  cost_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_; ++j) cost_[j] = problem_.objective[j];

  col_scale_.assign(n_ + m_, 1.0);
  for (int j = 0; j < n_; ++j) {
    double s = std::max(1.0, std::abs(cost_[j]));
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e)
      s = std::max(s, std::abs(entry_coef_[e]));
    col_scale_[j] = s;
  }

  bounds_lb_.assign(n_ + m_, 0.0);
  bounds_ub_.assign(n_ + m_, 0.0);
  for (int r = 0; r < m_; ++r) {
    const Row& row = problem_.rows[active_rows_[r]];
    switch (row.sense) {
      case RowSense::Equal:
        bounds_lb_[n_ + r] = bounds_ub_[n_ + r] = row.rhs;
        break;
      case RowSense::LessEq:
        bounds_lb_[n_ + r] = -kInf;
        bounds_ub_[n_ + r] = row.rhs;
        break;
      case RowSense::GreaterEq:
        bounds_lb_[n_ + r] = row.rhs;
        bounds_ub_[n_ + r] = kInf;
        break;
    }
  }
}

double SimplexSolver::bound_tol(double b) const {
  return opt_.feas_tol * (1.0 + (std::isfinite(b) ? std::abs(b) : 0.0));
}

double SimplexSolver::nonbasic_value(int v) const {
  if (vstate_[v] == VState::AtUpper) return bounds_ub_[v];
  return bounds_lb_[v];
}

void SimplexSolver::set_crash_hint(std::vector<int> at_upper_cols) {
  crash_at_upper_ = std::move(at_upper_cols);
}

void SimplexSolver::install_cold_basis() {
  vstate_.assign(n_ + m_, VState::AtLower);
  for (int j = 0; j < n_; ++j) {
    if (!std::isfinite(bounds_lb_[j])) vstate_[j] = VState::AtUpper;
  }
  for (int j : crash_at_upper_) {
    if (j < n_ && std::isfinite(bounds_ub_[j]) && bounds_ub_[j] > bounds_lb_[j])
      vstate_[j] = VState::AtUpper;
  }
  basic_.resize(m_);
  for (int r = 0; r < m_; ++r) {
    basic_[r] = n_ + r;
    vstate_[n_ + r] = VState::Basic;
  }
  binv_ = -Eigen::MatrixXd::Identity(m_, m_);
  pivots_since_refactor_ = 0;
  compute_basics();
}

bool SimplexSolver::install_warm_basis(const BasisSnapshot& warm) {
  if (warm.empty() || static_cast<int>(warm.state.size()) != n_ + total_rows_) return false;
  vstate_.assign(n_ + m_, VState::AtLower);
  basic_.clear();
  basic_.reserve(m_);
  for (int j = 0; j < n_; ++j) {
    switch (warm.state[j]) {
      case 3: basic_.push_back(j); vstate_[j] = VState::Basic; break;
      case 2: vstate_[j] = VState::AtUpper; break;
      default: vstate_[j] = VState::AtLower; break;
    }
  }
  for (int r = 0; r < m_; ++r) {
    const uint8_t st = warm.state[n_ + active_rows_[r]];
    const int v = n_ + r;
    if (st == 3 || st == 0) {  // unseen rows enter with their logical basic
      basic_.push_back(v);
      vstate_[v] = VState::Basic;
    } else if (st == 2) {
      vstate_[v] = VState::AtUpper;
    } else {
      vstate_[v] = VState::AtLower;
    }
  }
  if (static_cast<int>(basic_.size()) != m_) return false;
  // Nonbasic variables must rest on a finite bound.
  for (int v = 0; v < n_ + m_; ++v) {
    if (vstate_[v] == VState::AtLower && !std::isfinite(bounds_lb_[v]))
      vstate_[v] = VState::AtUpper;
    else if (vstate_[v] == VState::AtUpper && !std::isfinite(bounds_ub_[v]))
      vstate_[v] = VState::AtLower;
  }
  refactorize();
  // Reject numerically singular bases: check B * (B^-1 * 1) == 1.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
  for (int s = 0; s < m_; ++s) {
    const int v = basic_[s];
    if (v < n_) {
      for (int e = col_start_[v]; e < col_start_[v + 1]; ++e)
        B(entry_row_[e], s) = entry_coef_[e];
    } else {
      B(v - n_, s) = -1.0;
    }
  }
  Eigen::VectorXd probe = Eigen::VectorXd::Ones(m_);
  Eigen::VectorXd res = B * (binv_ * probe) - probe;
  if (!res.allFinite() || res.lpNorm<Eigen::Infinity>() > 1e-7 * m_) return false;
  compute_basics();
  return true;
}

void SimplexSolver::refactorize() {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
  for (int s = 0; s < m_; ++s) {
    const int v = basic_[s];
    if (v < n_) {
      for (int e = col_start_[v]; e < col_start_[v + 1]; ++e)
        B(entry_row_[e], s) = entry_coef_[e];
    } else {
      B(v - n_, s) = -1.0;
    }
  }
  binv_ = B.partialPivLu().inverse();
  pivots_since_refactor_ = 0;
}

void SimplexSolver::compute_basics() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int v = 0; v < n_ + m_; ++v) {
    if (vstate_[v] == VState::Basic) continue;
    const double val = nonbasic_value(v);
    if (val == 0.0) continue;
    if (v < n_) {
      for (int e = col_start_[v]; e < col_start_[v + 1]; ++e)
        rhs[entry_row_[e]] += entry_coef_[e] * val;
    } else {
      rhs[v - n_] -= val;
    }
  }
  xb_ = -(binv_ * rhs);
}

BasisSnapshot SimplexSolver::snapshot() const {
  BasisSnapshot s;
  s.state.assign(n_ + total_rows_, 0);
  for (int j = 0; j < n_; ++j)
    s.state[j] = vstate_[j] == VState::Basic ? 3 : (vstate_[j] == VState::AtUpper ? 2 : 1);
  for (int r = 0; r < m_; ++r) {
    const int g = n_ + active_rows_[r];
    const VState st = vstate_[n_ + r];
    s.state[g] = st == VState::Basic ? 3 : (st == VState::AtUpper ? 2 : 1);
  }
  return s;
}

LpResult SimplexSolver::solve(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
  for (int j = 0; j < n_; ++j) {
    bounds_lb_[j] = lb[j];
    bounds_ub_[j] = ub[j];
  }
  install_cold_basis();
  return run();
}

LpResult SimplexSolver::solve(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                              const BasisSnapshot& warm) {
  for (int j = 0; j < n_; ++j) {
    bounds_lb_[j] = lb[j];
    bounds_ub_[j] = ub[j];
  }
  if (!install_warm_basis(warm)) install_cold_basis();
  return run();
}

LpResult SimplexSolver::run() {
  LpResult result;
  const int max_it = opt_.max_iterations > 0 ? opt_.max_iterations : 5000 + 120 * m_;
  int iter = 0;
  int stall = 0;
  bool bland = false;
  bool verified = false;
  double prev_obj = kInf;

  Eigen::VectorXd cb(m_), y(m_), w(m_);

  auto column_dot = [&](const Eigen::VectorXd& vec, int v) -> double {
    if (v >= n_) return -vec[v - n_];
    double acc = 0.0;
    for (int e = col_start_[v]; e < col_start_[v + 1]; ++e)
      acc += entry_coef_[e] * vec[entry_row_[e]];
    return acc;
  };

  while (true) {
    if (iter >= max_it) {
      result.status = LpStatus::IterLimit;
      break;
    }

    // Classify basics; phase 1 while any sits outside its bounds.
    bool phase1 = false;
    double total_infeas = 0.0;
    for (int s = 0; s < m_; ++s) {
      const int v = basic_[s];
      const double x = xb_[s];
      const double lo = bounds_lb_[v], up = bounds_ub_[v];
      if (x < lo - bound_tol(lo)) {
        cb[s] = -1.0;
        total_infeas += lo - x;
        phase1 = true;
      } else if (x > up + bound_tol(up)) {
        cb[s] = 1.0;
        total_infeas += x - up;
        phase1 = true;
      } else {
        cb[s] = 0.0;
      }
    }
    if (!phase1) {
      for (int s = 0; s < m_; ++s) cb[s] = cost_[basic_[s]];
    }
    y.noalias() = binv_.transpose() * cb;

    // Pricing.
    int enter = -1;
    double best_score = 0.0;
    double enter_d = 0.0;
    for (int v = 0; v < n_ + m_; ++v) {
      if (vstate_[v] == VState::Basic) continue;
      if (bounds_lb_[v] == bounds_ub_[v]) continue;  // fixed
      const double d = (phase1 ? 0.0 : cost_[v]) - column_dot(y, v);
      const double tol = opt_.opt_tol * col_scale_[v];
      bool improving = false;
      if (vstate_[v] == VState::AtLower)
        improving = d < -tol;
      else
        improving = d > tol;
      if (!improving) continue;
      if (bland) {
        enter = v;
        enter_d = d;
        break;
      }
      const double score = std::abs(d);
      if (score > best_score) {
        best_score = score;
        enter = v;
        enter_d = d;
      }
    }

    if (enter < 0) {
      if (!verified) {
        refactorize();
        compute_basics();
        verified = true;
        continue;
      }
      result.status = phase1 ? LpStatus::Infeasible : LpStatus::Optimal;
      break;
    }

    const double s_dir = vstate_[enter] == VState::AtLower ? 1.0 : -1.0;
    if (enter < n_) {
      w.setZero();
      for (int e = col_start_[enter]; e < col_start_[enter + 1]; ++e)
        w.noalias() += entry_coef_[e] * binv_.col(entry_row_[e]);
    } else {
      w = -binv_.col(enter - n_);
    }

    // Ratio test. Phase 2 stops at the first blocking basic; phase 1 takes
    // the long step, walking through bound crossings while the total
    // infeasibility keeps decreasing (each crossing raises the directional
    // derivative by |rate|).
    double best_t = kInf;
    int leave_slot = -1;
    bool leave_to_upper = false;
    double tie_w = 0.0;
    const double flip_range = bounds_ub_[enter] - bounds_lb_[enter];
    bool flip = false;
    double step = 0.0;
    double progress = 0.0;

    if (phase1) {
      struct Breakpoint {
        double t;
        double dslope;
        int slot;  // -1: the entering column's own bound flip
        bool to_upper;
      };
      std::vector<Breakpoint> bps;
      bps.reserve(2 * m_ + 1);
      for (int s = 0; s < m_; ++s) {
        if (std::abs(w[s]) <= opt_.pivot_tol) continue;
        const int v = basic_[s];
        const double rate = -s_dir * w[s];
        const double x = xb_[s];
        const double lo = bounds_lb_[v], up = bounds_ub_[v];
        if (x < lo - bound_tol(lo)) {
          if (rate > 0.0) {
            bps.push_back({(lo - x) / rate, rate, s, false});
            if (std::isfinite(up)) bps.push_back({(up - x) / rate, rate, s, true});
          }
        } else if (x > up + bound_tol(up)) {
          if (rate < 0.0) {
            bps.push_back({(x - up) / (-rate), -rate, s, true});
            if (std::isfinite(lo)) bps.push_back({(x - lo) / (-rate), -rate, s, false});
          }
        } else {
          if (rate > 0.0 && std::isfinite(up))
            bps.push_back({std::max((up - x) / rate, 0.0), rate, s, true});
          else if (rate < 0.0 && std::isfinite(lo))
            bps.push_back({std::max((x - lo) / (-rate), 0.0), -rate, s, false});
        }
      }
      if (std::isfinite(flip_range)) bps.push_back({flip_range, kInf, -1, false});
      std::sort(bps.begin(), bps.end(), [](const Breakpoint& a, const Breakpoint& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.slot < b.slot;
      });
      if (bps.empty()) {
        result.status = LpStatus::Infeasible;  // no descent limit: numerical breakdown
        break;
      }
      double slope = enter_d;  // negative
      double t_prev = 0.0;
      size_t pick = bps.size();
      for (size_t b = 0; b < bps.size(); ++b) {
        progress += -slope * (bps[b].t - t_prev);
        t_prev = bps[b].t;
        if (bps[b].slot < 0) {  // entering bound flip is a hard stop
          pick = b;
          break;
        }
        slope += bps[b].dslope;
        if (slope >= -1e-12) {
          pick = b;
          break;
        }
      }
      if (pick == bps.size()) pick = bps.size() - 1;  // defensive: stop at the last kink
      if (bps[pick].slot < 0) {
        flip = true;
        step = flip_range;
      } else {
        leave_slot = bps[pick].slot;
        leave_to_upper = bps[pick].to_upper;
        step = bps[pick].t;
      }
    } else {
      for (int s = 0; s < m_; ++s) {
        if (std::abs(w[s]) <= opt_.pivot_tol) continue;
        const int v = basic_[s];
        const double rate = -s_dir * w[s];
        const double x = xb_[s];
        const double lo = bounds_lb_[v], up = bounds_ub_[v];
        double t = kInf;
        bool to_upper = false;
        if (rate < 0.0 && std::isfinite(lo)) {
          t = (x - lo) / (-rate);
          to_upper = false;
        } else if (rate > 0.0 && std::isfinite(up)) {
          t = (up - x) / rate;
          to_upper = true;
        }
        if (!std::isfinite(t)) continue;
        t = std::max(t, 0.0);
        const bool better =
            t < best_t - 1e-12 ||
            (t <= best_t + 1e-12 &&
             (bland ? (leave_slot < 0 || v < basic_[leave_slot])
                    : (std::abs(w[s]) > tie_w + 1e-15 ||
                       (std::abs(w[s]) >= tie_w - 1e-15 && leave_slot >= 0 &&
                        v < basic_[leave_slot]))));
        if (better) {
          best_t = t;
          leave_slot = s;
          leave_to_upper = to_upper;
          tie_w = std::abs(w[s]);
        }
      }
      flip = flip_range < best_t && std::isfinite(flip_range);
      step = flip ? flip_range : best_t;
      if (!std::isfinite(step)) {
        result.status = LpStatus::Unbounded;
        break;
      }
      progress = std::abs(enter_d) * step;
    }
    if (progress <= 1e-12 * (1.0 + std::abs(prev_obj))) {
      if (++stall >= opt_.stall_limit) bland = true;
    } else {
      stall = 0;
      bland = false;
    }
    prev_obj = phase1 ? total_infeas : prev_obj;

    const double delta = s_dir * step;
    xb_.noalias() -= w * delta;

    if (flip) {
      vstate_[enter] = vstate_[enter] == VState::AtLower ? VState::AtUpper : VState::AtLower;
    } else {
      const int leaving = basic_[leave_slot];
      const double enter_val = nonbasic_value(enter) + delta;
      vstate_[leaving] = leave_to_upper ? VState::AtUpper : VState::AtLower;
      // Snap the leaving variable exactly onto its bound by absorbing the
      // residual into the entering column on the next recompute.
      basic_[leave_slot] = enter;
      vstate_[enter] = VState::Basic;
      xb_[leave_slot] = enter_val;

      const double pivot = w[leave_slot];
      Eigen::VectorXd wc = w;
      wc[leave_slot] = 0.0;
      binv_.row(leave_slot) /= pivot;
      binv_.noalias() -= wc * binv_.row(leave_slot);

      if (++pivots_since_refactor_ >= opt_.refactor_every) {
        refactorize();
        compute_basics();
      }
    }
    verified = false;
    ++iter;
  }

  result.iterations = iter;
  result.x = Eigen::VectorXd::Zero(n_);
  for (int j = 0; j < n_; ++j)
    if (vstate_[j] != VState::Basic) result.x[j] = nonbasic_value(j);
  for (int s = 0; s < m_; ++s)
    if (basic_[s] < n_) result.x[basic_[s]] = xb_[s];
  double obj = problem_.objective_constant;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * result.x[j];
  result.objective = obj;
  if (result.status == LpStatus::Optimal) {
    Eigen::VectorXd cb(m_), y(m_);
    for (int s = 0; s < m_; ++s) cb[s] = cost_[basic_[s]];
    y.noalias() = binv_.transpose() * cb;
    result.reduced_costs = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      if (vstate_[j] == VState::Basic) continue;
      double d = cost_[j];
      for (int e = col_start_[j]; e < col_start_[j + 1]; ++e)
        d -= entry_coef_[e] * y[entry_row_[e]];
      result.reduced_costs[j] = d;
    }
  }
  return result;
}

LpResult solve_lp(const MilpProblem& problem) {
  std::vector<int> all(problem.rows.size());
  for (size_t r = 0; r < all.size(); ++r) all[r] = static_cast<int>(r);
  SimplexSolver simplex(problem, std::move(all));
  const int n = problem.column_count();
  Eigen::VectorXd lb(n), ub(n);
  for (int j = 0; j < n; ++j) {
    lb[j] = problem.columns[j].lb;
    ub[j] = problem.columns[j].ub;
  }
  return simplex.solve(lb, ub);
}

}  // namespace hrta
