// Copyright 2026 The lipcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LIPCERT_LP_HPP_
#define LIPCERT_LP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"

namespace lipcert {

enum class Relation { kLe, kEq, kGe };

struct LPRow {
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  Relation rel = Relation::kLe;
  double rhs = 0.0;
};

// maximize c^T x + offset  s.t.  rows, lower <= x <= upper.
struct LPProblem {
  Vector objective;
  double objective_offset = 0.0;
  Vector lower;
  Vector upper;
  std::vector<LPRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
};

enum class LPStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

inline std::string to_string(LPStatus s) {
  switch (s) {
    case LPStatus::kOptimal:
      return "optimal";
    case LPStatus::kInfeasible:
      return "infeasible";
    case LPStatus::kUnbounded:
      return "unbounded";
    case LPStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "?";
}

struct LPSolution {
  LPStatus status = LPStatus::kNumericalFailure;
  Vector x;
  double objective_value = 0.0;
  int iterations = 0;
};

struct LPTolerances {
  double feas_tol = 1e-7;
  double pivot_tol = 1e-9;
};

// Anything that solves LPProblem. Branch-and-bound and the estimators only
// talk to this interface.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LPSolution solve(const LPProblem& p, const LPTolerances& tol) const = 0;
};

namespace detail {

// Bounded-variable primal simplex over a dense tableau.
//
// Columns are [free structurals | slacks of inequality rows | artificials];
// fixed structurals are folded into the right-hand side. Row r reads
// a_r x + s_r = b_r with s_r in [0, inf) for <= and (-inf, 0] for >=;
// equality rows carry no slack. Nonbasic columns sit at a finite bound. Phase 1 maximises minus the sum
// of artificials; phase 2 the real objective. Pricing is Dantzig, switching
// to Bland's rule after kStallFactor * #columns consecutive degenerate
// pivots. The tableau is recomputed from the basis every kReinvertEvery
// pivots and before accepting optimality.
class DenseSimplex {
 public:
  static constexpr int kStallFactor = 10;
  static constexpr int kReinvertEvery = 250;

  DenseSimplex(const LPProblem& p, const LPTolerances& tol) : tol_(tol) {
    n_ = p.num_vars();
    m_ = static_cast<int>(p.rows.size());
    if (p.lower.size() != n_ || p.upper.size() != n_)
      throw InputError("LP bounds do not match objective length");
    objective_ = p.objective;
    setup(p);
  }

  LPSolution run() {
    if (num_art_ > 0) {
      set_phase_costs(/*phase1=*/true);
      const LPStatus s1 = iterate();
      if (s1 == LPStatus::kNumericalFailure) return finish(s1);
      double infeas = 0.0;
      for (int j = art_begin_; j < N_; ++j) infeas += std::max(0.0, val_[j]);
      if (infeas > tol_.feas_tol) return finish(LPStatus::kInfeasible);
      for (int j = art_begin_; j < N_; ++j) hi_[j] = 0.0;
      drive_out_artificials();
    }
    set_phase_costs(/*phase1=*/false);
    for (int attempt = 0; attempt < 4; ++attempt) {
      const LPStatus s2 = iterate();
      if (s2 != LPStatus::kOptimal) return finish(s2);
      if (!refresh()) return finish(LPStatus::kNumericalFailure);
      if (!primal_feasible(10.0 * tol_.feas_tol)) return finish(LPStatus::kNumericalFailure);
      if (choose_entering().first < 0) return finish(LPStatus::kOptimal);
      if (!reinvert()) return finish(LPStatus::kNumericalFailure);
    }
    return finish(LPStatus::kNumericalFailure);
  }

 private:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void setup(const LPProblem& p) {
    prob_ = &p;
    // Fixed structurals are folded into the right-hand sides.
    col_of_.assign(static_cast<std::size_t>(n_), -1);
    std::vector<double> x0(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) {
      const double lo = p.lower(j), hi = p.upper(j);
      if (lo > hi) trivially_infeasible_ = true;
      x0[j] = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
      if (lo != hi) {
        col_of_[j] = static_cast<int>(struct_of_.size());
        struct_of_.push_back(j);
      }
    }
    ns_ = static_cast<int>(struct_of_.size());
    // Residuals decide which rows need an artificial; equality rows have no
    // slack and always get one.
    std::vector<double> slo(m_), shi(m_), resid(m_);
    std::vector<int> need_art;
    slack_of_.assign(static_cast<std::size_t>(m_), -1);
    int next_slack = ns_;
    for (int r = 0; r < m_; ++r) {
      const LPRow& row = p.rows[r];
      double act = 0.0;
      for (const auto& [j, a] : row.terms) {
        if (j < 0 || j >= n_) throw InputError("LP row references unknown column");
        act += a * x0[j];
      }
      resid[r] = row.rhs - act;
      slo[r] = row.rel == Relation::kGe ? -kInf : 0.0;
      shi[r] = row.rel == Relation::kLe ? kInf : 0.0;
      if (row.rel != Relation::kEq) slack_of_[r] = next_slack++;
      if (row.rel == Relation::kEq || resid[r] < slo[r] || resid[r] > shi[r]) need_art.push_back(r);
    }
    num_art_ = static_cast<int>(need_art.size());
    art_begin_ = next_slack;
    N_ = art_begin_ + num_art_;
    A_ = RowMatrix::Zero(m_, N_);
    b_ = Vector(m_);
    lo_.assign(N_, 0.0);
    hi_.assign(N_, 0.0);
    val_.assign(N_, 0.0);
    basis_.assign(m_, -1);
    for (int c = 0; c < ns_; ++c) {
      const int j = struct_of_[c];
      lo_[c] = p.lower(j);
      hi_[c] = p.upper(j);
      val_[c] = x0[j];
    }
    for (int r = 0; r < m_; ++r) {
      double fixed_part = 0.0;
      for (const auto& [j, a] : p.rows[r].terms) {
        if (col_of_[j] >= 0)
          A_(r, col_of_[j]) += a;
        else
          fixed_part += a * x0[j];
      }
      b_(r) = p.rows[r].rhs - fixed_part;
      if (slack_of_[r] >= 0) {
        A_(r, slack_of_[r]) = 1.0;
        lo_[slack_of_[r]] = slo[r];
        hi_[slack_of_[r]] = shi[r];
      }
    }
    int k = 0;
    for (int r = 0; r < m_; ++r) {
      const int s = slack_of_[r];
      if (k < num_art_ && need_art[k] == r) {
        const double proj = std::clamp(resid[r], slo[r], shi[r]);
        const double excess = resid[r] - proj;
        const int a = art_begin_ + k;
        A_(r, a) = excess >= 0.0 ? 1.0 : -1.0;
        lo_[a] = 0.0;
        hi_[a] = kInf;
        if (s >= 0) val_[s] = proj;
        val_[a] = std::abs(excess);
        basis_[r] = a;
        ++k;
      } else {
        val_[s] = resid[r];
        basis_[r] = s;
      }
    }
    is_basic_.assign(N_, false);
    for (int r = 0; r < m_; ++r) is_basic_[basis_[r]] = true;
    unit_row_.assign(N_, -1);
    unit_val_.assign(N_, 0.0);
    for (int j = ns_; j < N_; ++j)
      for (int r = 0; r < m_; ++r)
        if (A_(r, j) != 0.0) {
          unit_row_[j] = r;
          unit_val_[j] = A_(r, j);
        }
    // The initial basis is diagonal with +-1 entries.
    T_ = A_;
    for (int r = 0; r < m_; ++r)
      if (A_(r, basis_[r]) < 0.0) T_.row(r) *= -1.0;
  }

  void set_phase_costs(bool phase1) {
    cost_.assign(N_, 0.0);
    if (phase1) {
      for (int j = art_begin_; j < N_; ++j) cost_[j] = -1.0;
    } else {
      for (int c = 0; c < ns_; ++c) cost_[c] = objective_(struct_of_[c]);
    }
    recompute_reduced_costs();
    degenerate_run_ = 0;
    bland_ = false;
  }

  void recompute_reduced_costs() {
    d_ = Vector::Zero(N_);
    Vector cb(m_);
    for (int r = 0; r < m_; ++r) cb(r) = cost_[basis_[r]];
    Eigen::RowVectorXd z = cb.transpose() * T_;
    for (int j = 0; j < N_; ++j) d_(j) = is_basic_[j] ? 0.0 : cost_[j] - z(j);
  }

  // Returns (column, direction) or (-1, 0) at optimality.
  std::pair<int, int> choose_entering() const {
    int best = -1, best_dir = 0;
    double best_score = 0.0;
    const double opt_tol = tol_.pivot_tol;
    for (int j = 0; j < N_; ++j) {
      if (is_basic_[j] || lo_[j] == hi_[j]) continue;
      int dir = 0;
      if (d_(j) > opt_tol && val_[j] < hi_[j]) dir = 1;
      else if (d_(j) < -opt_tol && val_[j] > lo_[j]) dir = -1;
      if (dir == 0) continue;
      if (bland_) return {j, dir};
      const double score = std::abs(d_(j));
      if (score > best_score) {
        best_score = score;
        best = j;
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  LPStatus iterate() {
    const int max_iter = 50 * (m_ + N_) + 1000;
    const int stall_limit = kStallFactor * N_;
    int since_reinvert = 0;
    for (;;) {
      if (iterations_ >= max_iter) return LPStatus::kNumericalFailure;
      if (since_reinvert >= kReinvertEvery) {
        if (!reinvert()) return LPStatus::kNumericalFailure;
        since_reinvert = 0;
      }
      const auto [q, dir] = choose_entering();
      if (q < 0) return LPStatus::kOptimal;
      ++iterations_;

      // Ratio test: basic r moves at rate -T(r,q) * dir per unit step.
      double t_min = kInf;
      int p = -1;
      bool p_to_upper = false;
      double p_piv = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double alpha = T_(r, q);
        if (std::abs(alpha) <= tol_.pivot_tol) continue;
        const double rate = -alpha * dir;
        const int bv = basis_[r];
        double limit;
        bool to_upper;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[bv])) continue;
          limit = (val_[bv] - lo_[bv]) / (-rate);
          to_upper = false;
        } else {
          if (!std::isfinite(hi_[bv])) continue;
          limit = (hi_[bv] - val_[bv]) / rate;
          to_upper = true;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (p < 0 || limit < t_min - 1e-12) {
          take = true;
        } else if (limit <= t_min + 1e-12) {
          take = bland_ ? (bv < basis_[p]) : (std::abs(alpha) > std::abs(p_piv));
        }
        if (take) {
          t_min = p < 0 ? limit : std::min(t_min, limit);
          p = r;
          p_to_upper = to_upper;
          p_piv = alpha;
        }
      }
      const double flip = hi_[q] - lo_[q];
      if (p < 0 && !std::isfinite(flip)) return LPStatus::kUnbounded;

      if (std::isfinite(flip) && flip <= t_min) {
        // Bound flip, basis unchanged.
        const double step = dir * flip;
        val_[q] = dir > 0 ? hi_[q] : lo_[q];
        for (int r = 0; r < m_; ++r) val_[basis_[r]] -= T_(r, q) * step;
        degenerate_run_ = 0;
        bland_ = false;
        continue;
      }

      const double t = t_min;
      const double step = dir * t;
      val_[q] += step;
      for (int r = 0; r < m_; ++r) val_[basis_[r]] -= T_(r, q) * step;
      const int leaving = basis_[p];
      val_[leaving] = p_to_upper ? hi_[leaving] : lo_[leaving];
      pivot(p, q);
      ++since_reinvert;

      if (t <= 1e-12) {
        if (++degenerate_run_ >= stall_limit) bland_ = true;
      } else {
        degenerate_run_ = 0;
        bland_ = false;
      }
    }
  }

  void pivot(int p, int q) {
    const int leaving = basis_[p];
    T_.row(p) /= T_(p, q);
    for (int r = 0; r < m_; ++r) {
      if (r == p) continue;
      const double f = T_(r, q);
      if (f != 0.0) T_.row(r) -= f * T_.row(p);
    }
    const double dq = d_(q);
    if (dq != 0.0) d_ -= dq * T_.row(p).transpose();
    d_(q) = 0.0;
    basis_[p] = q;
    is_basic_[leaving] = false;
    is_basic_[q] = true;
  }

  bool factor_basis(Eigen::PartialPivLU<Matrix>& lu) const {
    Matrix B(m_, m_);
    for (int r = 0; r < m_; ++r) B.col(r) = A_.col(basis_[r]);
    lu.compute(B);
    const double det_scale = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    return det_scale > 1e-13;
  }

  void recompute_basic_values(const Eigen::PartialPivLU<Matrix>& lu) {
    Vector rhs = b_;
    for (int j = 0; j < N_; ++j)
      if (!is_basic_[j] && val_[j] != 0.0) rhs -= A_.col(j) * val_[j];
    const Vector xb = lu.solve(rhs);
    for (int r = 0; r < m_; ++r) val_[basis_[r]] = xb(r);
  }

  // Basic values and reduced costs from a fresh factorization; the tableau
  // is left as is. Basic unit columns (slacks, artificials) are eliminated
  // first, leaving a square system over the basic structurals.
  bool refresh() {
    std::vector<int> cols, rows;
    std::vector<char> covered(static_cast<std::size_t>(m_), 0);
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (j < ns_) {
        cols.push_back(j);
      } else if (unit_row_[j] < 0 || covered[unit_row_[j]]) {
        return false;
      } else {
        covered[unit_row_[j]] = 1;
      }
    }
    for (int r = 0; r < m_; ++r)
      if (!covered[r]) rows.push_back(r);
    const int k = static_cast<int>(cols.size());
    if (static_cast<int>(rows.size()) != k) return false;

    Vector rhs = b_;
    for (int j = 0; j < N_; ++j)
      if (!is_basic_[j] && val_[j] != 0.0) rhs -= A_.col(j) * val_[j];
    Vector y = Vector::Zero(m_);
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (j >= ns_) y(unit_row_[j]) = cost_[j] / unit_val_[j];
    }
    Vector xs(k);
    if (k > 0) {
      Matrix bs(k, k);
      for (int a = 0; a < k; ++a)
        for (int c = 0; c < k; ++c) bs(a, c) = A_(rows[a], cols[c]);
      Eigen::PartialPivLU<Matrix> lu(bs);
      if (!(lu.matrixLU().diagonal().cwiseAbs().minCoeff() > 1e-13)) return false;
      Vector r1(k), c1(k);
      for (int a = 0; a < k; ++a) r1(a) = rhs(rows[a]);
      xs = lu.solve(r1);
      for (int c = 0; c < k; ++c) {
        double v = cost_[cols[c]];
        for (int r = 0; r < m_; ++r)
          if (covered[r]) v -= A_(r, cols[c]) * y(r);
        c1(c) = v;
      }
      const Vector yr = lu.transpose().solve(c1);
      for (int a = 0; a < k; ++a) y(rows[a]) = yr(a);
    }
    for (int c = 0; c < k; ++c) val_[cols[c]] = xs(c);
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (j < ns_) continue;
      const int row = unit_row_[j];
      double v = rhs(row);
      for (int c = 0; c < k; ++c) v -= A_(row, cols[c]) * xs(c);
      val_[j] = v / unit_val_[j];
    }
    const Eigen::RowVectorXd z = y.transpose() * A_;
    d_ = Vector::Zero(N_);
    for (int j = 0; j < N_; ++j) d_(j) = is_basic_[j] ? 0.0 : cost_[j] - z(j);
    return d_.allFinite() && xs.allFinite();
  }

  // Recomputes the tableau, basic values and reduced costs from the basis.
  bool reinvert() {
    if (m_ == 0) {
      recompute_reduced_costs();
      return true;
    }
    Eigen::PartialPivLU<Matrix> lu;
    if (!factor_basis(lu)) return false;
    const Matrix binv = lu.inverse();
    T_.leftCols(ns_).noalias() = binv * A_.leftCols(ns_);
    for (int j = ns_; j < N_; ++j) {
      if (unit_row_[j] < 0)
        T_.col(j).setZero();
      else
        T_.col(j) = unit_val_[j] * binv.col(unit_row_[j]);
    }
    recompute_basic_values(lu);
    recompute_reduced_costs();
    return T_.allFinite();
  }

  bool primal_feasible(double tol) const {
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (val_[j] < lo_[j] - tol * (1.0 + std::abs(lo_[j]))) return false;
      if (val_[j] > hi_[j] + tol * (1.0 + std::abs(hi_[j]))) return false;
    }
    return true;
  }

  // Degenerate pivots replacing basic artificials (value ~0) by real columns.
  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < art_begin_) continue;
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < art_begin_; ++j) {
        if (is_basic_[j]) continue;
        if (std::abs(T_(r, j)) > best_abs) {
          best_abs = std::abs(T_(r, j));
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays fixed at 0
      const int leaving = basis_[r];
      const double step = val_[leaving] / T_(r, best);  // usually ~0
      val_[best] += step;
      for (int k = 0; k < m_; ++k)
        if (k != r) val_[basis_[k]] -= T_(k, best) * step;
      val_[leaving] = 0.0;
      pivot(r, best);
    }
  }

  LPSolution finish(LPStatus s) {
    LPSolution sol;
    sol.status = s;
    sol.iterations = iterations_;
    if (s != LPStatus::kOptimal) return sol;
    sol.x = Vector(n_);
    for (int j = 0; j < n_; ++j) {
      const int c = col_of_[j];
      sol.x(j) = c < 0 ? prob_->lower(j) : std::clamp(val_[c], lo_[c], hi_[c]);
    }
    // Row check on the clamped point against the original rows.
    for (const LPRow& row : prob_->rows) {
      double act = 0.0;
      for (const auto& [j, a] : row.terms) act += a * sol.x(j);
      const double tol = 10.0 * tol_.feas_tol * (1.0 + std::abs(row.rhs));
      const bool ok = row.rel == Relation::kLe   ? act <= row.rhs + tol
                      : row.rel == Relation::kGe ? act >= row.rhs - tol
                                                 : std::abs(act - row.rhs) <= tol;
      if (!ok) {
        sol.status = LPStatus::kNumericalFailure;
        return sol;
      }
    }
    sol.objective_value = objective_.dot(sol.x) + prob_->objective_offset;
    return sol;
  }

 public:
  bool trivially_infeasible() const { return trivially_infeasible_; }

 private:
  LPTolerances tol_;
  const LPProblem* prob_ = nullptr;
  int n_ = 0, m_ = 0, N_ = 0, ns_ = 0, num_art_ = 0, art_begin_ = 0;
  std::vector<int> col_of_, struct_of_, slack_of_;
  RowMatrix A_;
  RowMatrix T_;
  Vector b_;
  Vector objective_;
  Vector d_;
  std::vector<double> lo_, hi_, val_, cost_;
  std::vector<int> basis_;
  std::vector<bool> is_basic_;
  std::vector<int> unit_row_;
  std::vector<double> unit_val_;
  int iterations_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
  bool trivially_infeasible_ = false;
};

}  // namespace detail

// Solves a bounded-variable LP (maximisation). Deterministic. Never reports
// Optimal for a point that fails the final feasibility check.
inline LPSolution solve_lp(const LPProblem& p, const LPTolerances& tol = {}) {
  if (p.lower.size() != p.objective.size() || p.upper.size() != p.objective.size())
    throw InputError("LP bounds do not match objective length");
  if (!p.objective.allFinite()) throw InputError("LP objective must be finite");
  for (const LPRow& r : p.rows) {
    if (!std::isfinite(r.rhs)) throw InputError("LP rhs must be finite");
    for (const auto& term : r.terms)
      if (!std::isfinite(term.second)) throw InputError("LP coefficient must be finite");
  }
  detail::DenseSimplex s(p, tol);
  if (s.trivially_infeasible()) {
    LPSolution sol;
    sol.status = LPStatus::kInfeasible;
    return sol;
  }
  return s.run();
}

class SimplexSolver final : public LpSolver {
 public:
  LPSolution solve(const LPProblem& p, const LPTolerances& tol) const override {
    return solve_lp(p, tol);
  }
};

}  // namespace lipcert

#endif  // LIPCERT_LP_HPP_
