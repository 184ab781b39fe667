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

#ifndef LIPCERT_BNB_HPP_
#define LIPCERT_BNB_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"
#include "lipcert/lp.hpp"
#include "lipcert/mip.hpp"

namespace lipcert {

inline constexpr double kPruneTol = 1e-9;
inline constexpr double kGapEps = 1e-9;
inline constexpr double kExactGap = 1e-8;
inline constexpr double kIntegralityTol = 1e-6;

struct SolveOptions {
  double target_gap = 0.0;
  double timeout_seconds = kInf;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  bool deterministic = true;
  int threads = 1;
  bool bound_tightening = true;
  bool record_events = true;
  LPTolerances lp_tolerances;
};

enum class MIPStatus { kExact, kGapReached, kTimeout, kNodeLimit, kNumericalFailure, kInfeasible };

inline std::string to_string(MIPStatus s) {
  switch (s) {
    case MIPStatus::kExact:
      return "exact";
    case MIPStatus::kGapReached:
      return "gap_reached";
    case MIPStatus::kTimeout:
      return "timeout";
    case MIPStatus::kNodeLimit:
      return "node_limit";
    case MIPStatus::kNumericalFailure:
      return "numerical_failure";
    case MIPStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

struct BnbEvent {
  std::int64_t node = 0;
  int depth = 0;
  double upper_bound = 0.0;
  double incumbent = 0.0;
};

struct MIPResult {
  double upper_bound = kInf;
  double incumbent_value = -kInf;
  Vector incumbent_point;
  double gap = kInf;
  MIPStatus status = MIPStatus::kInfeasible;
  std::int64_t nodes_explored = 0;
  double wall_time = 0.0;
  std::string diagnostic;
  std::vector<BnbEvent> events;
};

inline double relative_gap(double upper, double incumbent) {
  if (!std::isfinite(incumbent)) return kInf;
  return std::max(0.0, upper - incumbent) / std::max(std::abs(incumbent), kGapEps);
}

inline void write_event_csv(std::ostream& os, const std::vector<BnbEvent>& events) {
  os << "node,depth,upper_bound,incumbent\n";
  os.precision(17);
  for (const BnbEvent& e : events)
    os << e.node << ',' << e.depth << ',' << e.upper_bound << ',' << e.incumbent << '\n';
}

// Branching decisions keyed by binary tag (a binary's index when untagged).
using Fixings = std::vector<std::pair<std::int64_t, int>>;

struct Candidate {
  double value = -kInf;
  Vector point;
};

struct BnbCallbacks {
  // Model for a node before its fixings are applied; nullopt = infeasible.
  // Defaults to the root model.
  std::function<std::optional<MIPModel>(const Fixings&)> node_model;
  // Feasible objective value derived from a node's LP solution (a valid lower
  // bound). Defaults to accepting integral LP solutions as they are.
  std::function<std::optional<Candidate>(const MIPModel&, const LPSolution&, bool integral)>
      primal;
  // Branching class of a binary key; fractional binaries of the lowest class
  // are branched on first. Defaults to a single class.
  std::function<int(std::int64_t)> branch_priority;
};

namespace detail {

inline std::int64_t binary_key(const Variable& v, int index) {
  return v.tag >= 0 ? v.tag : (std::int64_t{1} << 40) + index;
}

// Pins the fixings as variable bounds; false when they contradict the model.
inline bool apply_fixings(MIPModel& model, const Fixings& fixings) {
  std::map<std::int64_t, int> by_key;
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.variables()[j];
    if (v.kind == VarKind::kBinary) by_key[binary_key(v, j)] = j;
  }
  for (const auto& [key, value] : fixings) {
    auto it = by_key.find(key);
    if (it != by_key.end()) {
      const Variable& v = model.variables()[it->second];
      if (value < v.lo || value > v.hi) return false;
      model.set_bounds(VarId{it->second}, value, value);
      continue;
    }
    auto implied = model.implied_tags().find(key);
    if (implied != model.implied_tags().end() && implied->second != value) return false;
  }
  return true;
}

inline bool is_integral(const MIPModel& model, const Vector& x) {
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.variables()[j].kind == VarKind::kBinary &&
        std::abs(x(j) - std::round(x(j))) > kIntegralityTol)
      return false;
  return true;
}

// Most fractional binary; ties go to the lowest key.
inline std::optional<std::int64_t> branching_key(
    const MIPModel& model, const Vector& x,
    const std::function<int(std::int64_t)>& priority = {}) {
  std::optional<std::int64_t> best;
  int best_class = 0;
  double best_frac = kIntegralityTol;
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.variables()[j];
    if (v.kind != VarKind::kBinary) continue;
    const double frac = std::min(x(j) - std::floor(x(j)), std::ceil(x(j)) - x(j));
    if (frac <= kIntegralityTol) continue;
    const std::int64_t key = binary_key(v, j);
    const int cls = priority ? priority(key) : 0;
    bool better = !best || cls < best_class;
    if (best && cls == best_class)
      better = frac > best_frac + 1e-12 || (std::abs(frac - best_frac) <= 1e-12 && key < *best);
    if (better) {
      best_class = cls;
      best_frac = frac;
      best = key;
    }
  }
  return best;
}

struct Node {
  Fixings fixings;
  double bound = kInf;
  int depth = 0;
  std::int64_t id = 0;
  std::int64_t branch_key = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace detail

// Best-first branch-and-bound (maximisation).
class BranchAndBound {
 public:
  BranchAndBound(const MIPModel& root, BnbCallbacks callbacks, SolveOptions opts,
                 const LpSolver* lp = nullptr)
      : root_(root), cb_(std::move(callbacks)), opts_(std::move(opts)), lp_(lp) {
    if (!(opts_.target_gap >= 0.0)) throw InputError("target_gap must be >= 0");
    if (opts_.threads < 1) throw InputError("threads must be >= 1");
    if (!cb_.node_model)
      cb_.node_model = [this](const Fixings&) { return std::optional<MIPModel>(root_); };
  }

  MIPResult run() {
    start_ = Clock::now();
    result_ = MIPResult{};
    incumbent_ = Candidate{};
    open_ = {};
    in_flight_.clear();
    failed_bound_ = -kInf;
    stop_ = false;
    next_id_ = 0;
    upper_trace_ = kInf;

    Evaluated root = evaluate({}, kInf);
    ++result_.nodes_explored;
    if (root.failed) {
      failed_bound_ = kInf;
      finish(MIPStatus::kNumericalFailure, "root LP failed");
      return result_;
    }
    if (root.infeasible) {
      result_.upper_bound = -kInf;
      finish(MIPStatus::kInfeasible, "root relaxation infeasible");
      return result_;
    }
    offer(root.candidate);
    if (root.branch_key) push(detail::Node{{}, root.bound, 0, next_id_++, *root.branch_key});
    log_event(0, 0);

    const bool parallel = opts_.threads > 1 && !opts_.deterministic;
    if (parallel) {
      std::vector<std::thread> pool;
      for (int t = 0; t < opts_.threads; ++t) pool.emplace_back([this] { worker(); });
      for (std::thread& t : pool) t.join();
    } else {
      worker();
    }
    return result_;
  }

 private:
  using Clock = std::chrono::steady_clock;

  struct Evaluated {
    bool infeasible = false;
    bool failed = false;
    double bound = -kInf;
    std::optional<Candidate> candidate;
    std::optional<std::int64_t> branch_key;
  };

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  LPSolution solve_relaxation(const MIPModel& m) const {
    const LPProblem p = m.to_lp();
    auto call = [&](const LPTolerances& tol) {
      return lp_ ? lp_->solve(p, tol) : solve_lp(p, tol);
    };
    LPSolution s = call(opts_.lp_tolerances);
    if (s.status == LPStatus::kNumericalFailure || s.status == LPStatus::kUnbounded) {
      LPTolerances tight = opts_.lp_tolerances;
      tight.feas_tol *= 0.1;
      tight.pivot_tol *= 0.1;
      s = call(tight);
    }
    return s;
  }

  // Solves one node; runs without holding the lock.
  Evaluated evaluate(const Fixings& fixings, double parent_bound) const {
    Evaluated e;
    std::optional<MIPModel> model = cb_.node_model(fixings);
    if (!model || !detail::apply_fixings(*model, fixings)) {
      e.infeasible = true;
      return e;
    }
    const LPSolution s = solve_relaxation(*model);
    if (s.status == LPStatus::kInfeasible) {
      e.infeasible = true;
      return e;
    }
    if (s.status != LPStatus::kOptimal) {
      e.failed = true;
      e.bound = parent_bound;
      return e;
    }
    e.bound = std::min(s.objective_value, parent_bound);
    const bool integral = detail::is_integral(*model, s.x);
    if (cb_.primal) e.candidate = cb_.primal(*model, s, integral);
    if (integral) {
      // The node is solved: its optimum is attained by the integral point.
      if (!e.candidate) e.candidate = Candidate{s.objective_value, s.x};
    } else {
      e.branch_key = detail::branching_key(*model, s.x, cb_.branch_priority);
    }
    return e;
  }

  void offer(const std::optional<Candidate>& c) {
    if (c && c->value > incumbent_.value) incumbent_ = *c;
  }

  void push(detail::Node n) {
    if (!prunable(n.bound)) open_.push(std::move(n));
  }

  bool prunable(double bound) const {
    if (!std::isfinite(incumbent_.value)) return false;
    return bound <= incumbent_.value + kPruneTol * std::max(std::abs(incumbent_.value), 1.0);
  }

  double current_upper() const {
    double ub = incumbent_.value;
    if (!open_.empty()) ub = std::max(ub, open_.top().bound);
    if (!in_flight_.empty()) ub = std::max(ub, *in_flight_.rbegin());
    ub = std::max(ub, failed_bound_);
    return ub;
  }

  void log_event(std::int64_t node, int depth) {
    const double ub = current_upper();
    upper_trace_ = std::min(upper_trace_, ub);
    if (opts_.record_events)
      result_.events.push_back({node, depth, std::max(upper_trace_, incumbent_.value),
                                incumbent_.value});
  }

  void finish(MIPStatus status, std::string diagnostic = {}) {
    result_.status = status;
    result_.diagnostic = std::move(diagnostic);
    result_.incumbent_value = incumbent_.value;
    result_.incumbent_point = incumbent_.point;
    if (status != MIPStatus::kInfeasible) {
      result_.upper_bound = std::max(std::min(upper_trace_, current_upper()), incumbent_.value);
      result_.gap = relative_gap(result_.upper_bound, incumbent_.value);
    }
    result_.wall_time = elapsed();
  }

  // Terminal state reached by exhausting the tree.
  void finish_from_state() {
    if (!std::isfinite(incumbent_.value) && failed_bound_ == -kInf) {
      result_.upper_bound = -kInf;
      finish(MIPStatus::kInfeasible, "no feasible point");
      return;
    }
    finish(failed_bound_ > -kInf ? MIPStatus::kNumericalFailure : MIPStatus::kExact);
  }

  // Checks termination with the lock held; true when the search should end.
  bool should_stop() {
    if (stop_) return true;
    while (!open_.empty() && prunable(open_.top().bound)) open_.pop();
    if (failed_bound_ > -kInf) {
      stop_ = true;
      finish(MIPStatus::kNumericalFailure, "LP failed twice at a node");
      return true;
    }
    if (open_.empty() && in_flight_.empty()) {
      stop_ = true;
      finish_from_state();
      return true;
    }
    const double gap = relative_gap(std::min(upper_trace_, current_upper()), incumbent_.value);
    if (gap <= kExactGap && in_flight_.empty()) {
      stop_ = true;
      finish(MIPStatus::kExact);
      return true;
    }
    if (opts_.target_gap > 0.0 && gap <= opts_.target_gap && in_flight_.empty()) {
      stop_ = true;
      finish(MIPStatus::kGapReached);
      return true;
    }
    if (elapsed() > opts_.timeout_seconds) {
      stop_ = true;
      finish(MIPStatus::kTimeout, "timeout");
      return true;
    }
    if (result_.nodes_explored >= opts_.node_limit) {
      stop_ = true;
      finish(MIPStatus::kNodeLimit, "node limit");
      return true;
    }
    return false;
  }

  void worker() {
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      if (should_stop()) {
        cv_.notify_all();
        return;
      }
      if (open_.empty()) {
        cv_.wait(lock);
        continue;
      }
      detail::Node node = open_.top();
      open_.pop();
      auto flight = in_flight_.insert(node.bound);
      lock.unlock();

      Evaluated kids[2];
      Fixings child_fix[2];
      for (int v = 0; v < 2; ++v) {
        child_fix[v] = node.fixings;
        child_fix[v].emplace_back(node.branch_key, v);
        kids[v] = evaluate(child_fix[v], node.bound);
      }

      lock.lock();
      result_.nodes_explored += 2;
      for (int v = 0; v < 2; ++v) {
        if (kids[v].failed) {
          failed_bound_ = std::max(failed_bound_, kids[v].bound);
          continue;
        }
        if (kids[v].infeasible) continue;
        offer(kids[v].candidate);
        if (kids[v].branch_key)
          push(detail::Node{child_fix[v], kids[v].bound, node.depth + 1, next_id_++,
                            *kids[v].branch_key});
      }
      in_flight_.erase(flight);
      log_event(node.id, node.depth);
      cv_.notify_all();
    }
  }

  const MIPModel& root_;
  BnbCallbacks cb_;
  SolveOptions opts_;
  const LpSolver* lp_;

  std::mutex mu_;
  std::condition_variable cv_;
  Clock::time_point start_;
  MIPResult result_;
  Candidate incumbent_;
  std::priority_queue<detail::Node, std::vector<detail::Node>, detail::NodeOrder> open_;
  std::multiset<double> in_flight_;
  double failed_bound_ = -kInf;
  double upper_trace_ = kInf;
  bool stop_ = false;
  std::int64_t next_id_ = 0;
};

inline MIPResult solve_mip(const MIPModel& model, BnbCallbacks callbacks = {},
                           const SolveOptions& opts = {}, const LpSolver* lp = nullptr) {
  BranchAndBound bnb(model, std::move(callbacks), opts, lp);
  return bnb.run();
}

// Optimum of the continuous relaxation: a certified upper bound.
inline double solve_relaxation_bound(const MIPModel& model, const LPTolerances& tol = {}) {
  const LPSolution s = solve_lp(lp_relaxation(model).to_lp(), tol);
  if (s.status == LPStatus::kInfeasible) return -kInf;
  if (s.status != LPStatus::kOptimal)
    throw ModelError("LP relaxation failed: " + to_string(s.status));
  return s.objective_value;
}

}  // namespace lipcert

#endif  // LIPCERT_BNB_HPP_
