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

#ifndef LIPCERT_MIP_HPP_
#define LIPCERT_MIP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/lp.hpp"

namespace lipcert {

struct VarId {
  int index = -1;
  friend bool operator==(VarId a, VarId b) { return a.index == b.index; }
  friend bool operator<(VarId a, VarId b) { return a.index < b.index; }
};

enum class VarKind { kContinuous, kBinary };

struct Variable {
  VarKind kind = VarKind::kContinuous;
  double lo = 0.0;
  double hi = 0.0;
  std::string name;
  // Stable identity across rebuilt models (branch-and-bound keys on it).
  std::int64_t tag = -1;
};

// Sparse affine expression sum_k coef_k * var_k + constant.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double c) : constant_(c) {}  // NOLINT(google-explicit-constructor)
  LinExpr(VarId v, double coef = 1.0) { add(v, coef); }  // NOLINT

  LinExpr& add(VarId v, double coef) {
    if (coef == 0.0) return *this;
    auto [it, inserted] = terms_.emplace(v.index, coef);
    if (!inserted) {
      it->second += coef;
      if (it->second == 0.0) terms_.erase(it);
    }
    return *this;
  }
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  LinExpr& operator+=(const LinExpr& o) {
    for (const auto& [k, c] : o.terms_) add(VarId{k}, c);
    constant_ += o.constant_;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) { return *this += o * -1.0; }
  LinExpr& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      constant_ = 0.0;
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    constant_ *= s;
    return *this;
  }
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }

  const std::map<int, double>& terms() const { return terms_; }
  double constant() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

  // The variable when the expression is exactly 1 * var.
  std::optional<VarId> as_var() const {
    if (terms_.size() == 1 && constant_ == 0.0 && terms_.begin()->second == 1.0)
      return VarId{terms_.begin()->first};
    return std::nullopt;
  }

  double evaluate(const Vector& values) const {
    double s = constant_;
    for (const auto& [k, c] : terms_) s += c * values(k);
    return s;
  }

 private:
  std::map<int, double> terms_;
  double constant_ = 0.0;
};

struct Constraint {
  LinExpr expr;  // constant folded into rhs on insertion
  Relation rel = Relation::kLe;
  double rhs = 0.0;
  std::string name;
};

// max objective  s.t.  constraints, variable bounds, binaries in {0,1}.
class MIPModel {
 public:
  VarId add_continuous(double lo, double hi, std::string name = {}) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw ModelError("variable '" + name + "' needs finite bounds");
    if (lo > hi) throw ModelError("variable '" + name + "' has lo > hi");
    vars_.push_back({VarKind::kContinuous, lo, hi, std::move(name), -1});
    return VarId{static_cast<int>(vars_.size()) - 1};
  }

  VarId add_binary(std::string name = {}, std::int64_t tag = -1) {
    vars_.push_back({VarKind::kBinary, 0.0, 1.0, std::move(name), tag});
    const VarId id{static_cast<int>(vars_.size()) - 1};
    if (tag >= 0) tag_index_[tag] = id.index;
    return id;
  }

  void add_constraint(const LinExpr& e, Relation rel, double rhs, std::string name = {}) {
    for (const auto& [k, c] : e.terms()) {
      if (k < 0 || k >= num_vars()) throw ModelError("constraint references unknown variable");
      if (!std::isfinite(c)) throw ModelError("non-finite coefficient in '" + name + "'");
    }
    if (!std::isfinite(rhs) || !std::isfinite(e.constant()))
      throw ModelError("non-finite right-hand side in '" + name + "'");
    LinExpr lhs = e;
    const double shifted = rhs - e.constant();
    lhs.add_constant(-e.constant());
    cons_.push_back({std::move(lhs), rel, shifted, std::move(name)});
  }

  void set_objective(LinExpr obj) { objective_ = std::move(obj); }

  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& variable(VarId v) const { return vars_[v.index]; }
  void set_bounds(VarId v, double lo, double hi) {
    vars_[v.index].lo = lo;
    vars_[v.index].hi = hi;
  }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const LinExpr& objective() const { return objective_; }
  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(cons_.size()); }
  int num_binaries() const {
    return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
      return v.kind == VarKind::kBinary;
    }));
  }

  std::optional<VarId> find_tag(std::int64_t tag) const {
    auto it = tag_index_.find(tag);
    if (it == tag_index_.end()) return std::nullopt;
    return VarId{it->second};
  }

  // Binaries eliminated during encoding because bounds fixed them.
  void record_implied(std::int64_t tag, int value) {
    if (tag >= 0) implied_tags_[tag] = value;
  }
  const std::map<std::int64_t, int>& implied_tags() const { return implied_tags_; }

  // Continuous relaxation (binaries become [lo,hi] continuous columns).
  LPProblem to_lp() const {
    LPProblem p;
    const int n = num_vars();
    p.objective = Vector::Zero(n);
    p.lower = Vector(n);
    p.upper = Vector(n);
    for (int j = 0; j < n; ++j) {
      p.lower(j) = vars_[j].lo;
      p.upper(j) = vars_[j].hi;
    }
    for (const auto& [k, c] : objective_.terms()) p.objective(k) = c;
    p.objective_offset = objective_.constant();
    p.rows.reserve(cons_.size());
    for (const Constraint& c : cons_) {
      LPRow r;
      r.rel = c.rel;
      r.rhs = c.rhs;
      r.terms.assign(c.expr.terms().begin(), c.expr.terms().end());
      p.rows.push_back(std::move(r));
    }
    return p;
  }

  double objective_value(const Vector& values) const { return objective_.evaluate(values); }

  // Full feasibility check of an assignment, including integrality.
  bool is_feasible(const Vector& values, double tol = 1e-9, std::string* why = nullptr) const {
    auto fail = [why](std::string msg) {
      if (why) *why = std::move(msg);
      return false;
    };
    if (values.size() != num_vars()) return fail("assignment has wrong length");
    for (int j = 0; j < num_vars(); ++j) {
      const Variable& v = vars_[j];
      if (values(j) < v.lo - tol || values(j) > v.hi + tol)
        return fail("variable " + std::to_string(j) + " (" + v.name + ") out of bounds");
      if (v.kind == VarKind::kBinary &&
          std::abs(values(j) - std::round(values(j))) > tol)
        return fail("binary " + std::to_string(j) + " (" + v.name + ") not integral");
    }
    for (const Constraint& c : cons_) {
      const double act = c.expr.evaluate(values);
      const double scale = tol * (1.0 + std::abs(c.rhs));
      bool ok = true;
      if (c.rel == Relation::kLe) ok = act <= c.rhs + scale;
      if (c.rel == Relation::kGe) ok = act >= c.rhs - scale;
      if (c.rel == Relation::kEq) ok = std::abs(act - c.rhs) <= scale;
      if (!ok) return fail("constraint '" + c.name + "' violated");
    }
    return true;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  LinExpr objective_;
  std::unordered_map<std::int64_t, int> tag_index_;
  std::map<std::int64_t, int> implied_tags_;
};

// Every binary re-typed continuous; bounds kept (so [0,1] unless fixed).
inline MIPModel lp_relaxation(const MIPModel& model) {
  MIPModel relaxed;
  for (const Variable& v : model.variables()) {
    relaxed.add_continuous(v.lo, v.hi, v.name);
  }
  for (const Constraint& c : model.constraints()) relaxed.add_constraint(c.expr, c.rel, c.rhs, c.name);
  relaxed.set_objective(model.objective());
  return relaxed;
}

// CPLEX LP text format. Variables are written as v<index>.
inline std::string export_lp_format(const MIPModel& model) {
  std::ostringstream out;
  out.precision(17);
  auto write_expr = [&out](const LinExpr& e) {
    bool first = true;
    for (const auto& [k, c] : e.terms()) {
      out << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + ")) << std::abs(c) << " v" << k;
      first = false;
    }
    if (first) out << "0 v0";
  };
  out << "\\ lipcert model: " << model.num_vars() << " variables, " << model.num_constraints()
      << " constraints\n";
  out << "Maximize\n obj: ";
  write_expr(model.objective());
  if (const double c0 = model.objective().constant(); c0 != 0.0)
    out << (c0 < 0 ? " - " : " + ") << std::abs(c0);
  out << "\nSubject To\n";
  int i = 0;
  for (const Constraint& c : model.constraints()) {
    out << " c" << i++ << ": ";
    write_expr(c.expr);
    out << (c.rel == Relation::kLe ? " <= " : c.rel == Relation::kGe ? " >= " : " = ") << c.rhs
        << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.variables()[j];
    if (v.kind == VarKind::kBinary && v.lo == 0.0 && v.hi == 1.0) continue;
    out << " " << v.lo << " <= v" << j << " <= " << v.hi << "\n";
  }
  out << "Binary\n";
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.variables()[j].kind == VarKind::kBinary) out << " v" << j << "\n";
  out << "End\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Operator encodings

// A linear quantity of the model together with known interval bounds.
struct Bounded {
  LinExpr expr;
  double lo = 0.0;
  double hi = 0.0;
};

// A binary that is either a model variable or fixed by bounds.
struct BinaryRef {
  std::optional<VarId> var;
  int fixed = -1;  // 0 or 1 when var is empty

  static BinaryRef constant(int v) { return {std::nullopt, v}; }
  bool is_fixed() const { return !var.has_value(); }
  LinExpr expr() const { return var ? LinExpr(*var) : LinExpr(static_cast<double>(fixed)); }
};

// Model under construction plus the bookkeeping the encoders share.
struct EncodingContext {
  MIPModel model;
  std::map<std::string, VarId> names;

  VarId continuous(double lo, double hi, const std::string& name) {
    const VarId v = model.add_continuous(lo, hi, name);
    if (!name.empty()) names[name] = v;
    return v;
  }
  VarId binary(const std::string& name, std::int64_t tag) {
    const VarId v = model.add_binary(name, tag);
    if (!name.empty()) names[name] = v;
    return v;
  }
};

inline Bounded bounded_var(EncodingContext& ctx, double lo, double hi, const std::string& name) {
  return {LinExpr(ctx.continuous(lo, hi, name)), lo, hi};
}

// out = W in + b with fresh output variables bounded by the interval image,
// or by `bounds` when the caller has a tighter sound record.
inline std::vector<Bounded> encode_affine(EncodingContext& ctx, const std::vector<Bounded>& in,
                                          const Matrix& w, const Vector& b,
                                          const std::string& prefix = "aff",
                                          const Hyperbox* bounds = nullptr) {
  if (w.cols() != static_cast<Eigen::Index>(in.size()))
    throw InputError("encode_affine: matrix has " + std::to_string(w.cols()) +
                     " columns, got " + std::to_string(in.size()) + " inputs");
  if (b.size() != 0 && b.size() != w.rows()) throw InputError("encode_affine: bias length mismatch");
  Hyperbox box;
  box.l.resize(static_cast<Eigen::Index>(in.size()));
  box.u.resize(static_cast<Eigen::Index>(in.size()));
  for (std::size_t k = 0; k < in.size(); ++k) {
    box.l(k) = in[k].lo;
    box.u(k) = in[k].hi;
  }
  const Hyperbox img = bounds ? *bounds : push_affine(box, w, b);
  if (img.dim() != w.rows()) throw InputError("encode_affine: bound record has wrong dimension");
  std::vector<Bounded> out;
  out.reserve(static_cast<std::size_t>(w.rows()));
  const bool all_constant = std::all_of(in.begin(), in.end(),
                                        [](const Bounded& v) { return v.expr.is_constant(); });
  if (all_constant) {
    Vector c(static_cast<Eigen::Index>(in.size()));
    for (std::size_t k = 0; k < in.size(); ++k) c(k) = in[k].expr.constant();
    Vector v = w * c;
    if (b.size()) v += b;
    for (Eigen::Index r = 0; r < w.rows(); ++r) out.push_back({LinExpr(v(r)), v(r), v(r)});
    return out;
  }
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const std::string name = prefix + "_" + std::to_string(r);
    Bounded y = bounded_var(ctx, img.l(r), img.u(r), name);
    LinExpr def = y.expr;
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      if (w(r, c) != 0.0) def -= in[c].expr * w(r, c);
    ctx.model.add_constraint(def, Relation::kEq, b.size() ? b(r) : 0.0, name + "_def");
    out.push_back(std::move(y));
  }
  return out;
}

// out = W in + b kept as expressions over the inputs' variables (no fresh
// columns). Rows are added only where `bounds` is tighter than the interval
// image of the inputs, so the relaxation matches encode_affine's.
inline std::vector<Bounded> substitute_affine(EncodingContext& ctx, const std::vector<Bounded>& in,
                                              const Matrix& w, const Vector& b,
                                              const std::string& prefix,
                                              const Hyperbox* bounds = nullptr) {
  if (w.cols() != static_cast<Eigen::Index>(in.size()))
    throw InputError("substitute_affine: matrix has " + std::to_string(w.cols()) +
                     " columns, got " + std::to_string(in.size()) + " inputs");
  if (b.size() != 0 && b.size() != w.rows())
    throw InputError("substitute_affine: bias length mismatch");
  Hyperbox box;
  box.l.resize(static_cast<Eigen::Index>(in.size()));
  box.u.resize(static_cast<Eigen::Index>(in.size()));
  for (std::size_t k = 0; k < in.size(); ++k) {
    box.l(k) = in[k].lo;
    box.u(k) = in[k].hi;
  }
  const Hyperbox natural = push_affine(box, w, b);
  const Hyperbox& rec = bounds ? *bounds : natural;
  if (rec.dim() != w.rows()) throw InputError("substitute_affine: bound record has wrong dimension");
  std::vector<Bounded> out;
  out.reserve(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    LinExpr e(b.size() ? b(r) : 0.0);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      if (w(r, c) != 0.0) e += in[c].expr * w(r, c);
    const std::string name = prefix + "_" + std::to_string(r);
    if (!e.is_constant()) {
      constexpr double kSlack = 1e-12;
      if (rec.l(r) > natural.l(r) + kSlack * (1.0 + std::abs(rec.l(r))))
        ctx.model.add_constraint(e, Relation::kGe, rec.l(r), name + "_lo");
      if (rec.u(r) < natural.u(r) - kSlack * (1.0 + std::abs(rec.u(r))))
        ctx.model.add_constraint(e, Relation::kLe, rec.u(r), name + "_hi");
    }
    double lo = rec.l(r), hi = rec.u(r);
    if (e.is_constant()) lo = hi = e.constant();
    out.push_back({std::move(e), lo, hi});
  }
  return out;
}

// a = C(x) (1 iff x >= 0, either at x = 0). Fixed without constraints when
// the sign is known; otherwise x >= l(1 - a) and x <= u a.
inline BinaryRef encode_conditional(EncodingContext& ctx, const Bounded& x,
                                    const std::string& name = "cond", std::int64_t tag = -1) {
  if (!(x.lo <= x.hi) || !std::isfinite(x.lo) || !std::isfinite(x.hi))
    throw ModelError("encode_conditional '" + name + "': invalid bounds");
  if (x.lo > 0.0) {
    ctx.model.record_implied(tag, 1);
    return BinaryRef::constant(1);
  }
  if (x.hi < 0.0) {
    ctx.model.record_implied(tag, 0);
    return BinaryRef::constant(0);
  }
  const VarId a = ctx.binary(name, tag);
  // x - l + l a >= 0
  ctx.model.add_constraint(x.expr + LinExpr(a, x.lo), Relation::kGe, x.lo, name + "_lo");
  // x - u a <= 0
  ctx.model.add_constraint(x.expr - LinExpr(a, x.hi), Relation::kLe, 0.0, name + "_hi");
  return {a, -1};
}

// y = x * a. Free a: y >= x - u(1-a), y <= x - l(1-a), y >= l a, y <= u a.
// Fixed a: a single equality y = x or y = 0.
inline Bounded encode_switch(EncodingContext& ctx, const Bounded& x, const BinaryRef& a,
                             const std::string& name = "sw") {
  if (!(x.lo <= x.hi)) throw ModelError("encode_switch '" + name + "': lo > hi");
  if (a.is_fixed()) {
    if (x.expr.is_constant()) {
      const double v = a.fixed == 1 ? x.expr.constant() : 0.0;
      return {LinExpr(v), v, v};
    }
    if (a.fixed == 1) {
      Bounded y = bounded_var(ctx, x.lo, x.hi, name);
      ctx.model.add_constraint(y.expr - x.expr, Relation::kEq, 0.0, name + "_eq");
      return y;
    }
    Bounded y = bounded_var(ctx, 0.0, 0.0, name);
    ctx.model.add_constraint(y.expr, Relation::kEq, 0.0, name + "_eq");
    return y;
  }
  const double lo = std::min(x.lo, 0.0), hi = std::max(x.hi, 0.0);
  if (x.expr.is_constant()) {
    // Constant x: y = c a is already linear.
    const double c = x.expr.constant();
    return {LinExpr(*a.var, c), lo, hi};
  }
  Bounded y = bounded_var(ctx, lo, hi, name);
  const VarId av = *a.var;
  const double l = x.lo, u = x.hi;
  // y - x - u a >= -u
  ctx.model.add_constraint(y.expr - x.expr - LinExpr(av, u), Relation::kGe, -u, name + "_1");
  // y - x - l a <= -l
  ctx.model.add_constraint(y.expr - x.expr - LinExpr(av, l), Relation::kLe, -l, name + "_2");
  ctx.model.add_constraint(y.expr - LinExpr(av, l), Relation::kGe, 0.0, name + "_3");
  ctx.model.add_constraint(y.expr - LinExpr(av, u), Relation::kLe, 0.0, name + "_4");
  return y;
}

// Convex one-breakpoint piecewise-linear R(x) = max(A1(x), A2(x)) with a = 0
// selecting A1 and a = 1 selecting A2:
//   y >= A1, y >= A2, y <= A1 - a zeta-, y <= A2 + (1 - a) zeta+
// where [zeta-, zeta+] bounds A1 - A2 over the input interval. The feasible
// set is exactly the graph of R.
struct PiecewiseEncoding {
  Bounded y;
  BinaryRef a;
};

inline PiecewiseEncoding encode_convex_piece(EncodingContext& ctx, const LinExpr& a1,
                                             const LinExpr& a2, double zeta_lo, double zeta_hi,
                                             double y_lo, double y_hi, const std::string& name,
                                             std::int64_t tag) {
  const VarId a = ctx.binary(name + "_sel", tag);
  Bounded y = bounded_var(ctx, y_lo, y_hi, name);
  ctx.model.add_constraint(y.expr - a1, Relation::kGe, 0.0, name + "_ge1");
  ctx.model.add_constraint(y.expr - a2, Relation::kGe, 0.0, name + "_ge2");
  ctx.model.add_constraint(y.expr - a1 + LinExpr(a, zeta_lo), Relation::kLe, 0.0, name + "_le1");
  ctx.model.add_constraint(y.expr - a2 + LinExpr(a, zeta_hi), Relation::kLe, zeta_hi,
                           name + "_le2");
  return {std::move(y), BinaryRef{a, -1}};
}

// y = |x|. a = 0 on the x >= 0 side. A known sign needs no binary.
inline PiecewiseEncoding encode_abs(EncodingContext& ctx, const Bounded& x,
                                    const std::string& name = "abs", std::int64_t tag = -1) {
  if (!(x.lo <= x.hi)) throw ModelError("encode_abs '" + name + "': lo > hi");
  if (x.expr.is_constant()) {
    const double v = std::abs(x.expr.constant());
    ctx.model.record_implied(tag, x.expr.constant() >= 0.0 ? 0 : 1);
    return {{LinExpr(v), v, v}, BinaryRef::constant(x.expr.constant() >= 0.0 ? 0 : 1)};
  }
  if (x.lo >= 0.0) {
    ctx.model.record_implied(tag, 0);
    return {{x.expr, x.lo, x.hi}, BinaryRef::constant(0)};
  }
  if (x.hi <= 0.0) {
    ctx.model.record_implied(tag, 1);
    return {{x.expr * -1.0, -x.hi, -x.lo}, BinaryRef::constant(1)};
  }
  const double hi = std::max(-x.lo, x.hi);
  return encode_convex_piece(ctx, x.expr, x.expr * -1.0, 2.0 * x.lo, 2.0 * x.hi, 0.0, hi, name,
                             tag);
}

// y = relu(x), a = 1 on the x >= 0 side.
inline PiecewiseEncoding encode_relu(EncodingContext& ctx, const Bounded& x,
                                     const std::string& name = "relu", std::int64_t tag = -1) {
  if (!(x.lo <= x.hi)) throw ModelError("encode_relu '" + name + "': lo > hi");
  if (x.lo >= 0.0) {
    ctx.model.record_implied(tag, 1);
    return {x, BinaryRef::constant(1)};
  }
  if (x.hi <= 0.0) {
    ctx.model.record_implied(tag, 0);
    return {{LinExpr(0.0), 0.0, 0.0}, BinaryRef::constant(0)};
  }
  // A1 = 0 (a = 0), A2 = x (a = 1); A1 - A2 = -x in [-u, -l].
  PiecewiseEncoding e =
      encode_convex_piece(ctx, LinExpr(0.0), x.expr, -x.hi, -x.lo, 0.0, x.hi, name, tag);
  return e;
}

// t = max_k x_k folded left to right: t <- t + relu(x_k - t), one binary per
// fold that bounds cannot decide. Each partial maximum is a fresh variable
// bounded by [max lo, max hi].
struct MaxEncoding {
  Bounded t;
  struct Fold {
    PiecewiseEncoding relu;
    Bounded t;
  };
  std::vector<Fold> folds;
};

inline MaxEncoding encode_max(EncodingContext& ctx, const std::vector<Bounded>& xs,
                              const std::string& name = "max", std::int64_t first_tag = -1) {
  if (xs.empty()) throw InputError("encode_max needs at least one input");
  MaxEncoding enc;
  enc.t = xs.front();
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const std::string fname = name + "_" + std::to_string(k);
    const std::int64_t tag = first_tag >= 0 ? first_tag + static_cast<std::int64_t>(k) - 1 : -1;
    Bounded diff{xs[k].expr - enc.t.expr, xs[k].lo - enc.t.hi, xs[k].hi - enc.t.lo};
    PiecewiseEncoding r = encode_relu(ctx, diff, fname + "_relu", tag);
    const double lo = std::max(enc.t.lo, xs[k].lo), hi = std::max(enc.t.hi, xs[k].hi);
    Bounded t = bounded_var(ctx, lo, hi, fname);
    ctx.model.add_constraint(t.expr - enc.t.expr - r.y.expr, Relation::kEq, 0.0, fname + "_def");
    enc.folds.push_back({std::move(r), t});
    enc.t = std::move(t);
  }
  return enc;
}

// z in Conv({e_i} u {e_i - e_j}) through z = z+ - z-, z+- >= 0,
// sum z+ <= 1, sum z- <= 1, sum z+ >= sum z-.
inline std::vector<Bounded> encode_cross_norm_ball(EncodingContext& ctx, int m,
                                                   const std::string& name = "z") {
  if (m < 1) throw InputError("encode_cross_norm_ball needs m >= 1");
  std::vector<Bounded> z;
  LinExpr sum_pos, sum_neg;
  for (int i = 0; i < m; ++i) {
    const std::string n = name + "_" + std::to_string(i);
    const VarId p = ctx.continuous(0.0, 1.0, n + "_pos");
    const VarId q = ctx.continuous(0.0, 1.0, n + "_neg");
    Bounded zi = bounded_var(ctx, -1.0, 1.0, n);
    ctx.model.add_constraint(zi.expr - LinExpr(p) + LinExpr(q), Relation::kEq, 0.0, n + "_split");
    sum_pos.add(p, 1.0);
    sum_neg.add(q, 1.0);
    z.push_back(std::move(zi));
  }
  ctx.model.add_constraint(sum_pos, Relation::kLe, 1.0, name + "_pos_sum");
  ctx.model.add_constraint(sum_neg, Relation::kLe, 1.0, name + "_neg_sum");
  ctx.model.add_constraint(sum_pos - sum_neg, Relation::kGe, 0.0, name + "_balance");
  return z;
}

// ||z||_1 <= 1 via the same positive/negative split.
inline std::vector<Bounded> encode_l1_ball(EncodingContext& ctx, int m,
                                           const std::string& name = "z") {
  if (m < 1) throw InputError("encode_l1_ball needs m >= 1");
  std::vector<Bounded> z;
  LinExpr total;
  for (int i = 0; i < m; ++i) {
    const std::string n = name + "_" + std::to_string(i);
    const VarId p = ctx.continuous(0.0, 1.0, n + "_pos");
    const VarId q = ctx.continuous(0.0, 1.0, n + "_neg");
    Bounded zi = bounded_var(ctx, -1.0, 1.0, n);
    ctx.model.add_constraint(zi.expr - LinExpr(p) + LinExpr(q), Relation::kEq, 0.0, n + "_split");
    total.add(p, 1.0);
    total.add(q, 1.0);
    z.push_back(std::move(zi));
  }
  ctx.model.add_constraint(total, Relation::kLe, 1.0, name + "_l1");
  return z;
}

// z in [-1, 1]^m.
inline std::vector<Bounded> encode_box_ball(EncodingContext& ctx, int m,
                                            const std::string& name = "z") {
  if (m < 1) throw InputError("encode_box_ball needs m >= 1");
  std::vector<Bounded> z;
  for (int i = 0; i < m; ++i) z.push_back(bounded_var(ctx, -1.0, 1.0, name + "_" + std::to_string(i)));
  return z;
}

inline std::vector<Bounded> encode_dual_ball(EncodingContext& ctx, int m, OutputNorm beta) {
  switch (beta) {
    case OutputNorm::kL1:
      return encode_box_ball(ctx, m);
    case OutputNorm::kLinf:
      return encode_l1_ball(ctx, m);
    case OutputNorm::kCross:
      return encode_cross_norm_ball(ctx, m);
  }
  throw InputError("unsupported output norm");
}

}  // namespace lipcert

#endif  // LIPCERT_MIP_HPP_
