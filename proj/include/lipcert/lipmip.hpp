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

#ifndef LIPCERT_LIPMIP_HPP_
#define LIPCERT_LIPMIP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lipcert/bnb.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/lipmip_model.hpp"
#include "lipcert/lp.hpp"
#include "lipcert/network.hpp"
#include "lipcert/norms.hpp"

namespace lipcert {

// ||J||_(alpha, beta); the absolute value for scalar networks.
inline double jacobian_norm(const Matrix& jac, const LipschitzQuery& q) {
  if (jac.rows() == 1) return dual_norm(jac.row(0).transpose(), q.input_norm);
  return operator_norm(jac, q.input_norm, q.output_norm);
}

namespace detail {

inline int binary_value(const MIPModel& m, const Vector& x, std::int64_t tag, int fallback) {
  if (auto v = m.find_tag(tag)) return x(v->index) >= 0.5 ? 1 : 0;
  auto it = m.implied_tags().find(tag);
  return it != m.implied_tags().end() ? it->second : fallback;
}

// A point of the closed region where every neuron has the sign in `mask`,
// chosen to maximise the smallest signed pre-activation.
inline std::optional<Vector> pattern_witness(const ReLUNetwork& net, const Hyperbox& domain,
                                             const std::vector<InputConstraint>& extra,
                                             const DerivativeMask& mask) {
  const int n0 = net.input_dim();
  LPProblem p;
  p.objective = Vector::Zero(n0 + 1);
  p.objective(n0) = 1.0;
  p.lower = Vector(n0 + 1);
  p.upper = Vector(n0 + 1);
  p.lower.head(n0) = domain.l;
  p.upper.head(n0) = domain.u;
  Matrix a = Matrix::Identity(n0, n0);
  Vector c = Vector::Zero(n0);
  double scale = 1.0;
  for (std::size_t i = 0; i < net.depth(); ++i) {
    Matrix za = net.layer(i).weight * a;
    Vector zc = net.layer(i).weight * c + net.layer(i).bias;
    for (int j = 0; j < net.width(i); ++j) {
      const double sgn = mask[i][j] ? 1.0 : -1.0;
      // sgn (za x + zc) - t >= 0
      LPRow r;
      r.rel = Relation::kGe;
      r.rhs = -sgn * zc(j);
      for (int k = 0; k < n0; ++k)
        if (za(j, k) != 0.0) r.terms.emplace_back(k, sgn * za(j, k));
      r.terms.emplace_back(n0, -1.0);
      p.rows.push_back(std::move(r));
      scale = std::max(scale, std::abs(zc(j)) + za.row(j).cwiseAbs().sum());
      if (!mask[i][j]) {
        za.row(j).setZero();
        zc(j) = 0.0;
      }
    }
    a = std::move(za);
    c = std::move(zc);
  }
  p.lower(n0) = 0.0;
  p.upper(n0) = scale;
  for (const InputConstraint& ic : extra) {
    LPRow r;
    r.rel = ic.rel;
    r.rhs = ic.rhs;
    for (int k = 0; k < n0; ++k)
      if (ic.a(k) != 0.0) r.terms.emplace_back(k, ic.a(k));
    p.rows.push_back(std::move(r));
  }
  const LPSolution s = solve_lp(p);
  if (s.status != LPStatus::kOptimal) return std::nullopt;
  return Vector(s.x.head(n0));
}

// Lower-bound candidates from an LP solution: the exact generalized-gradient
// norm at the LP's input point and, at integral nodes, the norm of the
// Jacobian selected by the activation binaries.
inline std::optional<Candidate> lipmip_primal(const ReLUNetwork& net, const Hyperbox& domain,
                                              const LipschitzQuery& q, const MIPModel& m,
                                              const LPSolution& s, bool integral) {
  const int n0 = net.input_dim();
  Vector x = s.x.head(n0).cwiseMax(domain.l).cwiseMin(domain.u);
  const ActivationPattern p = pattern_at(net, x, 0.0);
  std::map<std::size_t, bool> ties;
  DerivativeMask binaries(net.depth());
  for (std::size_t i = 0; i < net.depth(); ++i) {
    binaries[i].resize(static_cast<std::size_t>(net.width(i)));
    for (int j = 0; j < net.width(i); ++j) {
      const std::size_t k = net.neuron_index(i, j);
      const int b = binary_value(m, s.x, static_cast<std::int64_t>(k),
                                 p[i][j] == Activation::kOn ? 1 : 0);
      binaries[i][j] = static_cast<std::uint8_t>(b);
      if (p[i][j] == Activation::kTie) ties[k] = b == 1;
    }
  }
  Candidate c;
  c.point = x;
  c.value = jacobian_norm(jacobian_for_mask(net, resolve_pattern(net, p, ZeroRule::per_neuron(ties))), q);
  if (integral) {
    const double v = jacobian_norm(jacobian_for_mask(net, binaries), q);
    if (v > c.value) {
      c.value = v;
      if (std::optional<Vector> w = pattern_witness(net, domain, q.extra_constraints, binaries))
        c.point = *w;
    }
  }
  return c;
}

}  // namespace detail

// Exact L^alpha(f, X) (or L^(alpha, beta) for vector networks) by
// branch-and-bound over the chain-rule program.
inline MIPResult solve_lipmip(const ReLUNetwork& net, const Hyperbox& domain,
                              const LipschitzQuery& q = {}, const SolveOptions& opts = {}) {
  const LipMipModel root = build_lipmip_model(net, domain, q);
  BnbCallbacks cb;
  if (opts.bound_tightening) {
    cb.node_model = [&net, &domain, &q](const Fixings& fix) -> std::optional<MIPModel> {
      NeuronForcing forcing(net.depth());
      for (std::size_t i = 0; i < net.depth(); ++i)
        forcing[i].assign(static_cast<std::size_t>(net.width(i)), Tri::kUnknown);
      const auto n = static_cast<std::int64_t>(net.total_neurons());
      for (const auto& [tag, v] : fix) {
        if (tag < 0 || tag >= n) continue;
        const auto [i, j] = net.neuron_position(static_cast<std::size_t>(tag));
        forcing[i][j] = v ? Tri::kOne : Tri::kZero;
      }
      std::optional<LipMipModel> m = try_build_lipmip_model(net, domain, q, &forcing);
      if (!m) return std::nullopt;
      return std::move(m->model);
    };
  }
  // Objective binaries (abs selectors, max folds) first, then hidden layers
  // from the last to the first.
  cb.branch_priority = [&net](std::int64_t key) {
    if (key < 0 || key >= static_cast<std::int64_t>(net.total_neurons()))
      return -static_cast<int>(net.depth());
    return -static_cast<int>(net.neuron_position(static_cast<std::size_t>(key)).first);
  };
  cb.primal = [&net, &domain, &q](const MIPModel& m, const LPSolution& s, bool integral) {
    return detail::lipmip_primal(net, domain, q, m, s, integral);
  };
  return solve_mip(root.model, cb, opts);
}

// LipLP: the relaxation optimum, a certified upper bound.
inline double solve_liplp(const MIPModel& model) { return solve_relaxation_bound(model); }

inline double solve_liplp(const ReLUNetwork& net, const Hyperbox& domain,
                          const LipschitzQuery& q = {}) {
  return solve_liplp(build_lipmip_model(net, domain, q).model);
}

}  // namespace lipcert

#endif  // LIPCERT_LIPMIP_HPP_
