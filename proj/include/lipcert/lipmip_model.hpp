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

#ifndef LIPCERT_LIPMIP_MODEL_HPP_
#define LIPCERT_LIPMIP_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/mip.hpp"
#include "lipcert/network.hpp"

namespace lipcert {

// a^T x (rel) rhs, imposed on the input in addition to the box.
struct InputConstraint {
  Vector a;
  Relation rel = Relation::kLe;
  double rhs = 0.0;
};

struct LipschitzQuery {
  InputNorm input_norm = InputNorm::kLinf;
  OutputNorm output_norm = OutputNorm::kL1;  // ignored for scalar networks
  std::vector<InputConstraint> extra_constraints;
};

// The unrolled chain-rule program plus handles into its pieces.
struct LipMipModel {
  MIPModel model;
  std::map<std::string, VarId> names;
  std::vector<VarId> inputs;
  std::vector<std::vector<Bounded>> pre;         // Z_i
  std::vector<std::vector<BinaryRef>> act;       // Lambda_i
  std::vector<std::vector<Bounded>> post;        // relu(Z_i), layers feeding another layer
  std::vector<Bounded> dual;                     // z, vector networks only
  std::vector<Bounded> seed;                     // Y_{d+1}
  std::vector<std::vector<Bounded>> backward;    // Y entering layer i's switch
  std::vector<std::vector<Bounded>> switched;    // Diag(Lambda_i) Y
  std::vector<Bounded> gradient;                 // grad# f, or its z-contraction
  std::vector<PiecewiseEncoding> abs_terms;
  std::optional<MaxEncoding> max_term;
  PropagationResult bounds;
  std::size_t neuron_count = 0;
};

// Binary tags: neuron k of the flattened hidden layers uses tag k; the
// |g_j| selectors use N + j and the max folds N + n_0 + j.
inline std::int64_t abs_tag(const ReLUNetwork& net, int j) {
  return static_cast<std::int64_t>(net.total_neurons()) + j;
}
inline std::int64_t fold_tag_base(const ReLUNetwork& net) {
  return static_cast<std::int64_t>(net.total_neurons()) + net.input_dim();
}

inline Hyperbox lipmip_seed_box(const ReLUNetwork& net, OutputNorm beta) {
  return net.output_dim() == 1 ? scalar_seed(net) : dual_ball_seed(net, beta);
}

// Builds the model; nullopt when `forcing` contradicts the interval bounds.
inline std::optional<LipMipModel> try_build_lipmip_model(const ReLUNetwork& net,
                                                         const Hyperbox& domain,
                                                         const LipschitzQuery& query,
                                                         const NeuronForcing* forcing = nullptr) {
  if (domain.dim() != net.input_dim())
    throw InputError("domain has dimension " + std::to_string(domain.dim()) +
                     ", network expects " + std::to_string(net.input_dim()));
  for (const InputConstraint& c : query.extra_constraints)
    if (c.a.size() != net.input_dim() || !c.a.allFinite() || !std::isfinite(c.rhs))
      throw InputError("extra input constraint has wrong dimension or non-finite data");

  const bool vector_valued = net.output_dim() > 1;
  std::optional<PropagationResult> prop =
      propagate_forced(net, domain, lipmip_seed_box(net, query.output_norm), forcing);
  if (!prop) return std::nullopt;
  auto finite_box = [](const Hyperbox& h) { return h.l.allFinite() && h.u.allFinite(); };
  for (const Hyperbox& h : prop->pre_activation_boxes)
    if (!finite_box(h)) throw ModelError("interval bounds are not finite");
  if (!finite_box(prop->gradient_box)) throw ModelError("interval bounds are not finite");

  const std::size_t d = net.depth();
  EncodingContext ctx;
  LipMipModel out;
  out.neuron_count = net.total_neurons();

  std::vector<Bounded> h;
  for (int k = 0; k < net.input_dim(); ++k) {
    const std::string name = "x_" + std::to_string(k);
    const Hyperbox& in = prop->input_box;
    const VarId v = ctx.continuous(in.l(k), in.u(k), name);
    out.inputs.push_back(v);
    h.push_back({LinExpr(v), in.l(k), in.u(k)});
  }
  for (std::size_t c = 0; c < query.extra_constraints.size(); ++c) {
    const InputConstraint& ic = query.extra_constraints[c];
    LinExpr e;
    for (int k = 0; k < net.input_dim(); ++k) e.add(out.inputs[k], ic.a(k));
    ctx.model.add_constraint(e, ic.rel, ic.rhs, "domain_" + std::to_string(c));
  }

  // Forward pass.
  out.pre.resize(d);
  out.act.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::string li = std::to_string(i + 1);
    out.pre[i] = substitute_affine(ctx, h, net.layer(i).weight, net.layer(i).bias, "Z" + li,
                               &prop->pre_activation_boxes[i]);
    for (int j = 0; j < net.width(i); ++j) {
      const auto tag = static_cast<std::int64_t>(net.neuron_index(i, j));
      BinaryRef a = encode_conditional(ctx, out.pre[i][j],
                                       "a" + li + "_" + std::to_string(j), tag);
      if (forcing != nullptr && (*forcing)[i][j] != Tri::kUnknown && !a.is_fixed()) {
        const double v = (*forcing)[i][j] == Tri::kOne ? 1.0 : 0.0;
        ctx.model.set_bounds(*a.var, v, v);
      }
      out.act[i].push_back(a);
    }
    if (i + 1 == d) break;
    std::vector<Bounded> next;
    const Hyperbox& relu_box = prop->post_activation_boxes[i];
    for (int j = 0; j < net.width(i); ++j) {
      Bounded y = encode_switch(ctx, out.pre[i][j], out.act[i][j],
                                "P" + li + "_" + std::to_string(j));
      y.lo = relu_box.l(j);
      y.hi = relu_box.u(j);
      if (auto v = y.expr.as_var()) {
        ctx.model.set_bounds(*v, y.lo, y.hi);
        if (!out.act[i][j].is_fixed())
          ctx.model.add_constraint(y.expr - out.pre[i][j].expr, Relation::kGe, 0.0,
                                   "R" + li + "_" + std::to_string(j));
      }
      next.push_back(std::move(y));
    }
    out.post.push_back(next);
    h = std::move(next);
  }

  // Backward pass.
  const Matrix head_t = net.head().transpose();
  if (vector_valued) {
    out.dual = encode_dual_ball(ctx, net.output_dim(), query.output_norm);
    const Hyperbox seed_box = lipmip_seed_box(net, query.output_norm);
    out.seed = substitute_affine(ctx, out.dual, head_t, Vector(), "Y" + std::to_string(d + 1),
                             &seed_box);
  } else {
    for (Eigen::Index k = 0; k < head_t.rows(); ++k)
      out.seed.push_back({LinExpr(head_t(k, 0)), head_t(k, 0), head_t(k, 0)});
  }
  out.backward.resize(d);
  out.switched.resize(d);
  std::vector<Bounded> y = out.seed;
  for (std::size_t i = d; i-- > 0;) {
    const std::string li = std::to_string(i + 1);
    out.backward[i] = y;
    std::vector<Bounded> s;
    for (int j = 0; j < net.width(i); ++j) {
      s.push_back(encode_switch(ctx, y[j], out.act[i][j], "S" + li + "_" + std::to_string(j)));
    }
    out.switched[i] = s;
    const Hyperbox* rec = i == 0 ? &prop->gradient_box : &prop->backward_boxes[i - 1];
    y = substitute_affine(ctx, s, net.layer(i).weight.transpose(), Vector(), "Y" + li, rec);
  }
  out.gradient = y;

  // Objective: the alpha-dual norm of the gradient.
  std::vector<Bounded> mags;
  for (int k = 0; k < net.input_dim(); ++k) {
    out.abs_terms.push_back(
        encode_abs(ctx, out.gradient[k], "absg_" + std::to_string(k), abs_tag(net, k)));
    mags.push_back(out.abs_terms.back().y);
  }
  if (query.input_norm == InputNorm::kLinf) {
    LinExpr obj;
    for (const Bounded& m : mags) obj += m.expr;
    ctx.model.set_objective(obj);
  } else {
    out.max_term = encode_max(ctx, mags, "maxg", fold_tag_base(net));
    ctx.model.set_objective(out.max_term->t.expr);
  }

  out.model = std::move(ctx.model);
  out.names = std::move(ctx.names);
  out.bounds = std::move(*prop);
  return out;
}

inline LipMipModel build_lipmip_model(const ReLUNetwork& net, const Hyperbox& domain,
                                      const LipschitzQuery& query = {}) {
  std::optional<LipMipModel> m = try_build_lipmip_model(net, domain, query, nullptr);
  if (!m) throw ModelError("interval propagation failed");
  return std::move(*m);
}

// The model assignment induced by input x, a tie rule and (vector networks)
// a dual vector z; every variable gets its semantic value.
inline Vector lift_assignment(const LipMipModel& m, const ReLUNetwork& net, const Vector& x,
                              const ZeroRule& rule = ZeroRule::always_zero(),
                              const Vector& z = Vector()) {
  check_input(net, x);
  Vector vals = Vector::Zero(m.model.num_vars());
  auto set = [&vals](const Bounded& b, double v) {
    if (auto id = b.expr.as_var()) vals(id->index) = v;
  };
  auto set_bin = [&vals](const BinaryRef& a, double v) {
    if (a.var) vals(a.var->index) = v;
  };
  for (int k = 0; k < net.input_dim(); ++k) vals(m.inputs[k].index) = x(k);

  const ForwardTrace t = forward_trace(net, x);
  const DerivativeMask mask = resolve_pattern(net, pattern_from_trace(t, 0.0), rule);
  const std::size_t d = net.depth();
  for (std::size_t i = 0; i < d; ++i) {
    for (int j = 0; j < net.width(i); ++j) {
      const double zij = t.pre_activations[i](j);
      set(m.pre[i][j], zij);
      set_bin(m.act[i][j], mask[i][j]);
      if (i < m.post.size()) set(m.post[i][j], mask[i][j] ? zij : 0.0);
    }
  }

  Vector y;
  if (net.output_dim() > 1) {
    if (z.size() != net.output_dim()) throw InputError("lift_assignment needs a dual vector z");
    for (int r = 0; r < net.output_dim(); ++r) {
      set(m.dual[r], z(r));
      const std::string n = "z_" + std::to_string(r);
      if (auto it = m.names.find(n + "_pos"); it != m.names.end())
        vals(it->second.index) = std::max(z(r), 0.0);
      if (auto it = m.names.find(n + "_neg"); it != m.names.end())
        vals(it->second.index) = std::max(-z(r), 0.0);
    }
    y = net.head().transpose() * z;
  } else {
    y = net.head().row(0).transpose();
  }
  for (int k = 0; k < y.size(); ++k) set(m.seed[k], y(k));
  for (std::size_t i = d; i-- > 0;) {
    Vector s = y;
    for (int j = 0; j < net.width(i); ++j) {
      set(m.backward[i][j], y(j));
      if (!mask[i][j]) s(j) = 0.0;
      set(m.switched[i][j], s(j));
    }
    y = net.layer(i).weight.transpose() * s;
  }
  for (int k = 0; k < net.input_dim(); ++k) {
    set(m.gradient[k], y(k));
    set_bin(m.abs_terms[k].a, y(k) < 0.0 ? 1.0 : 0.0);
    set(m.abs_terms[k].y, std::abs(y(k)));
  }
  if (m.max_term) {
    double run = std::abs(y(0));
    for (std::size_t f = 0; f < m.max_term->folds.size(); ++f) {
      const double v = std::abs(y(static_cast<Eigen::Index>(f + 1)));
      const double diff = v - run;
      set_bin(m.max_term->folds[f].relu.a, diff >= 0.0 ? 1.0 : 0.0);
      set(m.max_term->folds[f].relu.y, std::max(diff, 0.0));
      run = std::max(run, v);
      set(m.max_term->folds[f].t, run);
    }
  }
  return vals;
}

}  // namespace lipcert

#endif  // LIPCERT_LIPMIP_MODEL_HPP_
