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

#ifndef LIPCERT_INTERVAL_HPP_
#define LIPCERT_INTERVAL_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"
#include "lipcert/network.hpp"
#include "lipcert/norms.hpp"

namespace lipcert {

// Axis-aligned box {x : l <= x <= u}.
struct Hyperbox {
  Vector l;
  Vector u;

  Hyperbox() = default;
  Hyperbox(Vector lo, Vector hi) : l(std::move(lo)), u(std::move(hi)) {
    if (l.size() != u.size()) throw InputError("hyperbox bounds differ in length");
    if (!l.allFinite() || !u.allFinite()) throw InputError("hyperbox bounds must be finite");
    for (Eigen::Index i = 0; i < l.size(); ++i)
      if (l(i) > u(i))
        throw InputError("hyperbox coordinate " + std::to_string(i) + " has l > u");
  }

  static Hyperbox point(const Vector& c) { return Hyperbox(c, c); }
  static Hyperbox cube(const Vector& center, double radius) {
    if (!(radius >= 0.0)) throw InputError("cube radius must be >= 0");
    return Hyperbox(center.array() - radius, center.array() + radius);
  }
  static Hyperbox cube(int dim, double center, double radius) {
    return cube(Vector::Constant(dim, center), radius);
  }

  Eigen::Index dim() const { return l.size(); }
  Vector center() const { return 0.5 * (l + u); }
  Vector radius() const { return 0.5 * (u - l); }

  bool contains(const Vector& x, double tol = 0.0) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (x(i) < l(i) - tol || x(i) > u(i) + tol) return false;
    return true;
  }
  // Elementwise containment of another box.
  bool contains(const Hyperbox& other, double tol = 0.0) const {
    if (other.dim() != dim()) return false;
    return ((other.l.array() >= l.array() - tol) && (other.u.array() <= u.array() + tol)).all();
  }
};

// Tri-state abstraction of a boolean vector.
enum class Tri : std::uint8_t { kZero = 0, kOne = 1, kUnknown = 2 };
using BoolBox = std::vector<Tri>;

// Affine image: c' = W c + b, r' = |W| r. An empty bias means zero.
inline Hyperbox push_affine(const Hyperbox& h, const Matrix& w, const Vector& b = Vector()) {
  if (w.cols() != h.dim())
    throw InputError("push_affine: matrix has " + std::to_string(w.cols()) +
                     " columns, box has dimension " + std::to_string(h.dim()));
  if (b.size() != 0 && b.size() != w.rows())
    throw InputError("push_affine: bias length mismatch");
  Vector c = w * h.center();
  if (b.size() != 0) c += b;
  const Vector r = w.cwiseAbs() * h.radius();
  Hyperbox out;
  out.l = c - r;
  out.u = c + r;
  return out;
}

// Sign indicator. Boundary cases (l == 0 or u == 0) stay unknown: the
// conditional is set-valued at 0.
inline BoolBox push_conditional(const Hyperbox& h) {
  BoolBox v(static_cast<std::size_t>(h.dim()));
  for (Eigen::Index i = 0; i < h.dim(); ++i) {
    if (h.l(i) > 0.0)
      v[i] = Tri::kOne;
    else if (h.u(i) < 0.0)
      v[i] = Tri::kZero;
    else
      v[i] = Tri::kUnknown;
  }
  return v;
}

// y_i = x_i * a_i.
inline Hyperbox push_switch(const Hyperbox& h, const BoolBox& v) {
  if (static_cast<Eigen::Index>(v.size()) != h.dim())
    throw InputError("push_switch: boolbox and box differ in length");
  Hyperbox out{h.l, h.u};
  for (Eigen::Index i = 0; i < h.dim(); ++i) {
    switch (v[i]) {
      case Tri::kOne:
        break;
      case Tri::kZero:
        out.l(i) = 0.0;
        out.u(i) = 0.0;
        break;
      case Tri::kUnknown:
        out.l(i) = std::min(h.l(i), 0.0);
        out.u(i) = std::max(h.u(i), 0.0);
        break;
    }
  }
  return out;
}

// relu image of a box, used for forward post-activations: relu(x) equals
// S(x, C(x)) with a perfectly correlated, so [max(l,0), max(u,0)] is sound.
inline Hyperbox push_relu(const Hyperbox& h) {
  Hyperbox out;
  out.l = h.l.cwiseMax(0.0);
  out.u = h.u.cwiseMax(0.0);
  return out;
}

// Box over the backward seed Y_{d+1}. Scalar networks: the head row itself.
inline Hyperbox scalar_seed(const ReLUNetwork& net) {
  if (net.output_dim() != 1) throw InputError("scalar_seed needs a single-row head");
  const Vector c = net.head().row(0).transpose();
  return Hyperbox::point(c);
}

// Vector networks: Y_{d+1} = head^T z with z in the beta-dual ball. Coordinate
// k ranges within +-sup_z |col_k^T z| = +-||col_k||_beta.
inline Hyperbox dual_ball_seed(const ReLUNetwork& net, OutputNorm beta) {
  const Matrix& head = net.head();
  Vector r(head.cols());
  for (Eigen::Index k = 0; k < head.cols(); ++k)
    r(k) = output_norm_value(head.col(k), beta);
  return Hyperbox(-r, r);
}

// Per-neuron branching decisions: kUnknown leaves a neuron free.
using NeuronForcing = std::vector<BoolBox>;

struct PropagationResult {
  std::vector<Hyperbox> pre_activation_boxes;   // Z_i, i = 1..d
  std::vector<BoolBox> activation_boolboxes;    // Lambda_i
  std::vector<Hyperbox> post_activation_boxes;  // relu(Z_i)
  std::vector<Hyperbox> backward_boxes;         // Y entering layer i's switch
  std::vector<Hyperbox> switched_boxes;         // Diag(Lambda_i) Y
  Hyperbox gradient_box;                        // over rows of grad# f (seeded)
  Hyperbox input_box;                           // domain, shrunk under a forcing
};

namespace detail {

inline constexpr int kTighteningRounds = 8;
inline constexpr double kTighteningSlack = 1e-10;

inline bool intersect(Hyperbox& b, Eigen::Index k, double lo, double hi) {
  lo -= kTighteningSlack * (1.0 + std::abs(lo));
  hi += kTighteningSlack * (1.0 + std::abs(hi));
  if (lo > b.l(k)) b.l(k) = lo;
  if (hi < b.u(k)) b.u(k) = hi;
  if (b.l(k) > b.u(k)) {
    if (b.l(k) - b.u(k) > 1e-9 * (1.0 + std::abs(b.u(k)))) return false;
    b.l(k) = b.u(k) = 0.5 * (b.l(k) + b.u(k));
  }
  return true;
}

// Shrinks h so that W h + b can still reach z; false when no h can.
inline bool tighten_affine_input(Hyperbox& h, const Matrix& w, const Vector& b,
                                 const Hyperbox& z) {
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double lo = b(r), hi = b(r);
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      const double a = w(r, k);
      lo += std::min(a * h.l(k), a * h.u(k));
      hi += std::max(a * h.l(k), a * h.u(k));
    }
    if (lo > z.u(r) + 1e-9 * (1.0 + std::abs(z.u(r))) ||
        hi < z.l(r) - 1e-9 * (1.0 + std::abs(z.l(r))))
      return false;
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      const double a = w(r, k);
      if (a == 0.0) continue;
      const double tlo = std::min(a * h.l(k), a * h.u(k));
      const double thi = std::max(a * h.l(k), a * h.u(k));
      const double rlo = z.l(r) - (hi - thi);
      const double rhi = z.u(r) - (lo - tlo);
      const double nlo = a > 0 ? rlo / a : rhi / a;
      const double nhi = a > 0 ? rhi / a : rlo / a;
      if (!intersect(h, k, nlo, nhi)) return false;
    }
  }
  return true;
}

}  // namespace detail

// Forward and backward hyperbox propagation. With a forcing, neurons forced
// on have their pre-activation box clamped to [max(l,0), u] (off: [l, min(u,0)]);
// the clamps are then pushed back through the network to shrink earlier boxes
// and the input box, alternating with forward passes until stable. Returns
// nullopt when a forcing is inconsistent with the box.
inline std::optional<PropagationResult> propagate_forced(const ReLUNetwork& net,
                                                         const Hyperbox& x,
                                                         const Hyperbox& seed,
                                                         const NeuronForcing* forcing) {
  if (x.dim() != net.input_dim())
    throw InputError("propagate: domain has dimension " + std::to_string(x.dim()) +
                     ", network expects " + std::to_string(net.input_dim()));
  const std::size_t d = net.depth();
  if (seed.dim() != net.width(d - 1))
    throw InputError("propagate: backward seed has wrong dimension");
  PropagationResult res;
  res.input_box = x;
  std::vector<Hyperbox>& zs = res.pre_activation_boxes;
  const int rounds = forcing != nullptr ? detail::kTighteningRounds : 1;
  for (int round = 0; round < rounds; ++round) {
    const Hyperbox before = res.input_box;
    const std::vector<Hyperbox> zs_before = zs;
    Hyperbox h = res.input_box;
    for (std::size_t i = 0; i < d; ++i) {
      Hyperbox z = push_affine(h, net.layer(i).weight, net.layer(i).bias);
      if (round > 0) {
        for (Eigen::Index j = 0; j < z.dim(); ++j)
          if (!detail::intersect(z, j, zs[i].l(j), zs[i].u(j))) return std::nullopt;
      }
      if (forcing != nullptr) {
        const BoolBox& f = (*forcing)[i];
        for (Eigen::Index j = 0; j < z.dim(); ++j) {
          if (f[j] == Tri::kOne) {
            if (z.u(j) < 0.0) return std::nullopt;
            z.l(j) = std::max(z.l(j), 0.0);
          } else if (f[j] == Tri::kZero) {
            if (z.l(j) > 0.0) return std::nullopt;
            z.u(j) = std::min(z.u(j), 0.0);
          }
        }
      }
      h = push_relu(z);
      if (round == 0) zs.push_back(std::move(z));
      else zs[i] = std::move(z);
    }
    if (rounds == 1) break;
    for (std::size_t i = d; i-- > 0;) {
      Hyperbox in = i == 0 ? res.input_box : push_relu(zs[i - 1]);
      if (!detail::tighten_affine_input(in, net.layer(i).weight, net.layer(i).bias, zs[i]))
        return std::nullopt;
      if (i == 0) {
        res.input_box = std::move(in);
      } else {
        Hyperbox& prev = zs[i - 1];
        for (Eigen::Index k = 0; k < prev.dim(); ++k) {
          const double lo = in.l(k) > 0.0 ? in.l(k) : prev.l(k);
          if (!detail::intersect(prev, k, lo, in.u(k))) return std::nullopt;
        }
      }
    }
    double change = (before.l - res.input_box.l).cwiseAbs().sum() +
                    (before.u - res.input_box.u).cwiseAbs().sum();
    for (std::size_t i = 0; i < d && round > 0; ++i)
      change += (zs_before[i].l - zs[i].l).cwiseAbs().sum() +
                (zs_before[i].u - zs[i].u).cwiseAbs().sum();
    if (round > 0 && change < 1e-9) break;
  }
  res.activation_boolboxes.reserve(d);
  res.post_activation_boxes.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    BoolBox v = push_conditional(zs[i]);
    if (forcing != nullptr) {
      const BoolBox& f = (*forcing)[i];
      for (Eigen::Index j = 0; j < zs[i].dim(); ++j)
        if (f[j] != Tri::kUnknown) v[j] = f[j];
    }
    res.activation_boolboxes.push_back(std::move(v));
    res.post_activation_boxes.push_back(push_relu(zs[i]));
  }
  res.backward_boxes.resize(d);
  res.switched_boxes.resize(d);
  Hyperbox y = seed;
  for (std::size_t i = d; i-- > 0;) {
    res.backward_boxes[i] = y;
    res.switched_boxes[i] = push_switch(y, res.activation_boolboxes[i]);
    y = push_affine(res.switched_boxes[i], net.layer(i).weight.transpose());
  }
  res.gradient_box = std::move(y);
  return res;
}

inline PropagationResult propagate(const ReLUNetwork& net, const Hyperbox& x,
                                   const Hyperbox& seed) {
  return *propagate_forced(net, x, seed, nullptr);
}

inline PropagationResult propagate(const ReLUNetwork& net, const Hyperbox& x) {
  return propagate(net, x, scalar_seed(net));
}

// Upper bound on L^alpha(f, X) from the gradient box: the alpha-dual norm is
// maximised coordinatewise at max(|l_i|, |u_i|). alpha = linf sums them (l1 of
// the gradient), alpha = l1 takes the largest (linf of the gradient).
// Vector networks are seeded with the beta-dual ball.
inline double fastlip(const ReLUNetwork& net, const Hyperbox& x, InputNorm alpha,
                      OutputNorm beta = OutputNorm::kL1) {
  const Hyperbox seed = net.output_dim() == 1 ? scalar_seed(net) : dual_ball_seed(net, beta);
  const PropagationResult p = propagate(net, x, seed);
  const Vector mag = p.gradient_box.l.cwiseAbs().cwiseMax(p.gradient_box.u.cwiseAbs());
  return alpha == InputNorm::kLinf ? mag.sum() : mag.maxCoeff();
}

}  // namespace lipcert

#endif  // LIPCERT_INTERVAL_HPP_
