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

#ifndef LIPCERT_ORACLE_HPP_
#define LIPCERT_ORACLE_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/lipmip.hpp"
#include "lipcert/lp.hpp"
#include "lipcert/network.hpp"

namespace lipcert {

inline constexpr std::size_t kDefaultNeuronCap = 24;
inline constexpr double kDefaultInteriorEps = 1e-6;

struct OracleOptions {
  double interior_eps = kDefaultInteriorEps;
  std::size_t neuron_cap = kDefaultNeuronCap;
  std::vector<InputConstraint> extra_constraints;
};

// A full-dimensional linear region with a point at depth >= interior_eps.
struct RegionCertificate {
  DerivativeMask pattern;  // 1 = on, 0 = off
  Vector witness;
  Matrix region_gradient;  // m x n_0
  double dual_norm_value = 0.0;
};

namespace detail {

// Depth-first search over neuron signs in layer order. Each neuron's
// pre-activation is affine in x once all earlier layers are decided.
class RegionEnumerator {
 public:
  RegionEnumerator(const ReLUNetwork& net, const Hyperbox& domain, const LipschitzQuery& q,
                   const OracleOptions& opts,
                   const std::function<void(RegionCertificate&&)>& sink)
      : net_(net), domain_(domain), q_(q), opts_(opts), sink_(sink) {
    if (domain.dim() != net.input_dim())
      throw InputError("oracle: domain has dimension " + std::to_string(domain.dim()) +
                       ", network expects " + std::to_string(net.input_dim()));
    if (net.total_neurons() > opts.neuron_cap)
      throw CapabilityError("oracle refuses networks with " +
                            std::to_string(net.total_neurons()) + " neurons (cap " +
                            std::to_string(opts.neuron_cap) + ")");
    if (!(opts.interior_eps >= 0.0)) throw InputError("interior_eps must be >= 0");
    const Hyperbox seed = lipmip_seed_box(net, q.output_norm);
    bounds_ = propagate(net, domain, seed);
  }

  std::size_t run() {
    const int n0 = net_.input_dim();
    // Affine map of the current layer's input: A x + c.
    Matrix a = Matrix::Identity(n0, n0);
    Vector c = Vector::Zero(n0);
    const std::optional<Vector> w = find_witness();
    if (!w) return 0;
    mask_.assign(net_.depth(), {});
    layer_start(0, a, c, *w);
    return count_;
  }

 private:
  struct Halfspace {
    Vector a;  // a x + c >= eps
    double c;
  };

  void layer_start(std::size_t i, const Matrix& a_in, const Vector& c_in, const Vector& witness) {
    if (i == net_.depth()) {
      emit(witness);
      return;
    }
    const Layer& L = net_.layer(i);
    const Matrix za = L.weight * a_in;
    const Vector zc = L.weight * c_in + L.bias;
    mask_[i].assign(static_cast<std::size_t>(net_.width(i)), 0);
    neuron(i, 0, za, zc, witness);
  }

  void neuron(std::size_t i, int j, const Matrix& za, const Vector& zc, const Vector& witness) {
    if (j == net_.width(i)) {
      // Next layer input: Diag(mask) (za x + zc).
      Matrix a_next = za;
      Vector c_next = zc;
      for (int k = 0; k < net_.width(i); ++k)
        if (!mask_[i][k]) {
          a_next.row(k).setZero();
          c_next(k) = 0.0;
        }
      layer_start(i + 1, a_next, c_next, witness);
      return;
    }
    const Hyperbox& box = bounds_.pre_activation_boxes[i];
    for (int sign : {1, 0}) {
      // Interval bounds already rule out the branch.
      if (sign == 1 && box.u(j) < opts_.interior_eps) continue;
      if (sign == 0 && box.l(j) > -opts_.interior_eps) continue;
      const double s = sign ? 1.0 : -1.0;
      Halfspace h{s * za.row(j).transpose(), s * zc(j)};
      cuts_.push_back(h);
      mask_[i][j] = static_cast<std::uint8_t>(sign);
      const double margin = h.a.dot(witness) + h.c;
      if (margin >= opts_.interior_eps) {
        neuron(i, j + 1, za, zc, witness);
      } else if (std::optional<Vector> w = find_witness()) {
        neuron(i, j + 1, za, zc, *w);
      }
      cuts_.pop_back();
    }
    mask_[i][j] = 0;
  }

  // A point of the domain satisfying every cut with slack interior_eps.
  // The LP maximises the smallest margin so witnesses sit deep inside.
  std::optional<Vector> find_witness() const {
    const int n0 = net_.input_dim();
    LPProblem p;
    p.objective = Vector::Zero(n0 + 1);
    p.objective(n0) = 1.0;
    p.lower = Vector(n0 + 1);
    p.upper = Vector(n0 + 1);
    p.lower.head(n0) = domain_.l;
    p.upper.head(n0) = domain_.u;
    double scale = 1.0;
    for (const Halfspace& h : cuts_) scale = std::max(scale, std::abs(h.c) + h.a.cwiseAbs().sum());
    p.lower(n0) = opts_.interior_eps;
    p.upper(n0) = opts_.interior_eps + scale;
    for (const Halfspace& h : cuts_) {
      // a x - t >= -c
      LPRow r;
      r.rel = Relation::kGe;
      r.rhs = -h.c;
      for (int k = 0; k < n0; ++k)
        if (h.a(k) != 0.0) r.terms.emplace_back(k, h.a(k));
      r.terms.emplace_back(n0, -1.0);
      p.rows.push_back(std::move(r));
    }
    for (const InputConstraint& ic : opts_.extra_constraints) {
      LPRow r;
      r.rel = ic.rel;
      r.rhs = ic.rhs;
      for (int k = 0; k < n0; ++k)
        if (ic.a(k) != 0.0) r.terms.emplace_back(k, ic.a(k));
      p.rows.push_back(std::move(r));
    }
    ++lp_calls_;
    const LPSolution s = solve_lp(p);
    if (s.status != LPStatus::kOptimal) return std::nullopt;
    return Vector(s.x.head(n0));
  }

  void emit(const Vector& witness) {
    RegionCertificate rc;
    rc.pattern = mask_;
    rc.witness = witness;
    rc.region_gradient = jacobian_for_mask(net_, mask_);
    rc.dual_norm_value = jacobian_norm(rc.region_gradient, q_);
    ++count_;
    sink_(std::move(rc));
  }

  const ReLUNetwork& net_;
  const Hyperbox& domain_;
  const LipschitzQuery& q_;
  const OracleOptions& opts_;
  const std::function<void(RegionCertificate&&)>& sink_;
  PropagationResult bounds_;
  std::vector<Halfspace> cuts_;
  DerivativeMask mask_;
  std::size_t count_ = 0;
  mutable std::size_t lp_calls_ = 0;
};

}  // namespace detail

// Streams every region certificate to `sink`; returns the region count.
inline std::size_t enumerate_regions(const ReLUNetwork& net, const Hyperbox& domain,
                                     const std::function<void(RegionCertificate&&)>& sink,
                                     const OracleOptions& opts = {},
                                     const LipschitzQuery& q = {}) {
  detail::RegionEnumerator e(net, domain, q, opts, sink);
  return e.run();
}

inline std::vector<RegionCertificate> enumerate_regions(const ReLUNetwork& net,
                                                        const Hyperbox& domain,
                                                        const OracleOptions& opts = {},
                                                        const LipschitzQuery& q = {}) {
  std::vector<RegionCertificate> out;
  enumerate_regions(
      net, domain, [&out](RegionCertificate&& rc) { out.push_back(std::move(rc)); }, opts, q);
  return out;
}

struct OracleResult {
  double value = 0.0;
  std::size_t regions = 0;
  Vector argmax_witness;
};

// max over regions of the region Jacobian's norm; 0 when no region has an
// interior_eps-deep point.
inline OracleResult exact_lipschitz_bruteforce(const ReLUNetwork& net, const Hyperbox& domain,
                                               const LipschitzQuery& q = {},
                                               const OracleOptions& opts = {}) {
  OracleResult res;
  res.regions = enumerate_regions(
      net, domain,
      [&res](RegionCertificate&& rc) {
        if (rc.dual_norm_value > res.value || res.argmax_witness.size() == 0) {
          res.value = std::max(res.value, rc.dual_norm_value);
          res.argmax_witness = rc.witness;
        }
      },
      opts, q);
  return res;
}

}  // namespace lipcert

#endif  // LIPCERT_ORACLE_HPP_
