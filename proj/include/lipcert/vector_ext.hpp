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

#ifndef LIPCERT_VECTOR_EXT_HPP_
#define LIPCERT_VECTOR_EXT_HPP_

#include <cmath>
#include <string>

#include "lipcert/bnb.hpp"
#include "lipcert/common.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/lipmip.hpp"
#include "lipcert/network.hpp"
#include "lipcert/norms.hpp"

namespace lipcert {

// Output norms with MIP-encodable dual balls:
//   kL1 (box dual), kLinf (l1-ball dual via z = z+ - z-), kCross (polytope P).
using LinearNorm = OutputNorm;

// L^(alpha, beta)(f, X) for a network with m > 1 outputs.
inline MIPResult lipmip_vector(const ReLUNetwork& net, const Hyperbox& x, InputNorm alpha,
                               LinearNorm beta, const SolveOptions& opts = {}) {
  if (net.output_dim() < 2)
    throw InputError("lipmip_vector needs a network with at least two outputs");
  LipschitzQuery q;
  q.input_norm = alpha;
  q.output_norm = beta;
  return solve_lipmip(net, x, q, opts);
}

// f_ij = (e_i - e_j)^T f as a scalar network.
inline ReLUNetwork pairwise_difference(const ReLUNetwork& net, int i, int j) {
  const int m = net.output_dim();
  if (i < 0 || j < 0 || i >= m || j >= m || i == j)
    throw InputError("pairwise_difference: need distinct output indices below " +
                     std::to_string(m));
  Matrix head = net.head().row(i) - net.head().row(j);
  return with_head(net, std::move(head));
}

enum class RadiusStatus { kCertified, kUnbounded, kTied };

struct RobustnessRadius {
  double radius = 0.0;
  int label = -1;
  double margin = 0.0;     // min_j |f_i(x) - f_j(x)|
  double lipschitz = 0.0;  // certified upper bound on L^(alpha, x)(f, X)
  RadiusStatus status = RadiusStatus::kCertified;
  std::string warning;
};

// Every y in X with ||x - y||_alpha < radius has the same argmax label as x.
// L = 0 gives +infinity (kUnbounded); a tied argmax at x gives 0 (kTied).
inline RobustnessRadius robustness_radius(const ReLUNetwork& net, const Vector& x,
                                          const Hyperbox& domain, InputNorm alpha,
                                          const SolveOptions& opts = {}) {
  if (net.output_dim() < 2) throw InputError("robustness_radius needs at least two outputs");
  if (!domain.contains(x)) throw InputError("robustness_radius: x lies outside the domain");
  const Vector f = forward(net, x);
  RobustnessRadius r;
  Eigen::Index best = 0;
  f.maxCoeff(&best);
  r.label = static_cast<int>(best);
  r.margin = kInf;
  for (Eigen::Index j = 0; j < f.size(); ++j)
    if (j != best) r.margin = std::min(r.margin, std::abs(f(best) - f(j)));
  if (r.margin == 0.0) {
    r.status = RadiusStatus::kTied;
    r.warning = "argmax is tied at x; radius is 0";
    return r;
  }
  const MIPResult res = lipmip_vector(net, domain, alpha, OutputNorm::kCross, opts);
  r.lipschitz = res.upper_bound;
  if (r.lipschitz <= 0.0) {
    r.status = RadiusStatus::kUnbounded;
    r.radius = kInf;
    return r;
  }
  r.radius = r.margin / r.lipschitz;
  return r;
}

}  // namespace lipcert

#endif  // LIPCERT_VECTOR_EXT_HPP_
