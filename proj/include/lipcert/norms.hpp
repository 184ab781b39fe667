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

#ifndef LIPCERT_NORMS_HPP_
#define LIPCERT_NORMS_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "lipcert/common.hpp"

namespace lipcert {

// ||g||_{alpha*}: the quantity whose supremum over gradients is L^alpha.
inline double dual_norm(const Vector& g, InputNorm alpha) {
  if (g.size() == 0) return 0.0;
  return alpha == InputNorm::kLinf ? g.cwiseAbs().sum() : g.cwiseAbs().maxCoeff();
}

// ||v||_x = sup over Conv({e_i} u {e_i - e_j}) of |<y, v>|; the sup of a
// convex function over a polytope sits on a generator.
inline double cross_norm_value(const Vector& v) {
  if (v.size() == 0) return 0.0;
  const double abs_max = v.cwiseAbs().maxCoeff();
  const double spread = v.maxCoeff() - v.minCoeff();
  return std::max(abs_max, spread);
}

inline double output_norm_value(const Vector& v, OutputNorm beta) {
  switch (beta) {
    case OutputNorm::kL1:
      return v.cwiseAbs().sum();
    case OutputNorm::kLinf:
      return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    case OutputNorm::kCross:
      return cross_norm_value(v);
  }
  return 0.0;
}

inline constexpr int kMaxBoxVertexDim = 20;

// Vertices of the dual ball {z : ||z||_{beta*} <= 1} up to sign. Used for
// closed-form operator norms, so only enough vertices to attain every
// symmetric convex maximum are listed.
inline std::vector<Vector> dual_ball_vertices(int m, OutputNorm beta) {
  std::vector<Vector> out;
  switch (beta) {
    case OutputNorm::kL1: {
      if (m > kMaxBoxVertexDim)
        throw CapabilityError("box vertex enumeration limited to m <= 20");
      // Sign vectors with the first coordinate fixed to +1 (others by symmetry).
      const unsigned long count = 1UL << (m - 1);
      for (unsigned long mask = 0; mask < count; ++mask) {
        Vector z = Vector::Ones(m);
        for (int k = 1; k < m; ++k)
          if (mask & (1UL << (k - 1))) z(k) = -1.0;
        out.push_back(std::move(z));
      }
      break;
    }
    case OutputNorm::kLinf:
      for (int k = 0; k < m; ++k) out.push_back(Vector::Unit(m, k));
      break;
    case OutputNorm::kCross:
      for (int i = 0; i < m; ++i) out.push_back(Vector::Unit(m, i));
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) out.push_back(Vector::Unit(m, i) - Vector::Unit(m, j));
      break;
  }
  return out;
}

// ||G^T||_{alpha,beta} for a Jacobian G (m x n): sup over the beta-dual ball of
// ||G^T z||_{alpha*}. For m = 1 every beta reduces to ||g||_{alpha*}.
inline double operator_norm(const Matrix& jac, InputNorm alpha, OutputNorm beta) {
  if (jac.rows() == 1) return dual_norm(jac.row(0).transpose(), alpha);
  double best = 0.0;
  for (const Vector& z : dual_ball_vertices(static_cast<int>(jac.rows()), beta))
    best = std::max(best, dual_norm(jac.transpose() * z, alpha));
  return best;
}

}  // namespace lipcert

#endif  // LIPCERT_NORMS_HPP_
