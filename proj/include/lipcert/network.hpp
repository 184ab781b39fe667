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

#ifndef LIPCERT_NETWORK_HPP_
#define LIPCERT_NETWORK_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {

struct Layer {
  Matrix weight;  // n_i x n_{i-1}
  Vector bias;    // n_i
};

// Feedforward ReLU network f(x) = head * relu(Z_d(x)) with
// Z_i(x) = W_i relu(Z_{i-1}(x)) + b_i and Z_0(x) = x (no relu on the input).
// The head is always a matrix; scalar networks have a single row.
// Immutable after construction.
class ReLUNetwork {
 public:
  ReLUNetwork(std::vector<Layer> layers, Matrix head)
      : layers_(std::move(layers)), head_(std::move(head)) {
    validate();
    offsets_.reserve(layers_.size() + 1);
    std::size_t acc = 0;
    for (const Layer& l : layers_) {
      offsets_.push_back(acc);
      acc += static_cast<std::size_t>(l.weight.rows());
    }
    offsets_.push_back(acc);
  }

  std::size_t depth() const { return layers_.size(); }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  const Matrix& head() const { return head_; }

  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(head_.rows()); }
  int width(std::size_t i) const { return static_cast<int>(layers_[i].weight.rows()); }
  std::size_t total_neurons() const { return offsets_.back(); }

  // Global index of neuron j in hidden layer i (0-based layers).
  std::size_t neuron_index(std::size_t i, int j) const {
    return offsets_[i] + static_cast<std::size_t>(j);
  }
  std::pair<std::size_t, int> neuron_position(std::size_t global) const {
    std::size_t i = 0;
    while (offsets_[i + 1] <= global) ++i;
    return {i, static_cast<int>(global - offsets_[i])};
  }

  // n_0, n_1, ..., n_d, m
  std::vector<int> arch() const {
    std::vector<int> a{input_dim()};
    for (const Layer& l : layers_) a.push_back(static_cast<int>(l.weight.rows()));
    a.push_back(output_dim());
    return a;
  }

 private:
  void validate() const {
    if (layers_.empty()) throw InputError("network needs at least one hidden layer");
    Eigen::Index cols = layers_.front().weight.cols();
    if (cols <= 0) throw InputError("input dimension must be positive");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const Layer& l = layers_[i];
      const std::string where = "layer " + std::to_string(i);
      if (l.weight.cols() != cols)
        throw InputError(where + ": weight has " + std::to_string(l.weight.cols()) +
                         " columns, expected " + std::to_string(cols));
      if (l.weight.rows() <= 0) throw InputError(where + ": empty layer");
      if (l.bias.size() != l.weight.rows())
        throw InputError(where + ": bias length does not match weight rows");
      if (!l.weight.allFinite() || !l.bias.allFinite())
        throw InputError(where + ": non-finite parameter");
      cols = l.weight.rows();
    }
    if (head_.rows() <= 0 || head_.cols() != cols)
      throw InputError("head has " + std::to_string(head_.cols()) +
                       " columns, expected " + std::to_string(cols));
    if (!head_.allFinite()) throw InputError("head: non-finite parameter");
  }

  std::vector<Layer> layers_;
  Matrix head_;
  std::vector<std::size_t> offsets_;
};

// ---------------------------------------------------------------------------
// Evaluation

struct ForwardTrace {
  std::vector<Vector> pre_activations;  // Z_1 .. Z_d
  Vector output;
};

inline void check_input(const ReLUNetwork& net, const Vector& x) {
  if (x.size() != net.input_dim())
    throw InputError("input has dimension " + std::to_string(x.size()) +
                     ", network expects " + std::to_string(net.input_dim()));
}

inline ForwardTrace forward_trace(const ReLUNetwork& net, const Vector& x) {
  check_input(net, x);
  ForwardTrace t;
  t.pre_activations.reserve(net.depth());
  Vector h = x;
  for (const Layer& l : net.layers()) {
    Vector z = l.weight * h + l.bias;
    h = z.cwiseMax(0.0);
    t.pre_activations.push_back(std::move(z));
  }
  t.output = net.head() * h;
  return t;
}

inline Vector forward(const ReLUNetwork& net, const Vector& x) {
  return forward_trace(net, x).output;
}

// Scalar convenience for m = 1 networks.
inline double forward_scalar(const ReLUNetwork& net, const Vector& x) {
  return forward(net, x)(0);
}

enum class Activation : std::uint8_t { kOff = 0, kOn = 1, kTie = 2 };

// Per-neuron state grouped by hidden layer.
using ActivationPattern = std::vector<std::vector<Activation>>;

inline ActivationPattern pattern_from_trace(const ForwardTrace& t, double tie_tol) {
  if (!(tie_tol >= 0.0)) throw InputError("tie_tol must be >= 0");
  ActivationPattern p;
  p.reserve(t.pre_activations.size());
  for (const Vector& z : t.pre_activations) {
    std::vector<Activation> layer(static_cast<std::size_t>(z.size()));
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      if (z(j) > tie_tol)
        layer[j] = Activation::kOn;
      else if (z(j) < -tie_tol)
        layer[j] = Activation::kOff;
      else
        layer[j] = Activation::kTie;
    }
    p.push_back(std::move(layer));
  }
  return p;
}

inline ActivationPattern pattern_at(const ReLUNetwork& net, const Vector& x,
                                    double tie_tol = 1e-9) {
  return pattern_from_trace(forward_trace(net, x), tie_tol);
}

inline std::size_t count_ties(const ActivationPattern& p) {
  std::size_t n = 0;
  for (const auto& layer : p)
    for (Activation a : layer) n += (a == Activation::kTie);
  return n;
}

// How an implementation of the chain rule resolves relu'(0).
struct ZeroRule {
  enum class Kind { kAlwaysZero, kAlwaysOne, kPerNeuron };
  Kind kind = Kind::kAlwaysZero;
  // Global neuron index -> derivative choice; only for kPerNeuron and must
  // cover exactly the tied neurons.
  std::map<std::size_t, bool> assignment;

  static ZeroRule always_zero() { return {Kind::kAlwaysZero, {}}; }
  static ZeroRule always_one() { return {Kind::kAlwaysOne, {}}; }
  static ZeroRule per_neuron(std::map<std::size_t, bool> a) {
    return {Kind::kPerNeuron, std::move(a)};
  }
};

// 0/1 derivative mask, one vector per hidden layer.
using DerivativeMask = std::vector<std::vector<std::uint8_t>>;

inline DerivativeMask resolve_pattern(const ReLUNetwork& net,
                                      const ActivationPattern& p,
                                      const ZeroRule& rule) {
  DerivativeMask mask(p.size());
  std::size_t ties_seen = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mask[i].resize(p[i].size());
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      switch (p[i][j]) {
        case Activation::kOn:
          mask[i][j] = 1;
          break;
        case Activation::kOff:
          mask[i][j] = 0;
          break;
        case Activation::kTie: {
          ++ties_seen;
          if (rule.kind == ZeroRule::Kind::kAlwaysZero) {
            mask[i][j] = 0;
          } else if (rule.kind == ZeroRule::Kind::kAlwaysOne) {
            mask[i][j] = 1;
          } else {
            auto it = rule.assignment.find(net.neuron_index(i, static_cast<int>(j)));
            if (it == rule.assignment.end())
              throw InputError("PerNeuron rule does not cover tied neuron " +
                               std::to_string(net.neuron_index(i, static_cast<int>(j))));
            mask[i][j] = it->second ? 1 : 0;
          }
          break;
        }
      }
    }
  }
  if (rule.kind == ZeroRule::Kind::kPerNeuron && rule.assignment.size() != ties_seen)
    throw InputError("PerNeuron rule assigns neurons that are not tied");
  return mask;
}

// Jacobian (m x n_0) of the linear piece selected by a derivative mask:
// head * D_d W_d * ... * D_1 W_1.
inline Matrix jacobian_for_mask(const ReLUNetwork& net, const DerivativeMask& mask) {
  Matrix g = net.head();
  for (std::size_t i = net.depth(); i-- > 0;) {
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (!mask[i][static_cast<std::size_t>(j)]) g.col(j).setZero();
    g = g * net.layer(i).weight;
  }
  return g;
}

// Backward recursion Y_i = W_{i+1}^T Diag(Lambda_i) Y_{i+1}, seeded with the
// head; ties (|Z| == 0 exactly) resolved by the rule.
inline Matrix chain_rule_jacobian(const ReLUNetwork& net, const Vector& x,
                                  const ZeroRule& rule = ZeroRule::always_zero()) {
  const ActivationPattern p = pattern_at(net, x, 0.0);
  return jacobian_for_mask(net, resolve_pattern(net, p, rule));
}

// ---------------------------------------------------------------------------
// Construction

// He initialisation: W_i entries ~ N(0, 2 / fan_in), head drawn the same way
// from fan_in = n_d. Draw order: layer by layer, row-major, one SplitMix64
// stream seeded with `seed`. Biases are zero unless bias_std > 0, in which
// case they are drawn N(0, bias_std^2) from the same stream after all weights
// (layer by layer), so the weights do not depend on bias_std.
inline ReLUNetwork random_he(const std::vector<int>& arch, std::uint64_t seed,
                             double bias_std = 0.0) {
  if (arch.size() < 2) throw InputError("arch needs at least input and output sizes");
  for (int s : arch)
    if (s < 1) throw InputError("arch sizes must be >= 1");
  if (arch.size() < 3)
    throw InputError("arch needs at least one hidden layer (n_0, n_1, ..., m)");
  if (!(bias_std >= 0.0) || !std::isfinite(bias_std)) throw InputError("bias_std must be >= 0");
  SplitMix64 rng(seed);
  auto draw = [&rng](int rows, int cols) {
    Matrix w(rows, cols);
    const double sd = std::sqrt(2.0 / cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = sd * rng.normal();
    return w;
  };
  std::vector<Layer> layers;
  for (std::size_t i = 1; i + 1 < arch.size(); ++i)
    layers.push_back({draw(arch[i], arch[i - 1]), Vector::Zero(arch[i])});
  Matrix head = draw(arch.back(), arch[arch.size() - 2]);
  if (bias_std > 0.0)
    for (Layer& l : layers)
      for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias(k) = bias_std * rng.normal();
  return ReLUNetwork(std::move(layers), std::move(head));
}

// I(x) = 2x - relu(x) + relu(-x), a one-dimensional identity written so the
// chain rule can disagree with the true derivative at 0. The 2x term uses
// always-on neurons: 2 relu(x + s) - relu(2s), exact for x > -s.
// Hidden neurons: [x + s, 2s, x, -x]; the last two are the kinked ones.
inline ReLUNetwork identity_network(double shift = 10.0) {
  Matrix w(4, 1);
  w << 1.0, 0.0, 1.0, -1.0;
  Vector b(4);
  b << shift, 2.0 * shift, 0.0, 0.0;
  Matrix head(1, 4);
  head << 2.0, -1.0, -1.0, 1.0;
  return ReLUNetwork({{w, b}}, head);
}

// f(x) = w^T x + b as a one-hidden-layer network whose neurons never switch
// for x > -shift: head * relu([x + shift; k]) with a constant neuron k.
inline ReLUNetwork affine_network(const Vector& w, double b, double shift = 10.0) {
  const Eigen::Index n = w.size();
  if (n < 1) throw InputError("affine_network needs a non-empty weight vector");
  Matrix W = Matrix::Zero(n + 1, n);
  W.topLeftCorner(n, n).setIdentity();
  Vector bias = Vector::Constant(n + 1, shift);
  Matrix head(1, n + 1);
  head.leftCols(n) = w.transpose();
  // relu(shift) = shift, so the constant neuron carries b - shift * sum(w).
  head(0, n) = (b - shift * w.sum()) / shift;
  return ReLUNetwork({{W, bias}}, head);
}

// Same network with head replaced (vector -> scalar projections etc.).
inline ReLUNetwork with_head(const ReLUNetwork& net, Matrix head) {
  return ReLUNetwork(net.layers(), std::move(head));
}

}  // namespace lipcert

#endif  // LIPCERT_NETWORK_HPP_
