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

#ifndef LIPCERT_COMMON_HPP_
#define LIPCERT_COMMON_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lipcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Bad user input: dimensions, malformed arguments, unknown names.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed network/graph file. The message names the field and position.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model could not be built (unbounded domain, inconsistent bounds).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The request exceeds a configured capability (e.g. the oracle neuron cap).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input norm alpha of L^alpha(f, X). The objective maximised is the dual norm
// of the gradient: Linf -> ||g||_1, L1 -> ||g||_inf.
enum class InputNorm { kLinf, kL1 };

// Output norm beta for vector-valued networks. The MIP encodes the dual ball
// {z : ||z||_{beta*} <= 1}.
//   kL1    : beta = l1, dual ball is the box [-1,1]^m
//   kLinf  : beta = linf, dual ball is the l1 ball
//   kCross : the cross-norm, dual ball is Conv({e_i} u {e_i - e_j})
enum class OutputNorm { kL1, kLinf, kCross };

inline std::string to_string(InputNorm n) {
  return n == InputNorm::kLinf ? "linf" : "l1";
}

inline std::string to_string(OutputNorm n) {
  switch (n) {
    case OutputNorm::kL1:
      return "l1";
    case OutputNorm::kLinf:
      return "linf";
    case OutputNorm::kCross:
      return "cross";
  }
  return "?";
}

inline InputNorm parse_input_norm(const std::string& s) {
  if (s == "linf") return InputNorm::kLinf;
  if (s == "l1") return InputNorm::kL1;
  throw InputError("unknown norm '" + s + "' (expected linf or l1)");
}

inline OutputNorm parse_output_norm(const std::string& s) {
  if (s == "l1") return OutputNorm::kL1;
  if (s == "linf") return OutputNorm::kLinf;
  if (s == "cross") return OutputNorm::kCross;
  throw InputError("unknown output norm '" + s +
                   "' (expected l1, linf or cross)");
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace lipcert

#endif  // LIPCERT_COMMON_HPP_
