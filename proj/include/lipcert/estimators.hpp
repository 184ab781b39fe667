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

#ifndef LIPCERT_ESTIMATORS_HPP_
#define LIPCERT_ESTIMATORS_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lipcert/bnb.hpp"
#include "lipcert/common.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/lipmip.hpp"
#include "lipcert/network.hpp"
#include "lipcert/norms.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {

enum class Guarantee { kLowerBound, kUpperBound, kExact, kGappedUpper };

inline std::string to_string(Guarantee g) {
  switch (g) {
    case Guarantee::kLowerBound:
      return "lower_bound";
    case Guarantee::kUpperBound:
      return "upper_bound";
    case Guarantee::kExact:
      return "exact";
    case Guarantee::kGappedUpper:
      return "gapped_upper";
  }
  return "?";
}

enum class Method { kRandomLB, kNaiveUB, kFastLip, kLipLP, kLipMIP };

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"randomlb", "naiveub", "fastlip", "liplp",
                                                 "lipmip"};
  return names;
}

inline std::string to_string(Method m) { return method_names()[static_cast<std::size_t>(m)]; }

inline Method parse_method(const std::string& s) {
  const auto& names = method_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == s) return static_cast<Method>(i);
  std::string valid;
  for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
  throw InputError("unknown method '" + s + "' (valid: " + valid + ")");
}

struct EstimateRecord {
  std::string method;
  double value = 0.0;
  Guarantee guarantee = Guarantee::kUpperBound;
  std::optional<double> gap;  // LipMIP only
  double wall_time_seconds = 0.0;
  std::optional<double> rel_err;
  std::optional<std::int64_t> samples;
  std::optional<std::int64_t> nodes;
  std::optional<MIPStatus> status;
};

struct EstimatorOptions {
  std::int64_t samples = 1000;
  std::uint64_t seed = 0;
  OutputNorm output_norm = OutputNorm::kL1;
  SolveOptions solve;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Largest singular value by power iteration on A^T A.
inline double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const Matrix ata = a.transpose() * a;
  Vector v = Vector::Ones(ata.cols()) / std::sqrt(static_cast<double>(ata.cols()));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = ata * v;
    const double nw = w.norm();
    if (nw == 0.0) {
      // v lies in the null space; restart from a coordinate the matrix sees.
      Eigen::Index k = 0;
      ata.diagonal().maxCoeff(&k);
      if (ata(k, k) == 0.0) return 0.0;
      v = Vector::Unit(ata.cols(), k);
      continue;
    }
    const double next = v.dot(w);
    v = w / nw;
    if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

inline double output_norm_factor(int m, OutputNorm beta) {
  if (m == 1) return 1.0;
  switch (beta) {
    case OutputNorm::kL1:
      return std::sqrt(static_cast<double>(m));
    case OutputNorm::kLinf:
      return 1.0;
    case OutputNorm::kCross:
      return std::sqrt(2.0);
  }
  return 1.0;
}

}  // namespace detail

// Largest chain-rule gradient norm over uniform samples of X (AlwaysZero
// rule). Samples are drawn sequentially from one SplitMix64 stream, so a run
// with more samples extends the sample set of a run with fewer.
inline EstimateRecord random_lb(const ReLUNetwork& net, const Hyperbox& x, InputNorm alpha,
                                std::int64_t n_samples, std::uint64_t seed,
                                OutputNorm beta = OutputNorm::kL1) {
  if (n_samples <= 0) throw InputError("random_lb needs at least one sample");
  if (x.dim() != net.input_dim()) throw InputError("domain dimension does not match network");
  detail::Stopwatch clock;
  SplitMix64 rng(seed);
  double best = 0.0;
  Vector p(x.dim());
  for (std::int64_t s = 0; s < n_samples; ++s) {
    for (Eigen::Index k = 0; k < x.dim(); ++k) p(k) = rng.uniform(x.l(k), x.u(k));
    const Matrix jac = chain_rule_jacobian(net, p, ZeroRule::always_zero());
    best = std::max(best, operator_norm(jac, alpha, beta));
  }
  EstimateRecord r;
  r.method = "randomlb";
  r.value = best;
  r.guarantee = Guarantee::kLowerBound;
  r.samples = n_samples;
  r.wall_time_seconds = clock.seconds();
  return r;
}

// prod ||W_i||_2 * ||head||_2 * sqrt(n0), times the l2 -> beta factor for
// vector networks.
inline EstimateRecord naive_ub(const ReLUNetwork& net, InputNorm alpha,
                               OutputNorm beta = OutputNorm::kL1) {
  (void)alpha;
  detail::Stopwatch clock;
  double v = detail::spectral_norm(net.head());
  for (std::size_t i = 0; i < net.depth(); ++i) v *= detail::spectral_norm(net.layer(i).weight);
  v *= std::sqrt(static_cast<double>(net.input_dim()));
  v *= detail::output_norm_factor(net.output_dim(), beta);
  EstimateRecord r;
  r.method = "naiveub";
  r.value = v;
  r.guarantee = Guarantee::kUpperBound;
  r.wall_time_seconds = clock.seconds();
  return r;
}

inline EstimateRecord estimate(const ReLUNetwork& net, const Hyperbox& x, InputNorm alpha,
                               Method method, const EstimatorOptions& opts = {}) {
  if (x.dim() != net.input_dim()) throw InputError("domain dimension does not match network");
  switch (method) {
    case Method::kRandomLB:
      return random_lb(net, x, alpha, opts.samples, opts.seed, opts.output_norm);
    case Method::kNaiveUB:
      return naive_ub(net, alpha, opts.output_norm);
    default:
      break;
  }
  detail::Stopwatch clock;
  EstimateRecord r;
  r.method = to_string(method);
  LipschitzQuery q;
  q.input_norm = alpha;
  q.output_norm = opts.output_norm;
  if (method == Method::kFastLip) {
    r.value = fastlip(net, x, alpha, opts.output_norm);
    r.guarantee = Guarantee::kUpperBound;
  } else if (method == Method::kLipLP) {
    r.value = solve_liplp(net, x, q);
    r.guarantee = Guarantee::kUpperBound;
  } else {
    const MIPResult res = solve_lipmip(net, x, q, opts.solve);
    r.status = res.status;
    r.nodes = res.nodes_explored;
    r.gap = res.gap;
    if (res.status == MIPStatus::kExact) {
      r.value = res.incumbent_value;
      r.guarantee = Guarantee::kExact;
    } else {
      r.value = res.upper_bound;
      r.guarantee = Guarantee::kGappedUpper;
    }
  }
  r.wall_time_seconds = clock.seconds();
  return r;
}

inline EstimateRecord estimate(const ReLUNetwork& net, const Hyperbox& x, InputNorm alpha,
                               const std::string& method, const EstimatorOptions& opts = {}) {
  return estimate(net, x, alpha, parse_method(method), opts);
}

// One record per method, in order; with LipMIP among them every record gets
// rel_err = (value - lipmip) / lipmip.
inline std::vector<EstimateRecord> compare(const ReLUNetwork& net, const Hyperbox& x,
                                           InputNorm alpha, const std::vector<Method>& methods,
                                           const EstimatorOptions& opts = {}) {
  std::vector<EstimateRecord> out;
  std::optional<double> reference;
  for (Method m : methods) {
    out.push_back(estimate(net, x, alpha, m, opts));
    if (m == Method::kLipMIP && !reference) reference = out.back().value;
  }
  if (reference) {
    for (EstimateRecord& r : out)
      r.rel_err = *reference != 0.0 ? (r.value - *reference) / *reference
                                    : (r.value == 0.0 ? 0.0 : kInf);
  }
  return out;
}

inline constexpr const char* kEstimateCsvHeader =
    "method,value,guarantee,gap,time_s,rel_err,samples,nodes";

namespace detail {

inline std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

// With include_time false the time_s column is left empty so that repeated
// runs produce identical files.
inline std::string to_csv_row(const EstimateRecord& r, bool include_time = true) {
  std::string row = r.method + "," + detail::csv_number(r.value) + "," + to_string(r.guarantee) + ",";
  if (r.gap) row += detail::csv_number(*r.gap);
  row += ",";
  if (include_time) row += detail::csv_number(r.wall_time_seconds);
  row += ",";
  if (r.rel_err) row += detail::csv_number(*r.rel_err);
  row += ",";
  if (r.samples) row += std::to_string(*r.samples);
  row += ",";
  if (r.nodes) row += std::to_string(*r.nodes);
  return row;
}

inline void write_estimate_csv(std::ostream& os, const std::vector<EstimateRecord>& records,
                               bool include_header = true, bool include_time = true) {
  if (include_header) os << kEstimateCsvHeader << '\n';
  for (const EstimateRecord& r : records) os << to_csv_row(r, include_time) << '\n';
}

}  // namespace lipcert

#endif  // LIPCERT_ESTIMATORS_HPP_
