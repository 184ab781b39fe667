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

#ifndef LIPCERT_REDUCTION_HPP_
#define LIPCERT_REDUCTION_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/common.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/lipmip.hpp"
#include "lipcert/network.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {

// Simple undirected graph on vertices 0..n-1.
class Graph {
 public:
  Graph() = default;
  Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
    if (n < 0) throw InputError("graph vertex count must be >= 0");
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                         ") has an endpoint outside 0.." + std::to_string(n - 1));
      if (u == v) throw InputError("self-loop at vertex " + std::to_string(u));
      if (u > v) std::swap(u, v);
      if (!seen.insert({u, v}).second)
        throw InputError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
      edges_.emplace_back(u, v);
    }
    adj_.assign(static_cast<std::size_t>(n), {});
    for (auto [u, v] : edges_) {
      adj_[u].push_back(v);
      adj_[v].push_back(u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
  }

  int n() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

inline Graph empty_graph(int n) { return Graph(n, {}); }

inline Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

inline Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

inline Graph cycle_graph(int n) {
  if (n < 3) throw InputError("cycle needs at least 3 vertices");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph(n, e);
}

// Outer 5-cycle 0..4, inner pentagram 5..9, spokes i -- i+5.
inline Graph petersen_graph() {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < 5; ++i) {
    e.emplace_back(i, (i + 1) % 5);
    e.emplace_back(5 + i, 5 + (i + 2) % 5);
    e.emplace_back(i, i + 5);
  }
  return Graph(10, e);
}

// G(n, p): pairs (i, j), i < j, in lexicographic order, each kept when a
// SplitMix64 uniform draw is < p.
inline Graph gnp_graph(int n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("edge probability must lie in [0, 1]");
  SplitMix64 rng(seed);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) e.emplace_back(i, j);
  return Graph(n, e);
}

// "n m" then m lines "u v"; '#' starts a comment line.
inline Graph parse_graph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  int n = 0, m = 0;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long a = 0, b = 0;
    std::string extra;
    if (!(ls >> a >> b) || (ls >> extra))
      throw ParseError("graph line " + std::to_string(lineno) + ": expected two integers");
    if (!have_header) {
      if (a < 1 || b < 0) throw ParseError("graph line " + std::to_string(lineno) + ": bad header");
      n = static_cast<int>(a);
      m = static_cast<int>(b);
      have_header = true;
    } else {
      edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  if (!have_header) throw ParseError("graph file has no header line");
  if (static_cast<int>(edges.size()) != m)
    throw ParseError("graph header announces " + std::to_string(m) + " edges, found " +
                     std::to_string(edges.size()));
  try {
    return Graph(n, edges);
  } catch (const InputError& e) {
    throw ParseError(std::string("graph: ") + e.what());
  }
}

inline Graph load_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open graph file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_graph(ss.str());
}

inline std::string graph_to_string(const Graph& g) {
  std::ostringstream out;
  out << g.n() << ' ' << g.edges().size() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

inline constexpr int kMaxMisVertices = 24;

namespace detail {

inline int mis_rec(std::uint32_t alive, const std::vector<std::uint32_t>& nbr) {
  if (alive == 0) return 0;
  // Vertices of degree <= 1 can always be taken.
  int best_v = -1, best_deg = -1;
  for (std::uint32_t s = alive; s; s &= s - 1) {
    const int v = std::countr_zero(s);
    const int deg = std::popcount(nbr[v] & alive);
    if (deg <= 1) return 1 + mis_rec(alive & ~(nbr[v] | (1u << v)), nbr);
    if (deg > best_deg) {
      best_deg = deg;
      best_v = v;
    }
  }
  const int v = best_v;
  const int without = mis_rec(alive & ~(1u << v), nbr);
  const int with = 1 + mis_rec(alive & ~(nbr[v] | (1u << v)), nbr);
  return std::max(without, with);
}

}  // namespace detail

// Exact maximum independent set size by branching on a maximum-degree vertex.
inline int brute_force_mis(const Graph& g) {
  if (g.n() > kMaxMisVertices)
    throw CapabilityError("brute_force_mis supports at most " + std::to_string(kMaxMisVertices) +
                          " vertices");
  std::vector<std::uint32_t> nbr(static_cast<std::size_t>(g.n()), 0);
  for (auto [u, v] : g.edges()) {
    nbr[u] |= 1u << v;
    nbr[v] |= 1u << u;
  }
  const std::uint32_t all = g.n() == 32 ? ~0u : ((1u << g.n()) - 1u);
  return detail::mis_rec(all, nbr);
}

namespace detail {

// Stage 1: psi(x_k) = relu(x_k + 1) - relu(x_k - 1) - 1 for every input k.
// Stage 2: I_i = sum_k coef(i, k) psi(x_k) - offset(i), with the psi
// constants folded into the bias. Head: relu(I_i) / (d(i) + 1).
inline ReLUNetwork mis_network(const Graph& g, int inputs, const Matrix& coef,
                               const Vector& offset) {
  const int n = g.n();
  Matrix w1 = Matrix::Zero(2 * inputs, inputs);
  Vector b1(2 * inputs);
  for (int k = 0; k < inputs; ++k) {
    w1(2 * k, k) = 1.0;
    b1(2 * k) = 1.0;
    w1(2 * k + 1, k) = 1.0;
    b1(2 * k + 1) = -1.0;
  }
  Matrix w2 = Matrix::Zero(n, 2 * inputs);
  Vector b2(n);
  for (int i = 0; i < n; ++i) {
    double c = -offset(i);
    for (int k = 0; k < inputs; ++k) {
      if (coef(i, k) == 0.0) continue;
      w2(i, 2 * k) = coef(i, k);
      w2(i, 2 * k + 1) = -coef(i, k);
      c -= coef(i, k);
    }
    b2(i) = c;
  }
  Matrix head(1, n);
  for (int i = 0; i < n; ++i) head(0, i) = 1.0 / (g.degree(i) + 1);
  return ReLUNetwork({{w1, b1}, {w2, b2}}, head);
}

inline void check_mis_args(const Graph& g, double eps) {
  if (g.n() < 1) throw InputError("reduction needs a graph with at least one vertex");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0, 1)");
}

}  // namespace detail

inline double default_mis_eps(const Graph& g) { return 1.0 / (g.n() + 2); }

// h(x) = sum_i relu(I_i(x)) / (d(i) + 1) with
// I_i = psi(x_i) - sum_{j in N(i)} psi(x_j) - (d(i) + 1 - eps).
inline ReLUNetwork build_mis_network(const Graph& g, double eps) {
  detail::check_mis_args(g, eps);
  const int n = g.n();
  Matrix coef = Matrix::Zero(n, n);
  Vector offset(n);
  for (int i = 0; i < n; ++i) {
    coef(i, i) = 1.0;
    for (int j : g.neighbors(i)) coef(i, j) = -1.0;
    offset(i) = g.degree(i) + 1 - eps;
  }
  return detail::mis_network(g, n, coef, offset);
}
inline ReLUNetwork build_mis_network(const Graph& g) {
  return build_mis_network(g, default_mis_eps(g));
}

// Variant with an extra input x_n whose partial derivative counts the active
// sets: I_i = psi(x_i) + (d(i) + 1) psi(x_n) - sum_{j in N(i)} psi(x_j)
// - 2 (d(i) + 1 - eps), so the max-norm of the gradient equals the MIS size.
inline ReLUNetwork build_mis_network_l1(const Graph& g, double eps) {
  detail::check_mis_args(g, eps);
  const int n = g.n();
  Matrix coef = Matrix::Zero(n, n + 1);
  Vector offset(n);
  for (int i = 0; i < n; ++i) {
    coef(i, i) = 1.0;
    for (int j : g.neighbors(i)) coef(i, j) = -1.0;
    coef(i, n) = g.degree(i) + 1;
    offset(i) = 2.0 * (g.degree(i) + 1 - eps);
  }
  return detail::mis_network(g, n + 1, coef, offset);
}
inline ReLUNetwork build_mis_network_l1(const Graph& g) {
  return build_mis_network_l1(g, default_mis_eps(g));
}

inline Hyperbox mis_domain(int inputs) { return Hyperbox::cube(inputs, 0.0, 2.0); }

struct ReductionReport {
  int mis = 0;
  double lipmip_value = 0.0;
  bool match = false;
  MIPResult solve;
};

inline constexpr double kReductionTol = 1e-6;

// MIS by brute force against LipMIP on the gadget network over [-2, 2]^n
// (L^inf; with `l1_variant`, L^1 of the extra-input network).
inline ReductionReport verify_reduction(const Graph& g, const SolveOptions& opts = {},
                                        bool l1_variant = false) {
  ReductionReport r;
  r.mis = brute_force_mis(g);
  const ReLUNetwork net = l1_variant ? build_mis_network_l1(g) : build_mis_network(g);
  LipschitzQuery q;
  q.input_norm = l1_variant ? InputNorm::kL1 : InputNorm::kLinf;
  r.solve = solve_lipmip(net, mis_domain(net.input_dim()), q, opts);
  r.lipmip_value = r.solve.status == MIPStatus::kExact ? r.solve.incumbent_value
                                                        : r.solve.upper_bound;
  r.match = std::abs(r.lipmip_value - r.mis) <= kReductionTol;
  return r;
}

}  // namespace lipcert

#endif  // LIPCERT_REDUCTION_HPP_
