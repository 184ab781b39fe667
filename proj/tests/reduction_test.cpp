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

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "lipcert/network.hpp"
#include "lipcert/norms.hpp"
#include "lipcert/reduction.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {
namespace {

// Largest independent subset by enumerating all 2^n subsets.
int subset_mis(const Graph& g) {
  int best = 0;
  for (std::uint32_t s = 0; s < (1u << g.n()); ++s) {
    bool ok = true;
    for (const auto& [u, v] : g.edges())
      if ((s >> u & 1u) && (s >> v & 1u)) ok = false;
    if (ok) best = std::max(best, std::popcount(s));
  }
  return best;
}

TEST(Graph, Validation) {
  EXPECT_THROW(Graph(3, {{0, 0}}), InputError);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), InputError);
  EXPECT_THROW(Graph(3, {{0, 3}}), InputError);
  EXPECT_THROW(Graph(-1, {}), InputError);
  const Graph g(3, {{2, 0}});
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(g.edges()[0], std::make_pair(0, 2));
  EXPECT_EQ(g.degree(0), 1);
  EXPECT_EQ(g.degree(1), 0);
}

TEST(Graph, Generators) {
  EXPECT_EQ(complete_graph(5).edges().size(), 10u);
  EXPECT_EQ(path_graph(4).edges().size(), 3u);
  EXPECT_EQ(cycle_graph(5).edges().size(), 5u);
  EXPECT_THROW(cycle_graph(2), InputError);
  EXPECT_TRUE(empty_graph(4).edges().empty());
  const Graph p = petersen_graph();
  EXPECT_EQ(p.n(), 10);
  EXPECT_EQ(p.edges().size(), 15u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(p.degree(i), 3);
}

TEST(Graph, GnpIsDeterministic) {
  EXPECT_EQ(graph_to_string(gnp_graph(9, 0.5, 3)), graph_to_string(gnp_graph(9, 0.5, 3)));
  EXPECT_TRUE(gnp_graph(6, 0.0, 1).edges().empty());
  EXPECT_EQ(gnp_graph(6, 1.0, 1).edges().size(), 15u);
  std::size_t total = 0;
  for (std::uint64_t s = 0; s < 50; ++s) total += gnp_graph(10, 0.5, s).edges().size();
  EXPECT_NEAR(static_cast<double>(total) / 50.0, 22.5, 2.5);
}

TEST(GraphIo, RoundTripAndComments) {
  const Graph g = parse_graph("# a comment\n4 3\n0 1\n# inner\n1 2\n2 3\n");
  EXPECT_EQ(g.n(), 4);
  EXPECT_EQ(g.edges().size(), 3u);
  const std::string text = graph_to_string(g);
  EXPECT_EQ(graph_to_string(parse_graph(text)), text);
  const Graph k3 = load_graph(std::string(LIPCERT_TEST_DATA) + "/k3.txt");
  EXPECT_EQ(k3.edges().size(), 3u);
}

TEST(GraphIo, MalformedInput) {
  EXPECT_THROW(parse_graph(""), ParseError);
  EXPECT_THROW(parse_graph("3 2\n0 1\n"), ParseError);
  EXPECT_THROW(parse_graph("3 1\n0 x\n"), ParseError);
  EXPECT_THROW(parse_graph("3 1\n0 1\n1 2\n"), ParseError);
  EXPECT_THROW(parse_graph("3 1\n0 0\n"), ParseError);
  EXPECT_THROW(load_graph("/nonexistent/graph.txt"), InputError);
}

TEST(BruteForceMis, Examples) {
  EXPECT_EQ(brute_force_mis(complete_graph(3)), 1);
  EXPECT_EQ(brute_force_mis(empty_graph(5)), 5);
  EXPECT_EQ(brute_force_mis(cycle_graph(5)), 2);
  EXPECT_EQ(brute_force_mis(path_graph(3)), 2);
  EXPECT_EQ(subset_mis(petersen_graph()), 4);
  EXPECT_EQ(brute_force_mis(petersen_graph()), 4);
  EXPECT_THROW(brute_force_mis(empty_graph(25)), CapabilityError);
}

TEST(BruteForceMis, MatchesSubsetEnumeration) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const Graph g = gnp_graph(4 + static_cast<int>(s % 9), 0.3 + 0.01 * static_cast<double>(s), s);
    EXPECT_EQ(brute_force_mis(g), subset_mis(g)) << s;
  }
}

TEST(MisNetwork, ShapeAndErrors) {
  const Graph g = cycle_graph(5);
  const ReLUNetwork net = build_mis_network(g);
  EXPECT_EQ(net.arch(), (std::vector<int>{5, 10, 5, 1}));
  EXPECT_EQ(build_mis_network_l1(g).arch(), (std::vector<int>{6, 12, 5, 1}));
  EXPECT_THROW(build_mis_network(empty_graph(0)), InputError);
  EXPECT_THROW(build_mis_network(g, 0.0), InputError);
  EXPECT_THROW(build_mis_network(g, 1.0), InputError);
  EXPECT_DOUBLE_EQ(default_mis_eps(g), 1.0 / 7.0);
}

double psi(double x) { return std::max(x + 1, 0.0) - std::max(x - 1, 0.0) - 1; }

// The network agrees with the gadget formula evaluated directly.
TEST(MisNetwork, MatchesGadgetFormula) {
  SplitMix64 rng(5);
  const Graph g = gnp_graph(7, 0.5, 2);
  const double eps = default_mis_eps(g);
  const ReLUNetwork net = build_mis_network(g);
  for (int t = 0; t < 500; ++t) {
    Vector x(7);
    for (int k = 0; k < 7; ++k) x(k) = rng.uniform(-2, 2);
    double h = 0.0;
    for (int i = 0; i < 7; ++i) {
      double in = psi(x(i)) - (g.degree(i) + 1 - eps);
      for (int j : g.neighbors(i)) in -= psi(x(j));
      h += std::max(in, 0.0) / (g.degree(i) + 1);
    }
    EXPECT_NEAR(forward_scalar(net, x), h, 1e-12);
  }
}

TEST(MisNetwork, StageTwoGradientAtInteriorPoint) {
  const Graph g = cycle_graph(5);
  const ReLUNetwork net = build_mis_network(g);
  const double eps = default_mis_eps(g);
  Vector x = Vector::Constant(5, -(1 - eps / 10));
  x(0) = 1 - eps / 10;
  const double h = 1e-6;
  for (int k = 0; k < 5; ++k) {
    const Vector e = Vector::Unit(5, k) * h;
    const double d = (forward_trace(net, x + e).pre_activations[1](0) -
                      forward_trace(net, x - e).pre_activations[1](0)) / (2 * h);
    const double expect = k == 0 ? 1.0 : (k == 1 || k == 4) ? -1.0 : 0.0;
    EXPECT_NEAR(d, expect, 1e-6) << k;
  }
}

// Sampled gradient norms never exceed the MIS size.
TEST(MisNetwork, SampledGradientsBoundedByMis) {
  SplitMix64 rng(11);
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Graph g = gnp_graph(6, 0.5, s);
    const int mis = brute_force_mis(g);
    const double eps = default_mis_eps(g);
    const ReLUNetwork net = build_mis_network(g);
    const ReLUNetwork net1 = build_mis_network_l1(g);
    double best = 0.0;
    for (int t = 0; t < 4000; ++t) {
      Vector x(7);
      for (int k = 0; k < 7; ++k)
        x(k) = t % 2 ? rng.uniform(-2, 2) : (rng.uniform() < 0.5 ? -1 : 1) * (1 - eps / 12);
      const Matrix g0 = chain_rule_jacobian(net, x.head(6), ZeroRule::always_zero());
      const Matrix g1 = chain_rule_jacobian(net1, x, ZeroRule::always_zero());
      best = std::max(best, dual_norm(g0.row(0).transpose(), InputNorm::kLinf));
      EXPECT_LE(dual_norm(g1.row(0).transpose(), InputNorm::kL1), mis + 1e-9) << s;
    }
    EXPECT_LE(best, mis + 1e-9) << s;
    EXPECT_NEAR(best, mis, 1e-9) << s;
  }
}

TEST(VerifyReduction, SmallGraphs) {
  for (const Graph& g : {empty_graph(1), complete_graph(3), path_graph(3), cycle_graph(5)}) {
    const ReductionReport r = verify_reduction(g);
    EXPECT_TRUE(r.match) << graph_to_string(g) << " mis " << r.mis << " got " << r.lipmip_value;
    EXPECT_EQ(r.solve.status, MIPStatus::kExact);
    EXPECT_NEAR(r.lipmip_value, std::round(r.lipmip_value), 1e-6);
  }
}

TEST(VerifyReduction, L1Variant) {
  for (const Graph& g : {empty_graph(1), path_graph(3), empty_graph(3)}) {
    const ReductionReport r = verify_reduction(g, {}, true);
    EXPECT_TRUE(r.match) << graph_to_string(g) << " mis " << r.mis << " got " << r.lipmip_value;
  }
}

}  // namespace
}  // namespace lipcert
