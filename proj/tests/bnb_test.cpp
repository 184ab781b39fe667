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
#include <sstream>
#include <string>
#include <vector>

#include "lipcert/bnb.hpp"
#include "lipcert/mip.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {
namespace {

struct Knapsack {
  std::vector<double> value, weight;
  double capacity = 0.0;
  double slack_value = 0.0;
};

Knapsack random_knapsack(std::uint64_t seed, int n) {
  SplitMix64 rng(seed);
  Knapsack k;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    k.value.push_back(rng.uniform(1, 10));
    k.weight.push_back(rng.uniform(1, 10));
    total += k.weight.back();
  }
  k.capacity = 0.4 * total;
  k.slack_value = rng.uniform(0.1, 2);
  return k;
}

// max v.b + s*y  s.t.  w.b + y <= cap,  b binary,  y in [0, 1].
MIPModel knapsack_model(const Knapsack& k) {
  MIPModel m;
  LinExpr obj, lhs;
  for (std::size_t i = 0; i < k.value.size(); ++i) {
    const VarId b = m.add_binary("b" + std::to_string(i));
    obj.add(b, k.value[i]);
    lhs.add(b, k.weight[i]);
  }
  const VarId y = m.add_continuous(0.0, 1.0, "y");
  obj.add(y, k.slack_value);
  lhs.add(y, 1.0);
  m.add_constraint(lhs, Relation::kLe, k.capacity, "cap");
  m.set_objective(obj);
  return m;
}

double brute_force(const Knapsack& k) {
  const int n = static_cast<int>(k.value.size());
  double best = -kInf;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double v = 0.0, w = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) {
        v += k.value[i];
        w += k.weight[i];
      }
    if (w > k.capacity) continue;
    best = std::max(best, v + k.slack_value * std::min(1.0, k.capacity - w));
  }
  return best;
}

TEST(SolveMip, KnapsackMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Knapsack k = random_knapsack(seed, 10);
    const MIPResult r = solve_mip(knapsack_model(k));
    EXPECT_EQ(r.status, MIPStatus::kExact) << seed;
    EXPECT_NEAR(r.incumbent_value, brute_force(k), 1e-7) << seed;
    EXPECT_GE(r.upper_bound, r.incumbent_value - 1e-9);
    EXPECT_LE(r.upper_bound, r.incumbent_value * (1 + kExactGap) + 1e-9);
  }
}

TEST(SolveMip, ThreadsAgree) {
  const Knapsack k = random_knapsack(99, 12);
  SolveOptions o;
  o.threads = 3;
  const MIPResult a = solve_mip(knapsack_model(k));
  const MIPResult b = solve_mip(knapsack_model(k), {}, o);
  EXPECT_EQ(b.status, MIPStatus::kExact);
  EXPECT_NEAR(a.incumbent_value, b.incumbent_value, 1e-9);
}

TEST(SolveMip, Infeasible) {
  MIPModel m;
  const VarId a = m.add_binary("a"), b = m.add_binary("b");
  m.add_constraint(LinExpr(a) + LinExpr(b), Relation::kGe, 1.5, "c1");
  m.add_constraint(LinExpr(a) - LinExpr(b), Relation::kEq, 0.5, "c2");
  m.set_objective(LinExpr(a));
  EXPECT_EQ(solve_mip(m).status, MIPStatus::kInfeasible);
}

TEST(SolveMip, NodeLimitKeepsValidBound) {
  const Knapsack k = random_knapsack(4, 14);
  SolveOptions o;
  o.node_limit = 1;
  const MIPResult r = solve_mip(knapsack_model(k), {}, o);
  EXPECT_EQ(r.status, MIPStatus::kNodeLimit);
  EXPECT_GE(r.upper_bound, brute_force(k) - 1e-9);
}

TEST(SolveMip, TimeoutKeepsValidBound) {
  const Knapsack k = random_knapsack(5, 14);
  SolveOptions o;
  o.timeout_seconds = 0.0;
  const MIPResult r = solve_mip(knapsack_model(k), {}, o);
  EXPECT_EQ(r.status, MIPStatus::kTimeout);
  EXPECT_GE(r.upper_bound, brute_force(k) - 1e-9);
}

TEST(SolveMip, GapContract) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Knapsack k = random_knapsack(seed + 20, 14);
    const double exact = brute_force(k);
    for (double gap : {1.0, 0.1, 0.01}) {
      SolveOptions o;
      o.target_gap = gap;
      const MIPResult r = solve_mip(knapsack_model(k), {}, o);
      EXPECT_LE(r.incumbent_value, exact + 1e-9);
      EXPECT_GE(r.upper_bound, exact - 1e-9);
      EXPECT_LE(r.upper_bound, (1 + gap) * r.incumbent_value + 1e-9);
    }
  }
}

TEST(SolveMip, EventTrace) {
  const MIPResult r = solve_mip(knapsack_model(random_knapsack(7, 10)));
  ASSERT_FALSE(r.events.empty());
  for (std::size_t i = 1; i < r.events.size(); ++i) {
    EXPECT_LE(r.events[i].upper_bound, r.events[i - 1].upper_bound + 1e-9);
    EXPECT_GE(r.events[i].incumbent, r.events[i - 1].incumbent - 1e-9);
  }
  std::ostringstream os;
  write_event_csv(os, r.events);
  const std::string csv = os.str();
  EXPECT_EQ(csv.rfind("node,depth,upper_bound,incumbent\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')),
            r.events.size() + 1);
}

TEST(SolveMip, BranchPriorityDoesNotChangeTheOptimum) {
  const Knapsack k = random_knapsack(8, 12);
  BnbCallbacks cb;
  cb.branch_priority = [](std::int64_t key) { return -static_cast<int>(key); };
  EXPECT_NEAR(solve_mip(knapsack_model(k), cb).incumbent_value, brute_force(k), 1e-7);
}

TEST(RelativeGap, Definition) {
  EXPECT_DOUBLE_EQ(relative_gap(3.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_gap(2.0, 2.0), 0.0);
  EXPECT_EQ(relative_gap(2.0, -kInf), kInf);
}

}  // namespace
}  // namespace lipcert
