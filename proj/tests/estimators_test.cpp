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

#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "lipcert/estimators.hpp"
#include "lipcert/oracle.hpp"

namespace lipcert {
namespace {

double svd_norm(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

const std::vector<Method> kAll = {Method::kRandomLB, Method::kLipMIP, Method::kLipLP,
                                  Method::kFastLip, Method::kNaiveUB};

TEST(MethodNames, ParseAndErrors) {
  for (Method m : kAll) EXPECT_EQ(parse_method(to_string(m)), m);
  try {
    parse_method("clever");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    for (const char* name : {"randomlb", "naiveub", "fastlip", "liplp", "lipmip"})
      EXPECT_NE(msg.find(name), std::string::npos) << name;
  }
  EXPECT_EQ(to_string(Guarantee::kGappedUpper), "gapped_upper");
}

TEST(RandomLb, Errors) {
  const ReLUNetwork net = identity_network();
  EXPECT_THROW(random_lb(net, Hyperbox::cube(1, 0.0, 1.0), InputNorm::kLinf, 0, 1), InputError);
  EXPECT_THROW(random_lb(net, Hyperbox::cube(2, 0.0, 1.0), InputNorm::kLinf, 10, 1), InputError);
}

TEST(RandomLb, AffineIsExactForAnySample) {
  Vector w(3);
  w << 0.5, -2.0, 1.25;
  const ReLUNetwork net = affine_network(w, 0.1);
  const Hyperbox x = Hyperbox::cube(3, 0.5, 0.5);
  EXPECT_NEAR(random_lb(net, x, InputNorm::kLinf, 1, 4).value, 3.75, 1e-12);
  EXPECT_NEAR(random_lb(net, x, InputNorm::kL1, 1, 4).value, 2.0, 1e-12);
}

TEST(RandomLb, MonotoneInSamplesAndDeterministic) {
  const ReLUNetwork net = random_he({4, 8, 8, 1}, 3, 0.5);
  const Hyperbox x = Hyperbox::cube(4, 0.5, 0.5);
  double prev = 0.0;
  for (std::int64_t n : {1, 10, 100, 1000}) {
    const EstimateRecord r = random_lb(net, x, InputNorm::kLinf, n, 7);
    EXPECT_GE(r.value, prev);
    EXPECT_EQ(r.guarantee, Guarantee::kLowerBound);
    EXPECT_EQ(r.samples, n);
    prev = r.value;
  }
  EXPECT_EQ(random_lb(net, x, InputNorm::kLinf, 50, 9).value,
            random_lb(net, x, InputNorm::kLinf, 50, 9).value);
}

TEST(NaiveUb, Examples) {
  Matrix e1 = Matrix::Zero(1, 4);
  e1(0, 0) = 1.0;
  const ReLUNetwork scaled({{2.0 * Matrix::Identity(4, 4), Vector::Zero(4)}}, e1);
  EXPECT_NEAR(naive_ub(scaled, InputNorm::kLinf).value, 4.0, 1e-9);
  Matrix head = Matrix::Zero(1, 5);
  head(0, 2) = 1.0;
  const ReLUNetwork ident({{Matrix::Identity(5, 5), Vector::Zero(5)},
                           {Matrix::Identity(5, 5), Vector::Zero(5)}},
                          head);
  EXPECT_NEAR(naive_ub(ident, InputNorm::kL1).value, std::sqrt(5.0), 1e-9);
}

TEST(NaiveUb, MatchesSvdProduct) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ReLUNetwork net = random_he({6, 10, 10, 1}, seed);
    double expect = svd_norm(net.head()) * std::sqrt(6.0);
    for (std::size_t i = 0; i < net.depth(); ++i) expect *= svd_norm(net.layer(i).weight);
    EXPECT_NEAR(naive_ub(net, InputNorm::kLinf).value, expect, 1e-6 * expect);
  }
}

// Every guarantee holds against the region oracle.
TEST(Estimators, GuaranteesHoldAgainstOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ReLUNetwork net = random_he({3, 6, 6, 1}, seed, 0.5);
    const Hyperbox x = Hyperbox::cube(3, 0.5, 0.5);
    for (InputNorm a : {InputNorm::kLinf, InputNorm::kL1}) {
      LipschitzQuery q;
      q.input_norm = a;
      const double exact = exact_lipschitz_bruteforce(net, x, q).value;
      for (const EstimateRecord& r : compare(net, x, a, kAll)) {
        switch (r.guarantee) {
          case Guarantee::kLowerBound:
            EXPECT_LE(r.value, exact + 1e-9) << r.method;
            break;
          case Guarantee::kExact:
            EXPECT_NEAR(r.value, exact, 1e-6 * std::max(1.0, exact)) << r.method;
            break;
          default:
            EXPECT_GE(r.value, exact - 1e-9) << r.method;
        }
      }
    }
  }
}

TEST(Compare, OrderingAndRelErrSigns) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const ReLUNetwork net = random_he({4, 8, 8, 1}, seed, 0.5);
    const std::vector<EstimateRecord> r =
        compare(net, Hyperbox::cube(4, 0.5, 0.5), InputNorm::kLinf, kAll);
    ASSERT_EQ(r.size(), 5u);
    EXPECT_LE(r[0].value, r[1].value);
    EXPECT_LE(r[1].value, r[2].value + 1e-7);
    EXPECT_LE(r[2].value, r[3].value + 1e-7);
    EXPECT_LE(r[1].value, r[4].value);
    EXPECT_EQ(r[1].guarantee, Guarantee::kExact);
    EXPECT_DOUBLE_EQ(*r[1].rel_err, 0.0);
    EXPECT_LE(*r[0].rel_err, 0.0);
    for (int k = 2; k < 5; ++k) EXPECT_GE(*r[k].rel_err, -1e-7);
  }
}

TEST(Compare, NoRelErrWithoutLipMip) {
  const std::vector<EstimateRecord> r = compare(identity_network(), Hyperbox::cube(1, 0.0, 1.0),
                                                InputNorm::kLinf, {Method::kNaiveUB});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].rel_err);
}

TEST(Estimate, GappedLipMipRecord) {
  EstimatorOptions o;
  o.solve.node_limit = 1;
  const ReLUNetwork net = random_he({4, 8, 8, 1}, 1, 0.5);
  const EstimateRecord r = estimate(net, Hyperbox::cube(4, 0.5, 0.5), InputNorm::kLinf, "lipmip", o);
  EXPECT_EQ(r.guarantee, Guarantee::kGappedUpper);
  ASSERT_TRUE(r.gap);
  EXPECT_GT(*r.gap, 0.0);
  EXPECT_EQ(r.status, MIPStatus::kNodeLimit);
}

TEST(Csv, HeaderAndRows) {
  const std::vector<EstimateRecord> r =
      compare(identity_network(), Hyperbox::cube(1, 0.0, 1.0), InputNorm::kLinf,
              {Method::kRandomLB, Method::kLipMIP});
  std::ostringstream os;
  write_estimate_csv(os, r, true, false);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "method,value,guarantee,gap,time_s,rel_err,samples,nodes");
  std::getline(in, line);
  EXPECT_EQ(line, "randomlb,1,lower_bound,,,-0.5,1000,");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("lipmip,2,exact,0,,0,,", 0), 0u) << line;
  EXPECT_FALSE(std::getline(in, line));
}

}  // namespace
}  // namespace lipcert
