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

// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lipcert/lipcert.hpp"

namespace lipcert {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Vector sample(SplitMix64& rng, const Hyperbox& h) {
  Vector x(h.dim());
  for (Eigen::Index k = 0; k < h.dim(); ++k) x(k) = rng.uniform(h.l(k), h.u(k));
  return x;
}

Hyperbox unit_cube(int n) { return Hyperbox::cube(n, 0.5, 0.5); }

LipschitzQuery query(InputNorm a, OutputNorm b = OutputNorm::kL1) {
  LipschitzQuery q;
  q.input_norm = a;
  q.output_norm = b;
  return q;
}

// 1. LipMIP equals the region oracle.
Outcome oracle_equivalence() {
  Outcome o;
  double worst = 0.0, slowest = 0.0;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ReLUNetwork net = random_he({4, 8, 8, 1}, seed, 0.5);
    const double oracle = exact_lipschitz_bruteforce(net, unit_cube(4)).value;
    const auto t = std::chrono::steady_clock::now();
    const MIPResult r = solve_lipmip(net, unit_cube(4));
    slowest = std::max(slowest, seconds_since(t));
    const double diff = std::abs(r.incumbent_value - oracle);
    worst = std::max(worst, diff / std::max(1.0, oracle));
    if (r.status == MIPStatus::kExact && diff <= 1e-6 * std::max(1.0, oracle)) ++ok;
  }
  o.pass = ok == 20 && slowest <= 120.0;
  o.detail = std::to_string(ok) + "/20 match, max rel diff " + fmt("%.2e", worst) +
             ", slowest " + fmt("%.2f", slowest) + "s";
  return o;
}

// 2. MIS reduction round trip.
Outcome mis_round_trip() {
  Outcome o;
  std::vector<std::pair<std::string, Graph>> graphs = {
      {"K3", complete_graph(3)}, {"C5", cycle_graph(5)},        {"P3", path_graph(3)},
      {"Petersen", petersen_graph()}, {"empty5", empty_graph(5)}};
  for (std::uint64_t k = 1; k <= 10; ++k)
    graphs.emplace_back("gnp" + std::to_string(k), gnp_graph(4 + static_cast<int>((k - 1) % 6), 0.5, k));
  const auto t = std::chrono::steady_clock::now();
  int ok = 0, total = 0;
  std::string bad;
  for (const auto& [name, g] : graphs) {
    const ReductionReport r = verify_reduction(g);
    ++total;
    if (r.match) ++ok;
    else bad += " " + name;
  }
  for (const auto& [name, g] : std::vector<std::pair<std::string, Graph>>{
           {"K3", complete_graph(3)}, {"P3", path_graph(3)}, {"empty3", empty_graph(3)}}) {
    const ReductionReport r = verify_reduction(g, {}, true);
    ++total;
    if (r.match) ++ok;
    else bad += " l1:" + name;
  }
  const double secs = seconds_since(t);
  o.pass = ok == total && secs <= 300.0;
  o.detail = std::to_string(ok) + "/" + std::to_string(total) + " match in " + fmt("%.1f", secs) + "s";
  if (!bad.empty()) o.detail += ", mismatches:" + bad;
  return o;
}

// 3. Affine closed form for every method.
Outcome affine_closed_form() {
  Outcome o;
  SplitMix64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 5;
    Vector w(n);
    for (int k = 0; k < n; ++k) w(k) = rng.uniform(-3, 3);
    const ReLUNetwork net = affine_network(w, rng.uniform(-2, 2));
    const Hyperbox x = unit_cube(n);
    for (InputNorm a : {InputNorm::kLinf, InputNorm::kL1}) {
      const double expect = a == InputNorm::kLinf ? w.lpNorm<1>() : w.lpNorm<Eigen::Infinity>();
      for (double v : {solve_lipmip(net, x, query(a)).incumbent_value, solve_liplp(net, x, query(a)),
                       fastlip(net, x, a), exact_lipschitz_bruteforce(net, x, query(a)).value})
        worst = std::max(worst, std::abs(v - expect));
    }
  }
  o.pass = worst <= 1e-9;
  o.detail = "50 nets x 2 norms x 4 methods, max |err| " + fmt("%.2e", worst);
  return o;
}

// 4. RandomLB <= LipMIP <= LipLP <= FastLip and LipMIP <= NaiveUB.
Outcome estimator_ordering() {
  Outcome o;
  const std::vector<Method> methods = {Method::kRandomLB, Method::kLipMIP, Method::kLipLP,
                                       Method::kFastLip, Method::kNaiveUB};
  int nets = 0, violations = 0;
  for (const std::vector<int>& arch : {std::vector<int>{4, 8, 8, 1}, std::vector<int>{6, 10, 10, 1}}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const ReLUNetwork net = random_he(arch, seed, 0.5);
      EstimatorOptions opts;
      opts.seed = seed;
      const std::vector<EstimateRecord> r =
          compare(net, unit_cube(arch[0]), InputNorm::kLinf, methods, opts);
      ++nets;
      const double lb = r[0].value, mip = r[1].value, lp = r[2].value, fl = r[3].value,
                   nv = r[4].value;
      bool ok = r[1].guarantee == Guarantee::kExact && lb <= mip && mip <= lp + 1e-7 &&
                lp <= fl + 1e-7 && mip <= nv;
      ok = ok && *r[0].rel_err <= 0.0;
      for (int k = 2; k < 5; ++k) ok = ok && *r[k].rel_err >= -1e-7;
      if (!ok) ++violations;
    }
  }
  o.pass = violations == 0;
  o.detail = std::to_string(nets) + " nets, " + std::to_string(violations) + " violations";
  return o;
}

// 5. Gap contract and monotone tightening.
Outcome gap_contract() {
  Outcome o;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ReLUNetwork net = random_he({4, 8, 8, 1}, seed, 0.5);
    const double exact = solve_lipmip(net, unit_cube(4)).incumbent_value;
    const double tol = 1e-6 * std::max(1.0, exact);
    bool good = true;
    double prev = kInf;
    for (double gap : {1.0, 0.1, 0.01}) {
      SolveOptions s;
      s.target_gap = gap;
      const MIPResult r = solve_lipmip(net, unit_cube(4), {}, s);
      good = good && r.incumbent_value <= exact + tol && exact <= r.upper_bound + tol &&
             r.upper_bound <= (1 + gap) * r.incumbent_value + 1e-12 && r.upper_bound <= prev;
      prev = r.upper_bound;
    }
    good = good && exact <= prev + tol;
    if (good) ++ok;
  }
  o.pass = ok == 10;
  o.detail = std::to_string(ok) + "/10 nets satisfy the sandwich and monotonicity";
  return o;
}

// 6. Identity network: sup over the chain-rule set is 2, region sup is 1.
Outcome chain_rule_counterexample() {
  Outcome o;
  const ReLUNetwork net = identity_network();
  const Hyperbox x = Hyperbox::cube(1, 0.0, 1.0);
  const double mip = solve_lipmip(net, x).incumbent_value;
  const double oracle = exact_lipschitz_bruteforce(net, x).value;
  o.pass = std::abs(mip - 2.0) <= 1e-6 && std::abs(oracle - 1.0) <= 1e-6;
  o.detail = "LipMIP " + fmt("%.9g", mip) + ", oracle " + fmt("%.9g", oracle);
  return o;
}

// 7. Chain-rule Jacobians against central differences.
Outcome gradient_correctness() {
  Outcome o;
  const std::vector<std::vector<int>> archs = {{4, 8, 8, 1}, {6, 10, 10, 1}, {3, 5, 5, 5, 1},
                                               {2, 16, 1},   {3, 6, 2},      {5, 12, 8, 3}};
  const double h = 1e-5;
  SplitMix64 rng(707);
  int done = 0, skipped = 0;
  double worst = 0.0;
  for (int s = 0; done < 1000; ++s) {
    const std::vector<int>& arch = archs[static_cast<std::size_t>(s) % archs.size()];
    const ReLUNetwork net = random_he(arch, static_cast<std::uint64_t>(s), s % 2 ? 0.5 : 0.1);
    const Vector x = sample(rng, Hyperbox::cube(arch[0], 0.0, 1.0));
    const ActivationPattern p = pattern_at(net, x, 0.0);
    // Points whose stencil crosses a kink are treated as ties.
    bool smooth = count_ties(p) == 0;
    Matrix fd(net.output_dim(), arch[0]);
    for (int k = 0; k < arch[0] && smooth; ++k) {
      const Vector e = Vector::Unit(arch[0], k) * h;
      smooth = pattern_at(net, x + e, 0.0) == p && pattern_at(net, x - e, 0.0) == p;
      fd.col(k) = (forward(net, x + e) - forward(net, x - e)) / (2 * h);
    }
    if (!smooth) {
      ++skipped;
      continue;
    }
    const Matrix jac = chain_rule_jacobian(net, x);
    const double rel = (jac - fd).cwiseAbs().maxCoeff() / std::max(jac.cwiseAbs().maxCoeff(), 1e-6);
    worst = std::max(worst, rel);
    ++done;
  }
  o.pass = worst <= 1e-3;
  o.detail = "1000 samples (" + std::to_string(skipped) + " near-kink draws replaced), max rel err " +
             fmt("%.2e", worst);
  return o;
}

// 8. Interval boxes contain every sampled pre-activation and gradient.
Outcome interval_soundness() {
  Outcome o;
  SplitMix64 rng(808);
  long outside = 0, checked = 0, fastlip_bad = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ReLUNetwork net = random_he({4, 8, 8, 1}, seed, seed < 5 ? 0.5 : 0.0);
    const Hyperbox x = seed < 5 ? unit_cube(4) : Hyperbox::cube(4, 0.0, 1.0);
    const PropagationResult p = propagate(net, x);
    for (int s = 0; s < 10000; ++s) {
      const Vector pt = s == 0 ? x.center() : sample(rng, x);
      const ForwardTrace t = forward_trace(net, pt);
      bool in = true;
      for (std::size_t i = 0; i < net.depth(); ++i)
        in = in && p.pre_activation_boxes[i].contains(t.pre_activations[i], 1e-9);
      for (const ZeroRule& rule : {ZeroRule::always_zero(), ZeroRule::always_one()})
        in = in && p.gradient_box.contains(chain_rule_jacobian(net, pt, rule).row(0).transpose(), 1e-9);
      ++checked;
      if (!in) ++outside;
    }
    for (InputNorm a : {InputNorm::kLinf, InputNorm::kL1})
      if (fastlip(net, x, a) < exact_lipschitz_bruteforce(net, x, query(a)).value - 1e-9) ++fastlip_bad;
  }
  o.pass = outside == 0 && fastlip_bad == 0;
  o.detail = std::to_string(checked) + " points, " + std::to_string(outside) + " outside, " +
             std::to_string(fastlip_bad) + " fastlip < oracle";
  return o;
}

double cross_norm_lp(const Vector& v) {
  const int m = static_cast<int>(v.size());
  double best = 0.0;
  for (double sign : {1.0, -1.0}) {
    LPProblem p;
    p.objective = Vector(2 * m);
    p.objective << sign * v, -sign * v;
    p.lower = Vector::Zero(2 * m);
    p.upper = Vector::Constant(2 * m, 1.0);
    LPRow pos{{}, Relation::kLe, 1.0}, neg{{}, Relation::kLe, 1.0};
    LPRow lo{{}, Relation::kGe, 0.0}, hi{{}, Relation::kLe, 1.0};
    for (int k = 0; k < m; ++k) {
      pos.terms.emplace_back(k, 1.0);
      neg.terms.emplace_back(m + k, 1.0);
      for (LPRow* r : {&lo, &hi}) {
        r->terms.emplace_back(k, 1.0);
        r->terms.emplace_back(m + k, -1.0);
      }
    }
    p.rows = {pos, neg, lo, hi};
    const LPSolution s = solve_lp(p);
    if (s.status != LPStatus::kOptimal) return -1.0;
    best = std::max(best, s.objective_value);
  }
  return best;
}

// 9. Cross-norm Lipschitz dominates every pairwise difference; cross-norm
// equals the LP over its unit-ball polytope.
Outcome vector_properties() {
  Outcome o;
  int bad = 0, pairs = 0;
  for (int m : {2, 3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ReLUNetwork net = random_he({3, 6, m}, seed, 0.5);
      const Hyperbox x = unit_cube(3);
      const double cross = lipmip_vector(net, x, InputNorm::kLinf, OutputNorm::kCross).incumbent_value;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          if (i == j) continue;
          ++pairs;
          if (cross < solve_lipmip(pairwise_difference(net, i, j), x).incumbent_value - 1e-7) ++bad;
        }
    }
  }
  SplitMix64 rng(909);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Vector v(2 + t % 5);
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.uniform(-5, 5);
    worst = std::max(worst, std::abs(cross_norm_value(v) - cross_norm_lp(v)));
  }
  o.pass = bad == 0 && worst <= 1e-8;
  o.detail = std::to_string(pairs) + " pairs on 10 nets, " + std::to_string(bad) +
             " violations; cross-norm vs LP max |diff| " + fmt("%.2e", worst);
  return o;
}

struct Command {
  int code = -1;
  std::string out;
};

Command shell(const std::string& args) {
  Command c;
  const std::string cmd = std::string(LIPCERT_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return c;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) c.out.append(buf, n);
  const int status = pclose(p);
  c.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Every command twice with fixed seeds and one thread: identical bytes.
Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "lipcert_acceptance";
  std::string bad;
  int compared = 0;
  const std::string data = LIPCERT_TEST_DATA;
  // {name, command with {D} for the round directory, output file or "" for stdout}
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"gen", "gen --arch 4,8,8,1 --seed 11 --bias-std 0.5 --out {D}/net.json"},
      {"gen_vec", "gen --arch 3,6,3 --seed 12 --bias-std 0.5 --out {D}/vec.json"},
      {"est_randomlb", "estimate --net {D}/net.json --domain cube:0.5,0.5 --method randomlb --seed 3 --samples 500 --threads 1 --no-timing --out-csv {D}/est.csv"},
      {"est_naiveub", "estimate --net {D}/net.json --domain cube:0.5,0.5 --method naiveub --threads 1 --no-timing --out-csv {D}/est.csv"},
      {"est_fastlip", "estimate --net {D}/net.json --domain cube:0.5,0.5 --method fastlip --threads 1 --no-timing --out-csv {D}/est.csv"},
      {"est_liplp", "estimate --net {D}/net.json --domain cube:0.5,0.5 --method liplp --threads 1 --no-timing --out-csv {D}/est.csv"},
      {"est_lipmip", "estimate --net {D}/net.json --domain cube:0.5,0.5 --method lipmip --threads 1 --no-timing --out-csv {D}/est.csv"},
      {"est_gap", "estimate --net {D}/net.json --domain cube:0.5,0.5 --method lipmip --gap 0.1 --norm l1 --threads 1 --no-timing --out-csv {D}/est.csv"},
      {"est_cross", "estimate --net {D}/vec.json --domain cube:0.5,0.5 --method lipmip --output-norm cross --threads 1 --no-timing --out-csv {D}/est.csv"},
      {"compare", "compare --net {D}/net.json --domain cube:0.5,0.5 --seed 5 --threads 1 --no-timing --out-csv {D}/cmp.csv"},
      {"compare_stdout", "compare --net {D}/vec.json --domain cube:0.5,0.5 --output-norm linf --seed 5 --threads 1 --no-timing"},
      {"oracle", "oracle --net {D}/net.json --domain cube:0.5,0.5"},
      {"reduce_out", "reduce --graph " + data + "/k3.txt --out {D}/k3.json"},
      {"reduce_check", "reduce --graph " + data + "/k3.txt --check --threads 1"},
  };
  const std::vector<std::string> files = {"net.json", "vec.json", "est.csv", "cmp.csv", "k3.json"};
  std::map<std::string, std::string> first;
  // Both rounds run in the same directory so printed paths agree.
  const fs::path work = dir / "run";
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string d = work.string();
    for (const auto& [name, tmpl] : cmds) {
      std::string cmd = tmpl;
      for (std::size_t pos; (pos = cmd.find("{D}")) != std::string::npos;) cmd.replace(pos, 3, d);
      const Command c = shell(cmd);
      std::string key = name + " exit " + std::to_string(c.code) + "\n" + c.out;
      if (round == 0) first[name] = key;
      else if (first[name] != key) bad += " " + name;
      if (c.code != 0) bad += " " + name + "(exit " + std::to_string(c.code) + ")";
    }
    for (const std::string& f : files) {
      const std::string content = slurp(work / f);
      if (round == 0) {
        first["file " + f] = content;
      } else {
        ++compared;
        if (content.empty() || content != first["file " + f]) bad += " " + f;
      }
    }
  }
  fs::remove_all(dir);
  o.pass = bad.empty();
  o.detail = std::to_string(cmds.size()) + " commands, " + std::to_string(compared) +
             " output files compared" + (bad.empty() ? "" : ", differences:" + bad);
  return o;
}

}  // namespace
}  // namespace lipcert

// Optional arguments select criteria by number; default runs all.
int main(int argc, char** argv) {
  using lipcert::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", lipcert::oracle_equivalence},
      {"MIS reduction round trip", lipcert::mis_round_trip},
      {"affine closed form", lipcert::affine_closed_form},
      {"estimator ordering", lipcert::estimator_ordering},
      {"gap contract", lipcert::gap_contract},
      {"chain-rule counterexample", lipcert::chain_rule_counterexample},
      {"gradient correctness", lipcert::gradient_correctness},
      {"interval soundness", lipcert::interval_soundness},
      {"vector and cross-norm properties", lipcert::vector_properties},
      {"determinism", lipcert::determinism},
  };
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[a]);
      return 2;
    }
    selected[static_cast<std::size_t>(k - 1)] = true;
  }
  int failed = 0, ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k]) continue;
    ++ran;
    const auto t = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), o.detail.c_str(), lipcert::seconds_since(t));
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed;
}
