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

// lipcert command-line driver: gen, estimate, compare, oracle, reduce.

#include <cstdlib>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lipcert/lipcert.hpp"

namespace {

using namespace lipcert;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitCapability = 4;

std::vector<double> parse_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw ParseError(what + ": empty entry in '" + s + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ParseError(what + ": '" + tok + "' is not a number");
    }
    if (used != tok.size() || !std::isfinite(v))
      throw ParseError(what + ": '" + tok + "' is not a finite number");
    out.push_back(v);
  }
  if (out.empty() || (!s.empty() && s.back() == ','))
    throw ParseError(what + ": empty entry in '" + s + "'");
  return out;
}

std::vector<int> parse_arch(const std::string& s) {
  std::vector<int> arch;
  for (double v : parse_numbers(s, "--arch")) {
    if (v < 1 || v != std::floor(v) || v > 1e6) throw ParseError("--arch: widths must be positive integers");
    arch.push_back(static_cast<int>(v));
  }
  if (arch.size() < 3) throw ParseError("--arch needs input, at least one hidden and an output width");
  return arch;
}

Vector broadcast(const std::vector<double>& v, int n, const std::string& what) {
  if (v.size() == 1) return Vector::Constant(n, v[0]);
  if (static_cast<int>(v.size()) != n)
    throw InputError(what + " has " + std::to_string(v.size()) + " entries, network input has " +
                     std::to_string(n));
  return Eigen::Map<const Vector>(v.data(), n);
}

// cube:c,r (scalar center broadcast), cube:c1,..,cn,r, or box:l:u with
// comma lists or scalars.
Hyperbox parse_domain(const std::string& text, int n) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("--domain: expected cube:... or box:...");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "cube") {
    std::vector<double> v = parse_numbers(rest, "--domain");
    if (v.size() < 2) throw ParseError("--domain cube needs a center and a radius");
    const double r = v.back();
    v.pop_back();
    if (!(r > 0.0)) throw InputError("--domain: radius must be > 0");
    return Hyperbox::cube(broadcast(v, n, "cube center"), r);
  }
  if (kind == "box") {
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw ParseError("--domain box needs box:l:u");
    const Vector l = broadcast(parse_numbers(rest.substr(0, c2), "--domain"), n, "box lower");
    const Vector u = broadcast(parse_numbers(rest.substr(c2 + 1), "--domain"), n, "box upper");
    if ((l.array() > u.array()).any()) throw InputError("--domain: box needs l <= u");
    return Hyperbox(l, u);
  }
  throw ParseError("--domain: unknown kind '" + kind + "'");
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("LIPCERT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 1024) return static_cast<int>(v);
    throw InputError(std::string("LIPCERT_THREADS='") + env + "' is not a positive integer");
  }
  return 1;
}

struct SolverFlags {
  double gap = 0.0;
  double timeout = 0.0;
  long long node_limit = 0;
  int threads = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--gap", gap, "Target relative integrality gap (0 = exact)");
    cmd->add_option("--timeout", timeout, "Branch-and-bound time limit in seconds (0 = none)");
    cmd->add_option("--node-limit", node_limit, "Branch-and-bound node limit (0 = none)");
    cmd->add_option("--threads", threads, "Worker threads (default LIPCERT_THREADS or 1)");
  }

  SolveOptions options() const {
    if (gap < 0.0) throw InputError("--gap must be >= 0");
    if (timeout < 0.0) throw InputError("--timeout must be >= 0");
    SolveOptions o;
    o.target_gap = gap;
    if (timeout > 0.0) o.timeout_seconds = timeout;
    if (node_limit > 0) o.node_limit = node_limit;
    o.threads = resolve_threads(threads);
    o.deterministic = o.threads == 1;
    o.record_events = false;
    return o;
  }
};

bool stopped_early(const EstimateRecord& r) {
  return r.status && (*r.status == MIPStatus::kTimeout || *r.status == MIPStatus::kNodeLimit);
}

void append_csv(const std::string& path, const std::vector<EstimateRecord>& rows, bool timing) {
  bool need_header = true;
  {
    std::ifstream in(path);
    need_header = !in || in.peek() == std::ifstream::traits_type::eof();
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_estimate_csv(out, rows, need_header, timing);
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lipschitz constant estimation and certification for ReLU networks"};
  app.require_subcommand(1);

  // gen
  std::string arch_s, out_path;
  std::uint64_t seed = 0;
  double bias_std = 0.0;
  auto* gen = app.add_subcommand("gen", "Write a He-initialised random network");
  gen->add_option("--arch", arch_s, "Comma-separated widths, e.g. 4,8,8,1")->required();
  gen->add_option("--seed", seed, "PRNG seed");
  gen->add_option("--bias-std", bias_std, "Standard deviation of the biases (default 0)");
  gen->add_option("--out", out_path, "Output JSON path")->required();

  // estimate / compare / oracle share these
  std::string net_path, domain_s = "cube:0,1", norm_s = "linf", out_norm_s = "l1", method_s,
                        methods_s = "randomlb,lipmip,liplp,fastlip,naiveub", csv_path;
  long long samples = 1000;
  bool no_timing = false;
  SolverFlags solver;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--net", net_path, "Network JSON file")->required();
    cmd->add_option("--domain", domain_s, "cube:c,r | cube:c1,...,cn,r | box:l:u");
    cmd->add_option("--norm", norm_s, "Input norm alpha: linf or l1");
    cmd->add_option("--output-norm", out_norm_s, "Output norm for vector networks: l1, linf, cross");
  };
  auto* est = app.add_subcommand("estimate", "Run one estimator");
  add_common(est);
  est->add_option("--method", method_s, "randomlb, naiveub, fastlip, liplp or lipmip")->required();
  est->add_option("--samples", samples, "RandomLB sample count");
  est->add_option("--seed", seed, "RandomLB seed");
  est->add_option("--out-csv", csv_path, "Append a CSV row to this file");
  est->add_flag("--no-timing", no_timing, "Leave the time_s CSV column empty");
  solver.add(est);

  auto* cmp = app.add_subcommand("compare", "Run several estimators and report relative errors");
  add_common(cmp);
  cmp->add_option("--methods", methods_s, "Comma-separated method names");
  cmp->add_option("--samples", samples, "RandomLB sample count");
  cmp->add_option("--seed", seed, "RandomLB seed");
  cmp->add_option("--out-csv", csv_path, "Write CSV here instead of stdout");
  cmp->add_flag("--no-timing", no_timing, "Leave the time_s CSV column empty");
  solver.add(cmp);

  std::size_t neuron_cap = kDefaultNeuronCap;
  auto* orc = app.add_subcommand("oracle", "Exact value by activation-region enumeration");
  add_common(orc);
  orc->add_option("--neuron-cap", neuron_cap, "Refuse networks with more hidden neurons");

  std::string graph_path;
  bool check = false, l1_variant = false;
  auto* red = app.add_subcommand("reduce", "Maximum independent set gadget network");
  red->add_option("--graph", graph_path, "Graph file ('n m' then 'u v' lines)")->required();
  auto* red_out = red->add_option("--out", out_path, "Write the gadget network JSON");
  auto* red_check = red->add_flag("--check", check, "Compare brute-force MIS against LipMIP");
  red_out->excludes(red_check);
  red->add_flag("--l1", l1_variant, "Use the extra-input variant and the L^1 objective");
  solver.add(red);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (gen->parsed()) {
      const std::vector<int> arch = parse_arch(arch_s);
      if (bias_std < 0.0) throw InputError("--bias-std must be >= 0");
      const ReLUNetwork net = random_he(arch, seed, bias_std);
      save_network(net, out_path);
      std::cout << "wrote " << out_path << " (hidden neurons: " << net.total_neurons() << ")\n";
      for (std::size_t i = 0; i < net.depth(); ++i)
        std::cerr << "layer " << i + 1 << ": " << net.layer(i).weight.rows() << "x"
                  << net.layer(i).weight.cols() << "\n";
      std::cerr << "head: " << net.head().rows() << "x" << net.head().cols() << "\n";
      return kExitOk;
    }

    if (red->parsed()) {
      const Graph g = load_graph(graph_path);
      if (check) {
        const ReductionReport r = verify_reduction(g, solver.options(), l1_variant);
        std::cout << "MIS=" << r.mis << " LipMIP=" << std::fixed << std::setprecision(6)
                  << r.lipmip_value << (r.match ? " MATCH" : " MISMATCH") << "\n";
        if (r.solve.status == MIPStatus::kTimeout || r.solve.status == MIPStatus::kNodeLimit)
          return kExitTimeout;
        return r.match ? kExitOk : 1;
      }
      if (out_path.empty()) throw InputError("reduce needs --out or --check");
      const ReLUNetwork net = l1_variant ? build_mis_network_l1(g) : build_mis_network(g);
      save_network(net, out_path);
      std::cout << "wrote " << out_path << " (inputs: " << net.input_dim()
                << ", hidden neurons: " << net.total_neurons() << ", domain box:-2:2)\n";
      return kExitOk;
    }

    const ReLUNetwork net = load_network(net_path);
    const Hyperbox domain = parse_domain(domain_s, net.input_dim());
    const InputNorm alpha = parse_input_norm(norm_s);
    const OutputNorm beta = parse_output_norm(out_norm_s);

    if (orc->parsed()) {
      OracleOptions o;
      o.neuron_cap = neuron_cap;
      LipschitzQuery q;
      q.input_norm = alpha;
      q.output_norm = beta;
      const OracleResult r = exact_lipschitz_bruteforce(net, domain, q, o);
      std::cout << "value=" << format_value(r.value) << " regions=" << r.regions << "\n";
      return kExitOk;
    }

    EstimatorOptions eo;
    if (samples <= 0) throw InputError("--samples must be positive");
    eo.samples = samples;
    eo.seed = seed;
    eo.output_norm = beta;
    eo.solve = solver.options();

    if (est->parsed()) {
      const EstimateRecord r = estimate(net, domain, alpha, method_s, eo);
      std::cout << "method=" << r.method << " value=" << format_value(r.value)
                << " guarantee=" << to_string(r.guarantee);
      if (r.gap) std::cout << " gap=" << format_value(*r.gap);
      if (r.status) std::cout << " status=" << to_string(*r.status);
      if (!no_timing) std::cout << " time_s=" << format_value(r.wall_time_seconds);
      std::cout << "\n";
      if (!csv_path.empty()) append_csv(csv_path, {r}, !no_timing);
      return stopped_early(r) ? kExitTimeout : kExitOk;
    }

    if (cmp->parsed()) {
      std::vector<Method> methods;
      std::stringstream ss(methods_s);
      std::string tok;
      while (std::getline(ss, tok, ',')) methods.push_back(parse_method(tok));
      if (methods.empty()) throw InputError("--methods is empty");
      const std::vector<EstimateRecord> rows = compare(net, domain, alpha, methods, eo);
      if (csv_path.empty()) {
        write_estimate_csv(std::cout, rows, true, !no_timing);
      } else {
        std::ofstream out(csv_path);
        if (!out) throw InputError("cannot write '" + csv_path + "'");
        write_estimate_csv(out, rows, true, !no_timing);
        std::cout << "wrote " << csv_path << " (" << rows.size() << " rows)\n";
      }
      for (const EstimateRecord& r : rows)
        if (stopped_early(r)) return kExitTimeout;
      return kExitOk;
    }
  } catch (const CapabilityError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitCapability;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
