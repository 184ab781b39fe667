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

#ifndef LIPCERT_NETWORK_IO_HPP_
#define LIPCERT_NETWORK_IO_HPP_

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lipcert/network.hpp"

namespace lipcert {

// Network file (format_version 1):
//   {"format_version":1, "arch":[n_0,...,n_d,m],
//    "weights":[W_1 rows..., ...], "biases":[b_1, ...], "head":[rows...]}
// Matrices are lists of rows. Numbers use the shortest decimal form that
// round-trips to the same double.

inline constexpr int kNetworkFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline double json_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite number");
  return v;
}

inline Matrix json_matrix(const nlohmann::json& j, int rows, int cols,
                          const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of rows");
  if (static_cast<int>(j.size()) != rows)
    throw ParseError(where + ": expected " + std::to_string(rows) + " rows, got " +
                     std::to_string(j.size()));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array()) throw ParseError(rw + ": expected a row list");
    if (static_cast<int>(row.size()) != cols)
      throw ParseError(rw + ": expected " + std::to_string(cols) + " entries, got " +
                       std::to_string(row.size()));
    for (int c = 0; c < cols; ++c)
      m(r, c) = json_number(row[static_cast<std::size_t>(c)],
                            rw + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline Vector json_vector(const nlohmann::json& j, int n, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list");
  if (static_cast<int>(j.size()) != n)
    throw ParseError(where + ": expected " + std::to_string(n) + " entries, got " +
                     std::to_string(j.size()));
  Vector v(n);
  for (int i = 0; i < n; ++i)
    v(i) = json_number(j[static_cast<std::size_t>(i)],
                       where + "[" + std::to_string(i) + "]");
  return v;
}

inline const nlohmann::json& field(const nlohmann::json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

}  // namespace detail

inline std::string to_json_string(const ReLUNetwork& net) {
  nlohmann::json doc;
  doc["format_version"] = kNetworkFormatVersion;
  doc["arch"] = net.arch();
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const Layer& l : net.layers()) {
    weights.push_back(detail::matrix_to_json(l.weight));
    biases.push_back(detail::vector_to_json(l.bias));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  doc["head"] = detail::matrix_to_json(net.head());
  return doc.dump() + "\n";
}

inline ReLUNetwork network_from_json_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("network file: invalid JSON at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("network file: top level must be an object");
  const auto& version = detail::field(doc, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kNetworkFormatVersion)
    throw ParseError("format_version: expected " + std::to_string(kNetworkFormatVersion));

  const auto& arch_j = detail::field(doc, "arch");
  if (!arch_j.is_array() || arch_j.size() < 3)
    throw ParseError("arch: expected a list of at least 3 sizes");
  std::vector<int> arch;
  for (std::size_t i = 0; i < arch_j.size(); ++i) {
    if (!arch_j[i].is_number_integer() || arch_j[i].get<int>() < 1)
      throw ParseError("arch[" + std::to_string(i) + "]: expected a positive integer");
    arch.push_back(arch_j[i].get<int>());
  }
  const std::size_t depth = arch.size() - 2;

  const auto& weights = detail::field(doc, "weights");
  const auto& biases = detail::field(doc, "biases");
  if (!weights.is_array() || weights.size() != depth)
    throw ParseError("weights: expected " + std::to_string(depth) + " matrices");
  if (!biases.is_array() || biases.size() != depth)
    throw ParseError("biases: expected " + std::to_string(depth) + " vectors");

  std::vector<Layer> layers;
  for (std::size_t i = 0; i < depth; ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    Layer l{detail::json_matrix(weights[i], arch[i + 1], arch[i], "weights" + idx),
            detail::json_vector(biases[i], arch[i + 1], "biases" + idx)};
    layers.push_back(std::move(l));
  }
  Matrix head = detail::json_matrix(detail::field(doc, "head"), arch.back(),
                                    arch[arch.size() - 2], "head");
  return ReLUNetwork(std::move(layers), std::move(head));
}

inline void save_network(const ReLUNetwork& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << to_json_string(net);
  if (!out) throw InputError("write to '" + path + "' failed");
}

inline ReLUNetwork load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open network file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return network_from_json_string(ss.str());
}

}  // namespace lipcert

#endif  // LIPCERT_NETWORK_IO_HPP_
