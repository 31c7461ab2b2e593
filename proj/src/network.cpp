#include "hcn/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "hcn/errors.hpp"
#include "json.hpp"

namespace hcn {

namespace {

bool coeffs_are_harmonic(const Polynomial& p) {
  const auto& c = p.coeffs();
  return c.size() == 3 && c[0] == 0.0 && c[1] == 0.0 &&
         std::abs(c[2] - 0.5) <= 1e-12;
}

std::vector<int> parse_vertex_list(const nlohmann::json& arr, int n,
                                   const char* key) {
  if (!arr.is_array())
    throw SpecError(std::string(key) + ": expected an array of vertex labels");
  std::vector<int> out;
  for (const auto& v : arr) {
    if (!v.is_number_integer())
      throw SpecError(std::string(key) + ": vertex labels must be integers");
    const int label = v.get<int>();
    if (label < 1 || label > n)
      throw SpecError(std::string(key) + ": vertex " + std::to_string(label) +
                      " out of range 1.." + std::to_string(n));
    out.push_back(label - 1);
  }
  return out;
}

Polynomial parse_potential(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains("coeffs") || !obj["coeffs"].is_array())
    throw SpecError(std::string(key) +
                    ": expected an object with a \"coeffs\" array");
  std::vector<double> coeffs;
  for (const auto& c : obj["coeffs"]) {
    if (!c.is_number())
      throw SpecError(std::string(key) + ": coefficients must be numbers");
    coeffs.push_back(c.get<double>());
  }
  return Polynomial(std::move(coeffs));
}

}  // namespace

bool NetworkSpec::is_harmonic() const {
  return coeffs_are_harmonic(pinning) && coeffs_are_harmonic(interaction);
}

std::vector<std::vector<int>> NetworkSpec::adjacency_lists() const {
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  return adj;
}

void validate_network(const NetworkSpec& spec) {
  if (spec.n < 1) throw SpecError("n: vertex count must be >= 1");

  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : spec.edges) {
    if (i < 0 || i >= spec.n || j < 0 || j >= spec.n)
      throw SpecError("edges: endpoint out of range");
    if (i == j) throw SpecError("edges: self-loops are not allowed");
    auto canon = std::minmax(i, j);
    if (!seen.insert(canon).second)
      throw SpecError("edges: duplicate edge " + std::to_string(canon.first + 1) +
                      "-" + std::to_string(canon.second + 1));
  }

  // Connectivity by BFS from vertex 0.
  const auto adj = spec.adjacency_lists();
  std::vector<char> visited(spec.n, 0);
  std::vector<int> queue = {0};
  visited[0] = 1;
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    for (int w : adj[v])
      if (!visited[w]) {
        visited[w] = 1;
        queue.push_back(w);
      }
  }
  if (std::count(visited.begin(), visited.end(), 1) != spec.n)
    throw SpecError("edges: graph is not connected");

  if (spec.boundary.empty())
    throw SpecError("boundary: boundary set must be non-empty");
  for (int i : spec.damped)
    if (i < 0 || i >= spec.n) throw SpecError("damped: vertex out of range");
  for (int i : spec.boundary) {
    if (i < 0 || i >= spec.n) throw SpecError("boundary: vertex out of range");
    if (!spec.is_damped(i))
      throw SpecError("boundary: vertex " + std::to_string(i + 1) +
                      " is not in the damped set");
  }

  for (const auto& [i, t] : spec.temperatures) {
    if (!spec.is_boundary(i))
      throw SpecError("temperatures: vertex " + std::to_string(i + 1) +
                      " is not in the boundary set");
    if (!(t >= 0.0))
      throw SpecError("temperatures: T_" + std::to_string(i + 1) +
                      " must be >= 0");
  }

  validate_potential(spec.pinning, "pinning");
  validate_potential(spec.interaction, "interaction");
}

NetworkSpec parse_network(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(std::string("syntax error: ") + e.what());
  }
  if (!doc.is_object()) throw SpecError("document root must be an object");
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    throw SpecError("n: missing or not an integer");

  NetworkSpec spec;
  spec.n = doc["n"].get<int>();
  if (spec.n < 1) throw SpecError("n: vertex count must be >= 1");

  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) throw SpecError("edges: expected an array");
    for (const auto& e : doc["edges"]) {
      if (!e.is_array() || e.size() != 2)
        throw SpecError("edges: each edge must be a pair [i, j]");
      const auto endpoints = parse_vertex_list(e, spec.n, "edges");
      auto canon = std::minmax(endpoints[0], endpoints[1]);
      spec.edges.emplace_back(canon.first, canon.second);
    }
    std::sort(spec.edges.begin(), spec.edges.end());
  }

  if (!doc.contains("damped")) throw SpecError("damped: missing");
  for (int i : parse_vertex_list(doc["damped"], spec.n, "damped"))
    spec.damped.insert(i);
  if (!doc.contains("boundary")) throw SpecError("boundary: missing");
  for (int i : parse_vertex_list(doc["boundary"], spec.n, "boundary"))
    spec.boundary.insert(i);

  if (doc.contains("temperatures")) {
    if (!doc["temperatures"].is_object())
      throw SpecError("temperatures: expected an object vertex -> T");
    for (const auto& [key, val] : doc["temperatures"].items()) {
      int label = 0;
      try {
        label = std::stoi(key);
      } catch (...) {
        throw SpecError("temperatures: key \"" + key +
                        "\" is not a vertex label");
      }
      if (label < 1 || label > spec.n)
        throw SpecError("temperatures: vertex " + std::to_string(label) +
                        " out of range");
      if (!val.is_number())
        throw SpecError("temperatures: T_" + std::to_string(label) +
                        " must be a number");
      spec.temperatures[label - 1] = val.get<double>();
    }
  }

  const bool harmonic_flag =
      doc.contains("harmonic") && doc["harmonic"].is_boolean() &&
      doc["harmonic"].get<bool>();
  if (harmonic_flag) {
    spec.pinning = Polynomial::harmonic();
    spec.interaction = Polynomial::harmonic();
    for (const char* key : {"pinning", "interaction"}) {
      if (doc.contains(key) && !coeffs_are_harmonic(parse_potential(doc[key], key)))
        throw SpecError(std::string(key) +
                        ": conflicts with \"harmonic\": true");
    }
  } else {
    if (!doc.contains("pinning")) throw SpecError("pinning: missing");
    if (!doc.contains("interaction")) throw SpecError("interaction: missing");
    spec.pinning = parse_potential(doc["pinning"], "pinning");
    spec.interaction = parse_potential(doc["interaction"], "interaction");
  }

  validate_network(spec);
  return spec;
}

NetworkSpec parse_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open network file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string serialize_network(const NetworkSpec& spec) {
  nlohmann::json doc;
  doc["n"] = spec.n;
  auto edges = nlohmann::json::array();
  for (const auto& [i, j] : spec.edges)
    edges.push_back(nlohmann::json::array({i + 1, j + 1}));
  doc["edges"] = edges;
  auto damped = nlohmann::json::array();
  for (int i : spec.damped) damped.push_back(i + 1);
  doc["damped"] = damped;
  auto boundary = nlohmann::json::array();
  for (int i : spec.boundary) boundary.push_back(i + 1);
  doc["boundary"] = boundary;
  auto temps = nlohmann::json::object();
  for (const auto& [i, t] : spec.temperatures) temps[std::to_string(i + 1)] = t;
  doc["temperatures"] = temps;
  doc["pinning"] = {{"coeffs", spec.pinning.coeffs()}};
  doc["interaction"] = {{"coeffs", spec.interaction.coeffs()}};
  return doc.dump(2);
}

GraphMatrices graph_matrices(const NetworkSpec& spec) {
  const int n = spec.n;
  GraphMatrices g;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : spec.edges) {
    g.adjacency(i, j) = 1.0;
    g.adjacency(j, i) = 1.0;
  }
  g.degree = g.adjacency.rowwise().sum().asDiagonal();
  g.laplacian = g.degree - g.adjacency;
  g.gamma = Eigen::MatrixXd::Identity(n, n) + g.laplacian;
  return g;
}

}  // namespace hcn
