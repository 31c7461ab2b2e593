#pragma once

#include <Eigen/Dense>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hcn/polynomial.hpp"

namespace hcn {

// A heat conduction network: particles on the vertices of a connected graph,
// a damped subset, and a boundary subset driven by heat baths. Vertices are
// 0-based here; document files use 1-based labels.
struct NetworkSpec {
  int n = 0;                               // vertex count N
  std::vector<std::pair<int, int>> edges;  // i < j, sorted, unique
  std::set<int> damped;                    // the damped set
  std::set<int> boundary;                  // boundary subset of damped
  std::map<int, double> temperatures;      // boundary vertex -> T_i >= 0
  Polynomial pinning;                      // V
  Polynomial interaction;                  // U

  bool is_damped(int i) const { return damped.count(i) != 0; }
  bool is_boundary(int i) const { return boundary.count(i) != 0; }

  // Damped non-boundary vertices carry an implicit null temperature, as do
  // boundary vertices with no explicit entry.
  double temperature(int i) const {
    auto it = temperatures.find(i);
    return it == temperatures.end() ? 0.0 : it->second;
  }

  bool is_harmonic() const;
  std::vector<std::vector<int>> adjacency_lists() const;

  bool operator==(const NetworkSpec&) const = default;
};

// Adjacency, degree, graph Laplacian and the pinned Laplacian of the network.
struct GraphMatrices {
  Eigen::MatrixXd adjacency;  // 0/1 symmetric, zero diagonal
  Eigen::MatrixXd degree;     // diagonal
  Eigen::MatrixXd laplacian;  // degree - adjacency
  Eigen::MatrixXd gamma;      // I + laplacian, positive definite
};

// Checks every structural invariant (vertex ranges, no self-loops or duplicate
// edges, connectivity, boundary within damped, nonnegative temperatures,
// convex potentials). Throws SpecError naming the violation.
void validate_network(const NetworkSpec& spec);

// Parses a JSON network document. Keys: n, edges, damped, boundary,
// temperatures, pinning, interaction; "harmonic": true is shorthand for
// U = V = q^2/2. Throws SpecError on syntax errors (with position) and on
// invariant violations.
NetworkSpec parse_network(const std::string& text);
NetworkSpec parse_network_file(const std::string& path);

// Serializes to the same document format; parse(serialize(s)) == s.
std::string serialize_network(const NetworkSpec& spec);

GraphMatrices graph_matrices(const NetworkSpec& spec);

}  // namespace hcn
