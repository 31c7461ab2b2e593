#pragma once

#include <vector>

#include "hcn/matkernel.hpp"
#include "hcn/multipoly.hpp"
#include "hcn/network.hpp"
#include "json.hpp"

namespace hcn {

// Vector field on R^{2N} with polynomial components over (q_1..q_N, p_1..p_N).
struct PolyVectorField {
  int dim = 0;
  std::vector<MultiPoly> components;

  static PolyVectorField zero(int dim);
  bool is_zero() const;
  Vector eval(const Vector& point) const;
  PolyVectorField normalized() const;
  std::string key() const;
};

// The generator's fields: L* = a0 + X0 + sum_i Xi^2 with X0 the drift and
// Xi = sqrt(2 T_i) d/dp_i per boundary vertex with positive temperature.
// a0 is the zeroth-order coefficient, tracked but irrelevant to rank.
struct GeneratorFields {
  PolyVectorField drift;                    // X0
  std::vector<PolyVectorField> diffusion;   // X1..Xr
  MultiPoly a0;
};

struct RankReport {
  Vector point;
  int depth = 0;
  int rank = 0;
  int generated = 0;  // fields kept after dedup
  bool full = false;
  bool truncated = false;
  int diffusion_count = 0;  // r; 0 makes the analysis vacuous
};

GeneratorFields generator_fields(const NetworkSpec& spec);

// [X, Y] = (DY)X - (DX)Y by exact polynomial differentiation.
PolyVectorField lie_bracket(const PolyVectorField& X, const PolyVectorField& Y);

// Iteratively brackets the generated family against {X0, X1..Xr}: generation
// 1 is X1..Xr, each further generation brackets the previous one. Exact
// duplicates (up to scale) are pruned by a canonical polynomial key; the
// pointwise rank is used for early termination only, since fields vanishing
// at the point can still contribute rank through later brackets. Generation
// stops at `depth` generations, full rank, or the monomial budget; exceeding
// the budget sets `truncated` and reports the rank of what was generated.
RankReport hormander_rank(const NetworkSpec& spec, const Vector& point,
                          int depth, std::size_t monomial_budget = 200000);

nlohmann::json rank_to_json(const RankReport& report);

}  // namespace hcn
