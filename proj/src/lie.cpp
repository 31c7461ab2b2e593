#include "hcn/lie.hpp"

#include <cmath>
#include <unordered_set>

#include "hcn/errors.hpp"

namespace hcn {

namespace {

// U(inner) for univariate U and polynomial inner, by Horner's scheme.
MultiPoly compose(const Polynomial& u, const MultiPoly& inner) {
  const auto& c = u.coeffs();
  MultiPoly acc(inner.nvars());
  for (auto it = c.rbegin(); it != c.rend(); ++it)
    acc = acc * inner + MultiPoly::constant(inner.nvars(), *it);
  return acc;
}

}  // namespace

PolyVectorField PolyVectorField::zero(int dim) {
  PolyVectorField f;
  f.dim = dim;
  f.components.assign(dim, MultiPoly(dim));
  return f;
}

bool PolyVectorField::is_zero() const {
  for (const auto& c : components)
    if (!c.is_zero()) return false;
  return true;
}

Vector PolyVectorField::eval(const Vector& point) const {
  Vector out(dim);
  for (int i = 0; i < dim; ++i) out(i) = components[i].eval(point);
  return out;
}

PolyVectorField PolyVectorField::normalized() const {
  double scale = 0.0;
  for (const auto& c : components) scale = std::max(scale, c.max_abs_coeff());
  if (scale == 0.0) return *this;
  for (const auto& c : components) {
    if (c.is_zero()) continue;
    if (c.terms().begin()->second < 0.0) scale = -scale;
    break;
  }
  PolyVectorField out;
  out.dim = dim;
  for (const auto& c : components) out.components.push_back(c * (1.0 / scale));
  return out;
}

std::string PolyVectorField::key() const {
  std::string out;
  for (const auto& c : components) {
    out += c.key();
    out += '|';
  }
  return out;
}

GeneratorFields generator_fields(const NetworkSpec& spec) {
  const int n = spec.n;
  const int dim = 2 * n;
  const Polynomial dV = spec.pinning.derivative();
  const Polynomial dU = spec.interaction.derivative();

  GeneratorFields gen;
  gen.drift = PolyVectorField::zero(dim);
  for (int i = 0; i < n; ++i)
    gen.drift.components[i] = MultiPoly::variable(dim, n + i);

  for (int i = 0; i < n; ++i) {
    const MultiPoly qi = MultiPoly::variable(dim, i);
    MultiPoly force = compose(dV, qi) * -1.0;
    gen.drift.components[n + i] = force;
  }
  for (const auto& [i, j] : spec.edges) {
    const MultiPoly diff =
        MultiPoly::variable(dim, i) - MultiPoly::variable(dim, j);
    const MultiPoly f =
        (compose(dU, diff) - compose(dU, diff * -1.0)) * 0.5;
    gen.drift.components[n + i] = gen.drift.components[n + i] - f;
    gen.drift.components[n + j] = gen.drift.components[n + j] + f;
  }
  for (int i : spec.damped)
    gen.drift.components[n + i] =
        gen.drift.components[n + i] - MultiPoly::variable(dim, n + i);

  for (int i : spec.boundary) {
    const double t = spec.temperature(i);
    if (t <= 0.0) continue;
    PolyVectorField field = PolyVectorField::zero(dim);
    field.components[n + i] = MultiPoly::constant(dim, std::sqrt(2.0 * t));
    gen.diffusion.push_back(std::move(field));
  }

  gen.a0 = MultiPoly::constant(dim, static_cast<double>(spec.damped.size()));
  return gen;
}

PolyVectorField lie_bracket(const PolyVectorField& X, const PolyVectorField& Y) {
  if (X.dim != Y.dim)
    throw PreconditionError("lie_bracket: dimension mismatch");
  const int dim = X.dim;
  PolyVectorField out = PolyVectorField::zero(dim);
  for (int k = 0; k < dim; ++k) {
    MultiPoly acc(dim);
    for (int j = 0; j < dim; ++j) {
      if (!X.components[j].is_zero()) {
        const MultiPoly dyk = Y.components[k].partial(j);
        if (!dyk.is_zero()) acc = acc + X.components[j] * dyk;
      }
      if (!Y.components[j].is_zero()) {
        const MultiPoly dxk = X.components[k].partial(j);
        if (!dxk.is_zero()) acc = acc - Y.components[j] * dxk;
      }
    }
    out.components[k] = std::move(acc);
  }
  return out;
}

RankReport hormander_rank(const NetworkSpec& spec, const Vector& point,
                          int depth, std::size_t monomial_budget) {
  if (depth < 1) throw PreconditionError("hormander_rank: depth must be >= 1");
  const int dim = 2 * spec.n;
  if (point.size() != dim)
    throw PreconditionError("hormander_rank: point dimension mismatch");

  const GeneratorFields gen = generator_fields(spec);
  RankReport report;
  report.point = point;
  report.depth = depth;
  report.diffusion_count = static_cast<int>(gen.diffusion.size());
  if (gen.diffusion.empty()) return report;  // vacuous: no noise directions

  std::vector<PolyVectorField> brackets_with;  // {X0, X1..Xr}
  brackets_with.push_back(gen.drift);
  for (const auto& f : gen.diffusion) brackets_with.push_back(f);

  std::vector<PolyVectorField> generated;
  std::unordered_set<std::string> seen;
  std::size_t monomials = 0;
  for (const auto& f : gen.diffusion) {
    PolyVectorField nf = f.normalized();
    seen.insert(nf.key());
    for (const auto& c : nf.components) monomials += c.term_count();
    generated.push_back(std::move(nf));
  }

  const auto rank_of = [&](const std::vector<PolyVectorField>& fields) {
    Matrix evals(dim, static_cast<int>(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i)
      evals.col(static_cast<int>(i)) = fields[i].eval(point);
    return numerical_rank(evals);
  };

  report.rank = rank_of(generated);
  std::size_t frontier_begin = 0;

  for (int generation = 2; generation <= depth && report.rank < dim; ++generation) {
    const std::size_t frontier_end = generated.size();
    if (frontier_begin == frontier_end) break;  // nothing new last round
    for (std::size_t f = frontier_begin; f < frontier_end && !report.truncated;
         ++f) {
      for (const auto& g : brackets_with) {
        PolyVectorField b = lie_bracket(generated[f], g);
        if (b.is_zero()) continue;
        b = b.normalized();
        if (!seen.insert(b.key()).second) continue;
        std::size_t count = 0;
        for (const auto& c : b.components) count += c.term_count();
        if (monomials + count > monomial_budget) {
          report.truncated = true;
          break;
        }
        monomials += count;
        generated.push_back(std::move(b));
      }
    }
    frontier_begin = frontier_end;
    report.rank = rank_of(generated);
    if (report.truncated) break;
  }

  report.generated = static_cast<int>(generated.size());
  report.full = report.rank == dim;
  return report;
}

nlohmann::json rank_to_json(const RankReport& report) {
  std::vector<double> pt(report.point.data(),
                         report.point.data() + report.point.size());
  return {{"point", pt},          {"depth", report.depth},
          {"rank", report.rank},  {"full", report.full},
          {"truncated", report.truncated},
          {"generated", report.generated},
          {"diffusion_count", report.diffusion_count}};
}

}  // namespace hcn
