#include "hcn/multipoly.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "hcn/errors.hpp"

namespace hcn {

MultiPoly MultiPoly::constant(int nvars, double c) {
  MultiPoly p(nvars);
  p.add_term(Mono(nvars, 0), c);
  return p;
}

MultiPoly MultiPoly::variable(int nvars, int index) {
  MultiPoly p(nvars);
  Mono mono(nvars, 0);
  mono[index] = 1;
  p.add_term(mono, 1.0);
  return p;
}

int MultiPoly::total_degree() const {
  int deg = -1;
  for (const auto& [mono, coeff] : terms_) {
    int d = 0;
    for (unsigned e : mono) d += static_cast<int>(e);
    deg = std::max(deg, d);
  }
  return deg;
}

double MultiPoly::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [mono, coeff] : terms_) m = std::max(m, std::abs(coeff));
  return m;
}

void MultiPoly::add_term(const Mono& mono, double coeff) {
  if (coeff == 0.0) return;
  if (static_cast<int>(mono.size()) != nvars_)
    throw PreconditionError("MultiPoly: monomial arity mismatch");
  auto [it, inserted] = terms_.emplace(mono, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

MultiPoly MultiPoly::operator+(const MultiPoly& other) const {
  MultiPoly out = *this;
  for (const auto& [mono, coeff] : other.terms_) out.add_term(mono, coeff);
  return out;
}

MultiPoly MultiPoly::operator-(const MultiPoly& other) const {
  MultiPoly out = *this;
  for (const auto& [mono, coeff] : other.terms_) out.add_term(mono, -coeff);
  return out;
}

MultiPoly MultiPoly::operator*(const MultiPoly& other) const {
  MultiPoly out(nvars_);
  Mono mono(nvars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : other.terms_) {
      for (int i = 0; i < nvars_; ++i) mono[i] = ma[i] + mb[i];
      out.add_term(mono, ca * cb);
    }
  return out;
}

MultiPoly MultiPoly::operator*(double s) const {
  MultiPoly out(nvars_);
  if (s == 0.0) return out;
  for (const auto& [mono, coeff] : terms_) out.add_term(mono, coeff * s);
  return out;
}

MultiPoly MultiPoly::partial(int var) const {
  MultiPoly out(nvars_);
  for (const auto& [mono, coeff] : terms_) {
    if (mono[var] == 0) continue;
    Mono d = mono;
    d[var] -= 1;
    out.add_term(d, coeff * static_cast<double>(mono[var]));
  }
  return out;
}

double MultiPoly::eval(const Eigen::VectorXd& point) const {
  if (point.size() != nvars_)
    throw PreconditionError("MultiPoly::eval: point dimension mismatch");
  double acc = 0.0;
  for (const auto& [mono, coeff] : terms_) {
    double term = coeff;
    for (int i = 0; i < nvars_; ++i)
      for (unsigned e = 0; e < mono[i]; ++e) term *= point(i);
    acc += term;
  }
  return acc;
}

MultiPoly MultiPoly::normalized() const {
  if (terms_.empty()) return *this;
  double scale = max_abs_coeff();
  if (terms_.begin()->second < 0.0) scale = -scale;
  return *this * (1.0 / scale);
}

std::string MultiPoly::key() const {
  std::string out;
  char buf[40];
  for (const auto& [mono, coeff] : terms_) {
    for (unsigned e : mono) {
      std::snprintf(buf, sizeof(buf), "%u.", e);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), ":%a;", coeff);
    out += buf;
  }
  return out;
}

std::string MultiPoly::to_string(int n_particles) const {
  if (terms_.empty()) return "0";
  std::string out;
  char buf[64];
  bool first = true;
  for (const auto& [mono, coeff] : terms_) {
    std::snprintf(buf, sizeof(buf), "%s%.12g", first ? "" : " + ", coeff);
    out += buf;
    first = false;
    for (int i = 0; i < nvars_; ++i) {
      if (mono[i] == 0) continue;
      const bool is_q = i < n_particles;
      const int label = (is_q ? i : i - n_particles) + 1;
      std::snprintf(buf, sizeof(buf), "*%s%d", is_q ? "q" : "p", label);
      out += buf;
      if (mono[i] > 1) {
        std::snprintf(buf, sizeof(buf), "^%u", mono[i]);
        out += buf;
      }
    }
  }
  return out;
}

}  // namespace hcn
