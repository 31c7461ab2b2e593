#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace hcn {

// Sparse multivariate polynomial: exponent multi-index -> coefficient, with
// zero-coefficient terms pruned. The ordered map keeps terms in a canonical
// order, so equal polynomials have equal representations.
class MultiPoly {
 public:
  using Mono = std::vector<unsigned>;

  explicit MultiPoly(int nvars = 0) : nvars_(nvars) {}
  static MultiPoly constant(int nvars, double c);
  static MultiPoly variable(int nvars, int index);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  int total_degree() const;
  double max_abs_coeff() const;
  const std::map<Mono, double>& terms() const { return terms_; }

  void add_term(const Mono& mono, double coeff);

  MultiPoly operator+(const MultiPoly& other) const;
  MultiPoly operator-(const MultiPoly& other) const;
  MultiPoly operator*(const MultiPoly& other) const;
  MultiPoly operator*(double s) const;

  MultiPoly partial(int var) const;
  double eval(const Eigen::VectorXd& point) const;

  // Scale-canonical form: infinity-norm 1 with the first term positive, so a
  // field and any nonzero multiple of it share a key.
  MultiPoly normalized() const;
  std::string key() const;

  bool operator==(const MultiPoly& other) const = default;

  // Human-readable form with variables q1..qN, p1..pN.
  std::string to_string(int n_particles) const;

 private:
  int nvars_;
  std::map<Mono, double> terms_;
};

}  // namespace hcn
