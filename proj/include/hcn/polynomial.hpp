#pragma once

#include <complex>
#include <vector>

namespace hcn {

// Univariate real polynomial, constant term first. Trailing zero coefficients
// are trimmed on construction; the zero polynomial has degree -1.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  // q^2 / 2, the harmonic well.
  static Polynomial harmonic();

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double leading_coeff() const;
  const std::vector<double>& coeffs() const { return coeffs_; }

  double operator()(double q) const;
  Polynomial derivative() const;

  bool operator==(const Polynomial&) const = default;

 private:
  std::vector<double> coeffs_;
};

// All complex roots via companion-matrix eigenvalues. Requires degree >= 1.
std::vector<std::complex<double>> polynomial_roots(const Polynomial& p);

// True iff p'' >= 0 on all of R, i.e. every real root of p'' has even
// multiplicity. Decided at the critical points of p'' (companion-matrix
// eigenvalues of p'''): an even-degree p'' with positive leading coefficient
// is nonnegative exactly when its value at every critical point clears
// -tol * scale. Evaluating there instead of classifying root multiplicities
// keeps double roots (which eigensolvers split by ~sqrt(eps)) from being
// miscounted.
bool second_derivative_nonnegative(const Polynomial& p, double tol = 1e-9);

// Convexity prerequisites for a pinning/interaction potential: degree >= 2 and
// even, positive leading coefficient, nonnegative second derivative. Throws
// SpecError naming the violated requirement; `name` labels the offender.
void validate_potential(const Polynomial& p, const char* name);

}  // namespace hcn
