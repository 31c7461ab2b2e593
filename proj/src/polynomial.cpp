#include "hcn/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "hcn/errors.hpp"

namespace hcn {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

Polynomial Polynomial::harmonic() { return Polynomial({0.0, 0.0, 0.5}); }

double Polynomial::leading_coeff() const {
  return coeffs_.empty() ? 0.0 : coeffs_.back();
}

double Polynomial::operator()(double q) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * q + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial();
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k)
    d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

std::vector<std::complex<double>> polynomial_roots(const Polynomial& p) {
  const int d = p.degree();
  if (d < 1) throw PreconditionError("polynomial_roots: degree must be >= 1");
  const auto& c = p.coeffs();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[i] / c[d];
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalError("polynomial_roots: eigensolver did not converge");
  std::vector<std::complex<double>> roots(d);
  for (int i = 0; i < d; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

bool second_derivative_nonnegative(const Polynomial& p, double tol) {
  const Polynomial pp = p.derivative().derivative();
  double scale = 1.0;
  for (double c : pp.coeffs()) scale = std::max(scale, std::abs(c));

  if (pp.degree() <= 0) return pp(0.0) >= -tol * scale;
  if (pp.degree() % 2 != 0 || pp.leading_coeff() <= 0.0) return false;

  // Global minimum of an even-degree polynomial with positive leading
  // coefficient sits at a critical point.
  for (const auto& root : polynomial_roots(pp.derivative())) {
    if (pp(root.real()) < -tol * scale) return false;
  }
  return true;
}

void validate_potential(const Polynomial& p, const char* name) {
  const std::string label(name);
  if (p.degree() < 2)
    throw SpecError(label + ": potential degree must be >= 2, got " +
                    std::to_string(p.degree()));
  if (p.degree() % 2 != 0)
    throw SpecError(label + ": potential degree must be even, got " +
                    std::to_string(p.degree()));
  if (p.leading_coeff() <= 0.0)
    throw SpecError(label + ": leading coefficient must be positive");
  if (!second_derivative_nonnegative(p))
    throw SpecError(label + ": potential is not convex (second derivative "
                            "takes negative values)");
}

}  // namespace hcn
