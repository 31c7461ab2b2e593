#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hcn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Orthonormal basis of a subspace of R^n.
struct SubspaceBasis {
  int ambient = 0;
  Matrix basis;       // ambient x dim, orthonormal columns
  int dim = 0;
  double tol = 0.0;   // singular-value threshold actually used
};

struct Spectrum {
  Eigen::VectorXcd eigenvalues;
  double abscissa = 0.0;  // max real part
};

// Scale-invariant rank threshold: eps * n * smax. The eps factor defaults to
// 1e-10 and can be overridden through the HCN_RANK_EPS environment variable.
double rank_eps_factor();
double rank_tolerance(int n, double smax);

// Numerical rank of A under the global eps policy (or an explicit factor).
int numerical_rank(const Matrix& A, double eps_factor = -1.0);

// Orthonormal basis of span{M^k s : s in seeds, 0 <= k <= n-1}. Krylov depth
// is capped at n-1 (Cayley-Hamilton: higher powers add nothing). Each Krylov
// vector is normalized before the next multiply so the assembled matrix stays
// well scaled; rank is then decided by SVD under the eps policy, which makes
// the dimension independent of seed ordering. tol <= 0 selects the global
// eps factor.
SubspaceBasis krylov_span(const Matrix& M, const std::vector<Vector>& seeds,
                          double tol = -1.0);

// All eigenvalues of a square real matrix (dense QR iteration) plus the
// spectral abscissa. Throws NumericalError if the iteration fails.
Spectrum spectrum(const Matrix& M);

// Solves MQ + QM^T = -C for symmetric PSD C and stable M (abscissa < 0;
// refused otherwise since the defining integral diverges). Dense vectorized
// (Kronecker) solve up to n = 40, complex-Schur Bartels-Stewart beyond.
// The residual is checked against 1e-10 * (|M|_F |Q|_F + |C|_F).
Matrix solve_lyapunov(const Matrix& M, const Matrix& C);

// Frobenius norm of M Q + Q M^T + C.
double lyapunov_residual(const Matrix& M, const Matrix& C, const Matrix& Q);

// Integrates dK/dt = sigma sigma^T + M K + K M^T from K0 over [0, t] with the
// classical 4th-order one-step method, symmetrizing each step.
Matrix propagate_covariance(const Matrix& M, const Matrix& sigma,
                            const Matrix& K0, double t, double dt);

// Same propagation in closed form: K_t = e^{Mt} K0 e^{M^T t} + G_t where
// G_t = int_0^t e^{Ms} sigma sigma^T e^{M^T s} ds comes from the Van Loan
// block-exponential construction.
Matrix propagate_covariance_exact(const Matrix& M, const Matrix& sigma,
                                  const Matrix& K0, double t);

// e^{Mt} by scaling-and-squaring with a Pade core. Throws NumericalError if
// the result overflows.
Matrix matrix_exp(const Matrix& M, double t);

}  // namespace hcn
