#include "hcn/matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "hcn/errors.hpp"

namespace hcn {

double rank_eps_factor() {
  if (const char* env = std::getenv("HCN_RANK_EPS")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return 1e-10;
}

double rank_tolerance(int n, double smax) {
  return rank_eps_factor() * static_cast<double>(n) * smax;
}

int numerical_rank(const Matrix& A, double eps_factor) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double factor = eps_factor > 0.0 ? eps_factor : rank_eps_factor();
  const int n = static_cast<int>(std::max(A.rows(), A.cols()));
  const double tol = factor * n * s(0);
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return rank;
}

SubspaceBasis krylov_span(const Matrix& M, const std::vector<Vector>& seeds,
                          double tol) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n) throw PreconditionError("krylov_span: M must be square");
  if (seeds.empty()) throw PreconditionError("krylov_span: no seeds given");

  Matrix cols(n, n * static_cast<int>(seeds.size()));
  int used = 0;
  for (const auto& seed : seeds) {
    if (seed.size() != n)
      throw PreconditionError("krylov_span: seed dimension mismatch");
    const double norm = seed.norm();
    if (norm == 0.0) throw PreconditionError("krylov_span: zero seed");
    Vector v = seed / norm;
    for (int k = 0; k < n; ++k) {
      cols.col(used++) = v;
      v = M * v;
      const double vn = v.norm();
      if (vn < 1e-300) break;
      v /= vn;
    }
  }

  Eigen::JacobiSVD<Matrix> svd(cols.leftCols(used), Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double factor = tol > 0.0 ? tol : rank_eps_factor();
  const double threshold = factor * std::max(n, used) * (s.size() ? s(0) : 0.0);
  int dim = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++dim;

  SubspaceBasis out;
  out.ambient = n;
  out.dim = dim;
  out.tol = threshold;
  out.basis = svd.matrixU().leftCols(dim);
  return out;
}

Spectrum spectrum(const Matrix& M) {
  if (M.rows() != M.cols())
    throw PreconditionError("spectrum: matrix must be square");
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalError("spectrum: QR iteration did not converge");
  Spectrum sp;
  sp.eigenvalues = es.eigenvalues();
  sp.abscissa = sp.eigenvalues.real().maxCoeff();
  return sp;
}

namespace {

// Bartels-Stewart through the complex Schur form: with M = U T U*, the
// transformed unknown Y = U* Q U satisfies T Y + Y T* = -U* C U, solved
// entry-wise against the strictly negative denominators T_ii + conj(T_jj).
Matrix lyapunov_schur(const Matrix& M, const Matrix& C) {
  using CMat = Eigen::MatrixXcd;
  const int n = static_cast<int>(M.rows());
  Eigen::ComplexSchur<Matrix> schur(M);
  if (schur.info() != Eigen::Success)
    throw NumericalError("solve_lyapunov: Schur decomposition failed");
  const CMat U = schur.matrixU();
  const CMat T = schur.matrixT();
  CMat Ct = U.adjoint() * (-C.cast<std::complex<double>>()) * U;
  CMat Y = CMat::Zero(n, n);
  for (int j = n - 1; j >= 0; --j) {
    for (int i = n - 1; i >= 0; --i) {
      std::complex<double> rhs = Ct(i, j);
      for (int k = i + 1; k < n; ++k) rhs -= T(i, k) * Y(k, j);
      for (int k = j + 1; k < n; ++k) rhs -= Y(i, k) * std::conj(T(j, k));
      const std::complex<double> denom = T(i, i) + std::conj(T(j, j));
      if (std::abs(denom) < 1e-14)
        throw NumericalError(
            "solve_lyapunov: eigenvalue pair on the imaginary axis");
      Y(i, j) = rhs / denom;
    }
  }
  return (U * Y * U.adjoint()).real();
}

Matrix lyapunov_kron(const Matrix& M, const Matrix& C) {
  const int n = static_cast<int>(M.rows());
  Matrix A = Matrix::Zero(n * n, n * n);
  // vec(MQ) = (I kron M) vec(Q); vec(Q M^T) = (M kron I) vec(Q).
  for (int j = 0; j < n; ++j)
    A.block(j * n, j * n, n, n) += M;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      if (M(j, l) != 0.0)
        A.block(j * n, l * n, n, n) +=
            M(j, l) * Matrix::Identity(n, n);
  Vector rhs(n * n);
  for (int j = 0; j < n; ++j) rhs.segment(j * n, n) = -C.col(j);
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible())
    throw NumericalError(
        "solve_lyapunov: singular system (eigenvalue pair on the imaginary "
        "axis)");
  const Vector q = lu.solve(rhs);
  Matrix Q(n, n);
  for (int j = 0; j < n; ++j) Q.col(j) = q.segment(j * n, n);
  return Q;
}

}  // namespace

double lyapunov_residual(const Matrix& M, const Matrix& C, const Matrix& Q) {
  return (M * Q + Q * M.transpose() + C).norm();
}

Matrix solve_lyapunov(const Matrix& M, const Matrix& C) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || C.rows() != n || C.cols() != n)
    throw PreconditionError("solve_lyapunov: dimension mismatch");
  if ((C - C.transpose()).norm() > 1e-10 * std::max(1.0, C.norm()))
    throw PreconditionError("solve_lyapunov: C must be symmetric");
  const Spectrum sp = spectrum(M);
  if (sp.abscissa >= -1e-12)
    throw PreconditionError(
        "solve_lyapunov: M is not stable (abscissa = " +
        std::to_string(sp.abscissa) + "); the solution integral diverges");

  Matrix Q = n <= 40 ? lyapunov_kron(M, C) : lyapunov_schur(M, C);
  Q = 0.5 * (Q + Q.transpose()).eval();

  const double bound = 1e-10 * (M.norm() * Q.norm() + C.norm());
  const double res = lyapunov_residual(M, C, Q);
  if (res > bound)
    throw NumericalError("solve_lyapunov: residual " + std::to_string(res) +
                         " exceeds bound " + std::to_string(bound));
  return Q;
}

Matrix propagate_covariance(const Matrix& M, const Matrix& sigma,
                            const Matrix& K0, double t, double dt) {
  const int n = static_cast<int>(M.rows());
  if (sigma.rows() != n || K0.rows() != n || K0.cols() != n)
    throw PreconditionError("propagate_covariance: dimension mismatch");
  if (dt <= 0.0) throw PreconditionError("propagate_covariance: dt must be > 0");
  const Matrix D = sigma * sigma.transpose();
  const auto f = [&](const Matrix& K) -> Matrix {
    return D + M * K + K * M.transpose();
  };
  Matrix K = K0;
  double remaining = t;
  while (remaining > 0.0) {
    const double h = std::min(dt, remaining);
    const Matrix k1 = f(K);
    const Matrix k2 = f(K + 0.5 * h * k1);
    const Matrix k3 = f(K + 0.5 * h * k2);
    const Matrix k4 = f(K + h * k3);
    K += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    K = 0.5 * (K + K.transpose()).eval();
    remaining -= h;
  }
  return K;
}

Matrix propagate_covariance_exact(const Matrix& M, const Matrix& sigma,
                                  const Matrix& K0, double t) {
  const int n = static_cast<int>(M.rows());
  if (t < 0.0) throw PreconditionError("propagate_covariance_exact: t >= 0");
  if (t == 0.0) return K0;
  // Van Loan block: exp([[ -M, D ], [ 0, M^T ]] t) has e^{M^T t} bottom-right
  // and G with int_0^t e^{Ms} D e^{M^T s} ds = (e^{M^T t})^T G top-right.
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -M;
  block.topRightCorner(n, n) = sigma * sigma.transpose();
  block.bottomRightCorner(n, n) = M.transpose();
  const Matrix E = matrix_exp(block, t);
  const Matrix expMt = E.bottomRightCorner(n, n).transpose();  // e^{Mt}
  const Matrix G = expMt * E.topRightCorner(n, n);
  Matrix K = expMt * K0 * expMt.transpose() + G;
  return 0.5 * (K + K.transpose()).eval();
}

Matrix matrix_exp(const Matrix& M, double t) {
  if (M.rows() != M.cols())
    throw PreconditionError("matrix_exp: matrix must be square");
  const Matrix E = (M * t).exp();
  if (!E.allFinite())
    throw NumericalError("matrix_exp: overflow for |Mt| = " +
                         std::to_string((M * t).norm()));
  return E;
}

}  // namespace hcn
