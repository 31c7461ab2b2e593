#include "hcn/harmonic.hpp"

#include <cmath>
#include <string>

#include "hcn/errors.hpp"

namespace hcn {

namespace {

void require_harmonic(const NetworkSpec& spec, const char* op) {
  if (!spec.is_harmonic())
    throw PreconditionError(std::string(op) +
                            ": requires harmonic potentials (U = V = q^2/2)");
}

std::vector<Vector> momentum_seeds(const std::set<int>& vertices, int n) {
  std::vector<Vector> seeds;
  for (int i : vertices) {
    Vector e = Vector::Zero(2 * n);
    e(n + i) = 1.0;
    seeds.push_back(e);
  }
  return seeds;
}

}  // namespace

LinearSystem linear_system(const NetworkSpec& spec) {
  require_harmonic(spec, "linear_system");
  const int n = spec.n;
  const GraphMatrices g = graph_matrices(spec);

  LinearSystem sys;
  sys.M = Matrix::Zero(2 * n, 2 * n);
  sys.M.topRightCorner(n, n) = Matrix::Identity(n, n);
  sys.M.bottomLeftCorner(n, n) = -g.gamma;
  for (int i : spec.damped) sys.M(n + i, n + i) = -1.0;

  sys.sigma = Matrix::Zero(2 * n, 2 * n);
  for (int i : spec.boundary)
    sys.sigma(n + i, n + i) = std::sqrt(2.0 * spec.temperature(i));
  return sys;
}

std::vector<InvariantQuadratic> invariant_quadratics(const NetworkSpec& spec) {
  require_harmonic(spec, "invariant_quadratics");
  const int n = spec.n;
  const Matrix gamma = graph_matrices(spec).gamma;

  Eigen::SelfAdjointEigenSolver<Matrix> es(gamma);
  if (es.info() != Eigen::Success)
    throw NumericalError("invariant_quadratics: eigensolver failed");
  const Vector evals = es.eigenvalues();
  const Matrix evecs = es.eigenvectors();
  const double cluster_tol = 1e-8 * evals.cwiseAbs().maxCoeff();

  std::vector<InvariantQuadratic> out;
  int lo = 0;
  while (lo < n) {
    int hi = lo + 1;
    while (hi < n && evals(hi) - evals(hi - 1) <= cluster_tol) ++hi;
    const int m = hi - lo;
    const Matrix V = evecs.middleCols(lo, m);

    // Directions of the eigenspace vanishing on the damped set: null space of
    // the damped rows of V.
    Matrix rows(static_cast<int>(spec.damped.size()), m);
    int r = 0;
    for (int i : spec.damped) rows.row(r++) = V.row(i);
    Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double thresh =
        rank_tolerance(std::max<int>(m, r), s.size() ? s(0) : 0.0);
    for (int k = 0; k < m; ++k) {
      const double sv = k < s.size() ? s(k) : 0.0;
      if (sv > thresh) continue;
      Vector z = V * svd.matrixV().col(k);
      z.normalize();
      // Canonical orientation: first non-negligible component positive.
      for (int i = 0; i < n; ++i) {
        if (std::abs(z(i)) > 1e-8) {
          if (z(i) < 0.0) z = -z;
          break;
        }
      }
      const double alpha = evals.segment(lo, m).mean();
      out.push_back({alpha, std::move(z)});
    }
    lo = hi;
  }
  return out;
}

AnalysisReport analyze(const NetworkSpec& spec) {
  require_harmonic(spec, "analyze");
  const int n2 = 2 * spec.n;
  const LinearSystem sys = linear_system(spec);

  AnalysisReport report;
  report.dim_damped = krylov_span(sys.M, momentum_seeds(spec.damped, spec.n)).dim;
  report.dim_boundary =
      krylov_span(sys.M, momentum_seeds(spec.boundary, spec.n)).dim;
  report.asymmetric = report.dim_damped == n2;
  report.abscissa = spectrum(sys.M).abscissa;
  report.invariants = invariant_quadratics(spec);
  if (report.asymmetric && report.abscissa < 0.0) {
    const Matrix Q = solve_lyapunov(sys.M, sys.sigma * sys.sigma.transpose());
    report.rank_q = numerical_rank(Q);
  }
  return report;
}

Matrix tilted_covariance(const NetworkSpec& spec, const InvariantQuadratic& quad,
                         double gamma) {
  require_harmonic(spec, "tilted_covariance");
  if (gamma < 0.0)
    throw PreconditionError("tilted_covariance: gamma must be >= 0");
  if (spec.damped != spec.boundary)
    throw PreconditionError(
        "tilted_covariance: requires damped == boundary (Gibbs regime)");
  for (int i : spec.boundary)
    if (std::abs(spec.temperature(i) - 1.0) > 1e-12)
      throw PreconditionError(
          "tilted_covariance: requires all boundary temperatures equal to 1");

  const int n = spec.n;
  const Matrix g = graph_matrices(spec).gamma;
  if (quad.z.size() != n)
    throw PreconditionError("tilted_covariance: quadratic dimension mismatch");
  if ((g * quad.z - quad.alpha * quad.z).norm() > 1e-8 ||
      std::abs(quad.z.norm() - 1.0) > 1e-10)
    throw PreconditionError(
        "tilted_covariance: z is not a unit Gamma-eigenvector");
  for (int i : spec.damped)
    if (std::abs(quad.z(i)) > 1e-8)
      throw PreconditionError(
          "tilted_covariance: z does not vanish on the damped set");

  const Matrix zz = quad.z * quad.z.transpose();
  const Matrix Aq = g + 2.0 * gamma * quad.alpha * zz;
  const Matrix Ap = Matrix::Identity(n, n) + 2.0 * gamma * zz;
  Matrix Q = Matrix::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = Aq.ldlt().solve(Matrix::Identity(n, n));
  Q.bottomRightCorner(n, n) = Ap.ldlt().solve(Matrix::Identity(n, n));
  return 0.5 * (Q + Q.transpose()).eval();
}

double contraction_rate(const NetworkSpec& spec) {
  require_harmonic(spec, "contraction_rate");
  return -spectrum(linear_system(spec).M).abscissa;
}

nlohmann::json report_to_json(const AnalysisReport& report) {
  nlohmann::json doc;
  doc["dim_damped"] = report.dim_damped;
  doc["dim_boundary"] = report.dim_boundary;
  doc["asymmetric"] = report.asymmetric;
  doc["abscissa"] = report.abscissa;
  if (report.rank_q)
    doc["rank_q"] = *report.rank_q;
  else
    doc["rank_q"] = nullptr;
  auto quads = nlohmann::json::array();
  for (const auto& quad : report.invariants) {
    std::vector<double> z(quad.z.data(), quad.z.data() + quad.z.size());
    quads.push_back({{"alpha", quad.alpha}, {"z", z}});
  }
  doc["invariant_quadratics"] = quads;
  return doc;
}

}  // namespace hcn
