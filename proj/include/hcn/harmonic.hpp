#pragma once

#include <optional>
#include <vector>

#include "hcn/matkernel.hpp"
#include "hcn/network.hpp"
#include "json.hpp"

namespace hcn {

// Drift and noise of the linear dynamics dZ = M Z dt + sigma dB with
// M = [[0, I], [-Gamma, -I_D]] and sigma carrying sqrt(2 T_i) on the
// boundary momentum diagonal.
struct LinearSystem {
  Matrix M;
  Matrix sigma;
};

// A quadratic K(q, p) = alpha <z,q>^2 + <z,p>^2 conserved by the damped
// Hamiltonian flow: z is a unit Gamma-eigenvector with eigenvalue alpha that
// vanishes on the damped set, so K certifies non-uniqueness of the invariant
// measure.
struct InvariantQuadratic {
  double alpha = 0.0;
  Vector z;
};

struct AnalysisReport {
  int dim_damped = 0;    // dim E_{M, damped}
  int dim_boundary = 0;  // dim E_{M, boundary}
  bool asymmetric = false;
  double abscissa = 0.0;
  std::vector<InvariantQuadratic> invariants;
  std::optional<int> rank_q;  // rank of the stationary covariance, when stable
};

// Requires a harmonic spec (U = V = q^2/2); throws PreconditionError otherwise.
LinearSystem linear_system(const NetworkSpec& spec);

// Controllability dimensions, asymmetry (uniqueness), spectral abscissa,
// conserved quadratics, and the stationary covariance rank when it exists.
AnalysisReport analyze(const NetworkSpec& spec);

// One unit vector per independent direction of each Gamma-eigenspace that
// vanishes on the damped set; empty exactly when the network is asymmetric.
// Eigenvalues within 1e-8 * |Gamma| are treated as one cluster.
std::vector<InvariantQuadratic> invariant_quadratics(const NetworkSpec& spec);

// Stationary covariance of the tilted measure exp(-gamma K) d(mu_Gibbs):
// blockdiag(Gamma + 2 gamma alpha z z^T, I + 2 gamma z z^T)^{-1}. Requires all
// boundary temperatures equal to 1 and damped == boundary, the regime where
// the Gibbs measure is invariant. Each member of the family solves the same
// Lyapunov equation, exhibiting the non-uniqueness.
Matrix tilted_covariance(const NetworkSpec& spec, const InvariantQuadratic& quad,
                         double gamma);

// alpha_0 = -abscissa(M): the contraction rate of the noise-free flow, which
// is also the decay rate of the semigroup gradient bound. Positive exactly
// when the network is asymmetric.
double contraction_rate(const NetworkSpec& spec);

nlohmann::json report_to_json(const AnalysisReport& report);

}  // namespace hcn
