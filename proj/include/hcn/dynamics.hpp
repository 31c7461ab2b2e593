#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcn/matkernel.hpp"
#include "hcn/network.hpp"
#include "json.hpp"

namespace hcn {

struct PhaseState {
  Vector q;
  Vector p;

  static PhaseState zero(int n) {
    return {Vector::Zero(n), Vector::Zero(n)};
  }
  static PhaseState from_vector(const Vector& z);
  Vector to_vector() const;
  int size() const { return static_cast<int>(q.size()); }
};

enum class Scheme { ExactGaussian, EulerMaruyama };

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerMaruyama;
  int thin = 1;  // output stride
};

// Itô energy balance of one path: H_end - H_start equals bath input minus
// dissipated energy plus a martingale; the residual estimates the martingale.
struct EnergyLedger {
  double h_start = 0.0;
  double h_end = 0.0;
  double bath_input = 0.0;           // sum over boundary of T_i * t
  double dissipation = 0.0;          // trapezoidal int_0^t sum_D p_i^2 ds
  double martingale_residual = 0.0;  // h_end - h_start - bath_input + dissipation
  double horizon = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;  // phase vectors (q, p), size 2N
};

struct SimResult {
  Trajectory trajectory;
  EnergyLedger ledger;
};

struct Equilibrium {
  PhaseState state;          // p = 0, q = argmin of the potential energy
  double energy = 0.0;       // raw H at the minimum (subtract to normalize)
  bool hessian_singular = false;
};

struct LasalleReport {
  std::string verdict;  // "stability plausible" | "stability refuted" | "inconclusive"
  std::vector<double> hitting_times;  // -1 when the sample never entered K_eta
  double max_hitting_time = 0.0;
  int converged = 0;
  std::optional<int> witness_sample;      // index of the refuting sample
  std::optional<Vector> witness_state;    // its state at the tail-window start
  double witness_tail_dissipation = 0.0;
  double eta = 0.0;
  double dissipation_tol = 0.0;
};

// Scaled-limit Hamiltonian: per vertex p^2/2, pinning |q|^v kept only when
// u = v, plus (q_i - q_j)^u per edge. Requires u >= v.
struct LimitSystem {
  NetworkSpec spec;
  int u = 0;  // degree of the interaction
  int v = 0;  // degree of the pinning
  bool includes_pinning = false;
  std::string description;
};

struct RigidityReport {
  bool passed = false;
  int samples = 0;
  double min_dissipation = 0.0;
  double threshold = 0.0;
  std::optional<Vector> witness;  // shell sample with dissipation below threshold
};

struct BalanceStats {
  int paths = 0;
  double mean_residual = 0.0;
  double se_residual = 0.0;
  double mean_dissipation_rate = 0.0;
  double se_dissipation_rate = 0.0;
  double beta = 0.0;       // inverse-temperature used for the Lyapunov diagnostic
  double lyapunov_log = 0.0;  // log of the empirical P_t W / W for W = e^{beta H}
};

double hamiltonian(const NetworkSpec& spec, const PhaseState& state);

// (dH/dq, dH/dp); exact polynomial evaluation.
std::pair<Vector, Vector> grad_hamiltonian(const NetworkSpec& spec,
                                           const PhaseState& state);

// Damped Newton on the potential energy, gradient norm below 1e-12. Throws
// NumericalError when the iteration cap is hit (degenerate convexity).
Equilibrium find_equilibrium(const NetworkSpec& spec);

// Classical 4th-order integration of the noise-free damped flow
// qdot = p, pdot = -dH/dq - p 1_D. Steps that raise the energy beyond
// integration tolerance are rejected (dt too large). `thin` strides output.
Trajectory flow_damped(const NetworkSpec& spec, const PhaseState& z0, double t,
                       double dt, int thin = 1);

// Same integrator with the damping switched off; conserves H.
Trajectory flow_undamped(const NetworkSpec& spec, const PhaseState& z0, double t,
                         double dt, int thin = 1);

// Integrates `samples` starts drawn uniformly from the ball of radius R and
// reports hitting times of K_eta = {H - H(c0) < eta}. All samples hitting
// gives "stability plausible". A sample that never hits and whose dissipation
// integral over the trailing `window` stays below 1e-8 * window is a
// refutation witness (it sits on an invariant set where the damped momenta
// vanish). Anything else is "inconclusive".
LasalleReport lasalle_check(const NetworkSpec& spec, int samples, double radius,
                            double t, double dt, double eta, std::uint64_t seed,
                            double window = 10.0);

// Stochastic simulation of the network. Euler-Maruyama for any potentials;
// the exact-Gaussian scheme (one-step transition sampled from the true
// Gaussian law) requires a harmonic spec. Reproducible for a fixed seed;
// `stream` selects the per-path RNG stream.
SimResult simulate(const NetworkSpec& spec, const PhaseState& z0,
                   const SimConfig& cfg, std::uint64_t stream = 0);

// Ensemble statistics of the Itô balance over independent paths.
BalanceStats energy_balance(const NetworkSpec& spec,
                            const std::vector<EnergyLedger>& ledgers);

// Builds the scaled-limit system; throws PreconditionError when u < v.
LimitSystem limit_system(const NetworkSpec& spec);

double limit_hamiltonian(const LimitSystem& limit, const PhaseState& state);
Vector limit_grad_q(const LimitSystem& limit, const Vector& q);

// Draws Gaussian states rescaled onto the unit shell {H_inf = 1} (bisection
// along the ray), integrates the undamped limit flow over [0, t], and checks
// that every sample dissipates: int_0^t sum_D p_i^2 ds > 1e-8 * t.
RigidityReport rigidity_check(const LimitSystem& limit, int samples, double t,
                              double dt, std::uint64_t seed);

// CSV with header t,q1..qN,p1..pN at 17 significant digits.
std::string trajectory_csv(const Trajectory& trajectory, int n);

nlohmann::json ledger_to_json(const EnergyLedger& ledger);
nlohmann::json lasalle_to_json(const LasalleReport& report);
nlohmann::json rigidity_to_json(const RigidityReport& report);
nlohmann::json balance_to_json(const BalanceStats& stats);

}  // namespace hcn
