#include "hcn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hcn/errors.hpp"
#include "hcn/harmonic.hpp"
#include "hcn/rng.hpp"

namespace hcn {

namespace {

constexpr double kDivergenceGuard = 1e8;

// RK4 with preallocated stages; Drift is drift(z, out).
template <typename Drift>
class Rk4 {
 public:
  explicit Rk4(int dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  void step(Vector& z, double h, Drift&& drift) {
    drift(z, k1_);
    tmp_ = z + 0.5 * h * k1_;
    drift(tmp_, k2_);
    tmp_ = z + 0.5 * h * k2_;
    drift(tmp_, k3_);
    tmp_ = z + h * k3_;
    drift(tmp_, k4_);
    z += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  Vector k1_, k2_, k3_, k4_, tmp_;
};

double potential_energy(const NetworkSpec& spec, const Vector& q) {
  double acc = 0.0;
  for (int i = 0; i < spec.n; ++i) acc += spec.pinning(q(i));
  for (const auto& [i, j] : spec.edges) {
    const double d = q(i) - q(j);
    acc += 0.5 * (spec.interaction(d) + spec.interaction(-d));
  }
  return acc;
}

void potential_gradient(const NetworkSpec& spec, const Polynomial& dV,
                        const Polynomial& dU, const Vector& q, Vector& out) {
  for (int i = 0; i < spec.n; ++i) out(i) = dV(q(i));
  for (const auto& [i, j] : spec.edges) {
    const double d = q(i) - q(j);
    const double f = 0.5 * (dU(d) - dU(-d));
    out(i) += f;
    out(j) -= f;
  }
}

Matrix potential_hessian(const NetworkSpec& spec, const Polynomial& ddV,
                         const Polynomial& ddU, const Vector& q) {
  Matrix h = Matrix::Zero(spec.n, spec.n);
  for (int i = 0; i < spec.n; ++i) h(i, i) = ddV(q(i));
  for (const auto& [i, j] : spec.edges) {
    const double d = q(i) - q(j);
    const double f = 0.5 * (ddU(d) + ddU(-d));
    h(i, i) += f;
    h(j, j) += f;
    h(i, j) -= f;
    h(j, i) -= f;
  }
  return h;
}

// Drift of the noise-free network flow on the packed vector (q, p).
struct NetworkDrift {
  const NetworkSpec& spec;
  Polynomial dV, dU;
  bool damped;

  NetworkDrift(const NetworkSpec& s, bool with_damping)
      : spec(s),
        dV(s.pinning.derivative()),
        dU(s.interaction.derivative()),
        damped(with_damping) {}

  void operator()(const Vector& z, Vector& out) const {
    const int n = spec.n;
    out.head(n) = z.segment(n, n);
    for (int i = 0; i < n; ++i) out(n + i) = -dV(z(i));
    for (const auto& [i, j] : spec.edges) {
      const double d = z(i) - z(j);
      const double f = 0.5 * (dU(d) - dU(-d));
      out(n + i) -= f;
      out(n + j) += f;
    }
    if (damped)
      for (int i : spec.damped) out(n + i) -= z(n + i);
  }
};

double damped_momentum_square(const NetworkSpec& spec, const Vector& z) {
  double acc = 0.0;
  for (int i : spec.damped) acc += z(spec.n + i) * z(spec.n + i);
  return acc;
}

Trajectory integrate_flow(const NetworkSpec& spec, const PhaseState& z0,
                          double t, double dt, int thin, bool with_damping) {
  if (dt <= 0.0) throw PreconditionError("flow: dt must be > 0");
  if (thin < 1) throw PreconditionError("flow: thin must be >= 1");
  const int n = spec.n;
  const NetworkDrift drift(spec, with_damping);
  Rk4<const NetworkDrift&> rk(2 * n);
  Vector z = z0.to_vector();

  const long steps = std::lround(t / dt);
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(steps / thin) + 2);
  traj.times.push_back(0.0);
  traj.states.push_back(z);

  double h_prev = hamiltonian(spec, PhaseState::from_vector(z));
  const double h_guard = 1e-6 * std::max(1.0, std::abs(h_prev));

  for (long k = 0; k < steps; ++k) {
    rk.step(z, dt, drift);
    if (with_damping) {
      const double h_now = hamiltonian(spec, PhaseState::from_vector(z));
      if (h_now > h_prev + h_guard)
        throw NumericalError(
            "flow_damped: energy increased by " + std::to_string(h_now - h_prev) +
            " in one step; dt is too large");
      h_prev = h_now;
    }
    if ((k + 1) % thin == 0 || k + 1 == steps) {
      traj.times.push_back(static_cast<double>(k + 1) * dt);
      traj.states.push_back(z);
    }
  }
  return traj;
}

double sample_variance(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace

PhaseState PhaseState::from_vector(const Vector& z) {
  const int n = static_cast<int>(z.size()) / 2;
  return {z.head(n), z.tail(n)};
}

Vector PhaseState::to_vector() const {
  Vector z(2 * q.size());
  z << q, p;
  return z;
}

double hamiltonian(const NetworkSpec& spec, const PhaseState& state) {
  return 0.5 * state.p.squaredNorm() + potential_energy(spec, state.q);
}

std::pair<Vector, Vector> grad_hamiltonian(const NetworkSpec& spec,
                                           const PhaseState& state) {
  Vector gq(spec.n);
  potential_gradient(spec, spec.pinning.derivative(),
                     spec.interaction.derivative(), state.q, gq);
  return {gq, state.p};
}

Equilibrium find_equilibrium(const NetworkSpec& spec) {
  const int n = spec.n;
  const Polynomial dV = spec.pinning.derivative();
  const Polynomial dU = spec.interaction.derivative();
  const Polynomial ddV = dV.derivative();
  const Polynomial ddU = dU.derivative();

  Vector q = Vector::Zero(n);
  Vector g(n);
  double mu = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    potential_gradient(spec, dV, dU, q, g);
    if (g.norm() <= 1e-12) {
      const Matrix hess = potential_hessian(spec, ddV, ddU, q);
      Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
      const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
      Equilibrium eq;
      eq.state = {q, Vector::Zero(n)};
      eq.energy = hamiltonian(spec, eq.state);
      eq.hessian_singular =
          es.eigenvalues().minCoeff() < 1e-10 * std::max(1.0, lmax);
      return eq;
    }

    const Matrix hess = potential_hessian(spec, ddV, ddU, q);
    Vector step;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const Matrix damped =
          hess + mu * Matrix::Identity(n, n);
      step = damped.ldlt().solve(-g);
      if (step.allFinite() && g.dot(step) < 0.0) break;
      mu = std::max(1e-8, mu * 10.0);
    }
    if (!step.allFinite() || g.dot(step) >= 0.0)
      throw NumericalError("find_equilibrium: cannot produce a descent step");

    const double p0 = potential_energy(spec, q);
    const double slope = g.dot(step);
    double tau = 1.0;
    while (tau > 1e-14 &&
           potential_energy(spec, q + tau * step) > p0 + 1e-4 * tau * slope)
      tau *= 0.5;
    q += tau * step;
    mu *= 0.25;
  }
  throw NumericalError(
      "find_equilibrium: Newton iteration cap reached (degenerate convexity?)");
}

Trajectory flow_damped(const NetworkSpec& spec, const PhaseState& z0, double t,
                       double dt, int thin) {
  return integrate_flow(spec, z0, t, dt, thin, /*with_damping=*/true);
}

Trajectory flow_undamped(const NetworkSpec& spec, const PhaseState& z0, double t,
                         double dt, int thin) {
  return integrate_flow(spec, z0, t, dt, thin, /*with_damping=*/false);
}

LasalleReport lasalle_check(const NetworkSpec& spec, int samples, double radius,
                            double t, double dt, double eta, std::uint64_t seed,
                            double window) {
  if (samples < 1 || radius <= 0.0 || t <= 0.0 || dt <= 0.0 || eta <= 0.0)
    throw PreconditionError("lasalle_check: parameters must be positive");
  const int n = spec.n;
  const Equilibrium eq = find_equilibrium(spec);
  const Vector c0 = eq.state.to_vector();
  const NetworkDrift drift(spec, /*with_damping=*/true);
  Rk4<const NetworkDrift&> rk(2 * n);

  window = std::min(window, 0.5 * t);
  const long steps = std::lround(t / dt);
  const long tail_start = std::lround((t - window) / dt);
  const double actual_window = static_cast<double>(steps - tail_start) * dt;

  LasalleReport report;
  report.eta = eta;
  report.dissipation_tol = 1e-8 * actual_window;
  report.max_hitting_time = 0.0;

  for (int s = 0; s < samples; ++s) {
    RngStream rng(seed, static_cast<std::uint64_t>(s));
    Vector dir(2 * n);
    for (int i = 0; i < 2 * n; ++i) dir(i) = rng.normal();
    dir.normalize();
    const double r =
        radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(2 * n));
    Vector z = c0 + r * dir;

    double hit_time = -1.0;
    double tail_diss = 0.0;
    Vector tail_state;
    double prev_pd = damped_momentum_square(spec, z);
    if (hamiltonian(spec, PhaseState::from_vector(z)) - eq.energy < eta)
      hit_time = 0.0;

    for (long k = 0; hit_time < 0.0 && k < steps; ++k) {
      if (k == tail_start) tail_state = z;
      rk.step(z, dt, drift);
      const double pd = damped_momentum_square(spec, z);
      if (k >= tail_start) tail_diss += 0.5 * (prev_pd + pd) * dt;
      prev_pd = pd;
      const double h_rel =
          hamiltonian(spec, PhaseState::from_vector(z)) - eq.energy;
      if (h_rel < eta) hit_time = static_cast<double>(k + 1) * dt;
    }

    report.hitting_times.push_back(hit_time);
    if (hit_time >= 0.0) {
      ++report.converged;
      report.max_hitting_time = std::max(report.max_hitting_time, hit_time);
    } else if (tail_diss < report.dissipation_tol && !report.witness_sample) {
      report.witness_sample = s;
      report.witness_state = tail_state;
      report.witness_tail_dissipation = tail_diss;
    }
  }

  if (report.converged == samples)
    report.verdict = "stability plausible";
  else if (report.witness_sample)
    report.verdict = "stability refuted";
  else
    report.verdict = "inconclusive";
  return report;
}

SimResult simulate(const NetworkSpec& spec, const PhaseState& z0,
                   const SimConfig& cfg, std::uint64_t stream) {
  if (cfg.dt <= 0.0) throw PreconditionError("simulate: dt must be > 0");
  if (cfg.horizon < 0.0) throw PreconditionError("simulate: horizon must be >= 0");
  if (cfg.thin < 1) throw PreconditionError("simulate: thin must be >= 1");
  if (cfg.scheme == Scheme::ExactGaussian && !spec.is_harmonic())
    throw PreconditionError(
        "simulate: the exact-gaussian scheme requires a harmonic spec");

  const int n = spec.n;
  const long steps = std::lround(cfg.horizon / cfg.dt);
  const double t_eff = static_cast<double>(steps) * cfg.dt;
  RngStream rng(cfg.seed, stream);
  Vector z = z0.to_vector();

  // Exact one-step transition: z -> e^{M dt} z + N(0, K_dt).
  Matrix step_map, noise_factor;
  if (cfg.scheme == Scheme::ExactGaussian) {
    const LinearSystem sys = linear_system(spec);
    step_map = matrix_exp(sys.M, cfg.dt);
    const Matrix kdt = propagate_covariance_exact(
        sys.M, sys.sigma, Matrix::Zero(2 * n, 2 * n), cfg.dt);
    Eigen::SelfAdjointEigenSolver<Matrix> es(kdt);
    if (es.info() != Eigen::Success)
      throw NumericalError("simulate: covariance factorization failed");
    noise_factor = es.eigenvectors() *
                   es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  const NetworkDrift drift(spec, /*with_damping=*/true);
  Vector drift_out(2 * n), xi(2 * n);

  SimResult result;
  result.ledger.h_start = hamiltonian(spec, z0);
  result.ledger.horizon = t_eff;
  for (int i : spec.boundary)
    result.ledger.bath_input += spec.temperature(i) * t_eff;

  result.trajectory.times.push_back(0.0);
  result.trajectory.states.push_back(z);
  double prev_pd = damped_momentum_square(spec, z);

  for (long k = 0; k < steps; ++k) {
    if (cfg.scheme == Scheme::ExactGaussian) {
      for (int i = 0; i < 2 * n; ++i) xi(i) = rng.normal();
      z = step_map * z + noise_factor * xi;
    } else {
      drift(z, drift_out);
      z += cfg.dt * drift_out;
      for (int i : spec.boundary) {
        const double xi_i = rng.normal();
        z(n + i) += std::sqrt(2.0 * spec.temperature(i) * cfg.dt) * xi_i;
      }
    }
    if (z.cwiseAbs().maxCoeff() > kDivergenceGuard)
      throw NumericalError(
          "simulate: state norm exceeded " + std::to_string(kDivergenceGuard) +
          " at t = " + std::to_string(static_cast<double>(k + 1) * cfg.dt) +
          " (diverging trajectory)");
    const double pd = damped_momentum_square(spec, z);
    result.ledger.dissipation += 0.5 * (prev_pd + pd) * cfg.dt;
    prev_pd = pd;
    if ((k + 1) % cfg.thin == 0 || k + 1 == steps) {
      result.trajectory.times.push_back(static_cast<double>(k + 1) * cfg.dt);
      result.trajectory.states.push_back(z);
    }
  }

  result.ledger.h_end = hamiltonian(spec, PhaseState::from_vector(z));
  result.ledger.martingale_residual = result.ledger.h_end -
                                      result.ledger.h_start -
                                      result.ledger.bath_input +
                                      result.ledger.dissipation;
  return result;
}

BalanceStats energy_balance(const NetworkSpec& spec,
                            const std::vector<EnergyLedger>& ledgers) {
  if (ledgers.empty())
    throw PreconditionError("energy_balance: empty ensemble");
  const int k = static_cast<int>(ledgers.size());

  std::vector<double> residuals, rates;
  for (const auto& l : ledgers) {
    residuals.push_back(l.martingale_residual);
    rates.push_back(l.horizon > 0.0 ? l.dissipation / l.horizon : 0.0);
  }

  BalanceStats stats;
  stats.paths = k;
  stats.mean_residual =
      std::accumulate(residuals.begin(), residuals.end(), 0.0) / k;
  stats.se_residual =
      std::sqrt(sample_variance(residuals, stats.mean_residual) / k);
  stats.mean_dissipation_rate =
      std::accumulate(rates.begin(), rates.end(), 0.0) / k;
  stats.se_dissipation_rate =
      std::sqrt(sample_variance(rates, stats.mean_dissipation_rate) / k);

  double t_max = 0.0;
  for (int i : spec.boundary) t_max = std::max(t_max, spec.temperature(i));
  stats.beta = t_max > 0.0 ? 0.5 / t_max : 1.0;

  // log of the ensemble estimate of P_t W / W for W = e^{beta H}, computed
  // with a max shift to keep the exponentials in range.
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& l : ledgers)
    shift = std::max(shift, stats.beta * (l.h_end - l.h_start));
  double acc = 0.0;
  for (const auto& l : ledgers)
    acc += std::exp(stats.beta * (l.h_end - l.h_start) - shift);
  stats.lyapunov_log = shift + std::log(acc / k);
  return stats;
}

LimitSystem limit_system(const NetworkSpec& spec) {
  LimitSystem limit;
  limit.spec = spec;
  limit.u = spec.interaction.degree();
  limit.v = spec.pinning.degree();
  if (limit.u < limit.v)
    throw PreconditionError(
        "limit_system: requires interaction degree >= pinning degree (u >= v)");
  limit.includes_pinning = limit.u == limit.v;
  limit.description =
      "H_inf = sum_i p_i^2/2" +
      std::string(limit.includes_pinning
                      ? " + |q_i|^" + std::to_string(limit.v)
                      : "") +
      " + sum_edges (q_i - q_j)^" + std::to_string(limit.u);
  return limit;
}

double limit_hamiltonian(const LimitSystem& limit, const PhaseState& state) {
  double acc = 0.5 * state.p.squaredNorm();
  if (limit.includes_pinning)
    for (int i = 0; i < limit.spec.n; ++i)
      acc += std::pow(std::abs(state.q(i)), limit.v);
  for (const auto& [i, j] : limit.spec.edges)
    acc += std::pow(state.q(i) - state.q(j), limit.u);
  return acc;
}

Vector limit_grad_q(const LimitSystem& limit, const Vector& q) {
  Vector g = Vector::Zero(limit.spec.n);
  if (limit.includes_pinning)
    for (int i = 0; i < limit.spec.n; ++i)
      g(i) += limit.v * std::pow(q(i), limit.v - 1);
  for (const auto& [i, j] : limit.spec.edges) {
    const double f = limit.u * std::pow(q(i) - q(j), limit.u - 1);
    g(i) += f;
    g(j) -= f;
  }
  return g;
}

RigidityReport rigidity_check(const LimitSystem& limit, int samples, double t,
                              double dt, std::uint64_t seed) {
  if (samples < 1 || t <= 0.0 || dt <= 0.0)
    throw PreconditionError("rigidity_check: parameters must be positive");
  const int n = limit.spec.n;

  const auto h_inf = [&](const Vector& z) {
    return limit_hamiltonian(limit, PhaseState::from_vector(z));
  };
  const auto drift = [&](const Vector& z, Vector& out) {
    out.head(n) = z.tail(n);
    out.tail(n) = -limit_grad_q(limit, z.head(n));
  };

  RigidityReport report;
  report.samples = samples;
  report.threshold = 1e-8 * t;
  report.min_dissipation = std::numeric_limits<double>::infinity();
  report.passed = true;

  const long steps = std::lround(t / dt);
  Rk4<decltype(drift)&> rk(2 * n);

  for (int s = 0; s < samples; ++s) {
    RngStream rng(seed, static_cast<std::uint64_t>(s));
    Vector z(2 * n);
    double h = 0.0;
    do {
      for (int i = 0; i < 2 * n; ++i) z(i) = rng.normal();
      h = h_inf(z);
    } while (!(h > 1e-12));

    // Bisect the ray scaling onto the unit shell {H_inf = 1}; H_inf is
    // nonnegative, vanishes at the origin, and is nondecreasing along rays.
    double lo = 0.0, hi = 1.0;
    int doublings = 0;
    while (h_inf(hi * z) < 1.0) {
      hi *= 2.0;
      if (++doublings > 200)
        throw NumericalError("rigidity_check: shell bracketing failed");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (h_inf(mid * z) < 1.0)
        lo = mid;
      else
        hi = mid;
      if (std::abs(h_inf(hi * z) - 1.0) <= 1e-10) break;
    }
    z *= hi;
    const Vector start = z;

    double diss = 0.0;
    double prev_pd = damped_momentum_square(limit.spec, z);
    for (long k = 0; k < steps; ++k) {
      rk.step(z, dt, drift);
      const double pd = damped_momentum_square(limit.spec, z);
      diss += 0.5 * (prev_pd + pd) * dt;
      prev_pd = pd;
    }
    if (std::abs(h_inf(z) - 1.0) > 1e-6)
      throw NumericalError(
          "rigidity_check: limit energy drifted by " +
          std::to_string(std::abs(h_inf(z) - 1.0)) + "; dt is too large");

    report.min_dissipation = std::min(report.min_dissipation, diss);
    if (diss <= report.threshold && report.passed) {
      report.passed = false;
      report.witness = start;
    }
  }
  return report;
}

std::string trajectory_csv(const Trajectory& trajectory, int n) {
  std::string out = "t";
  for (int i = 1; i <= n; ++i) out += ",q" + std::to_string(i);
  for (int i = 1; i <= n; ++i) out += ",p" + std::to_string(i);
  out += "\n";
  char buf[32];
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", trajectory.times[k]);
    out += buf;
    const Vector& z = trajectory.states[k];
    for (int i = 0; i < 2 * n; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", z(i));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

nlohmann::json ledger_to_json(const EnergyLedger& ledger) {
  return {{"h_start", ledger.h_start},
          {"h_end", ledger.h_end},
          {"bath_input", ledger.bath_input},
          {"dissipation", ledger.dissipation},
          {"martingale_residual", ledger.martingale_residual},
          {"horizon", ledger.horizon}};
}

nlohmann::json lasalle_to_json(const LasalleReport& report) {
  nlohmann::json doc;
  doc["verdict"] = report.verdict;
  doc["hitting_times"] = report.hitting_times;
  doc["max_hitting_time"] = report.max_hitting_time;
  doc["converged"] = report.converged;
  doc["eta"] = report.eta;
  doc["dissipation_tol"] = report.dissipation_tol;
  if (report.witness_sample) {
    doc["witness_sample"] = *report.witness_sample;
    doc["witness_tail_dissipation"] = report.witness_tail_dissipation;
    std::vector<double> w(report.witness_state->data(),
                          report.witness_state->data() + report.witness_state->size());
    doc["witness_state"] = w;
  }
  return doc;
}

nlohmann::json rigidity_to_json(const RigidityReport& report) {
  nlohmann::json doc;
  doc["passed"] = report.passed;
  doc["samples"] = report.samples;
  doc["min_dissipation"] = report.min_dissipation;
  doc["threshold"] = report.threshold;
  if (report.witness) {
    std::vector<double> w(report.witness->data(),
                          report.witness->data() + report.witness->size());
    doc["witness"] = w;
  }
  return doc;
}

nlohmann::json balance_to_json(const BalanceStats& stats) {
  return {{"paths", stats.paths},
          {"mean_residual", stats.mean_residual},
          {"se_residual", stats.se_residual},
          {"mean_dissipation_rate", stats.mean_dissipation_rate},
          {"se_dissipation_rate", stats.se_dissipation_rate},
          {"beta", stats.beta},
          {"lyapunov_log", stats.lyapunov_log}};
}

}  // namespace hcn
