// Command-line front end for heat conduction network analysis.
//
// Exit codes: 0 success, 1 invalid spec or flags, 2 numerical failure,
// 3 precondition violation (e.g. `stationary` on a non-asymmetric network).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hcn/dynamics.hpp"
#include "hcn/errors.hpp"
#include "hcn/harmonic.hpp"
#include "hcn/lie.hpp"
#include "hcn/matkernel.hpp"
#include "hcn/network.hpp"
#include "hcn/rng.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

json matrix_to_json(const hcn::Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

hcn::Vector parse_csv_vector(const std::string& text, int expected,
                             const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (...) {
      throw hcn::SpecError(std::string(flag) + ": cannot parse \"" + item +
                           "\" as a number");
    }
  }
  if (static_cast<int>(values.size()) != expected)
    throw hcn::SpecError(std::string(flag) + ": expected " +
                         std::to_string(expected) + " values, got " +
                         std::to_string(values.size()));
  hcn::Vector v(expected);
  for (int i = 0; i < expected; ++i) v(i) = values[i];
  return v;
}

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw hcn::SpecError("cannot open output file: " + out_path);
    out << doc.dump(2) << "\n";
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw hcn::SpecError("cannot open output file: " + path);
  out << content;
}

std::string path_with_suffix(const std::string& path, int index) {
  const auto dot = path.rfind('.');
  const std::string suffix = "_path" + std::to_string(index);
  if (dot == std::string::npos) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

int run_analyze(const std::string& spec_path, const std::string& out_path) {
  const auto spec = hcn::parse_network_file(spec_path);
  emit(hcn::report_to_json(hcn::analyze(spec)), out_path);
  return 0;
}

int run_stationary(const std::string& spec_path, const std::string& out_path) {
  const auto spec = hcn::parse_network_file(spec_path);
  const auto report = hcn::analyze(spec);
  if (!report.asymmetric) {
    json doc;
    doc["error"] =
        "network is not asymmetric: the invariant measure is not unique and "
        "no single stationary covariance exists (use `tilt` for the family)";
    doc["report"] = hcn::report_to_json(report);
    std::cout << doc.dump(2) << "\n";
    return 3;
  }
  const auto sys = hcn::linear_system(spec);
  const hcn::Matrix Q =
      hcn::solve_lyapunov(sys.M, sys.sigma * sys.sigma.transpose());
  json doc;
  doc["q"] = matrix_to_json(Q);
  doc["rank"] = hcn::numerical_rank(Q);
  doc["residual"] =
      hcn::lyapunov_residual(sys.M, sys.sigma * sys.sigma.transpose(), Q);
  doc["momentum_diagonal"] = [&] {
    json d = json::array();
    for (int i = 0; i < spec.n; ++i) d.push_back(Q(spec.n + i, spec.n + i));
    return d;
  }();
  emit(doc, out_path);
  return 0;
}

int run_tilt(const std::string& spec_path, double gamma, int index,
             const std::string& out_path) {
  const auto spec = hcn::parse_network_file(spec_path);
  const auto quads = hcn::invariant_quadratics(spec);
  if (quads.empty())
    throw hcn::PreconditionError(
        "tilt: network is asymmetric; no invariant quadratic exists and the "
        "stationary covariance is unique (use `stationary`)");
  if (index < 0 || index >= static_cast<int>(quads.size()))
    throw hcn::SpecError("tilt: --index out of range, network has " +
                         std::to_string(quads.size()) +
                         " invariant quadratics");
  const auto& quad = quads[index];
  const hcn::Matrix Q = hcn::tilted_covariance(spec, quad, gamma);
  const auto sys = hcn::linear_system(spec);
  json doc;
  doc["gamma"] = gamma;
  doc["alpha"] = quad.alpha;
  doc["z"] = std::vector<double>(quad.z.data(), quad.z.data() + quad.z.size());
  doc["q_gamma"] = matrix_to_json(Q);
  doc["residual"] =
      hcn::lyapunov_residual(sys.M, sys.sigma * sys.sigma.transpose(), Q);
  emit(doc, out_path);
  return 0;
}

int run_simulate(const std::string& spec_path, double t, double dt,
                 std::uint64_t seed, const std::string& scheme_name, int thin,
                 int paths, const std::string& out_path,
                 const std::string& z0_csv) {
  const auto spec = hcn::parse_network_file(spec_path);
  hcn::SimConfig cfg;
  cfg.dt = dt;
  cfg.horizon = t;
  cfg.seed = seed;
  cfg.thin = thin;
  if (scheme_name == "exact-gaussian")
    cfg.scheme = hcn::Scheme::ExactGaussian;
  else if (scheme_name == "euler-maruyama")
    cfg.scheme = hcn::Scheme::EulerMaruyama;
  else
    throw hcn::SpecError("simulate: unknown scheme \"" + scheme_name + "\"");

  hcn::PhaseState z0 = hcn::find_equilibrium(spec).state;
  if (!z0_csv.empty())
    z0 = hcn::PhaseState::from_vector(parse_csv_vector(z0_csv, 2 * spec.n, "--z0"));

  std::vector<hcn::EnergyLedger> ledgers;
  json ledger_docs = json::array();
  for (int path = 0; path < paths; ++path) {
    const auto result =
        hcn::simulate(spec, z0, cfg, static_cast<std::uint64_t>(path));
    if (!out_path.empty()) {
      const std::string path_file =
          paths == 1 ? out_path : path_with_suffix(out_path, path);
      write_file(path_file, hcn::trajectory_csv(result.trajectory, spec.n));
    }
    ledgers.push_back(result.ledger);
    ledger_docs.push_back(hcn::ledger_to_json(result.ledger));
  }

  json doc;
  doc["ledgers"] = ledger_docs;
  if (paths > 1)
    doc["balance"] = hcn::balance_to_json(hcn::energy_balance(spec, ledgers));
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int run_lasalle(const std::string& spec_path, int samples, double radius,
                double t, double dt, double eta, std::uint64_t seed,
                double window) {
  const auto spec = hcn::parse_network_file(spec_path);
  const auto report =
      hcn::lasalle_check(spec, samples, radius, t, dt, eta, seed, window);
  std::cout << hcn::lasalle_to_json(report).dump(2) << "\n";
  return 0;
}

int run_rigidity(const std::string& spec_path, int samples, double t, double dt,
                 std::uint64_t seed) {
  const auto spec = hcn::parse_network_file(spec_path);
  const auto limit = hcn::limit_system(spec);
  json doc = hcn::rigidity_to_json(hcn::rigidity_check(limit, samples, t, dt, seed));
  doc["u"] = limit.u;
  doc["v"] = limit.v;
  doc["includes_pinning"] = limit.includes_pinning;
  doc["description"] = limit.description;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int run_hormander(const std::string& spec_path, const std::string& point_csv,
                  int depth, std::size_t budget, std::uint64_t seed) {
  const auto spec = hcn::parse_network_file(spec_path);
  hcn::Vector point(2 * spec.n);
  if (point_csv.empty()) {
    hcn::RngStream rng(seed);
    for (int i = 0; i < 2 * spec.n; ++i) point(i) = rng.normal();
  } else {
    point = parse_csv_vector(point_csv, 2 * spec.n, "--point");
  }
  if (depth <= 0) depth = 2 * spec.n;
  const auto report = hcn::hormander_rank(spec, point, depth, budget);
  std::cout << hcn::rank_to_json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat conduction network analysis toolkit"};
  app.require_subcommand(1);

  std::string spec_path, out_path, scheme = "euler-maruyama";
  std::string point_csv, z0_csv;
  double gamma = 0.0, t = 10.0, dt = 1e-3, eta = 1e-6, radius = 1.0, window = 10.0;
  int index = 0, thin = 1, paths = 1, samples = 10, depth = 0;
  std::uint64_t seed = 0;
  std::size_t budget = 200000;

  auto* analyze = app.add_subcommand("analyze", "uniqueness/support report");
  analyze->add_option("spec", spec_path, "network spec file")->required();
  analyze->add_option("--out", out_path, "write report here instead of stdout");

  auto* stationary =
      app.add_subcommand("stationary", "stationary covariance (asymmetric only)");
  stationary->add_option("spec", spec_path)->required();
  stationary->add_option("--out", out_path);

  auto* tilt =
      app.add_subcommand("tilt", "tilted stationary covariance Q_gamma");
  tilt->add_option("spec", spec_path)->required();
  tilt->add_option("--gamma", gamma, "tilt strength")->required();
  tilt->add_option("--index", index, "which invariant quadratic");
  tilt->add_option("--out", out_path);

  auto* simulate = app.add_subcommand("simulate", "stochastic simulation");
  simulate->add_option("spec", spec_path)->required();
  simulate->add_option("--t", t, "horizon")->required();
  simulate->add_option("--dt", dt, "step size")->required();
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--scheme", scheme, "exact-gaussian | euler-maruyama");
  simulate->add_option("--thin", thin, "output stride");
  simulate->add_option("--paths", paths, "independent paths");
  simulate->add_option("--out", out_path, "trajectory CSV file");
  simulate->add_option("--z0", z0_csv, "initial state q1..qN,p1..pN");

  auto* lasalle = app.add_subcommand("lasalle", "stability condition check");
  lasalle->add_option("spec", spec_path)->required();
  lasalle->add_option("--samples", samples);
  lasalle->add_option("--radius", radius);
  lasalle->add_option("--t", t);
  lasalle->add_option("--dt", dt);
  lasalle->add_option("--eta", eta, "energy sublevel defining convergence");
  lasalle->add_option("--seed", seed);
  lasalle->add_option("--window", window, "tail window for the dissipation test");

  auto* rigidity = app.add_subcommand("rigidity", "limit-system rigidity check");
  rigidity->add_option("spec", spec_path)->required();
  rigidity->add_option("--samples", samples);
  rigidity->add_option("--t", t);
  rigidity->add_option("--dt", dt);
  rigidity->add_option("--seed", seed);

  auto* hormander = app.add_subcommand("hormander", "pointwise Lie-algebra rank");
  hormander->add_option("spec", spec_path)->required();
  hormander->add_option("--point", point_csv, "evaluation point q1..qN,p1..pN");
  hormander->add_option("--depth", depth, "bracket generations (default 2N)");
  hormander->add_option("--budget", budget, "monomial budget");
  hormander->add_option("--seed", seed, "seed for a random point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (analyze->parsed()) return run_analyze(spec_path, out_path);
    if (stationary->parsed()) return run_stationary(spec_path, out_path);
    if (tilt->parsed()) return run_tilt(spec_path, gamma, index, out_path);
    if (simulate->parsed())
      return run_simulate(spec_path, t, dt, seed, scheme, thin, paths, out_path,
                          z0_csv);
    if (lasalle->parsed())
      return run_lasalle(spec_path, samples, radius, t, dt, eta, seed, window);
    if (rigidity->parsed()) return run_rigidity(spec_path, samples, t, dt, seed);
    if (hormander->parsed())
      return run_hormander(spec_path, point_csv, depth, budget, seed);
  } catch (const hcn::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hcn::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hcn::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
