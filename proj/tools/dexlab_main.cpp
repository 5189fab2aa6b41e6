// dexlab: equilibrium, stability, and diversification diagnostics for
// truncated dated-commodity exchange economies.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dexlab/analysis.hpp"
#include "dexlab/diversification.hpp"
#include "dexlab/io.hpp"
#include "dexlab/scenarios.hpp"
#include "dexlab/stability.hpp"
#include "dexlab/sweep.hpp"

namespace {

using dexlab::Economy;
using nlohmann::json;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw dexlab::ValidationError("cannot write output file: " + out_path);
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw dexlab::ValidationError(flag + ": cannot parse integer '" + item + "'");
    }
  }
  if (values.empty()) throw dexlab::ValidationError(flag + ": empty list");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dated-commodity exchange economy laboratory"};
  app.require_subcommand(1);

  std::string econ_path, out_path, format = "json";
  std::uint64_t seed = 0;
  double tol = -1.0;

  // --- solve ---
  auto* solve_cmd = app.add_subcommand("solve", "solve for an equilibrium price vector");
  int solve_starts = 1;
  solve_cmd->add_option("--econ", econ_path, "economy spec file")->required();
  solve_cmd->add_option("--tol", tol, "sup-norm residual tolerance");
  solve_cmd->add_option("--starts", solve_starts, "number of seeded starts");
  solve_cmd->add_option("--seed", seed, "seed for perturbed starts");
  solve_cmd->add_option("--out", out_path, "output path (default stdout)");

  // --- jacobian ---
  auto* jac_cmd = app.add_subcommand("jacobian", "aggregate excess-demand Jacobian at equilibrium");
  bool fd_check = false;
  jac_cmd->add_option("--econ", econ_path, "economy spec file")->required();
  jac_cmd->add_flag("--fd-check", fd_check, "audit against central finite differences");
  jac_cmd->add_option("--tol", tol, "solver tolerance");
  jac_cmd->add_option("--out", out_path, "output path");

  // --- decompose ---
  auto* dec_cmd = app.add_subcommand("decompose", "quadratic-form decomposition and rate ratios");
  std::string policy_name = "random";
  int draws = 1;
  dec_cmd->add_option("--econ", econ_path, "economy spec file")->required();
  dec_cmd->add_option("--distortion", policy_name, "random | odd-even");
  dec_cmd->add_option("--draws", draws, "distortion draws to report");
  dec_cmd->add_option("--seed", seed, "distortion seed");
  dec_cmd->add_option("--tol", tol, "solver tolerance");
  dec_cmd->add_option("--out", out_path, "output path");

  // --- stability ---
  auto* stab_cmd = app.add_subcommand("stability", "negative-definiteness verdict and index");
  stab_cmd->add_option("--econ", econ_path, "economy spec file")->required();
  stab_cmd->add_option("--tol", tol, "solver tolerance");
  stab_cmd->add_option("--out", out_path, "output path");

  // --- tatonnement ---
  auto* tat_cmd = app.add_subcommand("tatonnement", "integrate p' = z(p) from a perturbed start");
  double scale = 0.1, t_max = -1.0, rtol = 1e-8, atol = 1e-10;
  std::string traj_path;
  tat_cmd->add_option("--econ", econ_path, "economy spec file")->required();
  tat_cmd->add_option("--scale", scale, "start perturbation scale (p = pbar (1 + scale xi))");
  tat_cmd->add_option("--seed", seed, "perturbation seed");
  tat_cmd->add_option("--t-max", t_max, "integration horizon");
  tat_cmd->add_option("--rtol", rtol, "relative error tolerance");
  tat_cmd->add_option("--atol", atol, "absolute error tolerance");
  tat_cmd->add_option("--traj-out", traj_path, "trajectory CSV path (t, p_1..p_N)");
  tat_cmd->add_option("--tol", tol, "solver tolerance");
  tat_cmd->add_option("--out", out_path, "summary output path");

  // --- diversify ---
  auto* div_cmd = app.add_subcommand("diversify", "alignment statistics and spectral condition");
  div_cmd->add_option("--econ", econ_path, "economy spec file")->required();
  div_cmd->add_option("--tol", tol, "solver tolerance");
  div_cmd->add_option("--out", out_path, "output path");

  // --- scenario gen ---
  auto* scen_cmd = app.add_subcommand("scenario", "scenario generators");
  scen_cmd->require_subcommand(1);
  auto* gen_cmd = scen_cmd->add_subcommand("gen", "write a generated economy spec file");
  std::string family_name = "identical";
  int horizon = 20, agents = 4;
  double beta = 0.95;
  dexlab::ScenarioParams params;
  gen_cmd->add_option("--family", family_name,
                      "identical | sparse | dispersed | two-type | isoelastic-example")
      ->required();
  gen_cmd->add_option("--horizon", horizon, "terminal date N")->required();
  gen_cmd->add_option("--beta", beta, "discount factor")->required();
  gen_cmd->add_option("--agents", agents, "agent count")->required();
  gen_cmd->add_option("--seed", seed, "generation seed");
  gen_cmd->add_option("--sigma", params.sigma, "elasticity (1 = log)");
  gen_cmd->add_option("--omega-bar", params.omega_bar, "endowment level");
  gen_cmd->add_option("--delta", params.delta, "taste deviation scale");
  gen_cmd->add_option("--block-width", params.block_width, "sparse: block width");
  gen_cmd->add_option("--block-window", params.block_window, "sparse: placement window");
  gen_cmd->add_option("--amp", params.amp, "sparse: amplitude cap");
  gen_cmd->add_option("--mass", params.mass, "sparse: beta-weighted mass cap");
  gen_cmd->add_option("--s-base", params.s_base, "isoelastic example: endowment tilt base");
  gen_cmd->add_option("--s-amp", params.s_amp, "isoelastic example: endowment tilt amplitude");
  gen_cmd->add_option("--out", out_path, "economy spec output path")->required();

  // --- sweep ---
  auto* sweep_cmd = app.add_subcommand("sweep", "grid of per-(N, beta, I, seed) diagnostics");
  std::string horizons_text = "20,40,80,160", seeds_text = "1";
  int sweep_agents = 12, sweep_draws = 16, sweep_starts = 1;
  double sweep_beta = 0.95;
  std::string sweep_policy = "random";
  sweep_cmd->add_option("--family", family_name, "scenario family")->required();
  sweep_cmd->add_option("--beta", sweep_beta, "discount factor");
  sweep_cmd->add_option("--horizons", horizons_text, "comma-separated N values");
  sweep_cmd->add_option("--agents", sweep_agents, "agent count");
  sweep_cmd->add_option("--seeds", seeds_text, "comma-separated seeds");
  sweep_cmd->add_option("--policy", sweep_policy, "random | odd-even");
  sweep_cmd->add_option("--draws", sweep_draws, "distortion draws per cell");
  sweep_cmd->add_option("--starts", sweep_starts, "solver starts per cell");
  sweep_cmd->add_option("--tol", tol, "solver tolerance");
  sweep_cmd->add_option("--sigma", params.sigma, "elasticity (1 = log)");
  sweep_cmd->add_option("--delta", params.delta, "taste deviation scale");
  sweep_cmd->add_option("--format", format, "csv | json");
  sweep_cmd->add_option("--out", out_path, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);  // prints help/error text
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) {
      const Economy e = dexlab::load_economy(econ_path);
      dexlab::SolveOptions opts;
      opts.tol = tol;
      opts.starts = solve_starts;
      opts.seed = seed;
      const auto eq = dexlab::solve_equilibrium(e, opts);
      emit(dexlab::equilibrium_to_json(eq).dump(2), out_path);
    } else if (*jac_cmd) {
      const Economy e = dexlab::load_economy(econ_path);
      dexlab::SolveOptions opts;
      opts.tol = tol;
      const auto eq = dexlab::solve_equilibrium(e, opts);
      const Eigen::MatrixXd jac = dexlab::aggregate_jacobian(e, eq);
      json j;
      j["jacobian"] = matrix_json(jac);
      j["orientation"] = "entry (m,n) = dz_n/dp_m";
      if (fd_check) {
        const Eigen::MatrixXd fd = dexlab::fd_jacobian(e, eq.prices);
        const double rel =
            (jac - fd).cwiseAbs().maxCoeff() / jac.cwiseAbs().maxCoeff();
        j["fd_check"]["sup_rel_error"] = rel;
        j["fd_check"]["pass"] = rel <= 1e-4;
      }
      emit(j.dump(2), out_path);
    } else if (*dec_cmd) {
      const Economy e = dexlab::load_economy(econ_path);
      dexlab::SolveOptions opts;
      opts.tol = tol;
      const auto eq = dexlab::solve_equilibrium(e, opts);
      const Eigen::MatrixXd jac = dexlab::aggregate_jacobian(e, eq);
      const auto policy = dexlab::distortion_policy_from_string(policy_name);
      const int N = e.horizon();
      json draws_json = json::array();
      for (int k = 0; k < std::max(1, draws); ++k) {
        Eigen::VectorXd q(N);
        for (int n = 1; n <= N; ++n) {
          const double sign = policy == dexlab::DistortionPolicy::OddEvenKerPsi
                                  ? ((n % 2 == 1) ? 1.0 : -1.0)
                                  : dexlab::hashrand::rademacher(seed, k, n);
          q[n - 1] = sign * eq.prices[n - 1];
        }
        const auto terms = dexlab::quadratic_terms(e, eq, q);
        const auto rates = dexlab::rate_ratios(e, eq, terms.u);
        const double lhs = q.dot(jac.transpose() * q);
        const double rhs = -terms.A * terms.alpha * terms.alpha +
                           terms.R_of_u * terms.alpha - terms.S_of_u + terms.M_of_u;
        json jd;
        jd["alpha"] = terms.alpha;
        jd["A"] = terms.A;
        jd["S"] = terms.S_of_u;
        jd["R"] = terms.R_of_u;
        jd["M"] = terms.M_of_u;
        jd["identity_lhs"] = lhs;
        jd["identity_residual"] = lhs - rhs;
        jd["s_ratio"] = rates.s_ratio;
        jd["m_ratio"] = rates.m_ratio;
        jd["r_ratio"] = rates.r_ratio;
        jd["a_ratio"] = rates.a_ratio;
        draws_json.push_back(std::move(jd));
      }
      json j;
      j["policy"] = dexlab::to_string(policy);
      j["psi_pbar"] = dexlab::psi_functional(e, eq, eq.prices);
      j["draws"] = std::move(draws_json);
      emit(j.dump(2), out_path);
    } else if (*stab_cmd) {
      const Economy e = dexlab::load_economy(econ_path);
      dexlab::SolveOptions opts;
      opts.tol = tol;
      const auto eq = dexlab::solve_equilibrium(e, opts);
      const auto rep = dexlab::stability_verdict(dexlab::aggregate_jacobian(e, eq));
      emit(dexlab::stability_to_json(rep).dump(2), out_path);
    } else if (*tat_cmd) {
      const Economy e = dexlab::load_economy(econ_path);
      dexlab::SolveOptions opts;
      opts.tol = tol;
      const auto eq = dexlab::solve_equilibrium(e, opts);
      const int N = e.horizon();
      Eigen::VectorXd p0(N);
      for (int n = 0; n < N; ++n) {
        const double xi = 2.0 * dexlab::hashrand::uniform01(seed, 1, n) - 1.0;
        p0[n] = eq.prices[n] * (1.0 + scale * xi);
      }
      dexlab::TatonnementOptions topts;
      topts.t_max = t_max;
      topts.rtol = rtol;
      topts.atol = atol;
      const auto run = dexlab::tatonnement_simulate(e, p0, eq, topts);
      if (!traj_path.empty()) {
        std::ostringstream csv;
        csv << "t";
        for (int n = 1; n <= N; ++n) csv << ",p_" << n;
        csv << "\n";
        for (std::size_t k = 0; k < run.times.size(); ++k) {
          csv << run.times[k];
          for (int n = 0; n < N; ++n) csv << ',' << run.trajectory[k][n];
          csv << "\n";
        }
        emit(csv.str(), traj_path);
      }
      json j;
      j["converged"] = run.converged;
      j["final_distance"] = run.final_distance;
      j["steps"] = run.steps;
      j["samples"] = run.times.size();
      if (!run.abort_reason.empty()) j["abort_reason"] = run.abort_reason;
      emit(j.dump(2), out_path);
      if (!run.abort_reason.empty()) return 3;
    } else if (*div_cmd) {
      const Economy e = dexlab::load_economy(econ_path);
      dexlab::SolveOptions opts;
      opts.tol = tol;
      const auto eq = dexlab::solve_equilibrium(e, opts);
      const auto rep = dexlab::diversification_report(e, eq);
      emit(dexlab::diversification_to_json(rep).dump(2), out_path);
    } else if (*gen_cmd) {
      dexlab::ScenarioSpec spec;
      spec.family = dexlab::scenario_family_from_string(family_name);
      spec.params = params;
      spec.seed = seed;
      const Economy e = dexlab::generate(spec, horizon, beta, agents);
      dexlab::save_economy(e, out_path);
      const auto constraints = dexlab::verify_constraints(e, spec);
      std::cerr << "wrote " << out_path << " (constraint sup residual "
                << constraints.sup_residual << ")\n";
    } else if (*sweep_cmd) {
      dexlab::SweepGrid grid;
      grid.scenario.family = dexlab::scenario_family_from_string(family_name);
      grid.scenario.params = params;
      grid.policy = dexlab::distortion_policy_from_string(sweep_policy);
      grid.distortion_draws = sweep_draws;
      grid.solve.tol = tol;
      grid.solve.starts = sweep_starts;
      for (int n : parse_int_list(horizons_text, "--horizons")) {
        for (int s : parse_int_list(seeds_text, "--seeds")) {
          grid.cells.push_back({n, sweep_beta, sweep_agents, static_cast<std::uint64_t>(s)});
        }
      }
      const auto result = dexlab::run_sweep(grid);
      if (format == "csv") {
        emit(dexlab::sweep_csv(result), out_path);
      } else if (format == "json") {
        emit(dexlab::sweep_to_json(result).dump(2), out_path);
      } else {
        throw dexlab::ValidationError("--format: must be csv or json");
      }
      for (const auto& row : result.rows) {
        if (row.status != "ok") return 3;
      }
    }
  } catch (const dexlab::ValidationError& err) {
    std::cerr << "validation error: " << err.what() << "\n";
    return 2;
  } catch (const dexlab::NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 3;
  }
  return 0;
}
