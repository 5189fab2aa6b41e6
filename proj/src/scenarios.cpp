#include "dexlab/scenarios.hpp"

#include <algorithm>
#include <cmath>

namespace dexlab {

std::string to_string(ScenarioFamily family) {
  switch (family) {
    case ScenarioFamily::IdenticalBenchmark: return "identical";
    case ScenarioFamily::SparseTastes: return "sparse";
    case ScenarioFamily::DispersedHeterogeneity: return "dispersed";
    case ScenarioFamily::TwoTypeCounterexample: return "two-type";
    case ScenarioFamily::IsoelasticExample: return "isoelastic-example";
  }
  return "unknown";
}

ScenarioFamily scenario_family_from_string(const std::string& name) {
  if (name == "identical") return ScenarioFamily::IdenticalBenchmark;
  if (name == "sparse") return ScenarioFamily::SparseTastes;
  if (name == "dispersed") return ScenarioFamily::DispersedHeterogeneity;
  if (name == "two-type") return ScenarioFamily::TwoTypeCounterexample;
  if (name == "isoelastic-example") return ScenarioFamily::IsoelasticExample;
  throw ValidationError("family: unknown scenario family '" + name + "'");
}

namespace {

constexpr double kTasteFloor = 0.05;  // lower bound kept on 1 + deviation

void check_common(int horizon, int agents, const ScenarioParams& p) {
  if (horizon < 1) throw ValidationError("horizon: must be >= 1");
  if (agents < 1) throw ValidationError("agents: must be >= 1");
  if (!(p.omega_bar > 0.0)) throw ValidationError("omega_bar: must be > 0");
  if (!(p.sigma > 0.0)) throw ValidationError("sigma: must be > 0");
}

Economy constant_endowment_economy(const DiscountStructure& d, double sigma,
                                   std::vector<Eigen::VectorXd> tastes, double omega_bar) {
  std::vector<AgentSpec> agents;
  agents.reserve(tastes.size());
  const Eigen::VectorXd endow = Eigen::VectorXd::Constant(d.horizon + 1, omega_bar);
  for (auto& taste : tastes) {
    agents.push_back({UtilityKernel::isoelastic(sigma, std::move(taste)), endow});
  }
  return Economy::make(d, std::move(agents));
}

// Seeded +-1 matrix with exact row balance sum_n beta^n e_in = 0 and column
// balance sum_i e_in = 0. Column centering (left projection) and the per-row
// discount-profile projection (right projection) commute, so applying both
// once satisfies both constraints to roundoff.
Eigen::MatrixXd balanced_deviations(std::uint64_t seed, int agents, int horizon,
                                    const DiscountStructure& d) {
  Eigen::MatrixXd eps(agents, horizon);
  for (int i = 0; i < agents; ++i) {
    for (int n = 0; n < horizon; ++n) {
      eps(i, n) = hashrand::rademacher(seed, static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(n + 1));
    }
  }
  const Eigen::RowVectorXd col_mean = eps.colwise().mean();
  eps.rowwise() -= col_mean;
  const Eigen::VectorXd b = d.powers.segment(1, horizon);
  const double bb = b.squaredNorm();
  for (int i = 0; i < agents; ++i) {
    const double coef = eps.row(i).dot(b) / bb;
    eps.row(i) -= coef * b.transpose();
  }
  return eps;
}

// Rescale to sup-norm one (so delta is the exact extreme relative deviation),
// conceding further when the floor min(1 + delta e_in) >= kTasteFloor needs
// it. Scaling preserves every balance constraint.
void normalize_deviations(Eigen::MatrixXd& eps, double delta) {
  const double extreme = eps.cwiseAbs().maxCoeff();
  if (extreme <= 0.0) return;
  const double target = std::min(1.0, (1.0 - kTasteFloor) / delta);
  if (!(target > 0.0)) {
    throw ValidationError("BoundViolation: cannot keep 1 + delta*eps >= " +
                          std::to_string(kTasteFloor));
  }
  eps *= target / extreme;
}

Economy generate_sparse(const ScenarioSpec& spec, int horizon, double beta, int agents) {
  const ScenarioParams& p = spec.params;
  if (p.block_width < 1) throw ValidationError("block_width: must be >= 1");
  if (!(p.amp > 0.0 && p.amp <= 1.0 - kTasteFloor)) {
    throw ValidationError("amp: must lie in (0, " + std::to_string(1.0 - kTasteFloor) + "]");
  }
  if (!(p.mass > 0.0)) throw ValidationError("mass: must be > 0");
  DiscountStructure d = DiscountStructure::make(beta, horizon);

  const int width = std::min(p.block_width, horizon);
  const int window = std::max(1, std::min(p.block_window, horizon) - width + 1);
  std::vector<Eigen::VectorXd> tastes;
  tastes.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    Eigen::VectorXd taste = Eigen::VectorXd::Ones(horizon + 1);
    const int start =
        1 + static_cast<int>(hashrand::uniform01(spec.seed, static_cast<std::uint64_t>(i), 1) *
                             window);
    double block_mass = 0.0;
    for (int n = start; n < start + width && n <= horizon; ++n) block_mass += d.powers[n];
    const int sign = hashrand::rademacher(spec.seed, static_cast<std::uint64_t>(i), 2);
    const double amp = sign * std::min(p.amp, p.mass / block_mass);
    for (int n = start; n < start + width && n <= horizon; ++n) taste[n] = 1.0 + amp;
    tastes.push_back(std::move(taste));
  }
  return constant_endowment_economy(d, 1.0, std::move(tastes), p.omega_bar);
}

Economy generate_dispersed(const ScenarioSpec& spec, int horizon, double beta, int agents) {
  const ScenarioParams& p = spec.params;
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("delta: must lie in (0,1)");
  DiscountStructure d = DiscountStructure::make(beta, horizon);
  Eigen::MatrixXd eps = balanced_deviations(spec.seed, agents, horizon, d);
  normalize_deviations(eps, p.delta);

  std::vector<Eigen::VectorXd> tastes;
  tastes.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    Eigen::VectorXd taste(horizon + 1);
    taste[0] = 1.0 / d.n_beta;
    for (int n = 1; n <= horizon; ++n) {
      taste[n] = (1.0 + p.delta * eps(i, n - 1)) / d.n_beta;
    }
    tastes.push_back(std::move(taste));
  }
  return constant_endowment_economy(d, 1.0, std::move(tastes), p.omega_bar);
}

Economy generate_two_type(const ScenarioSpec& spec, int horizon, double beta, int agents) {
  const ScenarioParams& p = spec.params;
  if (agents % 2 != 0) {
    throw ValidationError("InfeasibleConstraints: two-type family needs an even agent count");
  }
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("delta: must lie in (0,1)");
  DiscountStructure d = DiscountStructure::make(beta, horizon);

  std::vector<Eigen::VectorXd> tastes;
  tastes.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    const double type = i < agents / 2 ? 1.0 : -1.0;
    Eigen::VectorXd taste(horizon + 1);
    taste[0] = 1.0;
    for (int n = 1; n <= horizon; ++n) {
      const double odd_even = (n % 2 == 1) ? 1.0 : -1.0;  // +1 odd dates, -1 even
      taste[n] = 1.0 + type * p.delta * odd_even;
    }
    tastes.push_back(std::move(taste));
  }
  return constant_endowment_economy(d, 1.0, std::move(tastes), p.omega_bar);
}

}  // namespace

IsoelasticExampleParams isoelastic_params(const ScenarioSpec& spec, int horizon, double beta,
                                          int agents) {
  const ScenarioParams& p = spec.params;
  if (spec.family != ScenarioFamily::IsoelasticExample) {
    throw ValidationError("isoelastic_params: spec family must be isoelastic-example");
  }
  check_common(horizon, agents, p);
  if (agents % 4 != 0) {
    throw ValidationError(
        "InfeasibleConstraints: isoelastic example needs agents divisible by 4");
  }
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("delta: must lie in (0,1)");
  if (!(p.s_base - p.s_amp > 0.0 && p.s_base + p.s_amp < p.omega_bar)) {
    throw ValidationError("s profile: s_base +- s_amp must lie in (0, omega_bar)");
  }
  DiscountStructure d = DiscountStructure::make(beta, horizon);

  IsoelasticExampleParams out;
  out.horizon = horizon;
  out.beta = beta;
  out.sigma = p.sigma;
  out.delta = p.delta;
  out.omega_bar = p.omega_bar;
  out.s.resize(horizon + 1);
  for (int n = 0; n <= horizon; ++n) {
    out.s[n] = p.s_base + ((n % 2 == 1) ? p.s_amp : -p.s_amp);
  }

  // Quad structure: agents (4g..4g+3) share one balanced row up to sign,
  // epsilon = (e, e, -e, -e) and eta = (+1, -1, +1, -1), so the date balance,
  // eta balance, and eta-epsilon balance hold exactly by cancellation. The
  // per-agent discount balance comes from projecting each base row.
  const int quads = agents / 4;
  const Eigen::VectorXd b = d.powers.segment(1, horizon);
  const double bb = b.squaredNorm();
  Eigen::MatrixXd base(quads, horizon);
  for (int g = 0; g < quads; ++g) {
    for (int n = 0; n < horizon; ++n) {
      base(g, n) = hashrand::rademacher(spec.seed, static_cast<std::uint64_t>(g),
                                        static_cast<std::uint64_t>(n + 1), 7);
    }
    const double coef = base.row(g).dot(b) / bb;
    base.row(g) -= coef * b.transpose();
  }
  normalize_deviations(base, p.delta);

  out.epsilon.resize(agents, horizon);
  out.eta.resize(agents);
  for (int g = 0; g < quads; ++g) {
    for (int k = 0; k < 4; ++k) {
      const int i = 4 * g + k;
      out.epsilon.row(i) = (k < 2 ? 1.0 : -1.0) * base.row(g);
      out.eta[i] = (k % 2 == 0) ? 1 : -1;
    }
  }
  return out;
}

Economy generate(const ScenarioSpec& spec, int horizon, double beta, int agents) {
  check_common(horizon, agents, spec.params);
  switch (spec.family) {
    case ScenarioFamily::IdenticalBenchmark: {
      DiscountStructure d = DiscountStructure::make(beta, horizon);
      std::vector<Eigen::VectorXd> tastes(agents, Eigen::VectorXd::Ones(horizon + 1));
      return constant_endowment_economy(d, spec.params.sigma, std::move(tastes),
                                        spec.params.omega_bar);
    }
    case ScenarioFamily::SparseTastes:
      return generate_sparse(spec, horizon, beta, agents);
    case ScenarioFamily::DispersedHeterogeneity:
      return generate_dispersed(spec, horizon, beta, agents);
    case ScenarioFamily::TwoTypeCounterexample:
      return generate_two_type(spec, horizon, beta, agents);
    case ScenarioFamily::IsoelasticExample:
      return isoelastic_example_economy(isoelastic_params(spec, horizon, beta, agents));
  }
  throw ValidationError("generate: unknown family");
}

ConstraintReport verify_constraints(const Economy& e, const ScenarioSpec& spec) {
  const int N = e.horizon();
  const int I = e.agent_count();
  const DiscountStructure& d = e.discount;
  const ScenarioParams& p = spec.params;
  ConstraintReport rep;
  auto add = [&](const std::string& name, double residual) {
    rep.entries.push_back({name, residual});
  };

  switch (spec.family) {
    case ScenarioFamily::IdenticalBenchmark:
      break;  // vacuous
    case ScenarioFamily::SparseTastes: {
      double worst = 0.0;
      for (const AgentSpec& a : e.agents) {
        double mass = 0.0;
        for (int n = 1; n <= N; ++n) mass += d.powers[n] * std::abs(a.kernel.taste[n] - 1.0);
        worst = std::max(worst, mass - p.mass);
      }
      add("deviation-mass <= mass", std::max(0.0, worst));
      break;
    }
    case ScenarioFamily::DispersedHeterogeneity: {
      // Recover eps_in = (N_beta tau_in - 1) / delta.
      Eigen::MatrixXd eps(I, N);
      for (int i = 0; i < I; ++i) {
        for (int n = 1; n <= N; ++n) {
          eps(i, n - 1) = (d.n_beta * e.agents[i].kernel.taste[n] - 1.0) / p.delta;
        }
      }
      double agent_bal = 0.0, date_bal = 0.0;
      for (int i = 0; i < I; ++i) {
        double acc = 0.0;
        for (int n = 1; n <= N; ++n) acc += d.powers[n] * eps(i, n - 1);
        agent_bal = std::max(agent_bal, std::abs(acc) / d.n_beta);
      }
      for (int n = 0; n < N; ++n) {
        date_bal = std::max(date_bal, std::abs(eps.col(n).sum()) / I);
      }
      add("agent-balance (1/N_beta) sum_n beta^n eps_in", agent_bal);
      add("date-balance (1/I) sum_i eps_in", date_bal);
      break;
    }
    case ScenarioFamily::TwoTypeCounterexample: {
      double anti = 0.0, magnitude = 0.0;
      for (int n = 1; n <= N; ++n) {
        double col = 0.0;
        for (int i = 0; i < I; ++i) {
          col += e.agents[i].kernel.taste[n] - 1.0;
          magnitude = std::max(
              magnitude, std::abs(std::abs(e.agents[i].kernel.taste[n] - 1.0) - p.delta));
        }
        anti = std::max(anti, std::abs(col) / I);
      }
      add("taste-antisymmetry (1/I) sum_i (tau_in - 1)", anti);
      add("unit-magnitude |tau_in - 1| = delta", magnitude);
      break;
    }
    case ScenarioFamily::IsoelasticExample: {
      // Recover eps from tau_in = (1 + delta eps_in)^{1/sigma} and eta from
      // the date-0 endowment.
      const double s0 = p.s_base - p.s_amp;
      Eigen::MatrixXd eps(I, N);
      Eigen::VectorXd eta(I);
      for (int i = 0; i < I; ++i) {
        const AgentSpec& a = e.agents[i];
        eta[i] = (a.endowment[0] - p.omega_bar) / s0;
        for (int n = 1; n <= N; ++n) {
          eps(i, n - 1) = (std::pow(a.kernel.taste[n], a.kernel.sigma) - 1.0) / p.delta;
        }
      }
      double agent_bal = 0.0, date_bal = 0.0, eta_eps_bal = 0.0;
      for (int i = 0; i < I; ++i) {
        double acc = 0.0;
        for (int n = 1; n <= N; ++n) acc += d.powers[n] * eps(i, n - 1);
        agent_bal = std::max(agent_bal, std::abs(acc) / d.n_beta);
      }
      for (int n = 0; n < N; ++n) {
        date_bal = std::max(date_bal, std::abs(eps.col(n).sum()) / I);
        eta_eps_bal = std::max(eta_eps_bal, std::abs(eta.dot(eps.col(n))) / I);
      }
      add("agent-balance (1/N_beta) sum_n beta^n eps_in", agent_bal);
      add("date-balance (1/I) sum_i eps_in", date_bal);
      add("eta-balance (1/I) sum_i eta_i", std::abs(eta.sum()) / I);
      add("eta-epsilon-balance (1/I) sum_i eta_i eps_in", eta_eps_bal);
      break;
    }
  }

  rep.sup_residual = 0.0;
  for (const auto& entry : rep.entries) {
    rep.sup_residual = std::max(rep.sup_residual, entry.residual);
  }
  rep.pass = rep.sup_residual <= 1e-12;
  return rep;
}

}  // namespace dexlab
