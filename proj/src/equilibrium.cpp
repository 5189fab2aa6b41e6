#include "dexlab/equilibrium.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <sstream>

#include "dexlab/analysis.hpp"

namespace dexlab {

namespace {

struct MarketEval {
  Eigen::MatrixXd allocation;  // I x (N+1)
  Eigen::VectorXd shadows;
  Eigen::VectorXd z;
  double z0 = 0.0;
  double residual_sup = 0.0;
  double walras = 0.0;  // |z0 + p.z| / (1 + ||p||_1)
};

MarketEval evaluate_market(const Economy& e, const Eigen::VectorXd& prices,
                           double demand_rtol) {
  const int N = e.horizon();
  const int I = e.agent_count();
  MarketEval ev;
  ev.allocation.resize(I, N + 1);
  ev.shadows.resize(I);
  ev.z = -e.aggregate_endowment.segment(1, N);
  ev.z0 = -e.aggregate_endowment[0];

  DemandOptions opts;
  opts.lambda_rtol = demand_rtol;
  for (int i = 0; i < I; ++i) {
    const DemandResult r =
        agent_demand(e.agents[i].kernel, e.discount, e.agents[i].endowment, prices, opts);
    ev.allocation.row(i) = r.consumption.transpose();
    ev.shadows[i] = r.shadow_value;
    ev.z0 += r.consumption[0];
    ev.z += r.consumption.segment(1, N);
  }
  ev.residual_sup = ev.z.cwiseAbs().maxCoeff();
  ev.walras = std::abs(ev.z0 + prices.dot(ev.z)) / (1.0 + prices.lpNorm<1>());
  return ev;
}

struct StartOutcome {
  bool converged = false;
  bool singular_stall = false;  // stalled after the damped fixed-point fallback
  int iterations = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  double walras_sup = 0.0;
  Eigen::VectorXd prices;
  MarketEval eval;
};

// One damped Newton run in y = log p. The Jacobian in y-coordinates is
// J_y(n, m) = (d z_n / d p_m) p_m; a singular or non-finite solve falls back
// to a small tatonnement-direction step.
StartOutcome solve_from(const Economy& e, Eigen::VectorXd y, double tol, int max_iter,
                        double demand_rtol) {
  const int N = e.horizon();
  StartOutcome out;

  Eigen::VectorXd p = y.array().exp();
  MarketEval ev = evaluate_market(e, p, demand_rtol);
  out.walras_sup = ev.walras;

  for (int iter = 0; iter <= max_iter; ++iter) {
    out.best_residual = std::min(out.best_residual, ev.residual_sup);
    if (ev.residual_sup <= tol) {
      out.converged = true;
      out.iterations = iter;
      out.prices = p;
      out.eval = std::move(ev);
      return out;
    }
    if (iter == max_iter) break;

    const Eigen::MatrixXd jac = aggregate_jacobian(e, p, ev.allocation);
    Eigen::MatrixXd jac_y = jac.transpose();
    for (int m = 0; m < N; ++m) jac_y.col(m) *= p[m];
    Eigen::VectorXd dy = jac_y.partialPivLu().solve(-ev.z);

    bool fallback = !dy.allFinite();
    if (fallback) {
      dy = 0.05 * ev.z / (1.0 + ev.residual_sup);
    }
    const double cap = dy.cwiseAbs().maxCoeff();
    if (cap > 2.0) dy *= 2.0 / cap;

    // Backtrack on ||z||_inf; retry once with the tatonnement step if the
    // Newton direction stalls.
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double t = 1.0;
      while (t >= 1e-8) {
        Eigen::VectorXd y_try = (y + t * dy).cwiseMax(-60.0).cwiseMin(60.0);
        Eigen::VectorXd p_try = y_try.array().exp();
        MarketEval trial = evaluate_market(e, p_try, demand_rtol);
        out.walras_sup = std::max(out.walras_sup, trial.walras);
        if (trial.residual_sup <= (1.0 - 1e-4 * t) * ev.residual_sup) {
          y = std::move(y_try);
          p = std::move(p_try);
          ev = std::move(trial);
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted && !fallback) {
        fallback = true;
        dy = 0.05 * ev.z / (1.0 + ev.residual_sup);
      } else {
        break;
      }
    }
    if (!accepted) {
      out.iterations = iter;
      out.singular_stall = fallback;
      return out;  // stalled
    }
  }
  out.iterations = max_iter;
  return out;
}

}  // namespace

ExcessDemand excess_demand(const Economy& e, const Eigen::VectorXd& prices,
                           double demand_rtol) {
  MarketEval ev = evaluate_market(e, prices, demand_rtol);
  return {std::move(ev.z), ev.z0};
}

EquilibriumResult solve_equilibrium(const Economy& e, const SolveOptions& opts) {
  const int N = e.horizon();
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-10 * e.agent_count();

  Eigen::VectorXd y0(N);
  if (opts.initial_prices.size() == N) {
    for (int n = 0; n < N; ++n) {
      if (!(opts.initial_prices[n] > 0.0)) {
        throw ValidationError("initial_prices must be strictly positive");
      }
      y0[n] = std::log(opts.initial_prices[n]);
    }
  } else if (opts.initial_prices.size() != 0) {
    throw ValidationError("initial_prices: length must equal horizon");
  } else {
    for (int n = 0; n < N; ++n) y0[n] = (n + 1) * std::log(e.discount.beta);
  }

  double best_residual = std::numeric_limits<double>::infinity();
  int best_iterations = 0;
  bool any_singular_stall = false;
  const int starts = std::max(1, opts.starts);
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd y = y0;
    if (s > 0) {
      for (int n = 0; n < N; ++n) {
        y[n] += 0.5 * hashrand::normal(opts.seed, static_cast<std::uint64_t>(s),
                                       static_cast<std::uint64_t>(n));
      }
    }
    StartOutcome run = solve_from(e, std::move(y), tol, opts.max_iter, opts.demand_rtol);
    if (run.converged) {
      EquilibriumResult res;
      res.prices = run.prices;
      res.allocation = std::move(run.eval.allocation);
      res.shadow_values = std::move(run.eval.shadows);
      res.residual_sup = run.eval.residual_sup;
      res.price_ratios = run.prices.cwiseQuotient(e.discount.powers.segment(1, N));
      res.iterations = run.iterations;
      res.starts_used = s + 1;
      res.walras_sup = run.walras_sup;
      return res;
    }
    if (run.best_residual < best_residual) {
      best_residual = run.best_residual;
      best_iterations = run.iterations;
    }
    any_singular_stall = any_singular_stall || run.singular_stall;
  }

  std::ostringstream msg;
  msg << (any_singular_stall ? "JacobianSingular" : "NoConvergence") << ": best residual "
      << best_residual << " after " << best_iterations << " iterations over " << starts
      << " starts (tol " << tol << ")";
  throw NumericalError(msg.str());
}

Economy isoelastic_example_economy(const IsoelasticExampleParams& params) {
  const int N = params.horizon;
  const int I = static_cast<int>(params.eta.size());
  DiscountStructure d = DiscountStructure::make(params.beta, N);
  if (params.epsilon.rows() != I || params.epsilon.cols() != N) {
    throw ValidationError("epsilon: must be I x N");
  }
  if (params.s.size() != N + 1) {
    throw ValidationError("s: length must be horizon+1");
  }
  std::vector<AgentSpec> agents;
  agents.reserve(I);
  for (int i = 0; i < I; ++i) {
    Eigen::VectorXd taste(N + 1), endow(N + 1);
    taste[0] = 1.0;
    endow[0] = params.omega_bar + params.eta[i] * params.s[0];
    for (int n = 1; n <= N; ++n) {
      taste[n] = std::pow(1.0 + params.delta * params.epsilon(i, n - 1), 1.0 / params.sigma);
      endow[n] = params.omega_bar + params.eta[i] * params.s[n];
    }
    agents.push_back({UtilityKernel::isoelastic(params.sigma, std::move(taste)),
                      std::move(endow)});
  }
  return Economy::make(std::move(d), std::move(agents));
}

EquilibriumResult isoelastic_example_oracle(const IsoelasticExampleParams& params) {
  const int N = params.horizon;
  const int I = static_cast<int>(params.eta.size());
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw ValidationError("delta: must lie in (0,1)");
  }
  if (!(params.sigma > 0.0)) {
    throw ValidationError("sigma: must be > 0");
  }
  DiscountStructure d = DiscountStructure::make(params.beta, N);
  if (params.epsilon.rows() != I || params.epsilon.cols() != N || params.s.size() != N + 1) {
    throw ValidationError("isoelastic example: inconsistent dimensions");
  }
  for (int n = 0; n <= N; ++n) {
    if (!(params.s[n] > 0.0 && params.s[n] < params.omega_bar)) {
      throw ValidationError("s[" + std::to_string(n) + "]: must lie in (0, omega_bar)");
    }
  }
  for (int i = 0; i < I; ++i) {
    if (params.eta[i] != 1 && params.eta[i] != -1) {
      throw ValidationError("eta entries must be +1 or -1");
    }
  }

  const double ctol = 1e-12;
  auto violation = [&](const std::string& name, double magnitude) {
    std::ostringstream msg;
    msg << "ConstraintViolation: " << name << " residual " << magnitude << " exceeds " << ctol;
    throw ValidationError(msg.str());
  };

  for (int i = 0; i < I; ++i) {
    double acc = 0.0;
    for (int n = 1; n <= N; ++n) acc += d.powers[n] * params.epsilon(i, n - 1);
    if (std::abs(acc) / d.n_beta > ctol) {
      violation("agent-balance sum_n beta^n e_in = 0 (agent " + std::to_string(i) + ")",
                std::abs(acc) / d.n_beta);
    }
  }
  for (int n = 0; n < N; ++n) {
    const double col = params.epsilon.col(n).sum() / I;
    if (std::abs(col) > ctol) {
      violation("date-balance sum_i e_in = 0 (date " + std::to_string(n + 1) + ")",
                std::abs(col));
    }
  }
  const double eta_sum = static_cast<double>(params.eta.sum()) / I;
  if (std::abs(eta_sum) > ctol) violation("eta-balance sum_i eta_i = 0", std::abs(eta_sum));
  for (int n = 0; n < N; ++n) {
    double acc = 0.0;
    for (int i = 0; i < I; ++i) acc += params.eta[i] * params.epsilon(i, n);
    if (std::abs(acc) / I > ctol) {
      violation("eta-epsilon-balance sum_i eta_i e_in = 0 (date " + std::to_string(n + 1) + ")",
                std::abs(acc) / I);
    }
  }
  const double floor = 1.0 + params.delta * params.epsilon.minCoeff();
  if (!(floor > 0.0)) {
    throw ValidationError("ConstraintViolation: 1 + delta e_in must stay positive, min " +
                          std::to_string(floor));
  }

  double s_weighted = params.s[0];
  for (int n = 1; n <= N; ++n) s_weighted += d.powers[n] * params.s[n];
  const double s_ba = s_weighted / (1.0 + d.n_beta);

  EquilibriumResult res;
  res.prices = d.powers.segment(1, N);
  res.price_ratios = Eigen::VectorXd::Ones(N);
  res.allocation.resize(I, N + 1);
  res.shadow_values.resize(I);
  for (int i = 0; i < I; ++i) {
    const double base = params.omega_bar + params.eta[i] * s_ba;
    res.allocation(i, 0) = base;
    for (int n = 1; n <= N; ++n) {
      res.allocation(i, n) = base * (1.0 + params.delta * params.epsilon(i, n - 1));
    }
    res.shadow_values[i] = std::pow(base, -1.0 / params.sigma);
  }

  // Diagnostics only: residual at the closed form via the demand evaluator.
  const Economy e = isoelastic_example_economy(params);
  MarketEval ev = evaluate_market(e, res.prices, 1e-13);
  res.residual_sup = ev.residual_sup;
  res.walras_sup = ev.walras;
  res.iterations = 0;
  res.starts_used = 0;
  return res;
}

}  // namespace dexlab
