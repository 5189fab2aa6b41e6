#include "dexlab/analysis.hpp"

#include <cmath>

namespace dexlab {

namespace {

// Equilibrium-level per-agent quantities shared by the quadratic machinery.
struct AgentStats {
  Eigen::VectorXd r;      // r_0..r_N
  double r_bar = 0.0;     // r_0 + sum p_n r_n
  double r_future = 0.0;  // sum p_n r_n
};

AgentStats agent_stats(const AgentSpec& a, const Eigen::VectorXd& prices,
                       const Eigen::VectorXd& x_agent) {
  const int N = static_cast<int>(prices.size());
  AgentStats s;
  s.r.resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    if (!(x_agent[n] > 0.0)) {
      throw ValidationError("agent allocation must be interior (x > 0)");
    }
    s.r[n] = a.kernel.sigma * x_agent[n];
  }
  s.r_future = 0.0;
  for (int n = 1; n <= N; ++n) s.r_future += prices[n - 1] * s.r[n];
  s.r_bar = s.r[0] + s.r_future;
  return s;
}

double lambda_of(const AgentStats& s, const Eigen::VectorXd& q) {
  const int N = static_cast<int>(q.size());
  double acc = 0.0;
  for (int n = 1; n <= N; ++n) acc += s.r[n] * q[n - 1];
  return acc / s.r_future;
}

}  // namespace

AgentSlutsky agent_slutsky(const Economy& e, int agent, const Eigen::VectorXd& prices,
                           const Eigen::VectorXd& x_agent) {
  const int N = e.horizon();
  const AgentSpec& a = e.agents[agent];
  const AgentStats s = agent_stats(a, prices, x_agent);

  AgentSlutsky out;
  out.risk_tolerances = s.r;
  out.r_bar = s.r_bar;
  out.r_bar_future = s.r_future;
  out.substitution.resize(N, N);
  out.income.resize(N, N);
  for (int m = 1; m <= N; ++m) {
    for (int n = 1; n <= N; ++n) {
      double sub = s.r[m] * s.r[n] / s.r_bar;
      if (m == n) sub -= s.r[n] / prices[n - 1];
      out.substitution(m - 1, n - 1) = sub;
      out.income(m - 1, n - 1) = (s.r[n] / s.r_bar) * (a.endowment[m] - x_agent[m]);
    }
  }
  return out;
}

Eigen::MatrixXd aggregate_jacobian(const Economy& e, const Eigen::VectorXd& prices,
                                   const Eigen::MatrixXd& allocation) {
  const int N = e.horizon();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < e.agent_count(); ++i) {
    const AgentSpec& a = e.agents[i];
    const AgentStats s = agent_stats(a, prices, allocation.row(i).transpose());
    // S_i + M_i assembled in one pass: (r_m r_n / r_bar) - diag + income column
    // structure (r_n / r_bar)(omega_m - x_m).
    for (int m = 1; m <= N; ++m) {
      const double net = a.endowment[m] - allocation(i, m);
      for (int n = 1; n <= N; ++n) {
        jac(m - 1, n - 1) += (s.r[m] + net) * s.r[n] / s.r_bar;
      }
      jac(m - 1, m - 1) -= s.r[m] / prices[m - 1];
    }
  }
  return jac;
}

Eigen::MatrixXd aggregate_jacobian(const Economy& e, const EquilibriumResult& eq) {
  return aggregate_jacobian(e, eq.prices, eq.allocation);
}

Eigen::MatrixXd fd_jacobian(const Economy& e, const Eigen::VectorXd& prices,
                            double rel_step, double demand_rtol) {
  const int N = e.horizon();
  Eigen::MatrixXd jac(N, N);
  for (int m = 0; m < N; ++m) {
    const double h = rel_step * std::max(1.0, prices[m]);
    Eigen::VectorXd up = prices, dn = prices;
    up[m] += h;
    dn[m] -= h;
    const ExcessDemand zu = excess_demand(e, up, demand_rtol);
    const ExcessDemand zd = excess_demand(e, dn, demand_rtol);
    jac.row(m) = (zu.z - zd.z).transpose() / (2.0 * h);
  }
  return jac;
}

double psi_functional(const Economy& e, const EquilibriumResult& eq, const Eigen::VectorXd& q) {
  double acc = 0.0;
  for (int i = 0; i < e.agent_count(); ++i) {
    const AgentStats s =
        agent_stats(e.agents[i], eq.prices, eq.allocation.row(i).transpose());
    const double coef = (2.0 * s.r[0] + e.agents[i].endowment[0] - eq.allocation(i, 0)) / s.r_bar;
    acc += coef * s.r_future * lambda_of(s, q);
  }
  return acc;
}

Eigen::VectorXd agent_lambdas(const Economy& e, const EquilibriumResult& eq,
                              const Eigen::VectorXd& q) {
  Eigen::VectorXd lambdas(e.agent_count());
  for (int i = 0; i < e.agent_count(); ++i) {
    const AgentStats s =
        agent_stats(e.agents[i], eq.prices, eq.allocation.row(i).transpose());
    lambdas[i] = lambda_of(s, q);
  }
  return lambdas;
}

Decomposition decompose_perturbation(const Eigen::VectorXd& q, const Economy& e,
                                     const EquilibriumResult& eq) {
  Decomposition out;
  out.psi_pbar = psi_functional(e, eq, eq.prices);

  // Scale of Psi(p): the same sum with every signed coefficient replaced by
  // its absolute value.
  double scale = 0.0;
  for (int i = 0; i < e.agent_count(); ++i) {
    const AgentStats s =
        agent_stats(e.agents[i], eq.prices, eq.allocation.row(i).transpose());
    const double coef =
        (2.0 * s.r[0] + std::abs(e.agents[i].endowment[0]) + std::abs(eq.allocation(i, 0))) /
        s.r_bar;
    scale += coef * s.r_future * std::abs(lambda_of(s, eq.prices));
  }
  if (std::abs(out.psi_pbar) <= 1e-12 * scale) {
    throw NumericalError("DegeneratePsi: |Psi(p)| = " + std::to_string(out.psi_pbar) +
                         " below 1e-12 of scale " + std::to_string(scale));
  }

  out.psi_q = psi_functional(e, eq, q);
  out.alpha = out.psi_q / out.psi_pbar;
  out.u = q - out.alpha * eq.prices;
  return out;
}

Eigen::VectorXd project_ker_psi(const Eigen::VectorXd& d, const Economy& e,
                                const EquilibriumResult& eq) {
  return decompose_perturbation(d, e, eq).u;
}

QuadraticTerms quadratic_terms(const Economy& e, const EquilibriumResult& eq,
                               const Eigen::VectorXd& q) {
  const int N = e.horizon();
  const Decomposition dec = decompose_perturbation(q, e, eq);

  QuadraticTerms out;
  out.alpha = dec.alpha;
  out.u = dec.u;
  out.psi_pbar = dec.psi_pbar;
  out.lambda_i.resize(e.agent_count());

  for (int i = 0; i < e.agent_count(); ++i) {
    const AgentSpec& a = e.agents[i];
    const AgentStats s = agent_stats(a, eq.prices, eq.allocation.row(i).transpose());
    const double lam = lambda_of(s, dec.u);
    out.lambda_i[i] = lam;

    out.A += (s.r_future / s.r_bar) * (s.r[0] + a.endowment[0] - eq.allocation(i, 0));

    double s_i = 0.0;
    double trade_dot_u = 0.0;
    for (int n = 1; n <= N; ++n) {
      const double pn = eq.prices[n - 1];
      const double dev = dec.u[n - 1] - pn * lam;
      s_i += (s.r[n] / pn) * dev * dev;
      trade_dot_u += (eq.allocation(i, n) - a.endowment[n]) * dec.u[n - 1];
    }
    out.S_of_u += s_i;
    out.R_of_u += (s.r[0] / s.r_bar) * trade_dot_u;
    out.M_of_u += (s.r_future / s.r_bar) * lam * (-trade_dot_u - s.r[0] * lam);
  }
  return out;
}

GraphForm substitution_graph_form(const Economy& e, const EquilibriumResult& eq,
                                  const Eigen::VectorXd& u) {
  const int N = e.horizon();
  GraphForm out;
  out.weights = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < e.agent_count(); ++i) {
    const AgentStats s =
        agent_stats(e.agents[i], eq.prices, eq.allocation.row(i).transpose());
    Eigen::VectorXd pr(N);
    for (int n = 1; n <= N; ++n) pr[n - 1] = eq.prices[n - 1] * s.r[n];
    out.weights.noalias() += pr * pr.transpose() / s.r_future;
  }
  Eigen::VectorXd v = u.cwiseQuotient(eq.prices);
  double acc = 0.0;
  for (int m = 0; m < N; ++m) {
    for (int n = 0; n < N; ++n) {
      const double diff = v[m] - v[n];
      acc += out.weights(m, n) * diff * diff;
    }
  }
  out.value = 0.5 * acc;
  return out;
}

RateReport rate_ratios(const Economy& e, const EquilibriumResult& eq, const Eigen::VectorXd& u) {
  const int N = e.horizon();
  RateReport out;
  out.v = u.cwiseQuotient(eq.prices);
  const double vnorm = beta_norm(out.v, e.discount);
  if (!(vnorm > 0.0)) {
    throw NumericalError("ZeroDistortion: ||v||_{N,beta} = 0");
  }

  double a_term = 0.0, s_term = 0.0, r_term = 0.0, m_term = 0.0;
  for (int i = 0; i < e.agent_count(); ++i) {
    const AgentSpec& a = e.agents[i];
    const AgentStats s = agent_stats(a, eq.prices, eq.allocation.row(i).transpose());
    const double lam = lambda_of(s, u);
    a_term += (s.r_future / s.r_bar) * (s.r[0] + a.endowment[0] - eq.allocation(i, 0));
    double s_i = 0.0, trade_dot_u = 0.0;
    for (int n = 1; n <= N; ++n) {
      const double pn = eq.prices[n - 1];
      const double dev = u[n - 1] - pn * lam;
      s_i += (s.r[n] / pn) * dev * dev;
      trade_dot_u += (eq.allocation(i, n) - a.endowment[n]) * u[n - 1];
    }
    s_term += s_i;
    r_term += (s.r[0] / s.r_bar) * trade_dot_u;
    m_term += (s.r_future / s.r_bar) * lam * (-trade_dot_u - s.r[0] * lam);
  }

  const double count = static_cast<double>(e.agent_count());
  const double nb = e.discount.n_beta;
  out.s_ratio = s_term / (count * nb * vnorm * vnorm);
  out.m_ratio = std::abs(m_term) / (count * nb * vnorm * vnorm);
  out.r_ratio = std::abs(r_term) / (count * vnorm);
  out.a_ratio = a_term / count;
  return out;
}

}  // namespace dexlab
