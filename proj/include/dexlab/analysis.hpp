#pragma once

#include <Eigen/Core>

#include "dexlab/equilibrium.hpp"

namespace dexlab {

// Matrix orientation throughout this module: entry (m, n) is d z_n / d p_m,
// the derivative of date-n excess demand with respect to the date-m price.
// Quadratic forms are orientation-free; finite-difference audits must match
// this layout.

// Per-agent demand derivative split at (p, x_i):
//   S_i(m,n) = r_m r_n / r_bar - (r_n / p_n) 1{m=n}
//   M_i(m,n) = (r_n / r_bar)(omega_m - x_m)
// with r_n the date-n risk tolerance at x_i, r_bar = r_0 + sum p_n r_n, and
// r_bar_future = sum p_n r_n.
struct AgentSlutsky {
  Eigen::MatrixXd substitution;    // N x N, symmetric negative definite
  Eigen::MatrixXd income;          // N x N
  Eigen::VectorXd risk_tolerances; // r_0..r_N
  double r_bar = 0.0;
  double r_bar_future = 0.0;
};

AgentSlutsky agent_slutsky(const Economy& e, int agent, const Eigen::VectorXd& prices,
                           const Eigen::VectorXd& x_agent);

// Dz = sum_i (S_i + M_i) evaluated at the given prices and per-agent optimal
// consumption rows (valid at any interior p, wealth revalued from endowments).
Eigen::MatrixXd aggregate_jacobian(const Economy& e, const Eigen::VectorXd& prices,
                                   const Eigen::MatrixXd& allocation);
Eigen::MatrixXd aggregate_jacobian(const Economy& e, const EquilibriumResult& eq);

// Central finite differences of excess_demand with endowment-revalued wealth;
// step h = rel_step * max(1, p_m). The independent audit route for the
// analytic Jacobian.
Eigen::MatrixXd fd_jacobian(const Economy& e, const Eigen::VectorXd& prices,
                            double rel_step = 1e-6, double demand_rtol = 1e-13);

// Psi(q) = sum_i ((2 r_i0 + omega_i0 - x_i0) / r_bar_i) r_bar_future_i Lambda_i(q),
// the functional whose kernel fixes the proportional/distortion split.
double psi_functional(const Economy& e, const EquilibriumResult& eq, const Eigen::VectorXd& q);

// Lambda_i(q) = sum_n r_in q_n / r_bar_future_i for every agent.
Eigen::VectorXd agent_lambdas(const Economy& e, const EquilibriumResult& eq,
                              const Eigen::VectorXd& q);

struct Decomposition {
  double alpha = 0.0;
  Eigen::VectorXd u;  // q - alpha p, Psi(u) = 0
  double psi_q = 0.0;
  double psi_pbar = 0.0;
};

// q = alpha p + u with Psi(u) = 0; alpha = Psi(q)/Psi(p). Throws
// NumericalError("DegeneratePsi: ...") when |Psi(p)| is below 1e-12 of its
// natural scale instead of silently perturbing.
Decomposition decompose_perturbation(const Eigen::VectorXd& q, const Economy& e,
                                     const EquilibriumResult& eq);

// Projection of a desired distortion d into ker Psi: d - (Psi(d)/Psi(p)) p.
Eigen::VectorXd project_ker_psi(const Eigen::VectorXd& d, const Economy& e,
                                const EquilibriumResult& eq);

// The four quadratic terms of the identity
//   q' Dz q = -A alpha^2 + R(u) alpha - S(u) + M(u):
//   A    = sum_i (r0_i / rb_i)(r_i0 + omega_i0 - x_i0)
//   S(u) = sum_i sum_n (r_in / p_n)(u_n - p_n Lambda_i(u))^2
//   R(u) = sum_i (r_i0 / rb_i) sum_m (x_im - omega_im) u_m
//   M(u) = sum_i (r0_i / rb_i) Lambda_i(u) [sum_m (omega_im - x_im) u_m - r_i0 Lambda_i(u)]
// where r0_i is the future price-weighted risk-tolerance sum and rb_i the full one.
struct QuadraticTerms {
  double A = 0.0;
  double S_of_u = 0.0;
  double R_of_u = 0.0;
  double M_of_u = 0.0;
  double alpha = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd lambda_i;  // Lambda_i(u)
  double psi_pbar = 0.0;
};

QuadraticTerms quadratic_terms(const Economy& e, const EquilibriumResult& eq,
                               const Eigen::VectorXd& q);

// S(u) rewritten as (1/2) sum_{m,n} w_mn (v_m - v_n)^2 with v_n = u_n / p_n
// and w_mn = sum_i (p_m r_im)(p_n r_in) / r_bar_future_i.
struct GraphForm {
  double value = 0.0;
  Eigen::MatrixXd weights;  // N x N, all entries positive
};

GraphForm substitution_graph_form(const Economy& e, const EquilibriumResult& eq,
                                  const Eigen::VectorXd& u);

// Normalized growth-rate diagnostics for a distortion u (v_n = u_n / p_n):
//   s_ratio = S(u) / (I N_beta ||v||^2),  m_ratio = |M(u)| / (I N_beta ||v||^2),
//   r_ratio = |R(u)| / (I ||v||),         a_ratio = A / I.
struct RateReport {
  double s_ratio = 0.0;
  double m_ratio = 0.0;
  double r_ratio = 0.0;
  double a_ratio = 0.0;
  Eigen::VectorXd v;
};

RateReport rate_ratios(const Economy& e, const EquilibriumResult& eq, const Eigen::VectorXd& u);

}  // namespace dexlab
