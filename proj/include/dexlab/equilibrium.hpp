#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "dexlab/demand.hpp"

namespace dexlab {

struct ExcessDemand {
  Eigen::VectorXd z;  // z_n = sum_i xi_in(p) - Omega_n, n = 1..N
  double z0 = 0.0;    // same for the numeraire date
};

ExcessDemand excess_demand(const Economy& e, const Eigen::VectorXd& prices,
                           double demand_rtol = 1e-12);

struct SolveOptions {
  double tol = -1.0;  // sup-norm residual target; <= 0 means 1e-10 * agent count
  int max_iter = 200;
  int starts = 1;     // start 0 is the discount profile; others are seeded perturbations
  std::uint64_t seed = 0;
  double demand_rtol = 1e-12;
  Eigen::VectorXd initial_prices;  // optional override of the beta^n profile start
};

struct EquilibriumResult {
  Eigen::VectorXd prices;        // p_n, n = 1..N; p_0 = 1 is never varied
  Eigen::MatrixXd allocation;    // I x (N+1)
  Eigen::VectorXd shadow_values; // lambda_i
  double residual_sup = 0.0;     // ||z(p)||_inf at the returned prices
  Eigen::VectorXd price_ratios;  // q_n = p_n / beta^n
  int iterations = 0;
  int starts_used = 0;
  double walras_sup = 0.0;       // max over iterates of |z0 + p.z| / (1 + ||p||_1)
};

// Damped Newton on log-prices with the analytic excess-demand Jacobian,
// backtracking until ||z||_inf decreases. Iterates stay interior by
// construction. Throws NumericalError("NoConvergence: ...") if no start
// reaches the tolerance.
EquilibriumResult solve_equilibrium(const Economy& e, const SolveOptions& opts = {});

// The isoelastic example family: u_i0(x) = x^{1-1/sigma}/(1-1/sigma),
// u_in(x) = (1 + delta e_in)^{1/sigma} x^{1-1/sigma}/(1-1/sigma), endowments
// omega_in = omega_bar + eta_i s_n, with the four balance conditions
//   sum_n beta^n e_in = 0,  sum_i e_in = 0,  sum_i eta_i = 0,  sum_i eta_i e_in = 0.
struct IsoelasticExampleParams {
  int horizon = 0;
  double beta = 0.0;
  double sigma = 0.0;
  double delta = 0.0;
  double omega_bar = 0.0;
  Eigen::VectorXd s;        // s_0..s_N, each in (0, omega_bar)
  Eigen::MatrixXd epsilon;  // I x N, dates 1..N
  Eigen::VectorXi eta;      // entries in {-1, +1}
};

Economy isoelastic_example_economy(const IsoelasticExampleParams& params);

// Closed-form equilibrium of the example: p_n = beta^n,
// x_i0 = omega_bar + eta_i s_ba, x_in = x_i0 (1 + delta e_in),
// lambda_i = x_i0^{-1/sigma}, with s_ba = (s_0 + sum beta^n s_n)/(1 + N_beta).
// Throws ValidationError("ConstraintViolation: ...") naming the violated
// balance condition and its magnitude. residual_sup/walras_sup are filled by
// evaluating excess demand at the closed form (diagnostic only).
EquilibriumResult isoelastic_example_oracle(const IsoelasticExampleParams& params);

}  // namespace dexlab
