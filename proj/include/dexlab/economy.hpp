#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "dexlab/common.hpp"

namespace dexlab {

// Discounting data for a truncated dated-commodity economy with horizon N.
// n_beta is the effective number of future commodities, sum_{n=1}^N beta^n,
// accumulated by direct summation so it stays exact for beta near 1.
struct DiscountStructure {
  double beta = 0.0;
  int horizon = 0;               // N >= 1
  double n_beta = 0.0;           // sum_{n=1}^N beta^n
  Eigen::VectorXd powers;        // beta^n, n = 0..N
  Eigen::VectorXd weights;       // pi_n = beta^n / n_beta, n = 1..N

  static DiscountStructure make(double beta, int horizon);
};

// sum_{n=1}^N beta^n by direct summation.
double effective_commodity_count(const DiscountStructure& d);

// (1/N_beta) sum_{n=1}^N beta^n x_n y_n. Vectors are indexed by future dates
// 1..N (length N).
double beta_inner_product(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const DiscountStructure& d);
double beta_norm(const Eigen::VectorXd& x, const DiscountStructure& d);

enum class UtilityFamily { Log, Isoelastic };

// Per-date utility u_n(x) = taste_n * (x^{1-1/sigma} - 1)/(1 - 1/sigma),
// with the sigma = 1 limit taste_n * log x. One elasticity per agent.
struct UtilityKernel {
  UtilityFamily family = UtilityFamily::Log;
  double sigma = 1.0;
  Eigen::VectorXd taste;  // tau_n > 0, n = 0..N

  // |sigma - 1| < 1e-12 collapses to the Log branch to avoid exponent
  // cancellation in x^{1-1/sigma}.
  static UtilityKernel make(UtilityFamily family, double sigma, Eigen::VectorXd taste);
  static UtilityKernel log_kernel(Eigen::VectorXd taste);
  static UtilityKernel isoelastic(double sigma, Eigen::VectorXd taste);

  bool is_log() const { return family == UtilityFamily::Log; }
  int dates() const { return static_cast<int>(taste.size()); }

  // u'_n(x) = tau_n x^{-1/sigma}; requires x > 0.
  double marginal_utility(int date, double x) const;
  // u''_n(x) = -(tau_n/sigma) x^{-1/sigma - 1}.
  double second_derivative(int date, double x) const;
};

// u'_n(x) / (-u''_n(x)) = sigma * x.
double risk_tolerance(const UtilityKernel& k, int date, double x);

struct AgentSpec {
  UtilityKernel kernel;
  Eigen::VectorXd endowment;  // omega_n >= 0, n = 0..N
};

struct Economy {
  DiscountStructure discount;
  std::vector<AgentSpec> agents;
  Eigen::VectorXd aggregate_endowment;  // Omega_n = sum_i omega_in, n = 0..N

  int horizon() const { return discount.horizon; }
  int agent_count() const { return static_cast<int>(agents.size()); }

  // Validates: uniform lengths N+1, positive tastes, nonnegative endowments
  // with positive discounted total per agent, Omega_n > 0 at every date.
  static Economy make(DiscountStructure discount, std::vector<AgentSpec> agents);
};

// User-supplied constants standing in for the paper-style uniform bounds;
// the paper fixes none numerically.
struct AssumptionThresholds {
  double c_u = 0.1;
  double C_u = 10.0;
  double c_omega = 0.1;
  double C_omega = 10.0;
  double c_w = 0.05;
  double C_w = 10.0;
};

// Empirical counterparts of the baseline assumption bounds, computed exactly
// from taste/endowment data (no sampling needed for this utility class).
struct AssumptionAudit {
  std::pair<double, double> marginal_ratio_bounds;       // tau_in / tau_i0 over i, n
  std::pair<double, double> tolerance_slope_bounds;      // sigma_i over i
  std::pair<double, double> per_capita_endowment_bounds; // Omega_n / I over n
  std::vector<double> discounted_endowment_ratios;       // per agent, sum_{n>=1} beta^n w_in / N_beta
  double endowment_sup = 0.0;                            // max over i, n
  bool a2_pass = false;
  bool a3_pass = false;
  bool a4_pass = false;
};

AssumptionAudit audit_assumptions(const Economy& e, const AssumptionThresholds& t);

}  // namespace dexlab
