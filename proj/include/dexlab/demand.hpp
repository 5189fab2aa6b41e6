#pragma once

#include <Eigen/Core>

#include "dexlab/economy.hpp"

namespace dexlab {

struct DemandOptions {
  double lambda_rtol = 1e-12;   // relative tolerance on the shadow value
  int max_iter = 100;
  double numeraire_price = 1.0; // date-0 price; non-unit values express the
                                // unnormalized system for homogeneity audits
};

struct DemandResult {
  Eigen::VectorXd consumption;  // x_n, n = 0..N
  double shadow_value = 0.0;    // lambda: beta^n u'_n(x_n) = lambda p_n, p_0 = 1
  double budget_residual = 0.0; // x_0 + sum p_n x_n - w at the solution
};

// Marshallian demand at future prices p (length N, date 0 is the numeraire)
// and wealth w. x_n(lambda) = (beta^n tau_n / (lambda p_n))^sigma in closed
// form; lambda is the root of the strictly decreasing budget map, found by
// bracketing (doubling/halving) plus safeguarded Newton.
DemandResult agent_demand(const UtilityKernel& k, const DiscountStructure& d,
                          double wealth, const Eigen::VectorXd& prices,
                          const DemandOptions& opts = {});

// Wealth evaluated from an endowment vector: w = omega_0 + sum p_n omega_n.
DemandResult agent_demand(const UtilityKernel& k, const DiscountStructure& d,
                          const Eigen::VectorXd& endowment, const Eigen::VectorXd& prices,
                          const DemandOptions& opts = {});

// Demand for the future-only problem max sum_{n>=1} beta^n u_n(z_n) s.t.
// sum p_n z_n <= w. Used by the Engel-slope audits.
struct FutureDemandResult {
  Eigen::VectorXd consumption;  // z_n, n = 1..N (length N)
  double shadow_value = 0.0;
};
FutureDemandResult future_demand(const UtilityKernel& k, const DiscountStructure& d,
                                 const Eigen::VectorXd& prices, double wealth,
                                 const DemandOptions& opts = {});

// m_n = beta^n u'_n(x_n) r_n(x_n) / sum_m beta^m u'_m(x_m) r_m(x_m) over the
// future dates; a probability vector. x_future has length N (dates 1..N). At
// an optimum this is the price-weighted Engel slope p_n dx_n/dw.
Eigen::VectorXd marginal_expenditure_shares(const UtilityKernel& k, const DiscountStructure& d,
                                            const Eigen::VectorXd& x_future);

// d xi_n / d w at the optimum for (p, w): r_n(x_n) / (r_0(x_0) + sum_m p_m r_m(x_m)),
// n = 0..N.
Eigen::VectorXd wealth_derivative(const UtilityKernel& k, const DiscountStructure& d,
                                  const Eigen::VectorXd& prices, double wealth,
                                  const DemandOptions& opts = {});

}  // namespace dexlab
