#pragma once

#include <Eigen/Core>

#include "dexlab/equilibrium.hpp"

namespace dexlab {

// Alignment statistics of the marginal-expenditure-share deviation profiles
// rho_in = m_in / mbar_n - 1 at a solved equilibrium:
//   a5       = (1/I^2) sum_{i,j} |<rho_i, rho_j>_{N,beta}|
//   a5_prime = (1/I^2) sum_{i,j} <t_i, t_j>_{N,beta} <rho_i, rho_j>_{N,beta}
// with t_i the net-trade profile. Spectral fields are populated only when all
// kernels are logarithmic, where the shares reduce to normalized tastes.
struct DiversificationReport {
  Eigen::MatrixXd rho;         // I x N
  Eigen::MatrixXd net_trades;  // I x N, x_in - omega_in
  double a5 = 0.0;
  double a5_prime = 0.0;
  bool spectral_available = false;
  Eigen::VectorXd spectral_eigs;  // eigenvalues of D^{1/2} Sigma D^{1/2}, ascending
  double spectral_sum_sq = 0.0;   // sum of squared eigenvalues
  double cs_gap = 0.0;            // spectral_sum_sq - a5^2, >= 0 up to roundoff
};

DiversificationReport diversification_report(const Economy& e, const EquilibriumResult& eq);

// D = (1/N_beta) diag(beta..beta^N), Sigma = (1/I) sum_i rho_i rho_i' with
// rho built from tastes normalized to sum_n beta^n tau_in = 1 (applied
// internally). future_tastes is I x N over dates 1..N.
struct SpectralStatistic {
  Eigen::VectorXd eigs;
  double sum_sq = 0.0;
};

SpectralStatistic spectral_statistic(const Eigen::MatrixXd& future_tastes,
                                     const DiscountStructure& d);

}  // namespace dexlab
