#include "dexlab/diversification.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace dexlab {

DiversificationReport diversification_report(const Economy& e, const EquilibriumResult& eq) {
  const int N = e.horizon();
  const int I = e.agent_count();
  DiversificationReport rep;

  Eigen::MatrixXd shares(I, N);
  bool all_log = true;
  for (int i = 0; i < I; ++i) {
    shares.row(i) = marginal_expenditure_shares(e.agents[i].kernel, e.discount,
                                                eq.allocation.row(i).segment(1, N).transpose())
                        .transpose();
    all_log = all_log && e.agents[i].kernel.is_log();
  }
  const Eigen::VectorXd mean_share = shares.colwise().mean().transpose();
  for (int n = 0; n < N; ++n) {
    if (!(mean_share[n] > 0.0)) {
      throw NumericalError("ZeroMeanShare: mean marginal share vanished at date " +
                           std::to_string(n + 1));
    }
  }

  rep.rho.resize(I, N);
  rep.net_trades.resize(I, N);
  for (int i = 0; i < I; ++i) {
    for (int n = 0; n < N; ++n) {
      rep.rho(i, n) = shares(i, n) / mean_share[n] - 1.0;
      rep.net_trades(i, n) = eq.allocation(i, n + 1) - e.agents[i].endowment[n + 1];
    }
  }

  double a5 = 0.0, a5p = 0.0;
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < I; ++j) {
      const double align =
          beta_inner_product(rep.rho.row(i).transpose(), rep.rho.row(j).transpose(), e.discount);
      const double trade = beta_inner_product(rep.net_trades.row(i).transpose(),
                                              rep.net_trades.row(j).transpose(), e.discount);
      a5 += std::abs(align);
      a5p += trade * align;
    }
  }
  rep.a5 = a5 / (static_cast<double>(I) * I);
  rep.a5_prime = a5p / (static_cast<double>(I) * I);

  if (all_log) {
    Eigen::MatrixXd tastes(I, N);
    for (int i = 0; i < I; ++i) {
      tastes.row(i) = e.agents[i].kernel.taste.segment(1, N).transpose();
    }
    const SpectralStatistic spec = spectral_statistic(tastes, e.discount);
    rep.spectral_available = true;
    rep.spectral_eigs = spec.eigs;
    rep.spectral_sum_sq = spec.sum_sq;
    rep.cs_gap = spec.sum_sq - rep.a5 * rep.a5;
  }
  return rep;
}

SpectralStatistic spectral_statistic(const Eigen::MatrixXd& future_tastes,
                                     const DiscountStructure& d) {
  const int N = d.horizon;
  const int I = static_cast<int>(future_tastes.rows());
  if (future_tastes.cols() != N || I == 0) {
    throw ValidationError("spectral_statistic: taste matrix must be I x N");
  }

  // Normalize rows to sum_n beta^n tau_in = 1 and form the deviation profiles
  // rho_in = tau_in / taubar_n - 1 (scale-invariant, so pre-normalized input
  // passes through unchanged).
  Eigen::MatrixXd norm_tastes(I, N);
  for (int i = 0; i < I; ++i) {
    double mass = 0.0;
    for (int n = 1; n <= N; ++n) mass += d.powers[n] * future_tastes(i, n - 1);
    if (!(mass > 0.0)) {
      throw ValidationError("spectral_statistic: taste rows must have positive beta-mass");
    }
    norm_tastes.row(i) = future_tastes.row(i) / mass;
  }
  const Eigen::VectorXd mean = norm_tastes.colwise().mean().transpose();
  Eigen::MatrixXd rho(I, N);
  for (int i = 0; i < I; ++i) {
    for (int n = 0; n < N; ++n) rho(i, n) = norm_tastes(i, n) / mean[n] - 1.0;
  }

  Eigen::VectorXd sqrt_d(N);
  for (int n = 1; n <= N; ++n) sqrt_d[n - 1] = std::sqrt(d.powers[n] / d.n_beta);
  const Eigen::MatrixXd weighted = rho * sqrt_d.asDiagonal();  // rows D^{1/2} rho_i
  const Eigen::MatrixXd m = weighted.transpose() * weighted / I;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  SpectralStatistic out;
  out.eigs = eig.eigenvalues();
  out.sum_sq = out.eigs.squaredNorm();
  return out;
}

}  // namespace dexlab
