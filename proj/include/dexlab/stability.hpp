#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "dexlab/analysis.hpp"

namespace dexlab {

struct StabilityReport {
  Eigen::VectorXd sym_spectrum;    // eigenvalues of (Dz + Dz')/2, ascending
  double max_sym_eig = 0.0;
  bool negative_definite = false;  // max_sym_eig < -1e-10 * ||Dz||_inf
  int index = 0;                   // sign of det(-Dz); 0 when singular within tolerance
  double det_log10 = 0.0;          // log10 |det(-Dz)| from the LU diagonal
  double diag_margin = 0.0;        // min |U_kk| / max |U_kk|; <= 1e-12 flags singular
  double condition_estimate = 0.0; // |eig|_max / |eig|_min of the symmetric part
};

StabilityReport stability_verdict(const Eigen::MatrixXd& jacobian);

struct TatonnementOptions {
  double t_max = -1.0;        // <= 0: 50/|max_sym_eig| when stable, else 1e3
  double rtol = 1e-8;
  double atol = 1e-10;
  double sample_every = -1.0; // <= 0: t_max / 512
  int max_samples = 10000;    // uniform thinning beyond this
  double demand_rtol = 1e-13;
};

struct TatonnementRun {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> trajectory;
  bool converged = false;
  double final_distance = 0.0;  // ||p(T) - pbar||_inf
  long steps = 0;               // accepted steps
  std::string abort_reason;     // "PriceCollapse" / "Divergence", empty otherwise
};

// Integrates p' = z(p) with an embedded Dormand-Prince 5(4) pair; per-step
// error controlled against atol + rtol * |p_n|. Steps whose stages leave the
// positive orthant are rejected and halved; the run aborts once the step
// floor 1e-12 is hit or ||p|| exceeds 1e6 ||p0||. Convergence is judged
// against the supplied solved equilibrium.
TatonnementRun tatonnement_simulate(const Economy& e, const Eigen::VectorXd& p0,
                                    const EquilibriumResult& target,
                                    const TatonnementOptions& opts = {});

struct UniquenessProbe {
  std::vector<EquilibriumResult> clusters;  // one representative per cluster
  std::vector<int> cluster_sizes;
  int non_converged = 0;
  bool agreement = false;  // exactly one cluster among converged starts
};

// Runs `starts` seeded solves and clusters converged prices by
// max_n |log p_n - log p'_n| < 1e-6.
UniquenessProbe uniqueness_probe(const Economy& e, int starts, std::uint64_t seed,
                                 const SolveOptions& base = {});

}  // namespace dexlab
