#include "dexlab/stability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace dexlab {

StabilityReport stability_verdict(const Eigen::MatrixXd& jacobian) {
  if (jacobian.rows() != jacobian.cols() || jacobian.rows() == 0) {
    throw ValidationError("stability_verdict: matrix must be square and nonempty");
  }
  const int N = static_cast<int>(jacobian.rows());
  StabilityReport rep;

  const Eigen::MatrixXd sym = 0.5 * (jacobian + jacobian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  rep.sym_spectrum = eig.eigenvalues();
  rep.max_sym_eig = rep.sym_spectrum[N - 1];
  const double norm_inf = jacobian.cwiseAbs().rowwise().sum().maxCoeff();
  rep.negative_definite = rep.max_sym_eig < -1e-10 * norm_inf;
  const double abs_min = rep.sym_spectrum.cwiseAbs().minCoeff();
  const double abs_max = rep.sym_spectrum.cwiseAbs().maxCoeff();
  rep.condition_estimate = abs_min > 0.0 ? abs_max / abs_min
                                         : std::numeric_limits<double>::infinity();

  // Index via LU of -Dz with explicit sign tracking; the determinant itself
  // would overflow at long horizons, so only log-magnitude is kept.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(-jacobian);
  const Eigen::VectorXd diag = lu.matrixLU().diagonal();
  int sign = lu.permutationP().determinant();
  double log10_det = 0.0;
  const double dmax = diag.cwiseAbs().maxCoeff();
  double dmin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < N; ++k) {
    const double a = std::abs(diag[k]);
    dmin = std::min(dmin, a);
    if (diag[k] < 0.0) sign = -sign;
    log10_det += a > 0.0 ? std::log10(a) : -std::numeric_limits<double>::infinity();
  }
  rep.det_log10 = log10_det;
  rep.diag_margin = dmax > 0.0 ? dmin / dmax : 0.0;
  rep.index = rep.diag_margin <= 1e-12 ? 0 : sign;  // SingularWithinTolerance -> 0
  return rep;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0,
                 A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0,
                 B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0;
constexpr double E1 = 35.0 / 384.0 - 5179.0 / 57600.0, E3 = 500.0 / 1113.0 - 7571.0 / 16695.0,
                 E4 = 125.0 / 192.0 - 393.0 / 640.0, E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0,
                 E6 = 11.0 / 84.0 - 187.0 / 2100.0, E7 = -1.0 / 40.0;

}  // namespace

TatonnementRun tatonnement_simulate(const Economy& e, const Eigen::VectorXd& p0,
                                    const EquilibriumResult& target,
                                    const TatonnementOptions& opts) {
  const int N = e.horizon();
  if (p0.size() != N || (p0.array() <= 0.0).any()) {
    throw ValidationError("tatonnement_simulate: p0 must be strictly positive, length N");
  }

  double t_max = opts.t_max;
  if (t_max <= 0.0) {
    const StabilityReport rep = stability_verdict(aggregate_jacobian(e, target));
    t_max = rep.negative_definite ? std::min(50.0 / std::abs(rep.max_sym_eig), 1e3) : 1e3;
  }
  double sample_every = opts.sample_every > 0.0 ? opts.sample_every : t_max / 512.0;

  auto field = [&](const Eigen::VectorXd& p) {
    return excess_demand(e, p, opts.demand_rtol).z;
  };
  const double target_dist = 1e-6 * target.prices.cwiseAbs().maxCoeff();
  const double diverge_norm = 1e6 * p0.cwiseAbs().maxCoeff();

  TatonnementRun run;
  auto record = [&](double t, const Eigen::VectorXd& p) {
    run.times.push_back(t);
    run.trajectory.push_back(p);
    if (static_cast<int>(run.times.size()) > opts.max_samples) {
      // Thin by dropping every other sample and doubling the stride.
      std::vector<double> ts;
      std::vector<Eigen::VectorXd> ps;
      for (std::size_t k = 0; k < run.times.size(); k += 2) {
        ts.push_back(run.times[k]);
        ps.push_back(run.trajectory[k]);
      }
      run.times = std::move(ts);
      run.trajectory = std::move(ps);
      sample_every *= 2.0;
    }
  };

  double t = 0.0;
  Eigen::VectorXd p = p0;
  Eigen::VectorXd k1 = field(p);
  double h = 0.01 * (1.0 + p.cwiseAbs().maxCoeff()) / (1.0 + k1.cwiseAbs().maxCoeff());
  h = std::min(h, t_max);
  record(t, p);
  double next_sample = sample_every;

  Eigen::VectorXd k2(N), k3(N), k4(N), k5(N), k6(N), k7(N), p_new(N), err(N);
  const double horizon_slack = 1e-12 * (1.0 + t_max);
  while (t < t_max) {
    if (t_max - t <= horizon_slack) break;  // horizon exhausted up to rounding
    h = std::min(h, t_max - t);
    bool positive = true;
    auto stage = [&](const Eigen::VectorXd& y, Eigen::VectorXd& out) {
      if ((y.array() <= 0.0).any()) {
        positive = false;
        return;
      }
      out = field(y);
    };

    stage(p + h * A21 * k1, k2);
    if (positive) stage(p + h * (A31 * k1 + A32 * k2), k3);
    if (positive) stage(p + h * (A41 * k1 + A42 * k2 + A43 * k3), k4);
    if (positive) stage(p + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), k5);
    if (positive) stage(p + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), k6);
    if (positive) {
      p_new = p + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
      if ((p_new.array() <= 0.0).any()) positive = false;
    }

    if (!positive) {
      h *= 0.5;
      if (h < 1e-12) {
        run.abort_reason = "PriceCollapse";
        break;
      }
      continue;
    }

    k7 = field(p_new);
    err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    double err_norm = 0.0;
    for (int n = 0; n < N; ++n) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(p[n]), std::abs(p_new[n]));
      err_norm += (err[n] / sc) * (err[n] / sc);
    }
    err_norm = std::sqrt(err_norm / N);

    if (err_norm <= 1.0) {
      t += h;
      p = p_new;
      k1 = k7;  // FSAL
      ++run.steps;
      if (t >= next_sample || t >= t_max) {
        record(t, p);
        while (next_sample <= t) next_sample += sample_every;
      }
      if (p.cwiseAbs().maxCoeff() > diverge_norm) {
        run.abort_reason = "Divergence";
        break;
      }
      // Already well inside the convergence ball: stop integrating.
      if ((p - target.prices).cwiseAbs().maxCoeff() <= 0.2 * target_dist) break;
    }
    const double factor =
        err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, factor));
    if (h < 1e-12) {
      if (t_max - t <= horizon_slack) break;  // shrank only because we are done
      run.abort_reason = "PriceCollapse";
      break;
    }
  }

  if (run.times.empty() || run.times.back() < t) record(t, p);
  run.final_distance = (p - target.prices).cwiseAbs().maxCoeff();
  run.converged = run.abort_reason.empty() && run.final_distance <= target_dist;
  return run;
}

UniquenessProbe uniqueness_probe(const Economy& e, int starts, std::uint64_t seed,
                                 const SolveOptions& base) {
  if (starts < 2) {
    throw ValidationError("uniqueness_probe: starts must be >= 2");
  }
  UniquenessProbe probe;
  for (int s = 0; s < starts; ++s) {
    SolveOptions opts = base;
    opts.starts = 1;
    opts.seed = seed;
    if (s > 0) {
      const int N = e.horizon();
      Eigen::VectorXd p0(N);
      for (int n = 0; n < N; ++n) {
        p0[n] = e.discount.powers[n + 1] *
                std::exp(0.5 * hashrand::normal(seed, static_cast<std::uint64_t>(s),
                                                static_cast<std::uint64_t>(n)));
      }
      opts.initial_prices = std::move(p0);
    }
    try {
      EquilibriumResult res = solve_equilibrium(e, opts);
      bool matched = false;
      for (std::size_t c = 0; c < probe.clusters.size(); ++c) {
        const double gap = (res.prices.array().log() -
                            probe.clusters[c].prices.array().log())
                               .abs()
                               .maxCoeff();
        if (gap < 1e-6) {
          ++probe.cluster_sizes[c];
          matched = true;
          break;
        }
      }
      if (!matched) {
        probe.clusters.push_back(std::move(res));
        probe.cluster_sizes.push_back(1);
      }
    } catch (const NumericalError&) {
      ++probe.non_converged;
    }
  }
  probe.agreement = probe.clusters.size() == 1;
  return probe;
}

}  // namespace dexlab
