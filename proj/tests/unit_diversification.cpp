#include <Eigen/Eigenvalues>
#include <algorithm>
#include <doctest.h>

#include "dexlab/diversification.hpp"
#include "test_support.hpp"

using namespace dexlab;

namespace {

EquilibriumResult tight_solve(const Economy& e) {
  SolveOptions opts;
  opts.tol = 1e-11 * e.agent_count();
  return solve_equilibrium(e, opts);
}

}  // namespace

TEST_SUITE_BEGIN("diversification");

TEST_CASE("identical agents produce the degenerate benchmark") {
  const Economy e = testsup::identical_economy(6, 0.9, 4);
  const EquilibriumResult eq = tight_solve(e);
  const DiversificationReport rep = diversification_report(e, eq);
  CHECK(rep.rho.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(rep.a5 <= 1e-10);
  CHECK(std::abs(rep.a5_prime) <= 1e-10);
}

TEST_CASE("isoelastic example recovers rho = delta epsilon") {
  ScenarioSpec spec;
  spec.family = ScenarioFamily::IsoelasticExample;
  spec.params.sigma = 0.2;
  spec.params.delta = 0.3;
  spec.seed = 3;
  const IsoelasticExampleParams params = isoelastic_params(spec, 10, 0.9, 8);
  const Economy e = isoelastic_example_economy(params);
  const EquilibriumResult eq = isoelastic_example_oracle(params);
  const DiversificationReport rep = diversification_report(e, eq);
  const Eigen::MatrixXd expected = 0.3 * params.epsilon;
  CHECK((rep.rho - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("a5 is invariant under agent reordering") {
  const Economy e = testsup::random_economy(83, 7, 5);
  const EquilibriumResult eq = tight_solve(e);
  const DiversificationReport rep = diversification_report(e, eq);

  std::vector<AgentSpec> reordered = e.agents;
  std::rotate(reordered.begin(), reordered.begin() + 2, reordered.end());
  const Economy shuffled = Economy::make(e.discount, reordered);
  const DiversificationReport rep2 = diversification_report(shuffled, tight_solve(shuffled));
  CHECK(testsup::rel_gap(rep.a5, rep2.a5) <= 1e-9);
  CHECK(std::abs(rep.a5_prime - rep2.a5_prime) <=
        1e-9 * (1.0 + std::abs(rep.a5_prime)));
}

TEST_CASE("cauchy-schwarz gap is nonnegative on log economies") {
  for (std::uint64_t seed : {1, 2, 3}) {
    ScenarioSpec spec;
    spec.family = ScenarioFamily::DispersedHeterogeneity;
    spec.seed = seed;
    const Economy e = generate(spec, 12, 0.92, 8);
    const EquilibriumResult eq = tight_solve(e);
    const DiversificationReport rep = diversification_report(e, eq);
    REQUIRE(rep.spectral_available);
    CHECK(rep.cs_gap >= -1e-12);
    CHECK(rep.a5 * rep.a5 <= rep.spectral_sum_sq + 1e-12);

    // |a5'| is dominated by the largest net-trade alignment times a5.
    double max_trade_align = 0.0;
    for (int i = 0; i < e.agent_count(); ++i) {
      for (int j = 0; j < e.agent_count(); ++j) {
        max_trade_align = std::max(
            max_trade_align,
            std::abs(beta_inner_product(rep.net_trades.row(i).transpose(),
                                        rep.net_trades.row(j).transpose(), e.discount)));
      }
    }
    CHECK(std::abs(rep.a5_prime) <= max_trade_align * rep.a5 + 1e-15);
  }
}

TEST_CASE("spectral statistic") {
  const DiscountStructure d = DiscountStructure::make(0.85, 8);

  SUBCASE("identical rows give a zero spectrum") {
    Eigen::MatrixXd tastes = Eigen::MatrixXd::Ones(5, 8);
    const SpectralStatistic spec = spectral_statistic(tastes, d);
    CHECK(spec.eigs.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(spec.sum_sq <= 1e-14);
  }

  SUBCASE("a single deviating direction yields exactly one nonzero eigenvalue") {
    // tau_in = 1 + c_i g_n with sum_n beta^n g_n = 0 and mean_i c_i = 0:
    // every row keeps beta-mass N_beta and rho_i = c_i g exactly, so Sigma
    // has rank one.
    const int I = 6, N = 8;
    Eigen::VectorXd g(N);
    for (int n = 1; n <= N; ++n) g[n - 1] = d.powers[n];
    const double shift = g.dot(d.powers.segment(1, N)) / d.powers.segment(1, N).sum();
    g.array() -= shift;
    Eigen::MatrixXd tastes(I, N);
    for (int i = 0; i < I; ++i) {
      const double c = 0.05 * (i - 2.5);
      for (int n = 0; n < N; ++n) tastes(i, n) = 1.0 + c * g[n];
    }
    const SpectralStatistic spec = spectral_statistic(tastes, d);
    std::vector<double> eigs(spec.eigs.data(), spec.eigs.data() + spec.eigs.size());
    std::sort(eigs.begin(), eigs.end(), [](double a, double b) {
      return std::abs(a) > std::abs(b);
    });
    CHECK(std::abs(eigs[0]) > 1e-8);
    for (std::size_t k = 1; k < eigs.size(); ++k) {
      CHECK(std::abs(eigs[k]) <= 1e-10 * std::abs(eigs[0]));
    }
  }

  SUBCASE("eigenvalues match an independent solver on the similar matrix D Sigma") {
    const int I = 6, N = 8;
    Eigen::MatrixXd tastes(I, N);
    for (int i = 0; i < I; ++i) {
      for (int n = 0; n < N; ++n) {
        tastes(i, n) = 0.5 + hashrand::uniform01(91, i, n);
      }
    }
    const SpectralStatistic spec = spectral_statistic(tastes, d);

    // Independent route: form rho explicitly, run the general (non-symmetric)
    // eigensolver on D Sigma, which is similar to D^{1/2} Sigma D^{1/2}.
    Eigen::MatrixXd norm_tastes(I, N);
    for (int i = 0; i < I; ++i) {
      double mass = 0.0;
      for (int n = 1; n <= N; ++n) mass += d.powers[n] * tastes(i, n - 1);
      norm_tastes.row(i) = tastes.row(i) / mass;
    }
    const Eigen::RowVectorXd mean = norm_tastes.colwise().mean();
    Eigen::MatrixXd rho(I, N);
    for (int i = 0; i < I; ++i) {
      for (int n = 0; n < N; ++n) rho(i, n) = norm_tastes(i, n) / mean[n] - 1.0;
    }
    Eigen::MatrixXd sigma = rho.transpose() * rho / I;
    Eigen::MatrixXd dmat = Eigen::MatrixXd::Zero(N, N);
    for (int n = 1; n <= N; ++n) dmat(n - 1, n - 1) = d.powers[n] / d.n_beta;
    const Eigen::EigenSolver<Eigen::MatrixXd> general(dmat * sigma);
    std::vector<double> ours(spec.eigs.data(), spec.eigs.data() + N);
    std::vector<double> theirs(N);
    for (int k = 0; k < N; ++k) {
      CHECK(std::abs(general.eigenvalues()[k].imag()) <= 1e-12);
      theirs[k] = general.eigenvalues()[k].real();
    }
    std::sort(ours.begin(), ours.end());
    std::sort(theirs.begin(), theirs.end());
    for (int k = 0; k < N; ++k) {
      CHECK(std::abs(ours[k] - theirs[k]) <= 1e-10 * (1.0 + std::abs(ours[k])));
    }
  }

  SUBCASE("non-log kernels are rejected by the report path only") {
    // spectral_statistic itself is taste-based; the economy-level gate lives
    // in diversification_report.
    const Economy e = testsup::identical_economy(5, 0.9, 3, 0.5);
    const EquilibriumResult eq = tight_solve(e);
    const DiversificationReport rep = diversification_report(e, eq);
    CHECK_FALSE(rep.spectral_available);
  }
}

TEST_SUITE_END();
