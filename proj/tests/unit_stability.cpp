#include <doctest.h>

#include "dexlab/stability.hpp"
#include "test_support.hpp"

using namespace dexlab;

namespace {

EquilibriumResult tight_solve(const Economy& e) {
  SolveOptions opts;
  opts.tol = 1e-11 * e.agent_count();
  return solve_equilibrium(e, opts);
}

Eigen::VectorXd perturbed_start(const EquilibriumResult& eq, double scale, std::uint64_t seed) {
  Eigen::VectorXd p0 = eq.prices;
  for (int n = 0; n < p0.size(); ++n) {
    p0[n] *= 1.0 + scale * (2.0 * hashrand::uniform01(seed, 5, n) - 1.0);
  }
  return p0;
}

}  // namespace

TEST_SUITE_BEGIN("stability");

TEST_CASE("verdict on canonical matrices") {
  SUBCASE("diag(-1,-2)") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = -1.0;
    m(1, 1) = -2.0;
    const StabilityReport rep = stability_verdict(m);
    CHECK(rep.max_sym_eig == doctest::Approx(-1.0));
    CHECK(rep.negative_definite);
    CHECK(rep.index == 1);
  }
  SUBCASE("singular within tolerance flags index 0") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = -1.0;
    const StabilityReport rep = stability_verdict(m);
    CHECK(rep.index == 0);
    CHECK_FALSE(rep.negative_definite);
  }
  SUBCASE("sign flips with an unstable direction") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(0, 0) = -2.0;
    m(1, 1) = 1.0;  // det(-Dz) = -2 * ... one positive eigenvalue
    m(2, 2) = -3.0;
    const StabilityReport rep = stability_verdict(m);
    CHECK_FALSE(rep.negative_definite);
    CHECK(rep.index == -1);
  }
}

TEST_CASE("identical-agent economy is negative definite with index +1") {
  const Economy e = testsup::identical_economy(8, 0.9, 4, 0.5);
  const EquilibriumResult eq = tight_solve(e);
  const StabilityReport rep = stability_verdict(aggregate_jacobian(e, eq));
  CHECK(rep.negative_definite);
  CHECK(rep.index == 1);
  CHECK(rep.max_sym_eig < 0.0);
}

TEST_CASE("tatonnement at the fixed point stays put") {
  const Economy e = testsup::identical_economy(5, 0.9, 3);
  const EquilibriumResult eq = tight_solve(e);
  const TatonnementRun run = tatonnement_simulate(e, eq.prices, eq);
  CHECK(run.converged);
  CHECK(run.final_distance <= 1e-9);
}

TEST_CASE("tatonnement converges from perturbed starts on a stable economy") {
  ScenarioSpec spec;
  spec.family = ScenarioFamily::DispersedHeterogeneity;
  spec.seed = 6;
  const Economy e = generate(spec, 10, 0.9, 6);
  const EquilibriumResult eq = tight_solve(e);
  REQUIRE(stability_verdict(aggregate_jacobian(e, eq)).negative_definite);

  const TatonnementRun run = tatonnement_simulate(e, perturbed_start(eq, 0.1, 11), eq);
  CHECK(run.converged);
  CHECK(run.final_distance <= 1e-6 * eq.prices.maxCoeff());
  CHECK(run.abort_reason.empty());
}

TEST_CASE("distance to equilibrium decays monotonically over the tail") {
  const Economy e = testsup::identical_economy(6, 0.9, 4);
  const EquilibriumResult eq = tight_solve(e);
  TatonnementOptions opts;
  opts.sample_every = 1e-2;
  const TatonnementRun run = tatonnement_simulate(e, perturbed_start(eq, 0.08, 3), eq, opts);
  REQUIRE(run.converged);
  REQUIRE(run.times.size() >= 8);
  for (std::size_t k = run.times.size() / 2; k + 1 < run.times.size(); ++k) {
    const double now = (run.trajectory[k] - eq.prices).cwiseAbs().maxCoeff();
    const double next = (run.trajectory[k + 1] - eq.prices).cwiseAbs().maxCoeff();
    CHECK(next <= now * (1.0 + 1e-6) + 1e-15);
  }
}

TEST_CASE("halving rtol does not worsen the fixed-horizon end state") {
  const Economy e = testsup::identical_economy(5, 0.88, 3);
  const EquilibriumResult eq = tight_solve(e);
  const Eigen::VectorXd p0 = perturbed_start(eq, 0.1, 17);
  TatonnementOptions coarse;
  coarse.t_max = 0.5;  // well short of convergence
  coarse.rtol = 1e-6;
  TatonnementOptions fine = coarse;
  fine.rtol = 5e-7;
  const double d_coarse = tatonnement_simulate(e, p0, eq, coarse).final_distance;
  const double d_fine = tatonnement_simulate(e, p0, eq, fine).final_distance;
  CHECK(d_fine <= 2.0 * d_coarse + 1e-14);
}

TEST_CASE("short horizons end cleanly without a spurious abort") {
  const Economy e = testsup::identical_economy(3, 0.9, 2);
  const EquilibriumResult eq = tight_solve(e);
  TatonnementOptions opts;
  opts.t_max = 1e-3;
  const TatonnementRun run = tatonnement_simulate(e, perturbed_start(eq, 0.5, 23), eq, opts);
  CHECK(run.abort_reason.empty());
  CHECK_FALSE(run.converged);  // nowhere near the fixed point yet
}

TEST_CASE("isoelastic example at large effective horizon is stable and unique") {
  ScenarioSpec spec;
  spec.family = ScenarioFamily::IsoelasticExample;
  spec.params.sigma = 0.2;
  spec.params.delta = 0.3;
  spec.seed = 9;
  const Economy e = generate(spec, 120, 0.95, 8);
  const EquilibriumResult eq = tight_solve(e);
  const StabilityReport rep = stability_verdict(aggregate_jacobian(e, eq));
  CHECK(rep.negative_definite);
  CHECK(rep.index == 1);

  const UniquenessProbe probe = uniqueness_probe(e, 20, 9);
  CHECK(probe.agreement);
  CHECK(probe.non_converged == 0);
}

TEST_CASE("uniqueness probe finds a single cluster on the identical benchmark") {
  const Economy e = testsup::identical_economy(6, 0.9, 4);
  const UniquenessProbe probe = uniqueness_probe(e, 20, 7);
  CHECK(probe.agreement);
  CHECK(probe.clusters.size() == 1);
  CHECK(probe.cluster_sizes[0] == 20);
  CHECK(probe.non_converged == 0);
}

TEST_CASE("uniqueness probe reports clusters on a tiny two-type economy without asserting") {
  ScenarioSpec spec;
  spec.family = ScenarioFamily::TwoTypeCounterexample;
  spec.params.delta = 0.45;
  const Economy e = generate(spec, 2, 0.5, 4);
  const UniquenessProbe probe = uniqueness_probe(e, 8, 9);
  CHECK(probe.clusters.size() >= 1);  // reporting-only
}

TEST_SUITE_END();
