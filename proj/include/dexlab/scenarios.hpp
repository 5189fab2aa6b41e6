#pragma once

#include <string>
#include <vector>

#include "dexlab/equilibrium.hpp"

namespace dexlab {

enum class ScenarioFamily {
  IdenticalBenchmark,
  SparseTastes,
  DispersedHeterogeneity,
  TwoTypeCounterexample,
  IsoelasticExample,
};

std::string to_string(ScenarioFamily family);
ScenarioFamily scenario_family_from_string(const std::string& name);

struct ScenarioParams {
  double sigma = 1.0;      // elasticity; 1 selects log kernels
  double omega_bar = 1.0;  // endowment level
  double delta = 0.3;      // taste deviation scale (dispersed / two-type / isoelastic)
  // SparseTastes: contiguous deviation blocks of width `block_width`, placed
  // inside the first `block_window` future dates, amplitude capped at `amp`
  // and beta-weighted mass capped at `mass` per agent.
  int block_width = 3;
  int block_window = 16;
  double amp = 0.4;
  double mass = 1.0;
  // IsoelasticExample endowment tilt: s_n = s_base + s_amp on odd dates,
  // s_base - s_amp on even dates; must stay inside (0, omega_bar).
  double s_base = 0.3;
  double s_amp = 0.15;
};

struct ScenarioSpec {
  ScenarioFamily family = ScenarioFamily::IdenticalBenchmark;
  ScenarioParams params;
  std::uint64_t seed = 0;
};

// Deterministic, constraint-exact generation: a pure function of
// (family, params, N, beta, I, seed). All randomness is counter-hashed per
// (agent, date), so draws on shared dates coincide across horizons.
Economy generate(const ScenarioSpec& spec, int horizon, double beta, int agents);

// Raw parameters of the isoelastic example (family IsoelasticExample only),
// suitable for the closed-form oracle.
IsoelasticExampleParams isoelastic_params(const ScenarioSpec& spec, int horizon, double beta,
                                          int agents);

struct ConstraintReport {
  struct Entry {
    std::string name;
    double residual = 0.0;
  };
  std::vector<Entry> entries;
  double sup_residual = 0.0;
  bool pass = false;  // all residuals <= 1e-12
};

// Re-derives the family's balance conditions from the economy's tastes and
// endowments and reports each sup residual.
ConstraintReport verify_constraints(const Economy& e, const ScenarioSpec& spec);

}  // namespace dexlab
