#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "dexlab/scenarios.hpp"

namespace dexlab {

enum class DistortionPolicy {
  SeededRandomKerPsi,  // hashed +-1 pattern scaled by prices, projected into ker Psi
  OddEvenKerPsi,       // +p_n on odd dates, -p_n on even, projected into ker Psi
};

std::string to_string(DistortionPolicy policy);
DistortionPolicy distortion_policy_from_string(const std::string& name);

struct SweepCell {
  int horizon = 0;
  double beta = 0.0;
  int agents = 0;
  std::uint64_t seed = 0;  // drives generation, solver starts, and distortions
};

struct SweepGrid {
  ScenarioSpec scenario;  // scenario.seed is overridden per cell
  std::vector<SweepCell> cells;
  DistortionPolicy policy = DistortionPolicy::SeededRandomKerPsi;
  int distortion_draws = 16;  // rate ratios are averaged over this many draws
  SolveOptions solve;
};

struct SweepRow {
  SweepCell cell;
  std::string status = "ok";  // error text when the cell failed
  double n_beta = 0.0;
  double residual_sup = 0.0;
  int iterations = 0;
  double max_sym_eig = 0.0;
  bool negative_definite = false;
  int index = 0;
  double q_min = 0.0, q_max = 0.0;  // band of p_n / beta^n
  double a5 = 0.0, a5_prime = 0.0, spectral_sum_sq = 0.0;
  double s_ratio = 0.0, m_ratio = 0.0, r_ratio = 0.0, a_ratio = 0.0;
  double wall_ms = 0.0;
};

struct SweepResult {
  ScenarioSpec scenario;
  DistortionPolicy policy = DistortionPolicy::SeededRandomKerPsi;
  int distortion_draws = 0;
  std::vector<SweepRow> rows;  // input cell order, regardless of execution order
  // Trend summaries over the ok rows.
  double m_ratio_loglog_slope = 0.0;  // least-squares slope of log m_ratio on log N_beta
  double min_s_ratio = 0.0;
};

// Cells run independently (worker count from the WORKERS environment
// variable, default hardware parallelism); per-cell failures land in the
// row's status and never abort the sweep.
SweepResult run_sweep(const SweepGrid& grid);

// Schema-versioned CSV (comment header line) and a JSON mirror with the
// nested scenario/summary diagnostics. Formatting is locale-free and
// bit-stable across runs of the same build.
std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_to_json(const SweepResult& result);

}  // namespace dexlab
