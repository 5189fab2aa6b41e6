#include "dexlab/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "dexlab/analysis.hpp"
#include "dexlab/diversification.hpp"
#include "dexlab/stability.hpp"

namespace dexlab {

std::string to_string(DistortionPolicy policy) {
  return policy == DistortionPolicy::SeededRandomKerPsi ? "seeded-random-in-ker-psi"
                                                        : "odd-even-in-ker-psi";
}

DistortionPolicy distortion_policy_from_string(const std::string& name) {
  if (name == "seeded-random-in-ker-psi" || name == "random") {
    return DistortionPolicy::SeededRandomKerPsi;
  }
  if (name == "odd-even-in-ker-psi" || name == "odd-even") {
    return DistortionPolicy::OddEvenKerPsi;
  }
  throw ValidationError("policy: unknown distortion policy '" + name + "'");
}

namespace {

constexpr std::uint64_t kDistortionSalt = 0xd1b54a32d192ed03ULL;

SweepRow run_cell(const SweepGrid& grid, const SweepCell& cell) {
  SweepRow row;
  row.cell = cell;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ScenarioSpec spec = grid.scenario;
    spec.seed = cell.seed;
    const Economy economy = generate(spec, cell.horizon, cell.beta, cell.agents);
    row.n_beta = economy.discount.n_beta;

    SolveOptions solve = grid.solve;
    solve.seed = cell.seed;
    const EquilibriumResult eq = solve_equilibrium(economy, solve);
    row.residual_sup = eq.residual_sup;
    row.iterations = eq.iterations;
    row.q_min = eq.price_ratios.minCoeff();
    row.q_max = eq.price_ratios.maxCoeff();

    const StabilityReport verdict = stability_verdict(aggregate_jacobian(economy, eq));
    row.max_sym_eig = verdict.max_sym_eig;
    row.negative_definite = verdict.negative_definite;
    row.index = verdict.index;

    const DiversificationReport div = diversification_report(economy, eq);
    row.a5 = div.a5;
    row.a5_prime = div.a5_prime;
    row.spectral_sum_sq =
        div.spectral_available ? div.spectral_sum_sq : std::numeric_limits<double>::quiet_NaN();

    const int N = cell.horizon;
    const int draws =
        grid.policy == DistortionPolicy::OddEvenKerPsi ? 1 : std::max(1, grid.distortion_draws);
    double s_acc = 0.0, m_acc = 0.0, r_acc = 0.0, a_last = 0.0;
    for (int k = 0; k < draws; ++k) {
      // A sign pattern proportional to the price profile projects to zero;
      // redraw deterministically (only ever happens at tiny horizons).
      Eigen::VectorXd u;
      for (std::uint64_t attempt = 0;; ++attempt) {
        Eigen::VectorXd direction(N);
        for (int n = 1; n <= N; ++n) {
          const double sign =
              grid.policy == DistortionPolicy::OddEvenKerPsi
                  ? ((n % 2 == 1) ? 1.0 : -1.0)
                  : hashrand::rademacher(cell.seed ^ kDistortionSalt,
                                         static_cast<std::uint64_t>(k) + (attempt << 32),
                                         static_cast<std::uint64_t>(n));
          direction[n - 1] = sign * eq.prices[n - 1];
        }
        u = project_ker_psi(direction, economy, eq);
        const double vnorm = beta_norm(u.cwiseQuotient(eq.prices), economy.discount);
        if (vnorm > 1e-8 || attempt >= 40) break;
      }
      const RateReport rates = rate_ratios(economy, eq, u);
      s_acc += rates.s_ratio;
      m_acc += rates.m_ratio;
      r_acc += rates.r_ratio;
      a_last = rates.a_ratio;
    }
    row.s_ratio = s_acc / draws;
    row.m_ratio = m_acc / draws;
    row.r_ratio = r_acc / draws;
    row.a_ratio = a_last;  // independent of the draw
  } catch (const std::exception& err) {
    row.status = err.what();
    row.residual_sup = row.max_sym_eig = row.q_min = row.q_max = row.a5 = row.a5_prime =
        row.spectral_sum_sq = row.s_ratio = row.m_ratio = row.r_ratio = row.a_ratio =
            std::numeric_limits<double>::quiet_NaN();
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int worker_count() {
  if (const char* env = std::getenv("WORKERS")) {
    const int k = std::atoi(env);
    if (k >= 1) return k;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

SweepResult run_sweep(const SweepGrid& grid) {
  SweepResult result;
  result.scenario = grid.scenario;
  result.policy = grid.policy;
  result.distortion_draws = grid.distortion_draws;
  result.rows.resize(grid.cells.size());

  const int workers = std::min<int>(worker_count(), std::max<std::size_t>(grid.cells.size(), 1));
  std::atomic<std::size_t> next{0};
  auto drain = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= grid.cells.size()) return;
      result.rows[idx] = run_cell(grid, grid.cells[idx]);
    }
  };
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
  }

  // Trend summaries: slope of log m_ratio on log N_beta and the s_ratio floor.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  result.min_s_ratio = std::numeric_limits<double>::infinity();
  for (const SweepRow& row : result.rows) {
    if (row.status != "ok" || !(row.m_ratio > 0.0)) continue;
    const double x = std::log(row.n_beta);
    const double y = std::log(row.m_ratio);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
    result.min_s_ratio = std::min(result.min_s_ratio, row.s_ratio);
  }
  const double denom = count * sxx - sx * sx;
  result.m_ratio_loglog_slope = (count >= 2 && std::abs(denom) > 0.0)
                                    ? (count * sxy - sx * sy) / denom
                                    : std::numeric_limits<double>::quiet_NaN();
  if (count == 0) result.min_s_ratio = std::numeric_limits<double>::quiet_NaN();
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "# dexlab-sweep-csv v1 scenario=" << to_string(result.scenario.family)
      << " policy=" << to_string(result.policy) << " draws=" << result.distortion_draws
      << " m_ratio_loglog_slope=" << fmt(result.m_ratio_loglog_slope)
      << " min_s_ratio=" << fmt(result.min_s_ratio) << "\n";
  out << "horizon,beta,agents,seed,n_beta,status,residual_sup,iterations,max_sym_eig,"
         "negative_definite,index,q_min,q_max,a5,a5_prime,spectral_sum_sq,s_ratio,m_ratio,"
         "r_ratio,a_ratio,wall_ms\n";
  for (const SweepRow& r : result.rows) {
    std::string status = r.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << r.cell.horizon << ',' << fmt(r.cell.beta) << ',' << r.cell.agents << ','
        << r.cell.seed << ',' << fmt(r.n_beta) << ',' << status << ',' << fmt(r.residual_sup)
        << ',' << r.iterations << ',' << fmt(r.max_sym_eig) << ','
        << (r.negative_definite ? 1 : 0) << ',' << r.index << ',' << fmt(r.q_min) << ','
        << fmt(r.q_max) << ',' << fmt(r.a5) << ',' << fmt(r.a5_prime) << ','
        << fmt(r.spectral_sum_sq) << ',' << fmt(r.s_ratio) << ',' << fmt(r.m_ratio) << ','
        << fmt(r.r_ratio) << ',' << fmt(r.a_ratio) << ',' << fmt(r.wall_ms) << "\n";
  }
  return out.str();
}

nlohmann::json sweep_to_json(const SweepResult& result) {
  nlohmann::json j;
  j["schema"] = "dexlab-sweep-json v1";
  j["scenario"]["family"] = to_string(result.scenario.family);
  j["scenario"]["seed"] = result.scenario.seed;
  j["policy"] = to_string(result.policy);
  j["distortion_draws"] = result.distortion_draws;
  j["summary"]["m_ratio_loglog_slope"] = result.m_ratio_loglog_slope;
  j["summary"]["min_s_ratio"] = result.min_s_ratio;
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& r : result.rows) {
    nlohmann::json jr;
    jr["horizon"] = r.cell.horizon;
    jr["beta"] = r.cell.beta;
    jr["agents"] = r.cell.agents;
    jr["seed"] = r.cell.seed;
    jr["n_beta"] = r.n_beta;
    jr["status"] = r.status;
    jr["residual_sup"] = r.residual_sup;
    jr["iterations"] = r.iterations;
    jr["max_sym_eig"] = r.max_sym_eig;
    jr["negative_definite"] = r.negative_definite;
    jr["index"] = r.index;
    jr["q_band"] = {r.q_min, r.q_max};
    jr["a5"] = r.a5;
    jr["a5_prime"] = r.a5_prime;
    jr["spectral_sum_sq"] = r.spectral_sum_sq;
    jr["s_ratio"] = r.s_ratio;
    jr["m_ratio"] = r.m_ratio;
    jr["r_ratio"] = r.r_ratio;
    jr["a_ratio"] = r.a_ratio;
    jr["wall_ms"] = r.wall_ms;
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace dexlab
