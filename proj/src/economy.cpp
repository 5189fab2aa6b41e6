#include "dexlab/economy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dexlab {

DiscountStructure DiscountStructure::make(double beta, int horizon) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ValidationError("beta: must lie in (0,1), got " + std::to_string(beta));
  }
  if (horizon < 1) {
    throw ValidationError("horizon: must be >= 1, got " + std::to_string(horizon));
  }
  DiscountStructure d;
  d.beta = beta;
  d.horizon = horizon;
  d.powers.resize(horizon + 1);
  d.powers[0] = 1.0;
  double acc = 0.0;
  for (int n = 1; n <= horizon; ++n) {
    d.powers[n] = d.powers[n - 1] * beta;
    acc += d.powers[n];
  }
  d.n_beta = acc;
  d.weights = d.powers.segment(1, horizon) / acc;
  return d;
}

double effective_commodity_count(const DiscountStructure& d) {
  double acc = 0.0;
  double pw = 1.0;
  for (int n = 1; n <= d.horizon; ++n) {
    pw *= d.beta;
    acc += pw;
  }
  return acc;
}

double beta_inner_product(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const DiscountStructure& d) {
  if (x.size() != d.horizon || y.size() != d.horizon) {
    throw ValidationError("beta_inner_product: vector length must equal horizon " +
                          std::to_string(d.horizon));
  }
  double acc = 0.0;
  for (int n = 1; n <= d.horizon; ++n) {
    acc += d.powers[n] * x[n - 1] * y[n - 1];
  }
  return acc / d.n_beta;
}

double beta_norm(const Eigen::VectorXd& x, const DiscountStructure& d) {
  return std::sqrt(beta_inner_product(x, x, d));
}

UtilityKernel UtilityKernel::make(UtilityFamily family, double sigma, Eigen::VectorXd taste) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("sigma: must be a positive real, got " + std::to_string(sigma));
  }
  for (Eigen::Index n = 0; n < taste.size(); ++n) {
    if (!(taste[n] > 0.0) || !std::isfinite(taste[n])) {
      throw ValidationError("taste[" + std::to_string(n) + "]: must be > 0, got " +
                            std::to_string(taste[n]));
    }
  }
  UtilityKernel k;
  if (family == UtilityFamily::Log || std::abs(sigma - 1.0) < 1e-12) {
    k.family = UtilityFamily::Log;
    k.sigma = 1.0;
  } else {
    k.family = UtilityFamily::Isoelastic;
    k.sigma = sigma;
  }
  k.taste = std::move(taste);
  return k;
}

UtilityKernel UtilityKernel::log_kernel(Eigen::VectorXd taste) {
  return make(UtilityFamily::Log, 1.0, std::move(taste));
}

UtilityKernel UtilityKernel::isoelastic(double sigma, Eigen::VectorXd taste) {
  return make(UtilityFamily::Isoelastic, sigma, std::move(taste));
}

double UtilityKernel::marginal_utility(int date, double x) const {
  if (!(x > 0.0)) {
    throw ValidationError("marginal_utility: consumption must be > 0");
  }
  if (is_log()) return taste[date] / x;
  return taste[date] * std::pow(x, -1.0 / sigma);
}

double UtilityKernel::second_derivative(int date, double x) const {
  if (!(x > 0.0)) {
    throw ValidationError("second_derivative: consumption must be > 0");
  }
  if (is_log()) return -taste[date] / (x * x);
  return -(taste[date] / sigma) * std::pow(x, -1.0 / sigma - 1.0);
}

double risk_tolerance(const UtilityKernel& k, int date, double x) {
  if (!(x > 0.0)) {
    throw ValidationError("risk_tolerance: consumption must be > 0");
  }
  if (date < 0 || date >= k.dates()) {
    throw ValidationError("risk_tolerance: date out of range");
  }
  return k.sigma * x;
}

Economy Economy::make(DiscountStructure discount, std::vector<AgentSpec> agents) {
  const int n_dates = discount.horizon + 1;
  if (agents.empty()) {
    throw ValidationError("agents: economy needs at least one agent");
  }
  Eigen::VectorXd aggregate = Eigen::VectorXd::Zero(n_dates);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string at = "agents[" + std::to_string(i) + "]";
    const AgentSpec& a = agents[i];
    if (a.kernel.taste.size() != n_dates) {
      throw ValidationError(at + ".taste: length must be horizon+1 = " +
                            std::to_string(n_dates) + ", got " +
                            std::to_string(a.kernel.taste.size()));
    }
    if (a.endowment.size() != n_dates) {
      throw ValidationError(at + ".endowment: length must be horizon+1 = " +
                            std::to_string(n_dates) + ", got " +
                            std::to_string(a.endowment.size()));
    }
    double discounted = 0.0;
    for (int n = 0; n < n_dates; ++n) {
      if (!(a.endowment[n] >= 0.0) || !std::isfinite(a.endowment[n])) {
        throw ValidationError(at + ".endowment[" + std::to_string(n) +
                              "]: must be >= 0, got " + std::to_string(a.endowment[n]));
      }
      discounted += discount.powers[n] * a.endowment[n];
    }
    if (!(discounted > 0.0)) {
      throw ValidationError(at + ".endowment: discounted total must be > 0");
    }
    aggregate += a.endowment;
  }
  for (int n = 0; n < n_dates; ++n) {
    if (!(aggregate[n] > 0.0)) {
      throw ValidationError("aggregate endowment at date " + std::to_string(n) +
                            " must be > 0");
    }
  }
  Economy e;
  e.discount = std::move(discount);
  e.agents = std::move(agents);
  e.aggregate_endowment = std::move(aggregate);
  return e;
}

AssumptionAudit audit_assumptions(const Economy& e, const AssumptionThresholds& t) {
  const int N = e.horizon();
  AssumptionAudit audit;

  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = -std::numeric_limits<double>::infinity();
  double slope_min = std::numeric_limits<double>::infinity();
  double slope_max = -std::numeric_limits<double>::infinity();
  double endow_sup = 0.0;

  audit.discounted_endowment_ratios.reserve(e.agents.size());
  for (const AgentSpec& a : e.agents) {
    // For this utility class u'_in(x)/u'_i0(x) = tau_in/tau_i0 at every x.
    for (int n = 0; n <= N; ++n) {
      const double ratio = a.kernel.taste[n] / a.kernel.taste[0];
      ratio_min = std::min(ratio_min, ratio);
      ratio_max = std::max(ratio_max, ratio);
      endow_sup = std::max(endow_sup, a.endowment[n]);
    }
    slope_min = std::min(slope_min, a.kernel.sigma);
    slope_max = std::max(slope_max, a.kernel.sigma);
    double discounted_future = 0.0;
    for (int n = 1; n <= N; ++n) discounted_future += e.discount.powers[n] * a.endowment[n];
    audit.discounted_endowment_ratios.push_back(discounted_future / e.discount.n_beta);
  }

  const double inv_count = 1.0 / static_cast<double>(e.agent_count());
  double per_capita_min = std::numeric_limits<double>::infinity();
  double per_capita_max = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= N; ++n) {
    const double pc = e.aggregate_endowment[n] * inv_count;
    per_capita_min = std::min(per_capita_min, pc);
    per_capita_max = std::max(per_capita_max, pc);
  }

  audit.marginal_ratio_bounds = {ratio_min, ratio_max};
  audit.tolerance_slope_bounds = {slope_min, slope_max};
  audit.per_capita_endowment_bounds = {per_capita_min, per_capita_max};
  audit.endowment_sup = endow_sup;

  audit.a2_pass = ratio_min >= t.c_u && ratio_max <= t.C_u && slope_min >= t.c_u &&
                  slope_max <= t.C_u;
  audit.a3_pass = per_capita_min >= t.c_omega && per_capita_max <= t.C_omega;
  const double min_ratio = audit.discounted_endowment_ratios.empty()
                               ? 0.0
                               : *std::min_element(audit.discounted_endowment_ratios.begin(),
                                                   audit.discounted_endowment_ratios.end());
  audit.a4_pass = min_ratio >= t.c_w && endow_sup <= t.C_w;
  return audit;
}

}  // namespace dexlab
