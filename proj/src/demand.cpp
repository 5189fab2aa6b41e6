#include "dexlab/demand.hpp"

#include <cmath>

namespace dexlab {

namespace {

void check_prices(const Eigen::VectorXd& prices, int horizon) {
  if (prices.size() != horizon) {
    throw ValidationError("prices: length must equal horizon " + std::to_string(horizon));
  }
  for (Eigen::Index n = 0; n < prices.size(); ++n) {
    if (!(prices[n] > 0.0) || !std::isfinite(prices[n])) {
      throw ValidationError("NonPositivePrice: prices[" + std::to_string(n) +
                            "] = " + std::to_string(prices[n]));
    }
  }
}

// Shared lambda solve for an index set of dates. `weight[j]` is beta^n tau_n
// and `price[j]` the price of the j-th included date. Expenditure
// E(lambda) = sum_j price_j (weight_j / (lambda price_j))^sigma is strictly
// decreasing in lambda; the root of E(lambda) - w is bracketed and polished
// by Newton clipped into the bracket.
struct LambdaSolve {
  double lambda = 0.0;
  Eigen::VectorXd consumption;
};

LambdaSolve solve_lambda(const Eigen::VectorXd& weight, const Eigen::VectorXd& price,
                         double sigma, double wealth, const DemandOptions& opts) {
  if (!(wealth > 0.0) || !std::isfinite(wealth)) {
    throw ValidationError("WealthNonPositive: wealth = " + std::to_string(wealth));
  }
  const Eigen::Index m = weight.size();

  // log K with K = sum_j price_j^{1-sigma} weight_j^sigma gives the exact
  // root (K/w)^{1/sigma} as the Newton start.
  double k_sum = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    k_sum += std::pow(price[j], 1.0 - sigma) * std::pow(weight[j], sigma);
  }
  double lambda = std::exp((std::log(k_sum) - std::log(wealth)) / sigma);
  if (!std::isfinite(lambda) || lambda <= 0.0) lambda = 1.0;

  auto expenditure = [&](double lam) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      acc += price[j] * std::pow(weight[j] / (lam * price[j]), sigma);
    }
    return acc;
  };
  auto gap = [&](double lam) { return expenditure(lam) - wealth; };

  // Bracket: expenditure decreasing, so gap(lo) >= 0 >= gap(hi).
  double lo = lambda, hi = lambda;
  int guard = 0;
  while (gap(lo) < 0.0) {
    lo *= 0.5;
    if (++guard > 2000) throw NumericalError("RootBracketFailure: no lower bracket");
  }
  guard = 0;
  while (gap(hi) > 0.0) {
    hi *= 2.0;
    if (++guard > 2000) throw NumericalError("RootBracketFailure: no upper bracket");
  }

  lambda = std::min(std::max(lambda, lo), hi);
  for (int it = 0; it < opts.max_iter; ++it) {
    const double g = gap(lambda);
    if (g > 0.0) lo = lambda; else hi = lambda;
    // E'(lambda) = -(sigma/lambda) E(lambda).
    const double deriv = -(sigma / lambda) * (g + wealth);
    double next = lambda - g / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - lambda);
    lambda = next;
    if (step <= opts.lambda_rtol * lambda) break;
  }

  LambdaSolve out;
  out.lambda = lambda;
  out.consumption.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    out.consumption[j] = std::pow(weight[j] / (lambda * price[j]), sigma);
  }
  return out;
}

}  // namespace

DemandResult agent_demand(const UtilityKernel& k, const DiscountStructure& d,
                          double wealth, const Eigen::VectorXd& prices,
                          const DemandOptions& opts) {
  const int N = d.horizon;
  check_prices(prices, N);
  if (k.taste.size() != N + 1) {
    throw ValidationError("kernel taste length must be horizon+1");
  }

  if (!(opts.numeraire_price > 0.0)) {
    throw ValidationError("NonPositivePrice: numeraire_price must be > 0");
  }
  Eigen::VectorXd weight(N + 1), price(N + 1);
  weight[0] = k.taste[0];
  price[0] = opts.numeraire_price;
  for (int n = 1; n <= N; ++n) {
    weight[n] = d.powers[n] * k.taste[n];
    price[n] = prices[n - 1];
  }
  LambdaSolve s = solve_lambda(weight, price, k.sigma, wealth, opts);

  DemandResult r;
  r.consumption = s.consumption;
  r.shadow_value = s.lambda;
  r.budget_residual = price.dot(s.consumption) - wealth;
  return r;
}

DemandResult agent_demand(const UtilityKernel& k, const DiscountStructure& d,
                          const Eigen::VectorXd& endowment, const Eigen::VectorXd& prices,
                          const DemandOptions& opts) {
  const int N = d.horizon;
  check_prices(prices, N);
  if (endowment.size() != N + 1) {
    throw ValidationError("endowment length must be horizon+1");
  }
  double wealth = endowment[0];
  for (int n = 1; n <= N; ++n) wealth += prices[n - 1] * endowment[n];
  return agent_demand(k, d, wealth, prices, opts);
}

FutureDemandResult future_demand(const UtilityKernel& k, const DiscountStructure& d,
                                 const Eigen::VectorXd& prices, double wealth,
                                 const DemandOptions& opts) {
  const int N = d.horizon;
  check_prices(prices, N);
  Eigen::VectorXd weight(N), price(N);
  for (int n = 1; n <= N; ++n) {
    weight[n - 1] = d.powers[n] * k.taste[n];
    price[n - 1] = prices[n - 1];
  }
  LambdaSolve s = solve_lambda(weight, price, k.sigma, wealth, opts);
  return {s.consumption, s.lambda};
}

Eigen::VectorXd marginal_expenditure_shares(const UtilityKernel& k, const DiscountStructure& d,
                                            const Eigen::VectorXd& x_future) {
  const int N = d.horizon;
  if (x_future.size() != N) {
    throw ValidationError("x_future length must equal horizon");
  }
  Eigen::VectorXd shares(N);
  for (int n = 1; n <= N; ++n) {
    const double x = x_future[n - 1];
    if (!(x > 0.0)) {
      throw ValidationError("marginal_expenditure_shares: consumption must be > 0 at date " +
                            std::to_string(n));
    }
    // beta^n u'(x) r(x) = sigma beta^n tau_n x^{1-1/sigma}; the common sigma
    // cancels in the normalization.
    shares[n - 1] = d.powers[n] * k.taste[n] *
                    (k.is_log() ? 1.0 : std::pow(x, 1.0 - 1.0 / k.sigma));
  }
  shares /= shares.sum();
  return shares;
}

Eigen::VectorXd wealth_derivative(const UtilityKernel& k, const DiscountStructure& d,
                                  const Eigen::VectorXd& prices, double wealth,
                                  const DemandOptions& opts) {
  const DemandResult r = agent_demand(k, d, wealth, prices, opts);
  const int N = d.horizon;
  Eigen::VectorXd tol(N + 1);
  for (int n = 0; n <= N; ++n) tol[n] = k.sigma * r.consumption[n];
  double denom = tol[0];
  for (int n = 1; n <= N; ++n) denom += prices[n - 1] * tol[n];
  return tol / denom;
}

}  // namespace dexlab
