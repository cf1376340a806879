// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "fitq/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fitq/errors.hpp"
#include "fitq/scalar_search.hpp"

namespace fitq {

double phi(double lambda, double p) { return (std::expm1(lambda) - lambda) * p * (1.0 - p); }

double psi(double lambda, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("psi needs p in (0, 1)");
  return std::log1p(p * std::expm1(lambda)) - lambda * p;
}

double lambda_bar() {
  static const double value = bisect_increasing(
      [](double l) { return std::exp(l) - 2.0 * l - 1.0; }, 1.0, 2.0, 1e-13);
  return value;
}

LambdaBrackets lambda_brackets(const ResponseModel& model, double z_star, double epsilon) {
  const double f0 = model.eval(z_star);
  auto one = [&](double z) {
    const double f = model.eval(z);
    const double var = f * model.complement(z);
    return std::log1p(std::fabs(f - f0) / var);
  };
  return {one(z_star + epsilon), one(z_star - epsilon)};
}

double drift(const ResponseModel& model, double z_star, double epsilon, double lambda) {
  const double f0 = model.eval(z_star);
  const double tilt = std::expm1(lambda) - lambda;
  auto side = [&](double z) {
    const double f = model.eval(z);
    return lambda * std::fabs(f0 - f) - tilt * f * model.complement(z);
  };
  return std::min(side(z_star - epsilon), side(z_star + epsilon));
}

namespace {

struct SideTerms {
  double gap;  // |f(z) - f(z_star)|
  double var;  // f(z) (1 - f(z))
};

SideTerms side_terms(const ResponseModel& model, double f0, double z) {
  const double f = model.eval(z);
  return {std::fabs(f - f0), f * model.complement(z)};
}

}  // namespace

double solve_lambda_star(const ResponseModel& model, double z_star, double epsilon) {
  if (!(epsilon > 0.0 && std::isfinite(epsilon))) {
    throw ConfigError("epsilon must be positive and finite");
  }
  const double upper = lambda_bar();
  const double coarse = golden_section_maximize(
      [&](double l) { return drift(model, z_star, epsilon, l); }, 1e-8, upper, 1e-10);
  // Near a smooth maximum the objective is flat to rounding, so the value
  // comparisons above only pin lambda to ~1e-8. Polish on the sign of the
  // active side's derivative, which is well conditioned.
  const double f0 = model.eval(z_star);
  const SideTerms lo_side = side_terms(model, f0, z_star - epsilon);
  const SideTerms hi_side = side_terms(model, f0, z_star + epsilon);
  auto ascent = [&](double l) {
    const double t = std::expm1(l);
    const double va = l * lo_side.gap - (t - l) * lo_side.var;
    const double vb = l * hi_side.gap - (t - l) * hi_side.var;
    const double da = lo_side.gap - t * lo_side.var;
    const double db = hi_side.gap - t * hi_side.var;
    if (va < vb) return da;
    if (vb < va) return db;
    return da * db <= 0.0 ? 0.0 : da;
  };
  const double a = std::max(1e-8, coarse - 1e-4);
  const double b = std::min(upper, coarse + 1e-4);
  double lambda;
  if (ascent(b) >= 0.0) {
    lambda = b;
  } else if (ascent(a) <= 0.0) {
    lambda = a;
  } else {
    lambda = bisect_increasing([&](double l) { return -ascent(l); }, a, b, 1e-13);
  }
  if (!(drift(model, z_star, epsilon, lambda) > 0.0)) {
    throw ConfigError("no lambda in (0, lambda_bar] gives a positive drift for epsilon = " +
                      std::to_string(epsilon));
  }
  // The concave objective peaks between the one-sided maximizers.
  const auto br = lambda_brackets(model, z_star, epsilon);
  const double lo = std::min({br.plus, br.minus, upper});
  const double hi = std::min(std::max(br.plus, br.minus), upper);
  if (lambda < lo - 1e-8 || lambda > hi + 1e-8) {
    throw NumericError("lambda_star escaped its closed-form bracket");
  }
  return lambda;
}

double bernoulli_kl(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("KL needs p in [0, 1]");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("KL needs q in (0, 1)");
  double d = 0.0;
  if (p > 0.0) d += p * std::log(p / q);
  if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return std::max(d, 0.0);
}

StoppingConfig StoppingConfig::make(const ResponseModel& model, double epsilon, double delta,
                                    int check_every) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (check_every < 1) throw ConfigError("check_every must be >= 1");
  const double lambda = solve_lambda_star(model, model.optimal_gap(), epsilon);
  return {epsilon, lambda, std::log(2.0 / delta), check_every};
}

double test_statistic(const History& history, const AbilityEstimate& estimate,
                      const ResponseModel& model, const StoppingConfig& config) {
  if (!estimate.is_finite() || history.empty()) return 0.0;
  const std::size_t n = history.size();
  thread_local std::vector<double> f_hat, c_hat, f_alt, c_alt;
  f_hat.resize(n);
  c_hat.resize(n);
  f_alt.resize(n);
  c_alt.resize(n);
  const auto col = history.column();
  const double theta_hat = estimate.value();
  const double lambda = config.lambda_star;
  const double tilt = std::expm1(lambda) - lambda;
  model.eval_column(col, theta_hat, f_hat, c_hat);

  auto evidence = [&](double theta) {
    model.eval_column(col, theta, f_alt, c_alt);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += lambda * std::fabs(f_hat[i] - f_alt[i]) - tilt * f_alt[i] * c_alt[i];
    }
    return sum;
  };
  return std::min(evidence(theta_hat - config.epsilon), evidence(theta_hat + config.epsilon));
}

}  // namespace fitq
