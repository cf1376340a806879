// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fitq/estimator.hpp"
#include "fitq/response_model.hpp"

namespace fitq {

/// Penalty (e^lambda - lambda - 1) p (1 - p).
double phi(double lambda, double p);

/// Bernoulli(p) centered cumulant generating function
/// log(1 - p + p e^lambda) - lambda p. Throws DomainError unless 0 < p < 1.
double psi(double lambda, double p);

/// Largest lambda with lambda >= e^lambda - lambda - 1 (about 1.25643).
double lambda_bar();

struct LambdaBrackets {
  double plus;
  double minus;
};

/// Unconstrained maximizers over lambda > 0 of
/// lambda |f(z) - f(z_star)| - phi(lambda, f(z)) for z = z_star +/- epsilon.
LambdaBrackets lambda_brackets(const ResponseModel& model, double z_star, double epsilon);

/// min over z in {z_star - eps, z_star + eps} of
/// lambda |f(z_star) - f(z)| - phi(lambda, f(z)).
double drift(const ResponseModel& model, double z_star, double epsilon, double lambda);

/// Maximizer of drift() over (0, lambda_bar]. Throws ConfigError if the
/// optimum is not strictly positive.
double solve_lambda_star(const ResponseModel& model, double z_star, double epsilon);

/// Bernoulli KL divergence d(p | q) with 0 log 0 = 0.
/// Throws DomainError unless p in [0,1] and q in (0,1).
double bernoulli_kl(double p, double q);

/// Everything the fixed-confidence stopping rule needs.
struct StoppingConfig {
  double epsilon;
  double lambda_star;
  double threshold;  // log(2 / delta)
  int check_every = 1;

  /// Solves lambda_star for (model, z_star, epsilon) and sets the
  /// threshold for `delta`. Throws ConfigError on invalid inputs.
  static StoppingConfig make(const ResponseModel& model, double epsilon, double delta,
                             int check_every = 1);
};

/// Evidence Z against the strongest alternative theta_hat +/- epsilon,
/// summed over the whole history. Zero for infinite estimates.
double test_statistic(const History& history, const AbilityEstimate& estimate,
                      const ResponseModel& model, const StoppingConfig& config);

inline bool should_stop(double z_value, const StoppingConfig& config) {
  return z_value >= config.threshold;
}

}  // namespace fitq
