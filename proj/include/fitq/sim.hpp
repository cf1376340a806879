// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "fitq/estimator.hpp"
#include "fitq/policy.hpp"
#include "fitq/response_model.hpp"
#include "fitq/rng.hpp"
#include "fitq/stopping.hpp"

namespace fitq {

__extension__ typedef unsigned __int128 uint128_t;

struct FixedBudget {
  std::int64_t horizon = 1;
};

struct FixedConfidence {
  double delta = 0.05;
  std::int64_t max_steps = 10'000'000;
};

using Setting = std::variant<FixedBudget, FixedConfidence>;

/// Declarative description of one Monte Carlo study cell.
struct ExperimentSpec {
  Setting setting = FixedBudget{};
  ResponseModel model = ResponseModel::logistic();
  double theta_star = 0.0;
  double epsilon = 0.2;
  PolicySpec policy;
  QuestionBounds bounds{-2.0, 2.0};
  std::int64_t reps = 1;
  std::uint64_t master_seed = 0;
  double theta0 = 0.0;    // estimate used for the first query
  double rm_start = 0.0;  // Robbins-Monro X_1
  int check_every = 1;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  bool fixed_budget() const { return std::holds_alternative<FixedBudget>(setting); }
};

struct ReplicationOutcome {
  AbilityEstimate final_estimate = AbilityEstimate::finite(0.0);
  std::int64_t steps = 0;
  bool failed = false;
  bool hit_cap = false;
};

/// Integer-exact totals over replications; derived statistics are computed
/// on demand, so the result does not depend on reduction order.
struct AggregateResult {
  std::int64_t reps = 0;
  std::int64_t failures = 0;
  std::int64_t cap_hits = 0;
  std::uint64_t sum_steps = 0;
  uint128_t sum_steps_sq = 0;

  void add(const ReplicationOutcome& outcome);
  void merge(const AggregateResult& other);

  double failure_rate() const;
  /// Binomial standard error; 3 / reps (rule of three) when no failures.
  double se_failure() const;
  double mean_tau() const;
  double se_tau() const;
};

/// One row of a replication trace.
struct TraceRow {
  std::int64_t t;
  double x;
  int y;
  AbilityEstimate theta_hat;
};

using TraceSink = std::function<void(const TraceRow&)>;

/// Y ~ Bernoulli(f(theta_star - x)).
int simulate_response(const ResponseModel& model, double theta_star, double x, Xoshiro256& rng);

/// A validated spec with its derived constants (policy state, lambda_star).
class Experiment {
 public:
  explicit Experiment(ExperimentSpec spec);

  const ExperimentSpec& spec() const { return spec_; }
  /// Stopping configuration for fixed-confidence specs.
  const std::optional<StoppingConfig>& stopping() const { return stopping_; }

  /// Runs replication `rep_index`; a pure function of (spec, rep_index).
  ReplicationOutcome replicate(std::uint64_t rep_index, const TraceSink& trace = {}) const;

  /// Runs all replications on `workers` threads (0 = hardware concurrency).
  /// Errors are rethrown with the replication index in the message.
  AggregateResult run(unsigned workers = 1) const;

 private:
  ReplicationOutcome run_budget(std::uint64_t rep_index, const TraceSink& trace) const;
  ReplicationOutcome run_confidence(std::uint64_t rep_index, const TraceSink& trace) const;

  ExperimentSpec spec_;
  PolicyState initial_policy_;
  std::optional<StoppingConfig> stopping_;
};

/// Throws PreconditionError unless spec is fixed-budget.
ReplicationOutcome run_fb_replication(const ExperimentSpec& spec, std::uint64_t rep_index);
/// Throws PreconditionError unless spec is fixed-confidence.
ReplicationOutcome run_fc_replication(const ExperimentSpec& spec, std::uint64_t rep_index);
AggregateResult run_experiment(const ExperimentSpec& spec, unsigned workers = 1);

struct LineFit {
  double slope;
  double intercept;
};

/// Ordinary least squares. Throws PreconditionError with fewer than two
/// distinct x values.
LineFit slope_fit(std::span<const std::pair<double, double>> points);

/// Writes "t,x,y,theta_hat" rows; infinite estimates as "+inf" / "-inf".
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);

}  // namespace fitq
