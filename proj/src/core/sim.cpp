// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "fitq/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "fitq/errors.hpp"

namespace fitq {
namespace {

constexpr std::uint64_t kResponseStream = 0;
constexpr std::uint64_t kPolicyStream = 1;

bool is_failure(const AbilityEstimate& estimate, double theta_star, double epsilon) {
  return !estimate.is_finite() || std::fabs(estimate.value() - theta_star) > epsilon;
}

// Re-throws the active exception with the replication index prepended,
// keeping the error category.
[[noreturn]] void rethrow_with_index(std::exception_ptr error, std::uint64_t rep_index) {
  const std::string prefix = "replication " + std::to_string(rep_index) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  if (!(epsilon > 0.0 && std::isfinite(epsilon))) throw ConfigError("epsilon must be > 0");
  if (!std::isfinite(theta_star)) throw ConfigError("theta_star must be finite");
  if (!std::isfinite(theta0)) throw ConfigError("theta0 must be finite");
  if (reps < 1) throw PreconditionError("reps must be >= 1");
  if (check_every < 1) throw ConfigError("check_every must be >= 1");
  if (const auto* fb = std::get_if<FixedBudget>(&setting)) {
    if (fb->horizon < 1) throw ConfigError("horizon T must be >= 1");
  } else {
    const auto& fc = std::get<FixedConfidence>(setting);
    if (!(fc.delta > 0.0 && fc.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (fc.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  }
}

void AggregateResult::add(const ReplicationOutcome& outcome) {
  ++reps;
  failures += outcome.failed ? 1 : 0;
  cap_hits += outcome.hit_cap ? 1 : 0;
  const auto steps = static_cast<std::uint64_t>(outcome.steps);
  sum_steps += steps;
  sum_steps_sq += static_cast<uint128_t>(steps) * steps;
}

void AggregateResult::merge(const AggregateResult& other) {
  reps += other.reps;
  failures += other.failures;
  cap_hits += other.cap_hits;
  sum_steps += other.sum_steps;
  sum_steps_sq += other.sum_steps_sq;
}

double AggregateResult::failure_rate() const {
  return reps > 0 ? static_cast<double>(failures) / static_cast<double>(reps) : 0.0;
}

double AggregateResult::se_failure() const {
  if (reps == 0) return 0.0;
  if (failures == 0) return 3.0 / static_cast<double>(reps);
  const double p = failure_rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

double AggregateResult::mean_tau() const {
  return reps > 0 ? static_cast<double>(sum_steps) / static_cast<double>(reps) : 0.0;
}

double AggregateResult::se_tau() const {
  if (reps < 2) return 0.0;
  // n * sum(x^2) - (sum x)^2 is exact in 128-bit integers.
  const auto n = static_cast<uint128_t>(reps);
  const auto s = static_cast<uint128_t>(sum_steps);
  const uint128_t spread = n * sum_steps_sq - s * s;
  const long double var = static_cast<long double>(spread) /
                          (static_cast<long double>(reps) * static_cast<long double>(reps - 1));
  return static_cast<double>(std::sqrt(var / static_cast<long double>(reps)));
}

int simulate_response(const ResponseModel& model, double theta_star, double x, Xoshiro256& rng) {
  return rng.bernoulli(model.eval(theta_star - x));
}

Experiment::Experiment(ExperimentSpec spec)
    : spec_(std::move(spec)),
      initial_policy_(make_policy_state(spec_.policy, spec_.model, spec_.theta_star,
                                        spec_.bounds, spec_.rm_start)) {
  spec_.validate();
  if (const auto* fc = std::get_if<FixedConfidence>(&spec_.setting)) {
    stopping_ = StoppingConfig::make(spec_.model, spec_.epsilon, fc->delta, spec_.check_every);
  }
}

ReplicationOutcome Experiment::replicate(std::uint64_t rep_index, const TraceSink& trace) const {
  return spec_.fixed_budget() ? run_budget(rep_index, trace) : run_confidence(rep_index, trace);
}

ReplicationOutcome Experiment::run_budget(std::uint64_t rep_index, const TraceSink& trace) const {
  const auto horizon = std::get<FixedBudget>(spec_.setting).horizon;
  Xoshiro256 responses(derive_seed(spec_.master_seed, rep_index, kResponseStream));
  Xoshiro256 queries(derive_seed(spec_.master_seed, rep_index, kPolicyStream));
  TrackingEstimator estimator(spec_.model, spec_.theta0);
  estimator.reserve(static_cast<std::size_t>(horizon));
  QueryPolicy policy(initial_policy_, spec_.bounds);
  // Non-adaptive policies never read intermediate estimates, so only the
  // final one is solved for unless a trace asks for every step.
  const bool per_step = policy.uses_estimate() || static_cast<bool>(trace);

  AbilityEstimate current = estimator.current();
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const double x = policy.next_query(current, queries);
    const int y = simulate_response(spec_.model, spec_.theta_star, x, responses);
    estimator.observe(x, y);
    policy.record_response(y);
    if (per_step) {
      current = estimator.update();
      if (trace) trace({t, x, y, current});
    }
  }
  if (!per_step) current = estimator.update();

  ReplicationOutcome out;
  out.final_estimate = current;
  out.steps = horizon;
  out.failed = is_failure(current, spec_.theta_star, spec_.epsilon);
  return out;
}

ReplicationOutcome Experiment::run_confidence(std::uint64_t rep_index,
                                              const TraceSink& trace) const {
  const auto max_steps = std::get<FixedConfidence>(spec_.setting).max_steps;
  const StoppingConfig& stop = *stopping_;
  Xoshiro256 responses(derive_seed(spec_.master_seed, rep_index, kResponseStream));
  Xoshiro256 queries(derive_seed(spec_.master_seed, rep_index, kPolicyStream));
  TrackingEstimator estimator(spec_.model, spec_.theta0);
  estimator.reserve(static_cast<std::size_t>(std::min<std::int64_t>(max_steps, 1 << 12)));
  QueryPolicy policy(initial_policy_, spec_.bounds);

  AbilityEstimate current = estimator.current();
  ReplicationOutcome out;
  for (std::int64_t t = 1; t <= max_steps; ++t) {
    const double x = policy.next_query(current, queries);
    const int y = simulate_response(spec_.model, spec_.theta_star, x, responses);
    estimator.observe(x, y);
    policy.record_response(y);
    current = estimator.update();
    if (trace) trace({t, x, y, current});
    if (t % stop.check_every == 0 &&
        should_stop(test_statistic(estimator.history(), current, spec_.model, stop), stop)) {
      out.final_estimate = current;
      out.steps = t;
      out.failed = is_failure(current, spec_.theta_star, spec_.epsilon);
      return out;
    }
  }
  out.final_estimate = current;
  out.steps = max_steps;
  out.hit_cap = true;
  out.failed = true;
  return out;
}

AggregateResult Experiment::run(unsigned workers) const {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const auto reps = static_cast<std::uint64_t>(spec_.reps);
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, reps));

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::uint64_t first_error_rep = std::numeric_limits<std::uint64_t>::max();
  std::vector<AggregateResult> partial(workers);

  auto work = [&](unsigned id) {
    AggregateResult local;
    while (!abort.load(std::memory_order_relaxed)) {
      const std::uint64_t rep = next.fetch_add(1, std::memory_order_relaxed);
      if (rep >= reps) break;
      try {
        local.add(replicate(rep));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (rep < first_error_rep) {
          first_error_rep = rep;
          first_error = std::current_exception();
        }
        abort = true;
      }
    }
    partial[id] = local;
  };

  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
  }
  if (first_error) rethrow_with_index(first_error, first_error_rep);

  AggregateResult total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

ReplicationOutcome run_fb_replication(const ExperimentSpec& spec, std::uint64_t rep_index) {
  if (!spec.fixed_budget()) throw PreconditionError("spec is not fixed-budget");
  return Experiment(spec).replicate(rep_index);
}

ReplicationOutcome run_fc_replication(const ExperimentSpec& spec, std::uint64_t rep_index) {
  if (spec.fixed_budget()) throw PreconditionError("spec is not fixed-confidence");
  return Experiment(spec).replicate(rep_index);
}

AggregateResult run_experiment(const ExperimentSpec& spec, unsigned workers) {
  return Experiment(spec).run(workers);
}

LineFit slope_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw PreconditionError("slope fit needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("slope fit needs two distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << "t,x,y,theta_hat\n";
  char x_buf[32];
  for (const auto& row : rows) {
    std::snprintf(x_buf, sizeof x_buf, "%.17g", row.x);
    out << row.t << ',' << x_buf << ',' << row.y << ',' << row.theta_hat.to_string() << '\n';
  }
}

}  // namespace fitq
