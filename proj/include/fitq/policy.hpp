// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "fitq/estimator.hpp"
#include "fitq/response_model.hpp"
#include "fitq/rng.hpp"

namespace fitq {

/// Feasible difficulty interval [lo, hi].
class QuestionBounds {
 public:
  /// Throws ConfigError unless lo < hi and both are finite.
  QuestionBounds(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double project(double x) const;
  bool contains(double x) const { return x >= lo_ && x <= hi_; }

 private:
  double lo_;
  double hi_;
};

/// proj(theta_hat - z_star); infinite estimates map to the matching bound.
double fitq_query(const AbilityEstimate& estimate, double z_star, const QuestionBounds& bounds);

inline double static_query(double x0) { return x0; }

/// Uniform draw in [lo, hi). Throws PreconditionError unless lo < hi.
double uniform_query(Xoshiro256& rng, double lo, double hi);

struct FitQState {
  double z_star;
};

struct StaticState {
  double x0;
};

struct UniformState {
  double lo;
  double hi;
};

/// Stochastic-approximation iterate for X_{t+1} = X_t + (Y_t - p_star) / (t gain).
struct RobbinsMonroState {
  double x_curr;
  double p_star;
  double gain;
  long long t = 1;
};

/// rm_update result: the advanced state and the next query.
struct RobbinsMonroStep {
  RobbinsMonroState state;
  double x_next;
};

/// Advances one Robbins-Monro step and projects the iterate onto bounds.
/// Throws PreconditionError if state.t < 1.
RobbinsMonroStep rm_update(const RobbinsMonroState& state, int y_prev,
                           const QuestionBounds& bounds);

using PolicyState = std::variant<FitQState, StaticState, UniformState, RobbinsMonroState>;

/// Policy as written in configs: "fitq", "static:<x0>", "static:xstar",
/// "uniform:<lo>:<hi>" or "rm". "static:xstar" fixes the query at the
/// hindsight-optimal theta_star - z_star.
struct PolicySpec {
  enum class Kind { kFitQ, kStatic, kStaticOptimal, kUniform, kRobbinsMonro };
  Kind kind = Kind::kFitQ;
  double a = 0.0;
  double b = 0.0;

  /// Throws ConfigError.
  static PolicySpec parse(std::string_view text);
  std::string label() const;
};

/// Instantiates the initial per-replication state. `rm_start` is X_1 for
/// the Robbins-Monro policy. Throws ConfigError when a fixed or uniform
/// query range leaves the bounds.
PolicyState make_policy_state(const PolicySpec& spec, const ResponseModel& model,
                              double theta_star, const QuestionBounds& bounds, double rm_start);

/// Query-and-learn loop state shared by all policies.
class QueryPolicy {
 public:
  QueryPolicy(PolicyState initial, const QuestionBounds& bounds);

  /// Next difficulty given the current estimate (used by FIT-Q only).
  double next_query(const AbilityEstimate& estimate, Xoshiro256& rng);
  /// Feeds back the response to the query just asked.
  void record_response(int y);

  bool uses_estimate() const { return std::holds_alternative<FitQState>(state_); }
  const PolicyState& state() const { return state_; }

 private:
  PolicyState state_;
  QuestionBounds bounds_;
};

}  // namespace fitq
