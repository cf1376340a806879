// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fitq/response_model.hpp"

namespace fitq {

/// Append-only record of (difficulty, response) pairs with a running count
/// of correct answers.
class History {
 public:
  /// Throws DomainError if y is not 0 or 1 or x is not finite.
  void append(double x, int y);

  std::size_t size() const { return x_.size(); }
  bool empty() const { return x_.empty(); }
  std::int64_t sum_y() const { return sum_y_; }

  std::span<const double> difficulties() const { return x_; }
  std::span<const std::uint8_t> responses() const { return y_; }
  /// Difficulties plus cached exp(x), when every cached value is finite.
  DifficultyColumn column() const;

  void clear();
  void reserve(std::size_t n);

 private:
  std::vector<double> x_;
  std::vector<double> exp_x_;
  std::vector<std::uint8_t> y_;
  std::int64_t sum_y_ = 0;
  bool exp_finite_ = true;
};

/// Method-of-moments estimate on the extended real line.
class AbilityEstimate {
 public:
  enum class Kind { kNegInfinite, kFinite, kPosInfinite };

  static AbilityEstimate finite(double theta) { return {Kind::kFinite, theta}; }
  static AbilityEstimate pos_infinite() { return {Kind::kPosInfinite, 0.0}; }
  static AbilityEstimate neg_infinite() { return {Kind::kNegInfinite, 0.0}; }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  /// Finite value, or +/-infinity for the degenerate cases.
  double value() const;

  /// Decimal for finite values, "+inf" / "-inf" otherwise.
  std::string to_string() const;

  friend bool operator==(const AbilityEstimate&, const AbilityEstimate&) = default;

 private:
  AbilityEstimate(Kind kind, double theta) : kind_(kind), theta_(theta) {}

  Kind kind_;
  double theta_;
};

/// Absolute tolerance on theta for the moment-equation solve.
inline constexpr double kMmeTolerance = 1e-10;
/// Largest |theta| the solver will visit before giving up.
inline constexpr double kMmeThetaLimit = 1e6;

/// Solves sum_s f(theta - X_s) = sum_s Y_s. Degenerate histories (no correct
/// or no incorrect answers) map to -inf / +inf. `warm_start` (default 0)
/// seeds the search. Throws PreconditionError on an empty history and
/// NumericError if the root cannot be located within |theta| <= 1e6.
AbilityEstimate mme(const History& history, const ResponseModel& model,
                    std::optional<double> warm_start = std::nullopt);

/// Incremental driver for the sequential setting: owns a History and keeps
/// the last finite estimate and slope sum, so each update starts from a
/// one-observation Newton prediction. Results agree with mme() to the
/// solver tolerance.
class TrackingEstimator {
 public:
  TrackingEstimator(const ResponseModel& model, double prior_center);

  void observe(double x, int y);
  /// Estimate for the current history (prior center counts as "no data").
  AbilityEstimate update();
  /// Value returned by the last update().
  const AbilityEstimate& current() const { return current_; }

  const History& history() const { return history_; }
  void reset();
  void reserve(std::size_t n) { history_.reserve(n); }

 private:
  const ResponseModel* model_;
  double prior_center_;
  History history_;
  AbilityEstimate current_ = AbilityEstimate::finite(0.0);
  std::optional<double> last_finite_;
  double last_slope_sum_ = 0.0;
  std::size_t last_size_ = 0;
};

}  // namespace fitq
