// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "fitq/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fitq/errors.hpp"

namespace fitq {

void History::append(double x, int y) {
  if (y != 0 && y != 1) throw DomainError("response must be 0 or 1");
  if (!std::isfinite(x)) throw DomainError("difficulty must be finite");
  const double e = std::exp(x);
  exp_finite_ = exp_finite_ && std::isfinite(e) && e > 0.0;
  x_.push_back(x);
  exp_x_.push_back(e);
  y_.push_back(static_cast<std::uint8_t>(y));
  sum_y_ += y;
}

DifficultyColumn History::column() const {
  if (exp_finite_) return {x_, exp_x_};
  return {x_, {}};
}

void History::clear() {
  x_.clear();
  exp_x_.clear();
  y_.clear();
  sum_y_ = 0;
  exp_finite_ = true;
}

void History::reserve(std::size_t n) {
  x_.reserve(n);
  exp_x_.reserve(n);
  y_.reserve(n);
}

double AbilityEstimate::value() const {
  switch (kind_) {
    case Kind::kFinite:
      return theta_;
    case Kind::kPosInfinite:
      return std::numeric_limits<double>::infinity();
    case Kind::kNegInfinite:
      break;
  }
  return -std::numeric_limits<double>::infinity();
}

std::string AbilityEstimate::to_string() const {
  if (kind_ == Kind::kPosInfinite) return "+inf";
  if (kind_ == Kind::kNegInfinite) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", theta_);
  return buf;
}

namespace {

struct Root {
  double theta;
  double slope_sum;
};

// Safeguarded Newton iteration on g(theta) = sum f(theta - x_s) - target,
// which is strictly increasing. Without a bracket, steps are capped and the
// cap doubles (bracket expansion); with one, Newton proposals leaving it
// are replaced by bisection. A Newton step of length d is accepted once
// d <= sqrt(tol / K), K = sup |f''/f'|: then the post-step error is below
// (K/2) d^2 <= tol.
Root solve_moment_equation(const ResponseModel& model, DifficultyColumn col, double target,
                           double start) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double newton_accept = std::sqrt(kMmeTolerance / model.curvature_bound());
  double lo = -kInf;
  double hi = kInf;
  double theta = start;
  double step_cap = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    if (!(std::fabs(theta) <= kMmeThetaLimit)) {
      throw NumericError("moment equation root lies beyond |theta| = 1e6");
    }
    const MomentSums sums = model.column_sums(col, theta);
    const double g = sums.response - target;
    if (g == 0.0) return {theta, sums.slope};
    if (g < 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    double next = sums.slope > 0.0 ? theta - g / sums.slope : kInf;
    bool newton = std::isfinite(next);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      if (hi - lo <= 2.0 * kMmeTolerance) return {0.5 * (lo + hi), sums.slope};
      if (!(next > lo && next < hi)) {
        next = 0.5 * (lo + hi);
        newton = false;
      }
    } else if (!newton || std::fabs(next - theta) > step_cap) {
      next = theta + (g < 0.0 ? step_cap : -step_cap);
      newton = false;
      step_cap *= 2.0;
    }
    if (newton && std::fabs(next - theta) <= newton_accept) return {next, sums.slope};
    theta = next;
  }
  throw NumericError("moment equation solver exceeded its iteration cap");
}

std::optional<AbilityEstimate> degenerate_estimate(const History& history) {
  if (history.sum_y() == 0) return AbilityEstimate::neg_infinite();
  if (history.sum_y() == static_cast<std::int64_t>(history.size())) {
    return AbilityEstimate::pos_infinite();
  }
  return std::nullopt;
}

}  // namespace

AbilityEstimate mme(const History& history, const ResponseModel& model,
                    std::optional<double> warm_start) {
  if (history.empty()) throw PreconditionError("mme requires a non-empty history");
  if (auto d = degenerate_estimate(history)) return *d;
  const double start = warm_start.value_or(0.0);
  if (!std::isfinite(start)) throw DomainError("warm start must be finite");
  const Root root = solve_moment_equation(model, history.column(),
                                          static_cast<double>(history.sum_y()), start);
  return AbilityEstimate::finite(root.theta);
}

TrackingEstimator::TrackingEstimator(const ResponseModel& model, double prior_center)
    : model_(&model),
      prior_center_(prior_center),
      current_(AbilityEstimate::finite(prior_center)) {}

void TrackingEstimator::observe(double x, int y) { history_.append(x, y); }

AbilityEstimate TrackingEstimator::update() {
  if (history_.empty()) {
    current_ = AbilityEstimate::finite(prior_center_);
    return current_;
  }
  if (auto d = degenerate_estimate(history_)) {
    current_ = *d;
    last_size_ = history_.size();
    return current_;
  }
  double start = last_finite_.value_or(prior_center_);
  if (last_finite_ && current_.is_finite() && history_.size() == last_size_ + 1) {
    // One Newton step for the newest observation against the previous
    // solution, whose residual is zero to solver tolerance.
    const double x = history_.difficulties().back();
    const double y = history_.responses().back();
    const double z = *last_finite_ - x;
    const double denom = last_slope_sum_ + model_->eval_deriv(z);
    if (denom > 0.0) {
      const double step = -(model_->eval(z) - y) / denom;
      start += std::clamp(step, -1.0, 1.0);
    }
  }
  const Root root = solve_moment_equation(*model_, history_.column(),
                                          static_cast<double>(history_.sum_y()), start);
  last_finite_ = root.theta;
  last_slope_sum_ = root.slope_sum;
  last_size_ = history_.size();
  current_ = AbilityEstimate::finite(root.theta);
  return current_;
}

void TrackingEstimator::reset() {
  history_.clear();
  current_ = AbilityEstimate::finite(prior_center_);
  last_finite_.reset();
  last_slope_sum_ = 0.0;
  last_size_ = 0;
}

}  // namespace fitq
