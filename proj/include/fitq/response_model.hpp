// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

namespace fitq {

/// Column of past question difficulties. `exp_x`, when non-empty, holds
/// exp(x) for every entry and lets the logistic kernel skip one exp per
/// element; it must then have the same length as `x`.
struct DifficultyColumn {
  std::span<const double> x;
  std::span<const double> exp_x;
};

/// Sums of f(theta - x_s) and f'(theta - x_s) over a column.
struct MomentSums {
  double response = 0.0;
  double slope = 0.0;
};

/// A response function f mapping the gap z = theta - x to the probability
/// of a correct answer, together with f', the Fisher-information profile
/// h(z) = f'(z)^2 / (f(z)(1 - f(z))) and the location of its maximum.
///
/// Two families ship: the logistic function and the algebraic family
/// f(z) = 0.5 z / (1 + z^k)^(1/k) + 0.5 for even k >= 2. Instances are
/// immutable and cheap to copy.
class ResponseModel {
 public:
  enum class Kind { kLogistic, kAlgebraic };

  static ResponseModel logistic();
  /// Throws ConfigError unless k is even and >= 2.
  static ResponseModel algebraic(int k);
  /// Parses "logistic" or "algebraic-<k>". Throws ConfigError.
  static ResponseModel parse(std::string_view name);

  Kind kind() const { return kind_; }
  int order() const { return k_; }
  /// Canonical name accepted by parse().
  std::string name() const;

  /// f(z). Throws DomainError for non-finite z.
  double eval(double z) const;
  /// 1 - f(z), computed without cancellation in the upper tail.
  double complement(double z) const;
  /// f'(z) > 0. Throws DomainError for non-finite z.
  double eval_deriv(double z) const;
  double fisher_h(double z) const;
  /// Information about `theta` carried by one answer to question `x`.
  double fisher_info(double x, double theta) const { return fisher_h(theta - x); }

  /// Nonnegative global maximizer z_* of fisher_h. Cached at construction.
  double optimal_gap() const { return z_star_; }

  /// Upper bound on |f''(z)| / f'(z) over the real line. Bounds the
  /// curvature of any moment equation built from f.
  double curvature_bound() const;

  /// Sum of f(theta - x_s) and f'(theta - x_s) over the column.
  MomentSums column_sums(DifficultyColumn col, double theta) const;

  /// Writes f(theta - x_s) into `f_out` and 1 - f(theta - x_s) into
  /// `comp_out` (each sized like col.x).
  void eval_column(DifficultyColumn col, double theta, std::span<double> f_out,
                   std::span<double> comp_out) const;

 private:
  ResponseModel(Kind kind, int k);

  Kind kind_;
  int k_;
  double z_star_ = 0.0;
};

/// Locates z_* by a grid scan on [-10, 10] (step 1e-2) followed by
/// golden-section refinement to 1e-10; for symmetric maxima the
/// nonnegative one is returned. Throws NumericError on failure.
double locate_optimal_gap(const ResponseModel& model);

}  // namespace fitq
