// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>

#include "fitq/errors.hpp"

namespace fitq {

/// Golden-section maximization of a unimodal function on [lo, hi].
/// Stops once the bracket is narrower than `tol`; returns its midpoint.
template <typename Fn>
double golden_section_maximize(Fn&& fn, double lo, double hi, double tol,
                               int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = fn(c);
  double fd = fn(d);
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = fn(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = fn(d);
    }
  }
  if (hi - lo > tol) {
    throw NumericError("golden-section search did not converge");
  }
  return 0.5 * (lo + hi);
}

/// Bisection for the root of an increasing function with fn(lo) < 0 < fn(hi).
template <typename Fn>
double bisect_increasing(Fn&& fn, double lo, double hi, double tol,
                         int max_iter = 200) {
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol) return mid;
    const double v = fn(mid);
    if (v == 0.0) return mid;
    if (v < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo <= tol) return 0.5 * (lo + hi);
  throw NumericError("bisection did not converge");
}

}  // namespace fitq
