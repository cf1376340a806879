// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

// Long-horizon check that Z_t / t under FIT-Q approaches the drift constant.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "fitq/estimator.hpp"
#include "fitq/policy.hpp"
#include "fitq/sim.hpp"
#include "fitq/stopping.hpp"

namespace {

double average_slope(const fitq::ResponseModel& model, int seeds, int horizon) {
  const double eps = 0.2;
  const auto cfg = fitq::StoppingConfig::make(model, eps, 0.05);
  const fitq::QuestionBounds bounds(-2.0, 2.0);
  double total = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    fitq::Xoshiro256 rng(fitq::derive_seed(4242, static_cast<std::uint64_t>(seed), 0));
    fitq::TrackingEstimator est(model, 0.0);
    est.reserve(static_cast<std::size_t>(horizon));
    auto current = est.current();
    for (int t = 0; t < horizon; ++t) {
      const double x = fitq::fitq_query(current, model.optimal_gap(), bounds);
      est.observe(x, fitq::simulate_response(model, 0.0, x, rng));
      current = est.update();
    }
    total += fitq::test_statistic(est.history(), current, model, cfg) / horizon;
  }
  return total / seeds;
}

}  // namespace

TEST_CASE("Z_t / t converges to the drift under FIT-Q") {
  const auto model = fitq::ResponseModel::logistic();
  const double lambda = fitq::solve_lambda_star(model, 0.0, 0.2);
  const double c = fitq::drift(model, 0.0, 0.2, lambda);
  const double slope = average_slope(model, 50, 50000);
  std::printf("mean Z_t/t = %.6g, drift = %.6g, ratio = %.4f\n", slope, c, slope / c);
  CHECK(std::fabs(slope - c) <= 0.10 * c);
}
