// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fitq/errors.hpp"
#include "fitq/sim.hpp"

using fitq::ExperimentSpec;
using fitq::PolicySpec;
using fitq::ResponseModel;

namespace {

ExperimentSpec fb_spec(std::int64_t horizon, const char* policy = "fitq") {
  ExperimentSpec s;
  s.setting = fitq::FixedBudget{horizon};
  s.policy = PolicySpec::parse(policy);
  return s;
}

ExperimentSpec fc_spec(double delta, const char* policy = "fitq") {
  ExperimentSpec s;
  s.setting = fitq::FixedConfidence{delta, 10'000'000};
  s.policy = PolicySpec::parse(policy);
  return s;
}

bool same(const fitq::AggregateResult& a, const fitq::AggregateResult& b) {
  return a.reps == b.reps && a.failures == b.failures && a.cap_hits == b.cap_hits &&
         a.sum_steps == b.sum_steps && a.sum_steps_sq == b.sum_steps_sq;
}

}  // namespace

TEST_CASE("rng streams") {
  fitq::Xoshiro256 a(1), b(1), c(2);
  std::vector<std::uint64_t> va, vb, vc;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(fitq::derive_seed(0, 0, 0) != fitq::derive_seed(0, 1, 0));
  CHECK(fitq::derive_seed(0, 0, 0) != fitq::derive_seed(0, 0, 1));
  CHECK(fitq::derive_seed(0, 0, 0) != fitq::derive_seed(1, 0, 0));
  // Reference output of the generator seeded through SplitMix64 with seed 0.
  fitq::Xoshiro256 ref(0);
  CHECK(ref() == 0x99ec5f36cb75f2b4ULL);
}

TEST_CASE("simulate response") {
  const auto m = ResponseModel::logistic();
  fitq::Xoshiro256 rng(4);
  long ones = 0;
  for (int i = 0; i < 100000; ++i) ones += fitq::simulate_response(m, 0.3, 0.3, rng);
  CHECK(std::fabs(ones / 100000.0 - 0.5) <= 0.005);
  for (int i = 0; i < 1000; ++i) REQUIRE(fitq::simulate_response(m, 20.0, 0.0, rng) == 1);
  fitq::Xoshiro256 r1(9), r2(9);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(fitq::simulate_response(m, 0.0, 0.1, r1) == fitq::simulate_response(m, 0.0, 0.1, r2));
  }
}

TEST_CASE("fixed-budget replication") {
  for (const char* pol : {"fitq", "static:1", "uniform:-1:1", "rm"}) {
    const auto out = fitq::run_fb_replication(fb_spec(1, pol), 0);
    CHECK(out.failed);
    CHECK_FALSE(out.final_estimate.is_finite());
    CHECK(out.steps == 1);
  }
  std::vector<double> xs;
  fitq::Experiment(fb_spec(5)).replicate(0, [&](const fitq::TraceRow& r) { xs.push_back(r.x); });
  REQUIRE(xs.size() == 5);
  CHECK(xs[0] == 0.0);

  const auto spec = fb_spec(300);
  const auto a = fitq::run_fb_replication(spec, 17);
  const auto b = fitq::run_fb_replication(spec, 17);
  CHECK(a.final_estimate == b.final_estimate);
  CHECK(a.steps == 300);
  CHECK(a.failed == (std::fabs(a.final_estimate.value()) > 0.2));
  CHECK_THROWS_AS(fitq::run_fb_replication(fc_spec(0.05), 0), fitq::PreconditionError);
}

TEST_CASE("skipping intermediate estimates does not change the outcome") {
  for (const char* pol : {"static:1", "uniform:-1:1", "rm"}) {
    const fitq::Experiment exp(fb_spec(150, pol));
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      const auto plain = exp.replicate(rep);
      const auto traced = exp.replicate(rep, [](const fitq::TraceRow&) {});
      REQUIRE(plain.final_estimate.kind() == traced.final_estimate.kind());
      if (plain.final_estimate.is_finite()) {
        REQUIRE(std::fabs(plain.final_estimate.value() - traced.final_estimate.value()) <= 1e-9);
      }
      REQUIRE(plain.failed == traced.failed);
    }
  }
}

TEST_CASE("fixed-confidence replication") {
  const auto spec = fc_spec(0.05);
  const auto out = fitq::run_fc_replication(spec, 3);
  CHECK_FALSE(out.hit_cap);
  CHECK(out.final_estimate.is_finite());
  CHECK(out.steps > 1);
  CHECK_THROWS_AS(fitq::run_fc_replication(fb_spec(10), 0), fitq::PreconditionError);

  // The stopping step is the first t with Z_t >= log(2 / delta).
  fitq::Experiment exp(fc_spec(0.999));
  const auto& cfg = *exp.stopping();
  fitq::History h;
  std::vector<double> zs;
  const auto res = exp.replicate(1, [&](const fitq::TraceRow& r) {
    h.append(r.x, r.y);
    zs.push_back(fitq::test_statistic(h, r.theta_hat, exp.spec().model, cfg));
  });
  REQUIRE(static_cast<std::int64_t>(zs.size()) == res.steps);
  CHECK(zs.back() >= std::log(2.0 / 0.999));
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) CHECK(zs[i] < cfg.threshold);
}

TEST_CASE("fixed-confidence cap and check cadence") {
  auto capped = fc_spec(1e-6);
  std::get<fitq::FixedConfidence>(capped.setting).max_steps = 30;
  const auto out = fitq::run_fc_replication(capped, 0);
  CHECK(out.hit_cap);
  CHECK(out.failed);
  CHECK(out.steps == 30);

  auto sparse = fc_spec(0.05);
  sparse.check_every = 7;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    REQUIRE(fitq::run_fc_replication(sparse, rep).steps % 7 == 0);
  }
}

TEST_CASE("fixed-confidence median stopping time") {
  auto spec = fc_spec(0.05);
  std::vector<std::int64_t> taus;
  const fitq::Experiment exp(spec);
  for (std::uint64_t rep = 0; rep < 100; ++rep) taus.push_back(exp.replicate(rep).steps);
  std::nth_element(taus.begin(), taus.begin() + 50, taus.end());
  CHECK(std::fabs(taus[50] - 790.0) <= 0.15 * 790.0);
}

TEST_CASE("spec validation") {
  auto s = fb_spec(10);
  s.reps = 0;
  CHECK_THROWS_AS(fitq::run_experiment(s), fitq::PreconditionError);
  s = fb_spec(0);
  CHECK_THROWS_AS(fitq::Experiment{s}, fitq::ConfigError);
  s = fb_spec(10);
  s.epsilon = 0.0;
  CHECK_THROWS_AS(fitq::Experiment{s}, fitq::ConfigError);
  s = fc_spec(1.0);
  CHECK_THROWS_AS(fitq::Experiment{s}, fitq::ConfigError);
  s = fc_spec(0.1);
  std::get<fitq::FixedConfidence>(s.setting).max_steps = 0;
  CHECK_THROWS_AS(fitq::Experiment{s}, fitq::ConfigError);
  s = fb_spec(10);
  s.check_every = 0;
  CHECK_THROWS_AS(fitq::Experiment{s}, fitq::ConfigError);
}

TEST_CASE("replication errors carry the replication index") {
  // theta* beyond the solver limit: the first finite estimate overflows.
  auto s = fb_spec(50, "static:0");
  s.theta_star = 0.0;
  s.bounds = fitq::QuestionBounds(-3e6, 3e6);
  s.policy = PolicySpec::parse("static:2000000");
  s.theta_star = 2e6;
  s.reps = 40;
  try {
    fitq::run_experiment(s, 4);
    FAIL("expected an error");
  } catch (const fitq::NumericError& e) {
    CHECK(std::string(e.what()).rfind("replication ", 0) == 0);
  }
}

TEST_CASE("aggregate statistics") {
  fitq::AggregateResult agg;
  for (int i = 0; i < 4; ++i) {
    fitq::ReplicationOutcome o;
    o.steps = 10 + i;
    o.failed = i == 0;
    agg.add(o);
  }
  CHECK(agg.reps == 4);
  CHECK(agg.failures == 1);
  CHECK(agg.failure_rate() == 0.25);
  CHECK(agg.se_failure() == doctest::Approx(std::sqrt(0.25 * 0.75 / 4)));
  CHECK(agg.mean_tau() == 11.5);
  // Sample sd of {10,11,12,13} is sqrt(5/3).
  CHECK(agg.se_tau() == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));

  fitq::AggregateResult none;
  for (int i = 0; i < 1000; ++i) none.add({fitq::AbilityEstimate::finite(0), 5, false, false});
  CHECK(none.failure_rate() == 0.0);
  CHECK(none.se_failure() == 0.003);
  CHECK(none.se_tau() == 0.0);

  fitq::AggregateResult big;
  for (int i = 0; i < 3; ++i) {
    big.add({fitq::AbilityEstimate::finite(0), 4'000'000'000LL + i, false, false});
  }
  CHECK(big.se_tau() == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("results do not depend on the worker count") {
  auto fb = fb_spec(120);
  fb.reps = 300;
  fb.master_seed = 99;
  const auto one = fitq::run_experiment(fb, 1);
  CHECK(same(one, fitq::run_experiment(fb, 8)));
  CHECK(same(one, fitq::run_experiment(fb, 3)));
  CHECK(one.reps == 300);
  CHECK(one.sum_steps == 300u * 120u);

  auto fc = fc_spec(0.2, "uniform:-1:1");
  fc.reps = 60;
  fc.master_seed = 5;
  CHECK(same(fitq::run_experiment(fc, 1), fitq::run_experiment(fc, 8)));

  const auto first = fitq::Experiment(fb).replicate(0).final_estimate;
  fb.master_seed = 100;
  CHECK(first != fitq::Experiment(fb).replicate(0).final_estimate);
}

TEST_CASE("slope fit") {
  const std::vector<std::pair<double, double>> two = {{0, 0}, {1, 2}};
  auto fit = fitq::slope_fit(two);
  CHECK(fit.slope == 2.0);
  CHECK(fit.intercept == 0.0);
  const std::vector<std::pair<double, double>> three = {{0, 1}, {1, 3}, {2, 5}};
  fit = fitq::slope_fit(three);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-15));

  // Published logistic FIT-Q failure rates over T = 200..1000.
  const double rates[] = {0.16417, 0.04815, 0.01516, 0.00465, 0.00149};
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(200.0 * (i + 1), -std::log(rates[i]));
  CHECK(fitq::slope_fit(pts).slope == doctest::Approx(0.00588).epsilon(0.005));

  const std::vector<std::pair<double, double>> flat = {{1, 0}, {1, 2}};
  CHECK_THROWS_AS(fitq::slope_fit(flat), fitq::PreconditionError);
  CHECK_THROWS_AS(fitq::slope_fit({}), fitq::PreconditionError);
}

TEST_CASE("trace csv") {
  std::ostringstream out;
  const std::vector<fitq::TraceRow> rows = {
      {1, 0.0, 1, fitq::AbilityEstimate::pos_infinite()},
      {2, 2.0, 0, fitq::AbilityEstimate::finite(0.0)},
      {3, -0.25, 0, fitq::AbilityEstimate::neg_infinite()}};
  fitq::write_trace_csv(out, rows);
  CHECK(out.str() == "t,x,y,theta_hat\n1,0,1,+inf\n2,2,0,0\n3,-0.25,0,-inf\n");
}
