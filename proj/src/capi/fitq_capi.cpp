// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "fitq/fitq.h"

#include <cmath>
#include <fstream>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "fitq/errors.hpp"
#include "fitq/estimator.hpp"
#include "fitq/response_model.hpp"
#include "fitq/sim.hpp"
#include "fitq/stopping.hpp"

struct fitq_model {
  fitq::ResponseModel impl;
};

struct fitq_history {
  fitq::History impl;
};

struct fitq_experiment {
  fitq::Experiment impl;
};

namespace {

thread_local std::string last_error;

fitq_status fail(fitq_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
fitq_status guarded(Fn&& fn) {
  try {
    fn();
    return FITQ_OK;
  } catch (const fitq::DomainError& e) {
    return fail(FITQ_ERR_DOMAIN, e.what());
  } catch (const fitq::PreconditionError& e) {
    return fail(FITQ_ERR_PRECONDITION, e.what());
  } catch (const fitq::NumericError& e) {
    return fail(FITQ_ERR_NUMERIC, e.what());
  } catch (const fitq::ConfigError& e) {
    return fail(FITQ_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FITQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FITQ_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FITQ_ERR_INTERNAL, "unknown error");
  }
}

fitq_status null_arg(const char* what) {
  return fail(FITQ_ERR_INVALID_ARGUMENT, std::string("null argument: ") + what);
}

fitq_estimate to_c(const fitq::AbilityEstimate& e) {
  switch (e.kind()) {
    case fitq::AbilityEstimate::Kind::kFinite:
      return {FITQ_ESTIMATE_FINITE, e.value()};
    case fitq::AbilityEstimate::Kind::kPosInfinite:
      return {FITQ_ESTIMATE_POS_INF, HUGE_VAL};
    case fitq::AbilityEstimate::Kind::kNegInfinite:
      break;
  }
  return {FITQ_ESTIMATE_NEG_INF, -HUGE_VAL};
}

fitq::AbilityEstimate from_c(fitq_estimate e) {
  switch (e.kind) {
    case FITQ_ESTIMATE_FINITE:
      return fitq::AbilityEstimate::finite(e.value);
    case FITQ_ESTIMATE_POS_INF:
      return fitq::AbilityEstimate::pos_infinite();
    case FITQ_ESTIMATE_NEG_INF:
      return fitq::AbilityEstimate::neg_infinite();
  }
  throw fitq::DomainError("unknown estimate kind");
}

template <typename Fn>
fitq_status model_scalar(const fitq_model* model, double* out, Fn&& fn) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] { *out = fn(model->impl); });
}

}  // namespace

extern "C" {

const char* fitq_version(void) { return "1.0.0"; }

const char* fitq_last_error(void) { return last_error.c_str(); }

const char* fitq_status_name(fitq_status status) {
  switch (status) {
    case FITQ_OK:
      return "ok";
    case FITQ_ERR_DOMAIN:
      return "domain error";
    case FITQ_ERR_PRECONDITION:
      return "precondition error";
    case FITQ_ERR_NUMERIC:
      return "numeric error";
    case FITQ_ERR_CONFIG:
      return "config error";
    case FITQ_ERR_IO:
      return "i/o error";
    case FITQ_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case FITQ_ERR_INTERNAL:
      break;
  }
  return "internal error";
}

fitq_status fitq_model_create(const char* name, fitq_model** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fitq_model{fitq::ResponseModel::parse(name)}; });
}

void fitq_model_destroy(fitq_model* model) { delete model; }

fitq_status fitq_model_eval(const fitq_model* model, double z, double* out) {
  return model_scalar(model, out, [&](const fitq::ResponseModel& m) { return m.eval(z); });
}

fitq_status fitq_model_eval_deriv(const fitq_model* model, double z, double* out) {
  return model_scalar(model, out, [&](const fitq::ResponseModel& m) { return m.eval_deriv(z); });
}

fitq_status fitq_model_fisher_h(const fitq_model* model, double z, double* out) {
  return model_scalar(model, out, [&](const fitq::ResponseModel& m) { return m.fisher_h(z); });
}

fitq_status fitq_model_optimal_gap(const fitq_model* model, double* out) {
  return model_scalar(model, out, [](const fitq::ResponseModel& m) { return m.optimal_gap(); });
}

fitq_status fitq_diagnostics_compute(const fitq_model* model, double epsilon,
                                     fitq_diagnostics* out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto& m = model->impl;
    fitq_diagnostics d{};
    d.z_star = m.optimal_gap();
    d.f_z_star = m.eval(d.z_star);
    d.h_z_star = m.fisher_h(d.z_star);
    d.lambda_bar = fitq::lambda_bar();
    const auto br = fitq::lambda_brackets(m, d.z_star, epsilon);
    d.lambda_plus = br.plus;
    d.lambda_minus = br.minus;
    d.lambda_star = fitq::solve_lambda_star(m, d.z_star, epsilon);
    d.drift = fitq::drift(m, d.z_star, epsilon, d.lambda_star);
    d.inv_drift = 1.0 / d.drift;
    d.fb_slope = 0.5 * d.h_z_star * epsilon * epsilon;
    d.fc_slope = 1.0 / d.fb_slope;
    *out = d;
  });
}

fitq_status fitq_history_create(fitq_history** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fitq_history{}; });
}

void fitq_history_destroy(fitq_history* history) { delete history; }

fitq_status fitq_history_append(fitq_history* history, double x, int y) {
  if (!history) return null_arg("history");
  return guarded([&] { history->impl.append(x, y); });
}

size_t fitq_history_size(const fitq_history* history) {
  return history ? history->impl.size() : 0;
}

int64_t fitq_history_sum_y(const fitq_history* history) {
  return history ? history->impl.sum_y() : 0;
}

fitq_status fitq_mme(const fitq_history* history, const fitq_model* model,
                     const double* warm_start, fitq_estimate* out) {
  if (!history) return null_arg("history");
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    std::optional<double> warm;
    if (warm_start) warm = *warm_start;
    *out = to_c(fitq::mme(history->impl, model->impl, warm));
  });
}

fitq_status fitq_test_statistic(const fitq_history* history, const fitq_model* model,
                                fitq_estimate estimate, double epsilon, double lambda_star,
                                double* out) {
  if (!history) return null_arg("history");
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (history->impl.empty()) throw fitq::PreconditionError("empty history");
    if (!(epsilon > 0.0) || !(lambda_star > 0.0 && lambda_star <= fitq::lambda_bar())) {
      throw fitq::DomainError("need epsilon > 0 and 0 < lambda_star <= lambda_bar");
    }
    const fitq::StoppingConfig config{epsilon, lambda_star, 1.0, 1};
    *out = fitq::test_statistic(history->impl, from_c(estimate), model->impl, config);
  });
}

fitq_status fitq_bernoulli_kl(double p, double q, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = fitq::bernoulli_kl(p, q); });
}

void fitq_experiment_desc_init(fitq_experiment_desc* desc) {
  if (!desc) return;
  *desc = fitq_experiment_desc{};
  desc->model = "logistic";
  desc->policy = "fitq";
  desc->setting = FITQ_FIXED_BUDGET;
  desc->horizon = 200;
  desc->delta = 0.05;
  desc->max_steps = 10'000'000;
  desc->theta_star = 0.0;
  desc->epsilon = 0.2;
  desc->x_lo = -2.0;
  desc->x_hi = 2.0;
  desc->theta0 = 0.0;
  desc->rm_start = 0.0;
  desc->reps = 1;
  desc->master_seed = 0;
  desc->check_every = 1;
}

fitq_status fitq_experiment_create(const fitq_experiment_desc* desc, fitq_experiment** out) {
  if (!desc) return null_arg("desc");
  if (!out) return null_arg("out");
  if (!desc->model) return null_arg("desc->model");
  if (!desc->policy) return null_arg("desc->policy");
  *out = nullptr;
  return guarded([&] {
    fitq::ExperimentSpec spec;
    if (desc->setting == FITQ_FIXED_BUDGET) {
      spec.setting = fitq::FixedBudget{desc->horizon};
    } else if (desc->setting == FITQ_FIXED_CONFIDENCE) {
      spec.setting = fitq::FixedConfidence{desc->delta, desc->max_steps};
    } else {
      throw fitq::ConfigError("unknown setting");
    }
    spec.model = fitq::ResponseModel::parse(desc->model);
    spec.policy = fitq::PolicySpec::parse(desc->policy);
    spec.theta_star = desc->theta_star;
    spec.epsilon = desc->epsilon;
    spec.bounds = fitq::QuestionBounds(desc->x_lo, desc->x_hi);
    spec.theta0 = desc->theta0;
    spec.rm_start = desc->rm_start;
    spec.reps = desc->reps;
    spec.master_seed = desc->master_seed;
    spec.check_every = desc->check_every;
    *out = new fitq_experiment{fitq::Experiment(std::move(spec))};
  });
}

void fitq_experiment_destroy(fitq_experiment* experiment) { delete experiment; }

fitq_status fitq_experiment_lambda_star(const fitq_experiment* experiment, double* out) {
  if (!experiment) return null_arg("experiment");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto& stop = experiment->impl.stopping();
    if (!stop) throw fitq::PreconditionError("fixed-budget experiments have no lambda_star");
    *out = stop->lambda_star;
  });
}

fitq_status fitq_experiment_replicate(const fitq_experiment* experiment, uint64_t rep_index,
                                      fitq_replication* out) {
  if (!experiment) return null_arg("experiment");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto r = experiment->impl.replicate(rep_index);
    *out = {to_c(r.final_estimate), r.steps, r.failed ? 1 : 0, r.hit_cap ? 1 : 0};
  });
}

fitq_status fitq_experiment_run(const fitq_experiment* experiment, unsigned workers,
                                fitq_aggregate* out) {
  if (!experiment) return null_arg("experiment");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto agg = experiment->impl.run(workers);
    *out = {agg.reps,         agg.failures,     agg.cap_hits, agg.sum_steps,
            agg.failure_rate(), agg.se_failure(), agg.mean_tau(), agg.se_tau()};
  });
}

fitq_status fitq_experiment_write_trace(const fitq_experiment* experiment, uint64_t rep_index,
                                        const char* path) {
  if (!experiment) return null_arg("experiment");
  if (!path) return null_arg("path");
  std::vector<fitq::TraceRow> rows;
  const fitq_status st = guarded([&] {
    experiment->impl.replicate(rep_index, [&](const fitq::TraceRow& r) { rows.push_back(r); });
  });
  if (st != FITQ_OK) return st;
  std::ofstream file(path, std::ios::binary);
  if (!file) return fail(FITQ_ERR_IO, std::string("cannot open ") + path);
  fitq::write_trace_csv(file, rows);
  file.close();
  if (!file) return fail(FITQ_ERR_IO, std::string("failed writing ") + path);
  return FITQ_OK;
}

fitq_status fitq_slope_fit(const double* xs, const double* ys, size_t n, double* slope,
                           double* intercept) {
  if ((!xs || !ys) && n > 0) return null_arg("xs/ys");
  if (!slope || !intercept) return null_arg("slope/intercept");
  return guarded([&] {
    std::vector<std::pair<double, double>> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = {xs[i], ys[i]};
    const auto fit = fitq::slope_fit(pts);
    *slope = fit.slope;
    *intercept = fit.intercept;
  });
}

}  // extern "C"
