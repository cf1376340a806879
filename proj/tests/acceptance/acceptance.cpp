// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: reproduces the reference fixed-budget and
// fixed-confidence results and checks the statistical contracts. Prints one
// PASS/FAIL line per criterion and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fitq/sim.hpp"

namespace {

using fitq::ExperimentSpec;
using fitq::PolicySpec;
using fitq::ResponseModel;

constexpr std::uint64_t kSeed = 2026;

struct Criterion {
  int id;
  std::string title;
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

fitq::AggregateResult fb_run(const ResponseModel& model, const char* policy, std::int64_t horizon,
                             std::int64_t reps) {
  ExperimentSpec s;
  s.model = model;
  s.policy = PolicySpec::parse(policy);
  s.setting = fitq::FixedBudget{horizon};
  s.reps = reps;
  s.master_seed = kSeed;
  return fitq::run_experiment(s, 0);
}

fitq::AggregateResult fc_run(const ResponseModel& model, const char* policy, double delta,
                             std::int64_t reps) {
  ExperimentSpec s;
  s.model = model;
  s.policy = PolicySpec::parse(policy);
  s.setting = fitq::FixedConfidence{delta, 10'000'000};
  s.reps = reps;
  s.master_seed = kSeed;
  return fitq::run_experiment(s, 0);
}

bool within(double value, double target, double tol) { return std::fabs(value - target) <= tol; }

// One-sided pooled two-proportion z statistic for H1: p_better < p_worse.
double improvement_z(const fitq::AggregateResult& better, const fitq::AggregateResult& worse) {
  const double n1 = static_cast<double>(better.reps);
  const double n2 = static_cast<double>(worse.reps);
  const double pooled = static_cast<double>(better.failures + worse.failures) / (n1 + n2);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
  if (se == 0.0) return 0.0;
  return (worse.failure_rate() - better.failure_rate()) / se;
}

Criterion criterion_1() {
  const auto model = ResponseModel::logistic();
  const auto start = std::chrono::steady_clock::now();
  const auto t200 = fb_run(model, "fitq", 200, 20000);
  const auto t600 = fb_run(model, "fitq", 600, 20000);
  const double secs = seconds_since(start);
  const bool ok = within(t200.failure_rate(), 0.16417, 0.010) &&
                  within(t600.failure_rate(), 0.01516, 0.004) && secs <= 60.0;
  return {1, "fixed-budget logistic FIT-Q", ok,
          "T=200 rate " + fmt("%.5f", t200.failure_rate()) + " (0.16417 +/- 0.010), T=600 rate " +
              fmt("%.5f", t600.failure_rate()) + " (0.01516 +/- 0.004), " + fmt("%.1f", secs) +
              " s (<= 60 s)"};
}

Criterion criterion_2() {
  const auto model = ResponseModel::algebraic(4);
  std::ostringstream detail;
  bool ok = true;
  bool ordering = true;
  for (std::int64_t t : {50, 100, 150, 200, 250}) {
    const auto fitq_res = fb_run(model, "fitq", t, 20000);
    const auto stat = fb_run(model, "static:1", t, 20000);
    const auto unif = fb_run(model, "uniform:-1:1", t, 20000);
    if (t == 50) {
      const bool a = within(fitq_res.failure_rate(), 0.16983, 0.012);
      const bool b = within(stat.failure_rate(), 0.32834, 0.015);
      ok = ok && a && b;
      detail << "T=50 FIT-Q " << fmt("%.5f", fitq_res.failure_rate())
             << " (0.16983 +/- 0.012), Static(1) " << fmt("%.5f", stat.failure_rate())
             << " (0.32834 +/- 0.015); ordering z (>= 1.645):";
    }
    const double z_static = improvement_z(fitq_res, stat);
    const double z_unif = improvement_z(fitq_res, unif);
    const bool good = z_static >= 1.645 && z_unif >= 1.645;
    ordering = ordering && good;
    detail << " T=" << t << " [vs Static " << fmt("%.2f", z_static) << ", vs Uniform "
           << fmt("%.2f", z_unif) << ", FIT-Q " << fmt("%.5f", fitq_res.failure_rate())
           << " Uniform " << fmt("%.5f", unif.failure_rate()) << (good ? "]" : " FAIL]");
  }
  return {2, "fixed-budget algebraic-4 and ordering", ok && ordering, detail.str()};
}

struct FcPair {
  fitq::AggregateResult d1;
  fitq::AggregateResult d2;
  double secs;
};

const FcPair& logistic_fc() {
  static const FcPair pair = [] {
    const auto model = ResponseModel::logistic();
    const auto start = std::chrono::steady_clock::now();
    FcPair p;
    p.d1 = fc_run(model, "fitq", 5e-2, 1000);
    p.d2 = fc_run(model, "fitq", 5e-3, 1000);
    p.secs = seconds_since(start);
    return p;
  }();
  return pair;
}

Criterion criterion_3() {
  const auto& p = logistic_fc();
  const double a = p.d1.mean_tau();
  const double b = p.d2.mean_tau();
  const bool ok = within(a, 791.5, 0.03 * 791.5) && within(b, 1280.9, 0.03 * 1280.9) &&
                  p.secs <= 120.0 && p.d1.cap_hits == 0 && p.d2.cap_hits == 0;
  return {3, "fixed-confidence logistic FIT-Q stopping times", ok,
          "delta=5e-2 mean tau " + fmt("%.1f", a) + " (791.5 +/- 3%), delta=5e-3 mean tau " +
              fmt("%.1f", b) + " (1280.9 +/- 3%), " + fmt("%.1f", p.secs) + " s (<= 120 s)"};
}

Criterion criterion_4() {
  const auto& p = logistic_fc();
  const double gap = p.d2.mean_tau() - p.d1.mean_tau();
  const double theory = std::log(10.0) / fitq::drift(ResponseModel::logistic(), 0.0, 0.2,
                                                     fitq::solve_lambda_star(
                                                         ResponseModel::logistic(), 0.0, 0.2));
  return {4, "fixed-confidence decade slope", gap >= 465.0 && gap <= 515.0,
          "mean tau gap " + fmt("%.1f", gap) + " in [465, 515] (log(10)/drift = " +
              fmt("%.1f", theory) + ")"};
}

Criterion criterion_5() {
  const auto model = ResponseModel::logistic();
  std::vector<std::pair<double, double>> pts;
  std::ostringstream detail;
  bool finite = true;
  for (std::int64_t t : {200, 400, 600, 800, 1000}) {
    const auto r = fb_run(model, "fitq", t, 50000);
    detail << "T=" << t << " rate " << fmt("%.5f", r.failure_rate()) << "; ";
    if (r.failures == 0) {
      finite = false;
      continue;
    }
    pts.emplace_back(static_cast<double>(t), -std::log(r.failure_rate()));
  }
  double slope = std::nan("");
  if (finite) slope = fitq::slope_fit(pts).slope;
  const bool ok = finite && slope >= 0.0050 && slope <= 0.0075;
  detail << "OLS slope " << fmt("%.5f", slope) << " in [0.0050, 0.0075] (theory 0.005)";
  return {5, "fixed-budget error exponent", ok, detail.str()};
}

Criterion criterion_6() {
  const auto r = fc_run(ResponseModel::logistic(), "fitq", 0.05, 2000);
  return {6, "fixed-confidence failure rate within delta", r.failure_rate() <= 0.05,
          "failure rate " + fmt("%.4f", r.failure_rate()) + " <= 0.05 over 2000 reps"};
}

// ---- criterion 7: property suites ------------------------------------------

using Check = std::pair<std::string, std::function<bool()>>;

bool dominance_grid() {
  const double lb = fitq::lambda_bar();
  for (int i = 1; 0.01 * i <= lb; ++i) {
    const double l = 0.01 * i;
    for (int j = 1; j <= 999; ++j) {
      const double p = 0.001 * j;
      const double ph = fitq::phi(l, p);
      if (ph < fitq::psi(l, p) - 1e-12 || ph < fitq::psi(-l, p) - 1e-12) return false;
    }
  }
  return true;
}

bool hoeffding_grid() {
  const double lb = fitq::lambda_bar();
  for (int i = 1; 0.01 * i <= lb; ++i) {
    const double l = 0.01 * i;
    for (int j = 1; j <= 999; ++j) {
      if (fitq::psi(l, 0.001 * j) > l * l / 8.0 + 1e-12) return false;
    }
  }
  return true;
}

bool quasi_convexity() {
  fitq::Xoshiro256 rng(kSeed);
  for (int trial = 0; trial < 200; ++trial) {
    const double l = 1e-3 + (fitq::lambda_bar() - 1e-3) * rng.uniform01();
    const int j0 = 1 + static_cast<int>(rng() % 999);
    const double p0 = 0.001 * j0;
    std::vector<double> g;
    for (int j = 0; j <= 1000; ++j) g.push_back(l * std::fabs(0.001 * j - p0) - fitq::phi(l, 0.001 * j));
    if (std::min_element(g.begin(), g.end()) - g.begin() != j0) return false;
    for (int j = 1; j <= j0; ++j) {
      if (g[j] > g[j - 1] + 1e-15) return false;
    }
    for (int j = j0 + 1; j <= 1000; ++j) {
      if (g[j] < g[j - 1] - 1e-15) return false;
    }
  }
  return true;
}

bool lambda_star_bracket() {
  for (const auto& m : {ResponseModel::logistic(), ResponseModel::algebraic(4)}) {
    for (double eps : {0.05, 0.1, 0.2, 0.4}) {
      const double l = fitq::solve_lambda_star(m, m.optimal_gap(), eps);
      const auto br = fitq::lambda_brackets(m, m.optimal_gap(), eps);
      if (l > fitq::lambda_bar() || l < std::min(br.plus, br.minus) - 1e-9 ||
          l > std::max(br.plus, br.minus) + 1e-9) {
        return false;
      }
    }
  }
  return true;
}

bool positive_drift() {
  for (const auto& m : {ResponseModel::logistic(), ResponseModel::algebraic(4)}) {
    for (double eps : {0.05, 0.1, 0.2, 0.4}) {
      const double l = fitq::solve_lambda_star(m, m.optimal_gap(), eps);
      if (!(fitq::drift(m, m.optimal_gap(), eps, l) > 0.0)) return false;
    }
  }
  return true;
}

fitq::History random_mixed_history(fitq::Xoshiro256& rng, const ResponseModel& m) {
  fitq::History h;
  const std::size_t len = 2 + rng() % 200;
  const double theta = -1.0 + 2.0 * rng.uniform01();
  for (std::size_t i = 0; i < len; ++i) {
    const double x = -2.0 + 4.0 * rng.uniform01();
    h.append(x, rng.bernoulli(m.eval(theta - x)));
  }
  if (h.sum_y() == 0) h.append(0.0, 1);
  if (h.sum_y() == static_cast<std::int64_t>(h.size())) h.append(0.0, 0);
  return h;
}

bool moment_residual() {
  fitq::Xoshiro256 rng(kSeed + 1);
  for (const auto& m : {ResponseModel::logistic(), ResponseModel::algebraic(4)}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const auto h = random_mixed_history(rng, m);
      const auto e = fitq::mme(h, m);
      if (!e.is_finite()) return false;
      double s = 0.0;
      for (double x : h.difficulties()) s += m.eval(e.value() - x);
      if (std::fabs(s - static_cast<double>(h.sum_y())) > static_cast<double>(h.size()) * 1e-9) {
        return false;
      }
    }
  }
  return true;
}

bool two_point_reduction() {
  fitq::Xoshiro256 rng(kSeed + 2);
  const auto m = ResponseModel::logistic();
  const double lambda = fitq::solve_lambda_star(m, 0.0, 0.2);
  const fitq::StoppingConfig cfg{0.2, lambda, std::log(40.0), 1};
  for (int checked = 0; checked < 100;) {
    fitq::History h;
    const std::size_t len = 2 + rng() % 60;
    for (std::size_t i = 0; i < len; ++i) {
      const double x = -2.0 + 4.0 * rng.uniform01();
      h.append(x, rng.bernoulli(m.eval(-x)));
    }
    const auto est = fitq::mme(h, m);
    if (!est.is_finite()) continue;
    ++checked;
    const double th = est.value();
    auto evidence = [&](double alt) {
      double s = 0.0;
      for (double x : h.difficulties()) {
        const double f = m.eval(alt - x);
        s += lambda * std::fabs(m.eval(th - x) - f) - fitq::phi(lambda, f);
      }
      return s;
    };
    double inf = std::min(evidence(th - 0.2), evidence(th + 0.2));
    for (int i = 0; i <= 4800; ++i) {
      const double off = 0.2 + i * 1e-3;
      inf = std::min({inf, evidence(th - off), evidence(th + off)});
    }
    if (std::fabs(fitq::test_statistic(h, est, m, cfg) - inf) > 1e-6) return false;
  }
  return true;
}

bool kl_fisher() {
  const auto m = ResponseModel::logistic();
  const double eps = 0.05;
  const double ratio =
      fitq::bernoulli_kl(m.eval(eps), m.eval(0.0)) / (0.5 * m.fisher_h(0.0) * eps * eps);
  return std::fabs(ratio - 1.0) <= 0.05;
}

bool shift_equivariance() {
  for (const char* pol : {"fitq", "rm", "uniform:-1:1", "static:xstar"}) {
    for (const auto& model : {ResponseModel::logistic(), ResponseModel::algebraic(4)}) {
      ExperimentSpec base;
      base.model = model;
      base.policy = PolicySpec::parse(pol);
      base.setting = fitq::FixedBudget{300};
      std::vector<fitq::TraceRow> ref;
      fitq::Experiment(base).replicate(7, [&](const fitq::TraceRow& r) { ref.push_back(r); });
      for (double c : {-3.25, 0.5, 7.0}) {
        ExperimentSpec moved = base;
        moved.theta_star += c;
        moved.theta0 += c;
        moved.rm_start += c;
        moved.bounds = fitq::QuestionBounds(base.bounds.lo() + c, base.bounds.hi() + c);
        if (moved.policy.kind == PolicySpec::Kind::kUniform) {
          moved.policy.a += c;
          moved.policy.b += c;
        }
        std::vector<fitq::TraceRow> got;
        fitq::Experiment(moved).replicate(7, [&](const fitq::TraceRow& r) { got.push_back(r); });
        if (got.size() != ref.size()) return false;
        for (std::size_t t = 0; t < got.size(); ++t) {
          if (std::fabs(got[t].x - ref[t].x - c) > 1e-9 || got[t].y != ref[t].y ||
              got[t].theta_hat.kind() != ref[t].theta_hat.kind()) {
            return false;
          }
          if (got[t].theta_hat.is_finite() &&
              std::fabs(got[t].theta_hat.value() - ref[t].theta_hat.value() - c) > 1e-9) {
            return false;
          }
        }
      }
    }
  }
  return true;
}

Criterion criterion_7() {
  const std::vector<Check> checks = {
      {"phi/psi dominance", dominance_grid},
      {"psi <= lambda^2/8", hoeffding_grid},
      {"quasi-convexity", quasi_convexity},
      {"lambda_star bracket", lambda_star_bracket},
      {"positive drift", positive_drift},
      {"moment residual", moment_residual},
      {"two-point minimum", two_point_reduction},
      {"KL vs Fisher", kl_fisher},
      {"shift equivariance", shift_equivariance},
  };
  bool ok = true;
  std::string detail;
  for (const auto& [name, fn] : checks) {
    bool pass = false;
    try {
      pass = fn();
    } catch (const std::exception& e) {
      detail += "(" + std::string(e.what()) + ") ";
    }
    ok = ok && pass;
    detail += name + (pass ? " ok; " : " FAILED; ");
  }
  return {7, "property suites", ok, detail};
}

// ---- criterion 8: byte-identical artifacts ----------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Criterion criterion_8() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "fitq_acceptance_determinism";
  fs::remove_all(root);
  auto sweep = [&](const std::string& cmd, const std::string& dir, const char* workers) {
    std::vector<std::string> args = {cmd, "--reps", "400", "--seed", "77", "--workers", workers,
                                     "--policies", "fitq,rm,uniform:-1:1,static:1",
                                     "--out", (root / dir).string()};
    if (cmd == "run-fb") {
      args.insert(args.end(), {"--horizons", "50,200"});
    } else {
      args.insert(args.end(), {"--deltas", "0.05,0.005"});
    }
    std::ostringstream out, err;
    return fitq::cli::run(args, out, err);
  };
  bool ok = true;
  std::string detail;
  for (const std::string cmd : {"run-fb", "run-fc"}) {
    const std::string prefix = cmd == "run-fb" ? "fb" : "fc";
    const int a = sweep(cmd, prefix + "_a", "1");
    const int b = sweep(cmd, prefix + "_b", "1");
    const int c = sweep(cmd, prefix + "_c", "8");
    const std::string file = prefix + "_results.csv";
    const std::string ref = slurp(root / (prefix + "_a") / file);
    const bool runs = a == 0 && b == 0 && c == 0 && !ref.empty();
    const bool rerun = runs && ref == slurp(root / (prefix + "_b") / file);
    const bool workers = runs && ref == slurp(root / (prefix + "_c") / file);
    ok = ok && rerun && workers;
    detail += prefix + ": rerun " + (rerun ? "identical" : "DIFFERENT") + ", workers 1 vs 8 " +
              (workers ? "identical" : "DIFFERENT") + "; ";
  }
  fs::remove_all(root);
  return {8, "determinism", ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::function<Criterion()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4,
      criterion_5, criterion_6, criterion_7, criterion_8};
  int failed = 0;
  for (const auto& run : criteria) {
    Criterion c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c = {0, "criterion raised", false, e.what()};
    }
    if (!c.pass) ++failed;
    std::cout << (c.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " | "
              << c.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all acceptance criteria passed"
                            : std::to_string(failed) + " acceptance criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
