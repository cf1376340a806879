// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "fitq/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fitq/errors.hpp"

namespace fitq {

QuestionBounds::QuestionBounds(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw ConfigError("question bounds need finite lo < hi");
  }
}

double QuestionBounds::project(double x) const { return std::clamp(x, lo_, hi_); }

double fitq_query(const AbilityEstimate& estimate, double z_star, const QuestionBounds& bounds) {
  switch (estimate.kind()) {
    case AbilityEstimate::Kind::kPosInfinite:
      return bounds.hi();
    case AbilityEstimate::Kind::kNegInfinite:
      return bounds.lo();
    case AbilityEstimate::Kind::kFinite:
      break;
  }
  return bounds.project(estimate.value() - z_star);
}

double uniform_query(Xoshiro256& rng, double lo, double hi) {
  if (!(lo < hi)) throw PreconditionError("uniform query needs lo < hi");
  const double x = lo + (hi - lo) * rng.uniform01();
  // Rounding can land exactly on hi for extreme ranges.
  return x < hi ? x : lo;
}

RobbinsMonroStep rm_update(const RobbinsMonroState& state, int y_prev,
                           const QuestionBounds& bounds) {
  if (state.t < 1) throw PreconditionError("Robbins-Monro step index must be >= 1");
  const double step = 1.0 / (static_cast<double>(state.t) * state.gain);
  RobbinsMonroStep out{state, 0.0};
  out.x_next = bounds.project(state.x_curr + step * (y_prev - state.p_star));
  out.state.x_curr = out.x_next;
  out.state.t = state.t + 1;
  return out;
}

namespace {

double parse_number(const std::string& s, std::string_view context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(v)) {
    throw ConfigError("bad number '" + s + "' in policy '" + std::string(context) + "'");
  }
  return v;
}

std::vector<std::string> split_colon(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

PolicySpec PolicySpec::parse(std::string_view text) {
  const auto parts = split_colon(text);
  PolicySpec spec;
  if (parts.size() == 1 && parts[0] == "fitq") {
    spec.kind = Kind::kFitQ;
  } else if (parts.size() == 1 && parts[0] == "rm") {
    spec.kind = Kind::kRobbinsMonro;
  } else if (parts.size() == 2 && parts[0] == "static") {
    if (parts[1] == "xstar") {
      spec.kind = Kind::kStaticOptimal;
    } else {
      spec.kind = Kind::kStatic;
      spec.a = parse_number(parts[1], text);
    }
  } else if (parts.size() == 3 && parts[0] == "uniform") {
    spec.kind = Kind::kUniform;
    spec.a = parse_number(parts[1], text);
    spec.b = parse_number(parts[2], text);
    if (!(spec.a < spec.b)) throw ConfigError("uniform policy needs lo < hi");
  } else {
    throw ConfigError("unknown policy '" + std::string(text) +
                      "' (expected fitq, static:<x0>, static:xstar, uniform:<lo>:<hi>, rm)");
  }
  return spec;
}

std::string PolicySpec::label() const {
  switch (kind) {
    case Kind::kFitQ:
      return "fitq";
    case Kind::kRobbinsMonro:
      return "rm";
    case Kind::kStaticOptimal:
      return "static:xstar";
    case Kind::kStatic:
      return "static:" + format_number(a);
    case Kind::kUniform:
      break;
  }
  return "uniform:" + format_number(a) + ":" + format_number(b);
}

PolicyState make_policy_state(const PolicySpec& spec, const ResponseModel& model,
                              double theta_star, const QuestionBounds& bounds, double rm_start) {
  const double z_star = model.optimal_gap();
  switch (spec.kind) {
    case PolicySpec::Kind::kFitQ:
      return FitQState{z_star};
    case PolicySpec::Kind::kStatic:
    case PolicySpec::Kind::kStaticOptimal: {
      const double x0 =
          spec.kind == PolicySpec::Kind::kStatic ? spec.a : theta_star - z_star;
      if (!bounds.contains(x0)) throw ConfigError("static query lies outside the bounds");
      return StaticState{x0};
    }
    case PolicySpec::Kind::kUniform:
      if (!(bounds.contains(spec.a) && bounds.contains(spec.b))) {
        throw ConfigError("uniform query range leaves the bounds");
      }
      return UniformState{spec.a, spec.b};
    case PolicySpec::Kind::kRobbinsMonro:
      break;
  }
  if (!bounds.contains(rm_start)) throw ConfigError("Robbins-Monro start lies outside the bounds");
  return RobbinsMonroState{rm_start, model.eval(z_star), model.eval_deriv(z_star), 1};
}

QueryPolicy::QueryPolicy(PolicyState initial, const QuestionBounds& bounds)
    : state_(std::move(initial)), bounds_(bounds) {}

double QueryPolicy::next_query(const AbilityEstimate& estimate, Xoshiro256& rng) {
  if (const auto* s = std::get_if<FitQState>(&state_)) {
    return fitq_query(estimate, s->z_star, bounds_);
  }
  if (const auto* s = std::get_if<StaticState>(&state_)) return static_query(s->x0);
  if (const auto* s = std::get_if<UniformState>(&state_)) return uniform_query(rng, s->lo, s->hi);
  return std::get<RobbinsMonroState>(state_).x_curr;
}

void QueryPolicy::record_response(int y) {
  if (auto* s = std::get_if<RobbinsMonroState>(&state_)) {
    *s = rm_update(*s, y, bounds_).state;
  }
}

}  // namespace fitq
