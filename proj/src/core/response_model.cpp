// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "fitq/response_model.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "fitq/errors.hpp"
#include "fitq/scalar_search.hpp"

#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define FITQ_VECTOR_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define FITQ_VECTOR_CLONES
#endif

namespace fitq {
namespace {

void require_finite(double z) {
  if (!std::isfinite(z)) throw DomainError("response gap must be finite");
}

// Algebraic family, evaluated through r = (1 + |z|^k)^(1/k). The tail mass
// 0.5 (r - |z|) / r is rewritten with r^k - |z|^k = 1 so neither f nor 1 - f
// suffers cancellation.
struct AlgebraicTerms {
  double lower;  // min(f(z), 1 - f(z))
  double deriv;
};

inline AlgebraicTerms algebraic_terms(double z, int k) {
  const double a = std::fabs(z);
  double r;
  double s;
  double geom;
  if (k == 4) {
    const double a2 = a * a;
    s = 1.0 + a2 * a2;
    r = std::sqrt(std::sqrt(s));
    geom = (r + a) * (r * r + a2);
  } else {
    s = 1.0 + std::pow(a, k);
    r = std::pow(s, 1.0 / k);
    geom = 0.0;
    double rp = 1.0;
    for (int j = 0; j < k; ++j) {
      geom += rp * std::pow(a, k - 1 - j);
      rp *= r;
    }
  }
  return {0.5 / (r * geom), 0.5 / (s * r)};
}

inline double logistic_eval(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Hot loop of the moment solver: f = 1 / (1 + scale * exp(x)).
FITQ_VECTOR_CLONES MomentSums logistic_scaled_sums(const double* exp_x, std::size_t n,
                                                   double scale) {
  double response = 0.0;
  double slope = 0.0;
#pragma omp simd reduction(+ : response, slope)
  for (std::size_t i = 0; i < n; ++i) {
    const double u = scale * exp_x[i];
    const double f = 1.0 / (1.0 + u);
    response += f;
    slope += u * f * f;
  }
  return {response, slope};
}

}  // namespace

ResponseModel::ResponseModel(Kind kind, int k) : kind_(kind), k_(k) {
  z_star_ = locate_optimal_gap(*this);
}

ResponseModel ResponseModel::logistic() { return ResponseModel(Kind::kLogistic, 0); }

ResponseModel ResponseModel::algebraic(int k) {
  if (k < 2 || k % 2 != 0) {
    throw ConfigError("algebraic order must be an even integer >= 2, got " +
                      std::to_string(k));
  }
  return ResponseModel(Kind::kAlgebraic, k);
}

ResponseModel ResponseModel::parse(std::string_view name) {
  if (name == "logistic") return logistic();
  constexpr std::string_view prefix = "algebraic-";
  if (name.substr(0, prefix.size()) == prefix) {
    const auto digits = name.substr(prefix.size());
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
      return algebraic(k);
    }
  }
  throw ConfigError("unknown response model '" + std::string(name) +
                    "' (expected logistic or algebraic-<even k>)");
}

std::string ResponseModel::name() const {
  if (kind_ == Kind::kLogistic) return "logistic";
  return "algebraic-" + std::to_string(k_);
}

double ResponseModel::eval(double z) const {
  require_finite(z);
  if (kind_ == Kind::kLogistic) return logistic_eval(z);
  const double tail = algebraic_terms(z, k_).lower;
  return z >= 0.0 ? 1.0 - tail : tail;
}

double ResponseModel::complement(double z) const {
  require_finite(z);
  if (kind_ == Kind::kLogistic) return logistic_eval(-z);
  const double tail = algebraic_terms(z, k_).lower;
  return z >= 0.0 ? tail : 1.0 - tail;
}

double ResponseModel::eval_deriv(double z) const {
  require_finite(z);
  if (kind_ == Kind::kLogistic) return logistic_eval(z) * logistic_eval(-z);
  return algebraic_terms(z, k_).deriv;
}

double ResponseModel::fisher_h(double z) const {
  const double f = eval(z);
  const double c = complement(z);
  if (kind_ == Kind::kLogistic) return f * c;
  const double d = eval_deriv(z);
  return d * d / (f * c);
}

double ResponseModel::curvature_bound() const {
  if (kind_ == Kind::kLogistic) return 1.0;
  // |f''/f'| = (k+1)|z|^(k-1) / (1 + z^k), maximized at z^k = k - 1.
  const double k = k_;
  return (k + 1.0) * std::pow(k - 1.0, (k - 1.0) / k) / k;
}

MomentSums ResponseModel::column_sums(DifficultyColumn col, double theta) const {
  MomentSums out;
  const auto n = col.x.size();
  if (kind_ == Kind::kLogistic) {
    const double scale = std::exp(-theta);
    if (!col.exp_x.empty() && std::isfinite(scale) && scale > 0.0) {
      return logistic_scaled_sums(col.exp_x.data(), n, scale);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double z = theta - col.x[i];
        const double f = logistic_eval(z);
        out.response += f;
        out.slope += f * logistic_eval(-z);
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double z = theta - col.x[i];
    const auto t = algebraic_terms(z, k_);
    out.response += z >= 0.0 ? 1.0 - t.lower : t.lower;
    out.slope += t.deriv;
  }
  return out;
}

void ResponseModel::eval_column(DifficultyColumn col, double theta, std::span<double> f_out,
                                std::span<double> comp_out) const {
  const auto n = col.x.size();
  if (kind_ == Kind::kLogistic) {
    const double scale = std::exp(-theta);
    if (!col.exp_x.empty() && std::isfinite(scale) && scale > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double u = scale * col.exp_x[i];
        const double f = 1.0 / (1.0 + u);
        f_out[i] = f;
        comp_out[i] = u * f;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double z = theta - col.x[i];
        f_out[i] = logistic_eval(z);
        comp_out[i] = logistic_eval(-z);
      }
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double z = theta - col.x[i];
    const double tail = algebraic_terms(z, k_).lower;
    if (z >= 0.0) {
      f_out[i] = 1.0 - tail;
      comp_out[i] = tail;
    } else {
      f_out[i] = tail;
      comp_out[i] = 1.0 - tail;
    }
  }
}

namespace {

// d/dz log h(z); positive below a local maximum of h, negative above it.
double log_h_slope(const ResponseModel& model, double z) {
  const double f = model.eval(z);
  const double c = model.complement(z);
  const double d = model.eval_deriv(z);
  double curvature;  // f''/f'
  if (model.kind() == ResponseModel::Kind::kLogistic) {
    curvature = c - f;
  } else {
    const int k = model.order();
    curvature = -(k + 1.0) * std::pow(z, k - 1) / (1.0 + std::pow(z, k));
  }
  return 2.0 * curvature - d / f + d / c;
}

}  // namespace

double locate_optimal_gap(const ResponseModel& model) {
  constexpr int kHalfGrid = 1000;
  constexpr double kStep = 1e-2;
  // Scan from the top so equal peaks resolve to the nonnegative side.
  int best = kHalfGrid;
  double best_h = model.fisher_h(best * kStep);
  for (int i = kHalfGrid - 1; i >= -kHalfGrid; --i) {
    const double h = model.fisher_h(i * kStep);
    if (h > best_h) {
      best_h = h;
      best = i;
    }
  }
  const double lo = (best - 1) * kStep;
  const double hi = (best + 1) * kStep;
  double z;
  const double s_lo = log_h_slope(model, lo);
  const double s_hi = log_h_slope(model, hi);
  if (s_lo > 0.0 && s_hi < 0.0) {
    z = bisect_increasing([&](double v) { return -log_h_slope(model, v); }, lo, hi, 1e-12);
  } else {
    z = golden_section_maximize([&](double v) { return model.fisher_h(v); }, lo, hi, 1e-10);
  }
  if (!std::isfinite(z)) throw NumericError("optimal gap search failed");
  if (z < 0.0 && model.fisher_h(-z) >= model.fisher_h(z)) z = -z;
  return z;
}

}  // namespace fitq
