// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fitq::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumeric = 3,
};

/// Error carrying the exit code it should map to.
class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

enum class SweepKind { kFixedBudget, kFixedConfidence };

inline constexpr std::int64_t kDefaultFbReps = 100000;
inline constexpr std::int64_t kDefaultFcReps = 3000;
inline constexpr std::int64_t kDeskFbReps = 20000;
inline constexpr std::int64_t kDeskFcReps = 1000;

/// Fully resolved sweep description.
struct RunConfig {
  std::string model = "logistic";
  std::vector<std::string> policies = {"fitq"};
  std::vector<std::int64_t> horizons = {200, 400, 600, 800, 1000};
  std::vector<double> deltas = {5e-2, 5e-3, 5e-4, 5e-5, 5e-6, 5e-7};
  double theta_star = 0.0;
  double epsilon = 0.2;
  double x_lo = -2.0;
  double x_hi = 2.0;
  double theta0 = 0.0;
  double rm_start = 0.0;
  int check_every = 1;
  std::int64_t max_steps = 10'000'000;
  std::int64_t reps = 0;  // resolved from the sweep kind when left at 0
  std::uint64_t seed = 0;

  /// Throws CliError(kExitConfig) on the first invalid field.
  void validate(SweepKind kind) const;
  /// Key/value text that parses back to this config.
  std::string to_text(SweepKind kind) const;
};

/// Raw key/value pairs in file order; later duplicates win.
using KeyValues = std::map<std::string, std::string>;

/// Parses "key = value" lines; '#' starts a comment. Throws CliError.
KeyValues parse_key_values(const std::string& text, const std::string& origin);

/// Reads a config file. A JSON manifest written by a previous run is also
/// accepted; its resolved configuration is used.
KeyValues load_config_file(const std::string& path);

/// Applies `values` on top of `cfg`; unknown keys are config errors.
void apply_key_values(RunConfig& cfg, const KeyValues& values, const std::string& origin);

std::string format_double(double v);
std::vector<std::string> split_list(const std::string& text);

}  // namespace fitq::cli
