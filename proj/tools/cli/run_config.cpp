// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fitq::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& origin, const char* expected) {
  throw CliError(kExitConfig, origin + ": " + key + " = '" + value + "' is not " + expected);
}

double to_double(const std::string& key, const std::string& value, const std::string& origin) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || value.empty()) {
    bad_value(key, value, origin, "a number");
  }
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& value, const std::string& origin) {
  Int v = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || value.empty()) {
    bad_value(key, value, origin, "an integer");
  }
  return v;
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& items, Fn&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CliError(kExitConfig,
                     origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw CliError(kExitConfig, origin + ":" + std::to_string(line_no) + ": empty key");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValues load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitConfig, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw CliError(kExitConfig, path + ": invalid manifest JSON: " + e.what());
    }
    if (!doc.contains("resolved_config") || !doc["resolved_config"].is_string()) {
      throw CliError(kExitConfig, path + ": manifest has no resolved_config");
    }
    return parse_key_values(doc["resolved_config"].get<std::string>(), path);
  }
  return parse_key_values(text, path);
}

void apply_key_values(RunConfig& cfg, const KeyValues& values, const std::string& origin) {
  for (const auto& [key, value] : values) {
    if (key == "model") {
      cfg.model = value;
    } else if (key == "policies") {
      cfg.policies = split_list(value);
    } else if (key == "horizons") {
      cfg.horizons.clear();
      for (const auto& item : split_list(value)) {
        cfg.horizons.push_back(to_int<std::int64_t>(key, item, origin));
      }
    } else if (key == "deltas") {
      cfg.deltas.clear();
      for (const auto& item : split_list(value)) cfg.deltas.push_back(to_double(key, item, origin));
    } else if (key == "theta_star") {
      cfg.theta_star = to_double(key, value, origin);
    } else if (key == "epsilon") {
      cfg.epsilon = to_double(key, value, origin);
    } else if (key == "x_lo") {
      cfg.x_lo = to_double(key, value, origin);
    } else if (key == "x_hi") {
      cfg.x_hi = to_double(key, value, origin);
    } else if (key == "theta0") {
      cfg.theta0 = to_double(key, value, origin);
    } else if (key == "rm_start") {
      cfg.rm_start = to_double(key, value, origin);
    } else if (key == "check_every") {
      cfg.check_every = to_int<int>(key, value, origin);
    } else if (key == "max_steps") {
      cfg.max_steps = to_int<std::int64_t>(key, value, origin);
    } else if (key == "reps") {
      cfg.reps = to_int<std::int64_t>(key, value, origin);
    } else if (key == "seed") {
      cfg.seed = to_int<std::uint64_t>(key, value, origin);
    } else {
      throw CliError(kExitConfig, origin + ": unknown key '" + key + "'");
    }
  }
}

void RunConfig::validate(SweepKind kind) const {
  auto fail = [](const std::string& msg) { throw CliError(kExitConfig, msg); };
  if (policies.empty()) fail("policy list is empty");
  if (kind == SweepKind::kFixedBudget) {
    if (horizons.empty()) fail("horizon list is empty");
    for (auto t : horizons) {
      if (t < 1) fail("horizon " + std::to_string(t) + " must be >= 1");
    }
  } else {
    if (deltas.empty()) fail("delta list is empty");
    for (double d : deltas) {
      if (!(d > 0.0 && d < 1.0)) fail("delta " + format_double(d) + " must lie in (0, 1)");
    }
    if (max_steps < 1) fail("max_steps must be >= 1");
  }
  if (reps < 1) fail("reps must be >= 1");
  if (check_every < 1) fail("check_every must be >= 1");
  if (!(epsilon > 0.0 && std::isfinite(epsilon))) fail("epsilon must be > 0");
  if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && x_lo < x_hi)) {
    fail("bounds need finite x_lo < x_hi");
  }
}

std::string RunConfig::to_text(SweepKind kind) const {
  std::ostringstream out;
  out << "# fitq run configuration\n";
  out << "model = " << model << '\n';
  out << "policies = " << join(policies, [](const std::string& s) { return s; }) << '\n';
  if (kind == SweepKind::kFixedBudget) {
    out << "horizons = " << join(horizons, [](std::int64_t t) { return std::to_string(t); })
        << '\n';
  } else {
    out << "deltas = " << join(deltas, format_double) << '\n';
    out << "max_steps = " << max_steps << '\n';
  }
  out << "theta_star = " << format_double(theta_star) << '\n';
  out << "epsilon = " << format_double(epsilon) << '\n';
  out << "x_lo = " << format_double(x_lo) << '\n';
  out << "x_hi = " << format_double(x_hi) << '\n';
  out << "theta0 = " << format_double(theta0) << '\n';
  out << "rm_start = " << format_double(rm_start) << '\n';
  out << "check_every = " << check_every << '\n';
  out << "reps = " << reps << '\n';
  out << "seed = " << seed << '\n';
  return out.str();
}

}  // namespace fitq::cli
