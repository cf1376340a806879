// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "fitq/fitq.h"
#include "json.hpp"
#include "run_config.hpp"

namespace fitq::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kResultsHeader = "# fitq-results v1";
constexpr const char* kPlotHeader = "# fitq-plotdata v1";

int exit_code_for(fitq_status status) {
  switch (status) {
    case FITQ_OK:
      return kExitOk;
    case FITQ_ERR_NUMERIC:
      return kExitNumeric;
    case FITQ_ERR_DOMAIN:
    case FITQ_ERR_PRECONDITION:
    case FITQ_ERR_CONFIG:
    case FITQ_ERR_IO:
      return kExitConfig;
    case FITQ_ERR_INVALID_ARGUMENT:
    case FITQ_ERR_INTERNAL:
      break;
  }
  return kExitFailure;
}

void check(fitq_status status, const std::string& context) {
  if (status == FITQ_OK) return;
  throw CliError(exit_code_for(status), context + ": " + fitq_last_error());
}

struct ModelDeleter {
  void operator()(fitq_model* m) const { fitq_model_destroy(m); }
};
struct ExperimentDeleter {
  void operator()(fitq_experiment* e) const { fitq_experiment_destroy(e); }
};
using ModelPtr = std::unique_ptr<fitq_model, ModelDeleter>;
using ExperimentPtr = std::unique_ptr<fitq_experiment, ExperimentDeleter>;

ModelPtr make_model(const std::string& name) {
  fitq_model* raw = nullptr;
  check(fitq_model_create(name.c_str(), &raw), "model '" + name + "'");
  return ModelPtr(raw);
}

fitq_diagnostics diagnostics_for(const std::string& model, double epsilon) {
  auto m = make_model(model);
  fitq_diagnostics d{};
  check(fitq_diagnostics_compute(m.get(), epsilon, &d), "diagnostics");
  return d;
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  out.close();
  if (!out) throw CliError(kExitConfig, "cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitConfig, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_stat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (c == ':') c = '_';
  }
  return s;
}

// Options shared by run-fb and run-fc.
struct SweepOptions {
  std::string config_path;
  std::string out_dir = ".";
  unsigned workers = 0;
  bool desk = false;
  std::optional<std::int64_t> reps;
  std::optional<std::int64_t> trace_rep;
  std::map<std::string, std::string> overrides;
};

void add_sweep_options(CLI::App* sub, SweepOptions& o, SweepKind kind) {
  sub->add_option("--config", o.config_path, "Key/value config file or a previous manifest")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o.out_dir, "Output directory (created if missing)");
  sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  sub->add_flag("--desk", o.desk, "Desk-scale replication preset");
  sub->add_option("--reps", o.reps, "Replications per cell");
  sub->add_option("--trace-rep", o.trace_rep, "Also write the trace of this replication");
  struct Key {
    const char* flag;
    const char* key;
    const char* help;
  };
  std::vector<Key> keys = {
      {"--seed", "seed", "Master seed"},
      {"--model", "model", "logistic or algebraic-<even k>"},
      {"--policies", "policies", "Comma-separated policy list"},
      {"--theta-star", "theta_star", "True ability"},
      {"--epsilon", "epsilon", "Accuracy margin"},
      {"--x-lo", "x_lo", "Lower question bound"},
      {"--x-hi", "x_hi", "Upper question bound"},
      {"--theta0", "theta0", "Estimate used for the first query"},
      {"--rm-start", "rm_start", "Robbins-Monro starting question"},
      {"--check-every", "check_every", "Stopping-rule evaluation cadence"},
  };
  if (kind == SweepKind::kFixedBudget) {
    keys.push_back({"--horizons", "horizons", "Comma-separated budgets T"});
  } else {
    keys.push_back({"--deltas", "deltas", "Comma-separated confidence levels"});
    keys.push_back({"--max-steps", "max_steps", "Per-replication step cap"});
  }
  for (const auto& k : keys) {
    const std::string key = k.key;
    sub->add_option_function<std::string>(
        k.flag, [&o, key](const std::string& v) { o.overrides[key] = v; }, k.help);
  }
}

RunConfig resolve_config(const SweepOptions& o, SweepKind kind) {
  RunConfig cfg;
  std::optional<std::int64_t> file_reps;
  if (!o.config_path.empty()) {
    const KeyValues file = load_config_file(o.config_path);
    apply_key_values(cfg, file, o.config_path);
    if (file.count("reps")) file_reps = cfg.reps;
  }
  apply_key_values(cfg, o.overrides, "command line");
  const bool fb = kind == SweepKind::kFixedBudget;
  if (o.reps) {
    cfg.reps = *o.reps;
  } else if (o.desk) {
    cfg.reps = fb ? kDeskFbReps : kDeskFcReps;
  } else if (file_reps) {
    cfg.reps = *file_reps;
  } else {
    cfg.reps = fb ? kDefaultFbReps : kDefaultFcReps;
  }
  cfg.validate(kind);
  return cfg;
}

fitq_experiment_desc describe(const RunConfig& cfg, const std::string& policy, SweepKind kind,
                              std::int64_t horizon, double delta) {
  fitq_experiment_desc d;
  fitq_experiment_desc_init(&d);
  d.model = cfg.model.c_str();
  d.policy = policy.c_str();
  d.setting = kind == SweepKind::kFixedBudget ? FITQ_FIXED_BUDGET : FITQ_FIXED_CONFIDENCE;
  d.horizon = horizon;
  d.delta = delta;
  d.max_steps = cfg.max_steps;
  d.theta_star = cfg.theta_star;
  d.epsilon = cfg.epsilon;
  d.x_lo = cfg.x_lo;
  d.x_hi = cfg.x_hi;
  d.theta0 = cfg.theta0;
  d.rm_start = cfg.rm_start;
  d.reps = cfg.reps;
  d.master_seed = cfg.seed;
  d.check_every = cfg.check_every;
  return d;
}

int run_sweep(const SweepOptions& o, SweepKind kind, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(o, kind);
  const bool fb = kind == SweepKind::kFixedBudget;
  const std::string prefix = fb ? "fb" : "fc";
  const std::string command = fb ? "run-fb" : "run-fc";
  make_model(cfg.model);  // reject bad model strings before creating directories

  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError(kExitConfig, "cannot create output directory " + dir.string());

  std::ostringstream csv;
  csv << kResultsHeader << '\n';
  csv << "model,policy,setting,theta_star,epsilon,param,reps,failures,failure_rate,"
         "se_failure,mean_tau,se_tau,cap_hits,master_seed\n";
  nlohmann::ordered_json lambda_cells = nlohmann::ordered_json::array();
  std::vector<fs::path> traces;

  const std::size_t params = fb ? cfg.horizons.size() : cfg.deltas.size();
  for (const auto& policy : cfg.policies) {
    for (std::size_t i = 0; i < params; ++i) {
      const std::int64_t horizon = fb ? cfg.horizons[i] : 1;
      const double delta = fb ? 0.05 : cfg.deltas[i];
      const std::string param = fb ? std::to_string(horizon) : format_double(delta);
      const std::string cell = "policy " + policy + ", " + (fb ? "T = " : "delta = ") + param;

      const fitq_experiment_desc desc = describe(cfg, policy, kind, horizon, delta);
      fitq_experiment* raw = nullptr;
      check(fitq_experiment_create(&desc, &raw), cell);
      const ExperimentPtr exp(raw);

      const auto start = std::chrono::steady_clock::now();
      fitq_aggregate agg{};
      check(fitq_experiment_run(exp.get(), o.workers, &agg), cell);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      csv << cfg.model << ',' << policy << ',' << prefix << ',' << format_double(cfg.theta_star)
          << ',' << format_double(cfg.epsilon) << ',' << param << ',' << agg.reps << ','
          << agg.failures << ',' << format_stat(agg.failure_rate) << ','
          << format_stat(agg.se_failure) << ',' << format_stat(agg.mean_tau) << ','
          << format_stat(agg.se_tau) << ',' << agg.cap_hits << ',' << cfg.seed << '\n';

      if (!fb) {
        double lambda = 0.0;
        check(fitq_experiment_lambda_star(exp.get(), &lambda), cell);
        nlohmann::ordered_json entry;
        entry["policy"] = policy;
        entry["delta"] = delta;
        entry["lambda_star"] = lambda;
        entry["threshold"] = std::log(2.0 / delta);
        lambda_cells.push_back(entry);
      }
      if (o.trace_rep) {
        if (*o.trace_rep < 0 || *o.trace_rep >= cfg.reps) {
          throw CliError(kExitConfig, "--trace-rep must lie in [0, reps)");
        }
        fs::create_directories(dir / "traces", ec);
        const fs::path rel =
            fs::path("traces") / (prefix + "_" + file_safe(policy) + "_" + param + ".csv");
        check(fitq_experiment_write_trace(exp.get(), static_cast<std::uint64_t>(*o.trace_rep),
                                          (dir / rel).string().c_str()),
              cell);
        traces.push_back(rel);
      }
      err << command << ": " << cell << ": failure_rate " << format_stat(agg.failure_rate)
          << ", mean_tau " << format_stat(agg.mean_tau) << " (" << format_stat(secs) << " s)\n";
    }
  }

  // All outputs are written here, after every cell has been reduced.
  std::vector<std::pair<std::string, std::string>> artifacts;
  auto emit = [&](const std::string& name, const std::string& data) {
    write_file(dir / name, data);
    artifacts.emplace_back(name, sha256_hex(data));
  };
  emit(prefix + "_results.csv", csv.str());
  const std::string resolved = cfg.to_text(kind);
  emit(prefix + "_resolved.cfg", resolved);
  if (!fb) {
    const auto d = diagnostics_for(cfg.model, cfg.epsilon);
    nlohmann::ordered_json sidecar;
    sidecar["model"] = cfg.model;
    sidecar["epsilon"] = cfg.epsilon;
    sidecar["lambda_bar"] = d.lambda_bar;
    sidecar["cells"] = lambda_cells;
    emit("fc_lambda.json", sidecar.dump(2) + "\n");
  }
  for (const auto& rel : traces) {
    artifacts.emplace_back(rel.generic_string(), sha256_hex(read_file(dir / rel)));
  }

  nlohmann::ordered_json manifest;
  manifest["format"] = "fitq-manifest v1";
  manifest["command"] = command;
  manifest["library_version"] = fitq_version();
  manifest["master_seed"] = cfg.seed;
  manifest["resolved_config"] = resolved;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [name, hash] : artifacts) files.push_back({{"path", name}, {"sha256", hash}});
  manifest["artifacts"] = files;
  write_file(dir / (prefix + "_manifest.json"), manifest.dump(2) + "\n");

  out << "wrote " << (dir / (prefix + "_results.csv")).string() << '\n';
  return kExitOk;
}

int run_diagnostics(const std::string& model, double epsilon, std::ostream& out) {
  const auto d = diagnostics_for(model, epsilon);
  nlohmann::ordered_json j;
  j["model"] = model;
  j["epsilon"] = epsilon;
  j["z_star"] = d.z_star;
  j["f_z_star"] = d.f_z_star;
  j["h_z_star"] = d.h_z_star;
  j["lambda_bar"] = d.lambda_bar;
  j["lambda_plus"] = d.lambda_plus;
  j["lambda_minus"] = d.lambda_minus;
  j["lambda_star"] = d.lambda_star;
  j["drift"] = d.drift;
  j["inv_drift"] = d.inv_drift;
  j["fb_slope"] = d.fb_slope;
  j["fc_slope"] = d.fc_slope;
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct ResultRow {
  std::map<std::string, std::string> fields;
  const std::string& at(const std::string& key) const {
    const auto it = fields.find(key);
    if (it == fields.end()) throw CliError(kExitConfig, "results file lacks column " + key);
    return it->second;
  }
  double number(const std::string& key) const {
    const std::string& v = at(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') {
      throw CliError(kExitConfig, "results column " + key + " has non-numeric value " + v);
    }
    return d;
  }
};

std::vector<ResultRow> read_results(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw CliError(kExitConfig, path + " is not a fitq results file (missing '" +
                                    std::string(kResultsHeader) + "')");
  }
  std::vector<std::string> columns;
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (columns.empty()) {
      columns = cells;
      continue;
    }
    if (cells.size() != columns.size()) {
      throw CliError(kExitConfig, path + ": row has " + std::to_string(cells.size()) +
                                      " fields, expected " + std::to_string(columns.size()));
    }
    ResultRow row;
    for (std::size_t i = 0; i < cells.size(); ++i) row.fields[columns[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_plotdata(const std::string& results, const std::string& mode, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
  const bool fb_mode = mode == "fb_logfail";
  const auto rows = read_results(results);
  std::ostringstream csv;
  csv << kPlotHeader << " mode=" << mode << '\n';
  csv << "series,policy,x,y,note\n";
  std::set<std::pair<std::string, std::string>> refs;  // (model, epsilon)
  for (const auto& row : rows) {
    const std::string setting = row.at("setting");
    if (setting != (fb_mode ? "fb" : "fc")) {
      throw CliError(kExitConfig, "mode " + mode + " needs " + (fb_mode ? "fb" : "fc") +
                                      " results, found setting " + setting);
    }
    const std::string& policy = row.at("policy");
    refs.emplace(row.at("model"), row.at("epsilon"));
    if (fb_mode) {
      const std::string& t = row.at("param");
      if (row.number("failures") == 0.0) {
        csv << "warning," << policy << ',' << t << ",,zero failures in " << row.at("reps")
            << " reps so -log rate is undefined\n";
        err << "plotdata: " << policy << " T = " << t << " has zero failures; y omitted\n";
        continue;
      }
      csv << "point," << policy << ',' << t << ','
          << format_stat(0.0 - std::log(row.number("failure_rate"))) << ",\n";
    } else {
      csv << "point," << policy << ',' << format_stat(std::log(1.0 / row.number("param")))
          << ',' << row.at("mean_tau") << ",\n";
    }
  }
  for (const auto& [model, eps] : refs) {
    const auto d = diagnostics_for(model, std::strtod(eps.c_str(), nullptr));
    const std::string tag = " for " + model + " epsilon " + eps;
    if (fb_mode) {
      csv << "reference,fisher,," << format_stat(d.fb_slope)
          << ",slope h(z_star) epsilon^2 / 2" << tag << '\n';
    } else {
      csv << "reference,fisher,," << format_stat(d.fc_slope)
          << ",slope 2 / (h(z_star) epsilon^2)" << tag << '\n';
      csv << "reference,drift,," << format_stat(d.inv_drift) << ",slope 1 / drift" << tag
          << '\n';
    }
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_file(out_path, csv.str());
    out << "wrote " << out_path << '\n';
  }
  return kExitOk;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw CliError(kExitFailure, "SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive testing experiments: FIT-Q and baseline query policies"};
  app.name("fitq");
  app.require_subcommand(1);

  SweepOptions fb_opts, fc_opts;
  auto* fb = app.add_subcommand("run-fb", "Fixed-budget sweep over policies and budgets T");
  add_sweep_options(fb, fb_opts, SweepKind::kFixedBudget);
  auto* fc = app.add_subcommand("run-fc", "Fixed-confidence sweep over policies and deltas");
  add_sweep_options(fc, fc_opts, SweepKind::kFixedConfidence);

  std::string diag_model = "logistic";
  double diag_eps = 0.2;
  auto* diag = app.add_subcommand("diagnostics", "Model and stopping-rule constants as JSON");
  diag->add_option("--model", diag_model, "logistic or algebraic-<even k>");
  diag->add_option("--epsilon", diag_eps, "Accuracy margin");

  std::string plot_in, plot_mode, plot_out;
  auto* plot = app.add_subcommand("plotdata", "Plot-ready series from a results CSV");
  plot->add_option("results", plot_in, "Results CSV from run-fb or run-fc")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--mode", plot_mode, "fb_logfail or fc_tau")
      ->required()
      ->check(CLI::IsMember({"fb_logfail", "fc_tau"}));
  plot->add_option("--out", plot_out, "Output CSV (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fb) return run_sweep(fb_opts, SweepKind::kFixedBudget, out, err);
    if (*fc) return run_sweep(fc_opts, SweepKind::kFixedConfidence, out, err);
    if (*diag) return run_diagnostics(diag_model, diag_eps, out);
    return run_plotdata(plot_in, plot_mode, plot_out, out, err);
  } catch (const CliError& e) {
    err << "fitq: error: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    err << "fitq: error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace fitq::cli
