// Command-line front end: binds scenario configs, seeds, and output
// formats to the shared library's C interface. Exit codes: 0 success,
// 1 validation error, 2 numeric error, 3 I/O error.

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rdl/rdl.h"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void fail(int exit_code, const std::string& message) {
  throw CliError{exit_code, message};
}

// Maps a failed library call onto the exit-code taxonomy.
void check(rdl_status status, const std::string& context) {
  if (status == RDL_OK) return;
  const int code = status == RDL_ERR_VALIDATION ? kExitValidation
                   : status == RDL_ERR_IO       ? kExitIo
                                                : kExitNumeric;
  fail(code, context + ": " + rdl_last_error());
}

std::string format_probability(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buf;
}

// RFC-4180 field quoting.
std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (const char c : value) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kExitIo, std::string(what) + ": cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(kExitIo, std::string(what) + ": read failed for '" + path + "'");
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(kExitIo, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) fail(kExitIo, "write failed for '" + path + "'");
}

/* ------------------------------------------------------------------ */
/* Config document handling                                            */

json parse_json_text(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(kExitValidation, what + ": not valid JSON");
  return doc;
}

json load_config_file(const std::string& path) {
  json doc = parse_json_text(read_file(path, "config"), "config '" + path + "'");
  if (!doc.is_object()) fail(kExitValidation, "config '" + path + "': expected an object");
  // A manifest from an earlier run doubles as a config document.
  if (doc.contains("config") && doc.contains("tool_version")) return doc["config"];
  return doc;
}

void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, unused] : object.items()) {
    bool known = false;
    for (const char* name : allowed) known = known || key == name;
    if (!known) fail(kExitValidation, where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& cfg, const char* key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number()) fail(kExitValidation, std::string("config: '") + key + "' must be a number");
  return cfg[key].get<double>();
}

std::uint64_t get_uint(const json& cfg, const char* key, std::uint64_t fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number_integer() || (cfg[key].is_number_integer() && cfg[key].get<std::int64_t>() < 0)) {
    fail(kExitValidation, std::string("config: '") + key + "' must be a non-negative integer");
  }
  return cfg[key].get<std::uint64_t>();
}

bool get_bool(const json& cfg, const char* key, bool fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_boolean()) fail(kExitValidation, std::string("config: '") + key + "' must be a boolean");
  return cfg[key].get<bool>();
}

std::string get_string(const json& cfg, const char* key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_string()) fail(kExitValidation, std::string("config: '") + key + "' must be a string");
  return cfg[key].get<std::string>();
}

int resolve_threads(const json& cfg) {
  if (cfg.contains("threads")) {
    if (!cfg["threads"].is_number_integer()) {
      fail(kExitValidation, "config: 'threads' must be an integer");
    }
    return cfg["threads"].get<int>();
  }
  if (const char* env = std::getenv("RDL_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0') {
      fail(kExitValidation, "RDL_THREADS must be an integer, got '" + std::string(env) + "'");
    }
    return static_cast<int>(value);
  }
  return 0;
}

rdl_urn_params urn_from(const json& cfg, const rdl_urn_params& defaults) {
  return rdl_urn_params{get_number(cfg, "b0", defaults.b0), get_number(cfg, "r0", defaults.r0),
                        get_number(cfg, "k", defaults.k)};
}

rdl_bias_spec bias_from(const json& cfg, const rdl_bias_spec& defaults) {
  return rdl_bias_spec{get_number(cfg, "rho", defaults.rho),
                       get_bool(cfg, "group_indicator", defaults.group_indicator != 0) ? 1 : 0,
                       get_bool(cfg, "clamp", defaults.clamp_to_unit != 0) ? 1 : 0};
}

constexpr rdl_urn_params kDefaultUrn{1.0, 1.0, 1.0};
constexpr rdl_bias_spec kDefaultBias{0.0, 0, 1};

/* ------------------------------------------------------------------ */
/* Manifests                                                           */

json manifest_for(const char* subcommand, json resolved_config) {
  json manifest;
  manifest["tool"] = "rdl";
  manifest["tool_version"] = rdl_version();
  manifest["subcommand"] = subcommand;
  manifest["timestamp"] = iso8601_utc_now();
  manifest["config"] = std::move(resolved_config);
  return manifest;
}

void add_seed_derivations(json& manifest, std::uint64_t master_seed,
                          const std::vector<std::pair<std::string, std::uint64_t>>& groups) {
  manifest["master_seed"] = master_seed;
  json derivations = json::array();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    derivations.push_back(json{{"group", g},
                               {"name", groups[g].first},
                               {"size", groups[g].second},
                               {"member0_seed", rdl_derive_seed(master_seed, g, 0)}});
  }
  manifest["seed_derivations"] = std::move(derivations);
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

// Artifact written to a file gets a sibling manifest; stdout payloads
// embed the manifest instead.
void emit_json(const std::string& out_path, json payload, const json& manifest) {
  if (!out_path.empty()) {
    write_file(out_path, dump_json(payload));
    write_file(out_path + ".manifest.json", dump_json(manifest));
  } else {
    payload["manifest"] = manifest;
    std::cout << dump_json(payload);
  }
}

/* ------------------------------------------------------------------ */
/* Handle guards                                                       */

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  ~Handle() {
    if (ptr != nullptr) Free(ptr);
  }
  T* get() const { return ptr; }
  T** out() { return &ptr; }
};

using TrajectoryHandle = Handle<rdl_trajectory, rdl_trajectory_free>;
using CohortSpecHandle = Handle<rdl_cohort_spec, rdl_cohort_spec_free>;
using CohortResultHandle = Handle<rdl_cohort_result, rdl_cohort_result_free>;
using DisparityHandle = Handle<rdl_disparity_report, rdl_disparity_report_free>;
using ScoreTableHandle = Handle<rdl_score_table, rdl_score_table_free>;
using RegressionHandle = Handle<rdl_regression_result, rdl_regression_result_free>;
using SynthSpecHandle = Handle<rdl_synth_spec, rdl_synth_spec_free>;
using SynthDataHandle = Handle<rdl_synth_data, rdl_synth_data_free>;

/* ------------------------------------------------------------------ */
/* simulate                                                            */

void run_simulate(const json& cfg) {
  reject_unknown_keys(cfg,
                      {"seed", "steps", "trajectories", "b0", "r0", "k", "rho",
                       "group_indicator", "clamp", "format", "out", "threads"},
                      "config");
  const std::uint64_t n_steps = get_uint(cfg, "steps", 15);
  const std::uint64_t n_trajectories = get_uint(cfg, "trajectories", 5);
  if (n_trajectories < 1) fail(kExitValidation, "config: 'trajectories' must be >= 1");
  const std::uint64_t master_seed = get_uint(cfg, "seed", 0);
  const rdl_urn_params urn = urn_from(cfg, kDefaultUrn);
  const rdl_bias_spec bias = bias_from(cfg, kDefaultBias);
  const std::string format = get_string(cfg, "format", "csv");
  const std::string out_path = get_string(cfg, "out", "");
  if (format != "csv" && format != "json") {
    fail(kExitValidation, "config: 'format' must be 'csv' or 'json'");
  }
  if (format == "csv" && out_path.empty()) {
    fail(kExitValidation, "simulate: csv output requires --out");
  }

  std::vector<TrajectoryHandle> paths(n_trajectories);
  for (std::uint64_t j = 0; j < n_trajectories; ++j) {
    const std::uint64_t seed = rdl_derive_seed(master_seed, 0, j);
    check(rdl_simulate(&urn, &bias, n_steps, seed, paths[j].out()), "simulate");
  }

  json resolved{{"seed", master_seed},
                {"steps", n_steps},
                {"trajectories", n_trajectories},
                {"b0", urn.b0},
                {"r0", urn.r0},
                {"k", urn.k},
                {"rho", bias.rho},
                {"group_indicator", bias.group_indicator != 0},
                {"clamp", bias.clamp_to_unit != 0},
                {"format", format},
                {"out", out_path}};
  json manifest = manifest_for("simulate", std::move(resolved));
  add_seed_derivations(manifest, master_seed, {{"trajectories", n_trajectories}});

  if (format == "csv") {
    std::string csv = "trajectory_id,step,p,outcome\r\n";
    for (std::uint64_t j = 0; j < n_trajectories; ++j) {
      const double* p = rdl_trajectory_probabilities(paths[j].get());
      const uint8_t* outcomes = rdl_trajectory_outcomes(paths[j].get());
      const std::uint64_t steps = rdl_trajectory_steps(paths[j].get());
      for (std::uint64_t i = 0; i < steps; ++i) {
        csv += std::to_string(j);
        csv += ',';
        csv += std::to_string(i + 1);
        csv += ',';
        csv += format_probability(p[i]);
        csv += ',';
        if (i + 1 < steps) csv += outcomes[i] != 0 ? '1' : '0';
        csv += "\r\n";
      }
    }
    write_file(out_path, csv);
    write_file(out_path + ".manifest.json", dump_json(manifest));
    return;
  }

  json payload;
  payload["n_steps"] = n_steps;
  payload["trajectories"] = json::array();
  for (std::uint64_t j = 0; j < n_trajectories; ++j) {
    const double* p = rdl_trajectory_probabilities(paths[j].get());
    const uint8_t* outcomes = rdl_trajectory_outcomes(paths[j].get());
    const std::uint64_t steps = rdl_trajectory_steps(paths[j].get());
    json entry;
    entry["id"] = j;
    entry["out_of_regime"] = rdl_trajectory_out_of_regime(paths[j].get()) != 0;
    entry["p"] = std::vector<double>(p, p + steps);
    entry["outcomes"] = std::vector<int>(outcomes, outcomes + (steps - 1));
    payload["trajectories"].push_back(std::move(entry));
  }
  emit_json(out_path, std::move(payload), manifest);
}

/* ------------------------------------------------------------------ */
/* cohort                                                              */

struct ResolvedGroup {
  std::string name;
  std::uint64_t size = 1;
  rdl_urn_params urn{};
  rdl_bias_spec bias{};
};

std::vector<ResolvedGroup> resolve_groups(const json& cfg, const rdl_urn_params& default_urn,
                                          const rdl_bias_spec& default_bias) {
  if (!cfg.contains("groups")) fail(kExitValidation, "config: 'groups' is required");
  if (!cfg["groups"].is_array() || cfg["groups"].empty()) {
    fail(kExitValidation, "config: 'groups' must be a non-empty array");
  }
  std::vector<ResolvedGroup> groups;
  for (const auto& doc : cfg["groups"]) {
    if (!doc.is_object()) fail(kExitValidation, "config: group entries must be objects");
    reject_unknown_keys(doc, {"name", "size", "b0", "r0", "k", "rho", "group_indicator", "clamp"},
                        "config: group");
    ResolvedGroup group;
    group.name = get_string(doc, "name", "group" + std::to_string(groups.size()));
    group.size = get_uint(doc, "size", 1);
    group.urn = urn_from(doc, default_urn);
    group.bias = bias_from(doc, default_bias);
    groups.push_back(std::move(group));
  }
  return groups;
}

json group_config_json(const ResolvedGroup& group) {
  return json{{"name", group.name},
              {"size", group.size},
              {"b0", group.urn.b0},
              {"r0", group.urn.r0},
              {"k", group.urn.k},
              {"rho", group.bias.rho},
              {"group_indicator", group.bias.group_indicator != 0},
              {"clamp", group.bias.clamp_to_unit != 0}};
}

CohortResultHandle run_cohort_groups(const std::vector<ResolvedGroup>& groups,
                                     std::uint64_t n_steps, std::uint64_t master_seed,
                                     int threads) {
  CohortSpecHandle spec;
  spec.ptr = rdl_cohort_spec_new(n_steps, master_seed);
  if (spec.get() == nullptr) fail(kExitNumeric, "cohort: allocation failed");
  for (const auto& group : groups) {
    check(rdl_cohort_spec_add_group(spec.get(), group.name.c_str(), group.size, &group.urn,
                                    &group.bias),
          "cohort");
  }
  CohortResultHandle result;
  check(rdl_cohort_run(spec.get(), threads, result.out()), "cohort");
  return result;
}

void run_cohort_cmd(const json& cfg) {
  reject_unknown_keys(cfg,
                      {"seed", "steps", "groups", "b0", "r0", "k", "rho", "group_indicator",
                       "clamp", "epsilon", "hist_bins", "format", "out", "threads"},
                      "config");
  const std::uint64_t n_steps = get_uint(cfg, "steps", 15);
  const std::uint64_t master_seed = get_uint(cfg, "seed", 0);
  const double epsilon = get_number(cfg, "epsilon", 0.05);
  const std::uint64_t hist_bins = get_uint(cfg, "hist_bins", 20);
  const std::string format = get_string(cfg, "format", "csv");
  const std::string out_path = get_string(cfg, "out", "");
  const int threads = resolve_threads(cfg);
  if (format != "csv" && format != "json") {
    fail(kExitValidation, "config: 'format' must be 'csv' or 'json'");
  }
  if (format == "csv" && out_path.empty()) {
    fail(kExitValidation, "cohort: csv output requires --out");
  }
  const rdl_urn_params default_urn = urn_from(cfg, kDefaultUrn);
  const rdl_bias_spec default_bias = bias_from(cfg, kDefaultBias);
  const auto groups = resolve_groups(cfg, default_urn, default_bias);

  const auto result = run_cohort_groups(groups, n_steps, master_seed, threads);

  json resolved{{"seed", master_seed}, {"steps", n_steps},     {"epsilon", epsilon},
                {"hist_bins", hist_bins}, {"format", format},  {"out", out_path},
                {"threads", threads}};
  resolved["groups"] = json::array();
  std::vector<std::pair<std::string, std::uint64_t>> seed_groups;
  for (const auto& group : groups) {
    resolved["groups"].push_back(group_config_json(group));
    seed_groups.emplace_back(group.name, group.size);
  }
  json manifest = manifest_for("cohort", std::move(resolved));
  add_seed_derivations(manifest, master_seed, seed_groups);

  if (format == "csv") {
    std::string csv = "group,member,p\r\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const double* endpoints = rdl_cohort_group_endpoints(result.get(), g);
      const std::uint64_t size = rdl_cohort_group_size(result.get(), g);
      const std::string name = csv_field(groups[g].name);
      for (std::uint64_t j = 0; j < size; ++j) {
        csv += name;
        csv += ',';
        csv += std::to_string(j);
        csv += ',';
        csv += format_probability(endpoints[j]);
        csv += "\r\n";
      }
    }
    write_file(out_path, csv);
    write_file(out_path + ".manifest.json", dump_json(manifest));
    return;
  }

  DisparityHandle report;
  check(rdl_disparity_metrics(result.get(), epsilon, hist_bins, report.out()), "cohort");
  const std::size_t n_checkpoints = rdl_disparity_n_checkpoints(report.get());
  const uint64_t* checkpoints = rdl_disparity_checkpoints(report.get());

  json payload;
  payload["n_steps"] = n_steps;
  payload["epsilon"] = epsilon;
  payload["histogram_bins"] = hist_bins;
  payload["checkpoints"] = std::vector<std::uint64_t>(checkpoints, checkpoints + n_checkpoints);
  payload["groups"] = json::array();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double* mean = rdl_disparity_group_mean(report.get(), g);
    const double* se = rdl_disparity_group_se(report.get(), g);
    const double* histogram = rdl_disparity_group_histogram(report.get(), g);
    double low = 0.0, high = 0.0;
    check(rdl_disparity_group_extremes(report.get(), g, &low, &high), "cohort");
    json entry;
    entry["name"] = groups[g].name;
    entry["size"] = groups[g].size;
    entry["mean"] = std::vector<double>(mean, mean + n_checkpoints);
    entry["se"] = std::vector<double>(se, se + n_checkpoints);
    entry["extreme_low"] = low;
    entry["extreme_high"] = high;
    entry["histogram"] = std::vector<double>(histogram, histogram + hist_bins);
    entry["out_of_regime"] = rdl_cohort_group_out_of_regime(result.get(), g);
    payload["groups"].push_back(std::move(entry));
  }
  payload["gaps"] = json::array();
  const std::size_t n_gaps = rdl_disparity_n_gaps(report.get());
  for (std::size_t i = 0; i < n_gaps; ++i) {
    std::size_t a = 0, b = 0;
    const double* difference = nullptr;
    const double* combined_se = nullptr;
    check(rdl_disparity_gap(report.get(), i, &a, &b, &difference, &combined_se), "cohort");
    json gap;
    gap["group_a"] = groups[a].name;
    gap["group_b"] = groups[b].name;
    gap["difference"] = std::vector<double>(difference, difference + n_checkpoints);
    gap["combined_se"] = std::vector<double>(combined_se, combined_se + n_checkpoints);
    payload["gaps"].push_back(std::move(gap));
  }
  emit_json(out_path, std::move(payload), manifest);
}

/* ------------------------------------------------------------------ */
/* analyze                                                             */

std::vector<double> read_endpoints_csv(const std::string& path) {
  const std::string text = read_file(path, "endpoints");
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(kExitValidation, "endpoints '" + path + "': empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int p_column = -1;
  if (line == "group,member,p") {
    p_column = 2;
  } else if (line == "p") {
    p_column = 0;
  } else {
    fail(kExitValidation,
         "endpoints '" + path + "': header must be 'group,member,p' or 'p', got '" + line + "'");
  }
  std::vector<double> endpoints;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string field = line;
    for (int c = 0; c < p_column; ++c) {
      const auto comma = field.find(',');
      if (comma == std::string::npos) {
        fail(kExitValidation, "endpoints '" + path + "' line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(p_column + 1) + " columns");
      }
      field = field.substr(comma + 1);
    }
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') {
      fail(kExitValidation, "endpoints '" + path + "' line " + std::to_string(line_no) +
                                ": '" + field + "' is not a number");
    }
    endpoints.push_back(value);
  }
  if (endpoints.empty()) {
    fail(kExitValidation, "endpoints '" + path + "': no data rows");
  }
  return endpoints;
}

void run_analyze(const json& cfg) {
  reject_unknown_keys(cfg,
                      {"seed", "steps", "trajectories", "b0", "r0", "k", "rho",
                       "group_indicator", "clamp", "epsilon", "hist_bins", "endpoints",
                       "format", "out", "threads"},
                      "config");
  const std::string format = get_string(cfg, "format", "json");
  if (format != "json") fail(kExitValidation, "analyze: only 'json' output is supported");
  const double epsilon = get_number(cfg, "epsilon", 0.05);
  const std::uint64_t hist_bins = get_uint(cfg, "hist_bins", 20);
  const std::string endpoints_path = get_string(cfg, "endpoints", "");
  const std::string out_path = get_string(cfg, "out", "");
  const rdl_urn_params urn = urn_from(cfg, kDefaultUrn);
  const rdl_bias_spec bias = bias_from(cfg, kDefaultBias);
  const std::uint64_t n_steps = get_uint(cfg, "steps", 15);
  const std::uint64_t n_trajectories = get_uint(cfg, "trajectories", 10000);
  const std::uint64_t master_seed = get_uint(cfg, "seed", 0);
  const int threads = resolve_threads(cfg);

  std::vector<double> endpoints;
  if (!endpoints_path.empty()) {
    endpoints = read_endpoints_csv(endpoints_path);
  } else {
    std::vector<ResolvedGroup> groups{{"cohort", n_trajectories, urn, bias}};
    const auto result = run_cohort_groups(groups, n_steps, master_seed, threads);
    const double* data = rdl_cohort_group_endpoints(result.get(), 0);
    endpoints.assign(data, data + rdl_cohort_group_size(result.get(), 0));
  }
  if (endpoints.size() < 2) {
    fail(kExitValidation, "analyze: needs at least two endpoints");
  }

  double a = 0.0, b = 0.0;
  check(rdl_limit_beta_params(&urn, &a, &b), "analyze");
  double ks = 0.0;
  check(rdl_ks_beta(endpoints.data(), endpoints.size(), a, b, &ks), "analyze");
  double mean = 0.0, variance = 0.0;
  check(rdl_sample_moments(endpoints.data(), endpoints.size(), &mean, &variance), "analyze");
  const double p1 = urn.b0 / (urn.b0 + urn.r0);
  double z = 0.0;
  check(rdl_martingale_z(endpoints.data(), endpoints.size(), p1, &z), "analyze");
  double low = 0.0, high = 0.0;
  check(rdl_extreme_mass(endpoints.data(), endpoints.size(), epsilon, &low, &high), "analyze");
  std::vector<double> histogram(hist_bins, 0.0);
  check(rdl_endpoint_histogram(endpoints.data(), endpoints.size(), hist_bins, histogram.data()),
        "analyze");

  json resolved{{"b0", urn.b0},
                {"r0", urn.r0},
                {"k", urn.k},
                {"rho", bias.rho},
                {"group_indicator", bias.group_indicator != 0},
                {"clamp", bias.clamp_to_unit != 0},
                {"epsilon", epsilon},
                {"hist_bins", hist_bins},
                {"format", format},
                {"out", out_path}};
  if (!endpoints_path.empty()) {
    resolved["endpoints"] = endpoints_path;
  } else {
    resolved["seed"] = master_seed;
    resolved["steps"] = n_steps;
    resolved["trajectories"] = n_trajectories;
    resolved["threads"] = threads;
  }
  json manifest = manifest_for("analyze", std::move(resolved));
  if (endpoints_path.empty()) {
    add_seed_derivations(manifest, master_seed, {{"cohort", n_trajectories}});
  }

  json payload;
  payload["count"] = endpoints.size();
  payload["limit"] = json{{"a", a}, {"b", b}};
  payload["ks"] = ks;
  payload["moments"] = json{{"mean", mean}, {"variance", variance}};
  payload["martingale"] = json{{"p1", p1}, {"z", z}};
  payload["extreme_mass"] = json{{"epsilon", epsilon}, {"low", low}, {"high", high}};
  payload["histogram"] = json{{"bins", hist_bins}, {"masses", histogram}};
  emit_json(out_path, std::move(payload), manifest);
}

/* ------------------------------------------------------------------ */
/* score                                                               */

void run_score(const json& cfg) {
  reject_unknown_keys(cfg,
                      {"events", "table", "age", "violent_offense", "pending_charge", "as_of",
                       "format", "out"},
                      "config");
  const std::string format = get_string(cfg, "format", "json");
  if (format != "json") fail(kExitValidation, "score: only 'json' output is supported");
  const std::string events_path = get_string(cfg, "events", "");
  const std::string table_path = get_string(cfg, "table", "");
  const std::string as_of = get_string(cfg, "as_of", "");
  const std::string out_path = get_string(cfg, "out", "");
  if (table_path.empty()) fail(kExitValidation, "score: 'table' is required");
  if (as_of.empty()) fail(kExitValidation, "score: 'as_of' is required");
  if (!cfg.contains("age")) fail(kExitValidation, "score: 'age' is required");
  const auto age = static_cast<int32_t>(get_uint(cfg, "age", 0));
  const bool violent_offense = get_bool(cfg, "violent_offense", false);
  const bool pending_charge = get_bool(cfg, "pending_charge", false);

  const std::string events_text = events_path.empty() ? "" : read_file(events_path, "events");
  const std::string table_text = read_file(table_path, "table");

  ScoreTableHandle table;
  check(rdl_score_table_parse(table_text.c_str(), table.out()), "score table");
  rdl_defendant_record record{};
  check(rdl_derive_factors(events_text.c_str(), age, violent_offense ? 1 : 0,
                           pending_charge ? 1 : 0, as_of.c_str(), &record),
        "score");
  int32_t fta = 0, nca = 0, nvca = 0;
  check(rdl_score(&record, table.get(), &fta, &nca, &nvca), "score");

  json resolved{{"events", events_path}, {"table", table_path},
                {"age", age},            {"violent_offense", violent_offense},
                {"pending_charge", pending_charge}, {"as_of", as_of},
                {"format", format},      {"out", out_path}};
  const json manifest = manifest_for("score", std::move(resolved));

  json payload;
  payload["record"] = json{{"age_at_arrest", record.age_at_arrest},
                           {"current_violent_offense", record.current_violent_offense != 0},
                           {"pending_charge_at_offense", record.pending_charge_at_offense != 0},
                           {"prior_misdemeanor", record.prior_misdemeanor != 0},
                           {"prior_felony", record.prior_felony != 0},
                           {"prior_violent_conviction_count", record.prior_violent_conviction_count},
                           {"fta_within_2yr_count", record.fta_within_2yr_count},
                           {"fta_older_2yr_count", record.fta_older_2yr_count},
                           {"prior_incarceration", record.prior_incarceration != 0}};
  payload["scores"] = json{{"fta", fta}, {"nca", nca}, {"nvca", nvca}};
  emit_json(out_path, std::move(payload), manifest);
}

/* ------------------------------------------------------------------ */
/* regress                                                             */

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// RFC-4180 reader for numeric tables: quoted fields, doubled quotes,
// CRLF or LF line ends.
Csv read_csv(const std::string& path) {
  const std::string text = read_file(path, "csv");
  Csv csv;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool header_done = false;
  std::size_t line_no = 1;

  const auto finish_field = [&] {
    fields.push_back(field);
    field.clear();
  };
  const auto finish_row = [&] {
    finish_field();
    if (!header_done) {
      csv.header = fields;
      header_done = true;
    } else if (fields.size() != csv.header.size()) {
      fail(kExitValidation, "csv '" + path + "' line " + std::to_string(line_no) + ": expected " +
                                std::to_string(csv.header.size()) + " fields, got " +
                                std::to_string(fields.size()));
    } else {
      std::vector<double> row;
      row.reserve(fields.size());
      for (std::size_t c = 0; c < fields.size(); ++c) {
        char* end = nullptr;
        const double value = std::strtod(fields[c].c_str(), &end);
        if (end == fields[c].c_str() || *end != '\0') {
          fail(kExitValidation, "csv '" + path + "' line " + std::to_string(line_no) +
                                    ", column '" + csv.header[c] + "': '" + fields[c] +
                                    "' is not a number");
        }
        row.push_back(value);
      }
      csv.rows.push_back(std::move(row));
    }
    fields.clear();
    ++line_no;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      finish_field();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      finish_row();
    } else if (c == '\n') {
      finish_row();
    } else {
      field += c;
    }
  }
  if (in_quotes) fail(kExitValidation, "csv '" + path + "': unterminated quoted field");
  if (!field.empty() || !fields.empty()) finish_row();
  if (!header_done) fail(kExitValidation, "csv '" + path + "': empty file");
  if (csv.rows.empty()) fail(kExitValidation, "csv '" + path + "': no data rows");
  return csv;
}

std::string significance_stars(double t) {
  const double abs_t = t < 0 ? -t : t;
  if (abs_t > 2.576) return "***";
  if (abs_t > 1.96) return "**";
  if (abs_t > 1.645) return "*";
  return "";
}

// Coefficient column with the standard error in parentheses beneath.
std::string regression_text_table(const rdl_regression_result* result) {
  const std::size_t p = rdl_regression_n_columns(result);
  std::size_t name_width = 8;
  for (std::size_t j = 0; j < p; ++j) {
    const std::string name = rdl_regression_column(result, j);
    name_width = std::max(name_width, name.size());
  }
  std::ostringstream out;
  char buf[64];
  for (std::size_t j = 0; j < p; ++j) {
    double beta = 0.0, se = 0.0, t = 0.0;
    check(rdl_regression_coef(result, j, &beta, &se, &t), "regress");
    const std::string name = rdl_regression_column(result, j);
    std::snprintf(buf, sizeof(buf), "%.4f", beta);
    out << name << std::string(name_width - name.size(), ' ') << "  " << std::setw(10) << buf
        << " " << significance_stars(t) << "\n";
    std::snprintf(buf, sizeof(buf), "(%.4f)", se);
    out << std::string(name_width, ' ') << "  " << std::setw(10) << buf << "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.4f", rdl_regression_r_squared(result));
  out << "n = " << rdl_regression_n(result) << ", R^2 = " << buf << "\n";
  return out.str();
}

json regression_payload(const rdl_regression_result* result) {
  json payload;
  payload["n"] = rdl_regression_n(result);
  payload["r_squared"] = rdl_regression_r_squared(result);
  payload["coefficients"] = json::array();
  const std::size_t p = rdl_regression_n_columns(result);
  for (std::size_t j = 0; j < p; ++j) {
    double beta = 0.0, se = 0.0, t = 0.0;
    check(rdl_regression_coef(result, j, &beta, &se, &t), "regress");
    payload["coefficients"].push_back(json{{"name", rdl_regression_column(result, j)},
                                           {"beta", beta},
                                           {"se", se},
                                           {"t", t}});
  }
  return payload;
}

void run_regress(const json& cfg) {
  reject_unknown_keys(cfg, {"csv", "y", "synth", "format", "out"}, "config");
  const std::string format = get_string(cfg, "format", "json");
  if (format != "json") fail(kExitValidation, "regress: only 'json' output is supported");
  const std::string csv_path = get_string(cfg, "csv", "");
  const std::string out_path = get_string(cfg, "out", "");
  const bool synth_mode = cfg.contains("synth");
  if (synth_mode == !csv_path.empty()) {
    fail(kExitValidation, "regress: exactly one of 'csv' or 'synth' is required");
  }

  RegressionHandle result;
  json resolved{{"format", format}, {"out", out_path}};
  json synth_echo;

  if (synth_mode) {
    const json& synth = cfg["synth"];
    if (!synth.is_object()) fail(kExitValidation, "config: 'synth' must be an object");
    reject_unknown_keys(synth, {"n", "noise_sd", "seed", "covariates", "beta"},
                        "config: synth");
    const std::uint64_t n = get_uint(synth, "n", 0);
    const double noise_sd = get_number(synth, "noise_sd", 1.0);
    const std::uint64_t seed = get_uint(synth, "seed", 0);
    if (!synth.contains("covariates") || !synth["covariates"].is_array()) {
      fail(kExitValidation, "config: 'synth.covariates' must be an array");
    }
    if (!synth.contains("beta") || !synth["beta"].is_array()) {
      fail(kExitValidation, "config: 'synth.beta' must be an array");
    }

    SynthSpecHandle spec;
    spec.ptr = rdl_synth_spec_new(n, noise_sd, seed);
    if (spec.get() == nullptr) fail(kExitNumeric, "regress: allocation failed");
    for (const auto& cov : synth["covariates"]) {
      if (!cov.is_object()) fail(kExitValidation, "config: covariate entries must be objects");
      reject_unknown_keys(cov, {"name", "kind", "p", "lo", "hi", "mean", "sd"},
                          "config: covariate");
      const std::string name = get_string(cov, "name", "");
      const std::string kind = get_string(cov, "kind", "");
      if (kind == "binary") {
        check(rdl_synth_spec_add_binary(spec.get(), name.c_str(), get_number(cov, "p", 0.5)),
              "regress");
      } else if (kind == "uniform") {
        check(rdl_synth_spec_add_uniform(spec.get(), name.c_str(), get_number(cov, "lo", 0.0),
                                         get_number(cov, "hi", 1.0)),
              "regress");
      } else if (kind == "normal") {
        check(rdl_synth_spec_add_normal(spec.get(), name.c_str(), get_number(cov, "mean", 0.0),
                                        get_number(cov, "sd", 1.0)),
              "regress");
      } else {
        fail(kExitValidation,
             "config: covariate kind must be 'binary', 'uniform', or 'normal'");
      }
    }
    std::vector<double> beta;
    for (const auto& value : synth["beta"]) {
      if (!value.is_number()) fail(kExitValidation, "config: 'synth.beta' must hold numbers");
      beta.push_back(value.get<double>());
    }
    check(rdl_synth_spec_set_beta(spec.get(), beta.data(), beta.size()), "regress");

    SynthDataHandle data;
    check(rdl_synth_generate(spec.get(), data.out()), "regress");
    const std::size_t p = rdl_synth_n_columns(data.get());
    std::vector<const char*> names(p);
    for (std::size_t j = 0; j < p; ++j) names[j] = rdl_synth_column(data.get(), j);
    check(rdl_ols_fit(rdl_synth_x(data.get()), rdl_synth_n_rows(data.get()), p, names.data(),
                      rdl_synth_y(data.get()), result.out()),
          "regress");

    resolved["synth"] = synth;
    synth_echo = json{{"true_beta", beta}, {"noise_sd", noise_sd}, {"seed", seed}};
  } else {
    const std::string y_name = get_string(cfg, "y", "y");
    const Csv csv = read_csv(csv_path);
    int y_col = -1;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
      if (csv.header[c] == y_name) y_col = static_cast<int>(c);
    }
    if (y_col < 0) {
      fail(kExitValidation, "regress: outcome column '" + y_name + "' not found in csv header");
    }
    bool has_intercept = false;
    for (const auto& name : csv.header) has_intercept = has_intercept || name == "(intercept)";

    std::vector<const char*> names;
    std::vector<std::string> name_storage;
    if (!has_intercept) name_storage.emplace_back("(intercept)");
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
      if (static_cast<int>(c) != y_col) name_storage.push_back(csv.header[c]);
    }
    for (const auto& name : name_storage) names.push_back(name.c_str());

    const std::size_t n = csv.rows.size();
    const std::size_t p = name_storage.size();
    std::vector<double> x(n * p);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t out_col = 0;
      if (!has_intercept) x[i * p + out_col++] = 1.0;
      for (std::size_t c = 0; c < csv.header.size(); ++c) {
        if (static_cast<int>(c) == y_col) {
          y[i] = csv.rows[i][c];
        } else {
          x[i * p + out_col++] = csv.rows[i][c];
        }
      }
    }
    check(rdl_ols_fit(x.data(), n, p, names.data(), y.data(), result.out()), "regress");
    resolved["csv"] = csv_path;
    resolved["y"] = y_name;
  }

  json manifest = manifest_for("regress", std::move(resolved));
  json payload = regression_payload(result.get());
  if (synth_mode) payload["synth"] = synth_echo;

  if (!out_path.empty()) {
    write_file(out_path, dump_json(payload));
    write_file(out_path + ".manifest.json", dump_json(manifest));
    std::cout << regression_text_table(result.get());
  } else {
    payload["manifest"] = manifest;
    std::cout << regression_text_table(result.get());
    std::cout << dump_json(payload);
  }
}

/* ------------------------------------------------------------------ */

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t trajectories = 0;
  double b0 = 0.0, r0 = 0.0, k = 0.0, rho = 0.0;
  bool clamp = true;
  int threads = 0;
  std::string out;
  std::string format;
  std::uint64_t hist_bins = 0;
  double epsilon = 0.0;
};

// Flags override config-file keys; only flags the user actually passed
// are written into the document.
void apply_common_flags(const CLI::App* cmd, const CommonFlags& flags, json& cfg) {
  if (cmd->count("--seed")) cfg["seed"] = flags.seed;
  if (cmd->count("--steps")) cfg["steps"] = flags.steps;
  if (cmd->count("--trajectories")) cfg["trajectories"] = flags.trajectories;
  if (cmd->count("--b0")) cfg["b0"] = flags.b0;
  if (cmd->count("--r0")) cfg["r0"] = flags.r0;
  if (cmd->count("--k")) cfg["k"] = flags.k;
  if (cmd->count("--rho")) cfg["rho"] = flags.rho;
  if (cmd->count("--clamp") || cmd->count("--no-clamp")) cfg["clamp"] = flags.clamp;
  if (cmd->count("--threads")) cfg["threads"] = flags.threads;
  if (cmd->count("--out")) cfg["out"] = flags.out;
  if (cmd->count("--format")) cfg["format"] = flags.format;
  if (cmd->count("--hist-bins")) cfg["hist_bins"] = flags.hist_bins;
  if (cmd->count("--epsilon")) cfg["epsilon"] = flags.epsilon;
}

void add_scenario_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file (flags override its keys)");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--steps", flags.steps, "decisions per trajectory");
  cmd->add_option("--trajectories", flags.trajectories, "number of trajectories");
  cmd->add_option("--b0", flags.b0, "initial high-risk mass");
  cmd->add_option("--r0", flags.r0, "initial low-risk mass");
  cmd->add_option("--k", flags.k, "mass added per decision");
  cmd->add_option("--rho", flags.rho, "per-step additive bias");
  cmd->add_flag("--clamp,!--no-clamp", flags.clamp, "clamp biased updates to [0, 1]");
  cmd->add_option("--threads", flags.threads, "worker threads (0 = auto; RDL_THREADS fallback)");
  cmd->add_option("--out", flags.out, "output path (manifest written alongside)");
  cmd->add_option("--format", flags.format, "output format: csv or json");
  cmd->add_option("--hist-bins", flags.hist_bins, "histogram bin count");
  cmd->add_option("--epsilon", flags.epsilon, "extreme-mass threshold");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential risk-assessment process simulator and analyzer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(rdl_version()); });

  CommonFlags flags;
  auto* simulate = app.add_subcommand("simulate", "write sample trajectories");
  auto* cohort = app.add_subcommand("cohort", "run multi-group populations");
  auto* analyze = app.add_subcommand("analyze", "endpoint distribution report");
  auto* score = app.add_subcommand("score", "risk scores from an event stream");
  auto* regress = app.add_subcommand("regress", "least squares fit");
  for (auto* cmd : {simulate, cohort, analyze, score, regress}) {
    add_scenario_flags(cmd, flags);
  }

  std::string endpoints_path;
  analyze->add_option("--endpoints", endpoints_path, "endpoint CSV from a cohort run");

  std::string events_path, table_path, as_of;
  std::uint64_t age = 0;
  bool violent_offense = false, pending_charge = false;
  score->add_option("--events", events_path, "criminal-history JSON Lines file");
  score->add_option("--table", table_path, "score table JSON file");
  score->add_option("--age", age, "age at current arrest");
  score->add_flag("--violent-offense", violent_offense, "current offense is violent");
  score->add_flag("--pending-charge", pending_charge, "charge pending at offense time");
  score->add_option("--as-of", as_of, "assessment date YYYY-MM-DD");

  std::string csv_path, y_name;
  regress->add_option("--csv", csv_path, "design matrix CSV with header row");
  regress->add_option("--y", y_name, "outcome column name (default 'y')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    const CLI::App* active = app.get_subcommands().front();
    json cfg = flags.config_path.empty() ? json::object() : load_config_file(flags.config_path);
    apply_common_flags(active, flags, cfg);

    if (active == simulate) {
      run_simulate(cfg);
    } else if (active == cohort) {
      run_cohort_cmd(cfg);
    } else if (active == analyze) {
      if (analyze->count("--endpoints")) cfg["endpoints"] = endpoints_path;
      run_analyze(cfg);
    } else if (active == score) {
      if (score->count("--events")) cfg["events"] = events_path;
      if (score->count("--table")) cfg["table"] = table_path;
      if (score->count("--age")) cfg["age"] = age;
      if (score->count("--violent-offense")) cfg["violent_offense"] = violent_offense;
      if (score->count("--pending-charge")) cfg["pending_charge"] = pending_charge;
      if (score->count("--as-of")) cfg["as_of"] = as_of;
      run_score(cfg);
    } else if (active == regress) {
      if (regress->count("--csv")) cfg["csv"] = csv_path;
      if (regress->count("--y")) cfg["y"] = y_name;
      run_regress(cfg);
    }
  } catch (const CliError& err) {
    std::cerr << "error: " << err.message << "\n";
    return err.exit_code;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
