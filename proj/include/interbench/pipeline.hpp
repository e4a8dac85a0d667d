#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "interbench/data.hpp"
#include "interbench/nn.hpp"

namespace interbench {

// A full experiment: dataset, split, model, training recipe, at most one
// defense, any number of attacks, and the seeds to repeat over.
struct ExperimentConfig {
  nlohmann::json raw;  // validated source document; digest input

  bool synthetic = false;
  SyntheticSpec synth;
  std::string csv_path;
  CsvSchema schema;

  SplitSpec split_spec;  // seed field is replaced by the experiment seed
  std::vector<std::size_t> hidden;
  TrainConfig train_cfg;  // seed field is replaced by the experiment seed

  std::optional<std::pair<std::string, nlohmann::json>> defense;
  std::vector<std::pair<std::string, nlohmann::json>> attacks;
  std::vector<std::uint64_t> seeds;

  // Throws std::invalid_argument listing every violation.
  static ExperimentConfig parse(const nlohmann::json& j);
};

// All violations as "<json path>: <problem>" strings; empty means valid.
std::vector<std::string> validate_config(const nlohmann::json& j);

struct SeedRecord {
  std::uint64_t seed = 0;
  std::string model;  // "std" | "def"
  std::map<std::string, std::optional<double>> metrics;  // nullopt -> JSON null
  std::map<std::string, std::string> errors;  // attack/defense name -> message
};

struct AggregateEntry {
  double mean = 0.0;
  double stderr_ = 0.0;  // s / sqrt(n), Bessel; 0 when n == 1
  std::size_t n = 0;
};

struct InteractionReport {
  std::string config_digest;
  std::string created;  // ISO-8601 UTC
  std::vector<SeedRecord> per_seed;
  std::map<std::string, AggregateEntry> aggregate;  // "<model>.<metric>"
};

// Runs every seed (threads bounded by jobs) and aggregates. Attack or defense
// failures become per-seed error entries, never process failures.
InteractionReport run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1);

AggregateEntry aggregate_values(const std::vector<double>& values);

nlohmann::json report_to_json(const InteractionReport& r, bool include_created = true);
InteractionReport report_from_json(const nlohmann::json& j);

// Byte-stable serialization: sorted keys, 2-space indent, no timestamp.
// Reports from identical configs and seeds compare equal on this form.
std::string canonical_report_json(const InteractionReport& r);

// Atomic write (temp file + rename), timestamp included.
void write_report_json(const InteractionReport& r, const std::string& path);
void write_text_atomic(const std::string& path, const std::string& body);

// One row per (seed, model, metric); null metrics have an empty value field.
std::string report_csv(const InteractionReport& r);

// FNV-1a 64 over the compact canonical dump, 16 hex digits.
std::string config_digest(const nlohmann::json& raw);

// Dataset exactly as the runner sees it (synthetic or CSV, normalized).
LabeledDataset build_dataset(const ExperimentConfig& cfg);

}  // namespace interbench
