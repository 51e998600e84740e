#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sparsedyn/pipeline.hpp"
#include "sparsedyn/plant.hpp"

namespace sparsedyn {

struct SimulationSettings {
  double duration_h = 100.0;
  double dt = 0.01;
  double segment_h = 1.0;
  std::optional<std::pair<double, double>> amplitude;  // plant training band if unset
  std::vector<SegmentKind> kinds{SegmentKind::kStep, SegmentKind::kLinear, SegmentKind::kSigmoid};
  double noise_sigma = 0.0;
};

struct EvaluationSettings {
  double long_time_multiplier = 2.5;
  std::optional<std::pair<double, double>> outside_amplitude;  // plant outside band if unset
  bool integrate = true;
};

struct CompareSettings {
  std::vector<std::filesystem::path> models;
  std::vector<std::string> labels;
};

/// Typed view of a run-config file. Relative paths resolve against the
/// working directory.
struct RunConfig {
  std::string source;  // file name used in error messages
  nlohmann::json document = nlohmann::json::object();
  std::map<std::string, int> lines;  // JSON pointer -> 1-based line

  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::optional<std::string> plant;
  std::optional<std::filesystem::path> dataset;
  std::string input_column = "u";
  std::optional<std::filesystem::path> model;
  SimulationSettings simulation;
  FitSettings fit;
  EvaluationSettings evaluation;
  CompareSettings compare;

  std::filesystem::path dataset_path() const;
  std::filesystem::path model_path() const;
};

// Parses and validates. Syntax errors, unknown keys, wrong types and bad
// values all raise a config error naming "<source>:<line>".
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

// Overrides one key ("differentiation.reg") with a JSON value and
// revalidates; errors name the key instead of a line.
void set_config_value(RunConfig& config, const std::string& dotted_key, const nlohmann::json& value);

// Every accepted key with its type, default and meaning.
std::string config_help();

}  // namespace sparsedyn
