#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <yaml-cpp/yaml.h>

#include "polyscale/calibration/calibration.hpp"
#include "polyscale/evalcli/split.hpp"
#include "polyscale/hiermodel/config.hpp"

namespace polyscale::evalcli {

/// Input files of a run. Relative paths in a config file resolve against
/// the file's directory.
struct DataPaths {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> scheme;  // default CMP scheme when unset
  std::optional<std::filesystem::path> party_graph;
  std::optional<std::filesystem::path> program;  // shipped program when unset
  std::optional<std::filesystem::path> ches;
  std::string pivot = "en";
  std::map<std::string, std::filesystem::path> embeddings;  // language -> .vec
  std::map<std::string, std::filesystem::path> lexicons;    // language -> pairs with pivot
};

struct ExperimentConfig {
  DataPaths data;
  hiermodel::ModelConfig model;
  calibration::CalibrationConfig calibration;
  SplitSpec random;
  SplitSpec temporal{SplitKind::Temporal};
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  std::set<std::string> excluded_codes;
  bool fix_training_pos = false;
  bool run_random = true;
  bool run_temporal = true;
  bool gnuplot = false;

  /// Re-seeds model, splits and folds from one value.
  void reseed(std::uint64_t s);
  void validate() const;
};

// Each reader starts from `base`, overrides only the keys present and
// throws ValidationError on unknown keys or ill-typed values.
hiermodel::ModelConfig read_model_config(const YAML::Node& node, hiermodel::ModelConfig base = {});
calibration::CalibrationConfig read_calibration_config(const YAML::Node& node,
                                                       calibration::CalibrationConfig base = {});
SplitSpec read_split_spec(const YAML::Node& node, SplitSpec base = {});
DataPaths read_data_paths(const YAML::Node& node, const std::filesystem::path& base_dir);

/// Top-level keys: seed, data, model, calibration, split, temporal, evaluate,
/// plus whatever `other_sections` allows; anything else is a ValidationError.
ExperimentConfig read_experiment_config(const YAML::Node& root,
                                        const std::filesystem::path& base_dir,
                                        const std::set<std::string>& other_sections = {});

/// Parses a YAML (or JSON) file. Throws ValidationError with the position
/// on syntax errors.
YAML::Node load_config_file(const std::filesystem::path& path);

/// Stable text form of a config used for hashing into the run manifest.
std::string canonical_config(const ExperimentConfig& cfg);

}  // namespace polyscale::evalcli
