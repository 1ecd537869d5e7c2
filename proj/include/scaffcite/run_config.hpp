#pragma once

#include <map>
#include <string>
#include <vector>

#include "scaffcite/trainer.hpp"

namespace scaffcite::cli {

/// Everything a run needs: the training hyperparameters plus file locations.
/// Built from a flat dotted-key config file; every key can also be set from
/// a command-line flag of the same name.
struct RunConfig {
  // data.*
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string scaffold_worthiness_path;
  std::string scaffold_section_path;
  std::string word_vectors_path;
  std::string sidecar_path;
  std::vector<std::string> labels;  // main-task label set
  std::size_t min_count = 1;
  // out.*
  std::string output_dir = "run";
  // model.* and train.*
  training::TrainConfig train;
};

/// Lines of "key = value"; '#' starts a comment; blank lines are ignored.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// All recognized config keys, in documented order.
const std::vector<std::string>& config_keys();

/// Validates keys and types; unknown keys are errors.
RunConfig make_run_config(const std::map<std::string, std::string>& kv);

/// Label-set presets: "scicite" and "acl-arc"; anything else is split on
/// commas.
std::vector<std::string> parse_label_set(const std::string& value);

/// Ensures declared input files exist and the output directory is writable.
void check_run_paths(const RunConfig& config, bool needs_train, bool needs_dev, bool needs_test);

}  // namespace scaffcite::cli
