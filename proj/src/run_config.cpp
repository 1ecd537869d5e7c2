#include "scaffcite/run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "scaffcite/errors.hpp"

namespace scaffcite::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  std::size_t end = s.find_last_not_of(" \t\r");
  return begin == std::string::npos ? "" : s.substr(begin, end - begin + 1);
}

std::size_t to_count(const std::string& key, const std::string& value) {
  try {
    const long long parsed = std::stoll(value);
    if (parsed < 0) throw std::invalid_argument("negative");
    return static_cast<std::size_t>(parsed);
  } catch (const std::exception&) {
    throw ContractError("config: " + key + " wants a nonnegative integer, got '" + value + "'");
  }
}

double to_real(const std::string& key, const std::string& value) {
  try {
    return std::stod(value);
  } catch (const std::exception&) {
    throw ContractError("config: " + key + " wants a number, got '" + value + "'");
  }
}

bool to_flag(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ContractError("config: " + key + " wants true/false, got '" + value + "'");
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "data.train",          "data.dev",
      "data.test",           "data.scaffold_worthiness",
      "data.scaffold_section", "data.word_vectors",
      "data.sidecar",        "data.labels",
      "data.min_count",      "out.dir",
      "model.embed_dim",     "model.hidden_dim",
      "model.mlp_hidden",    "model.dropout",
      "model.fine_tune_embeddings",
      "train.lambda2",       "train.lambda3",
      "train.batch_size",    "train.patience",
      "train.max_epochs",    "train.seed",
      "train.clip_threshold", "train.adadelta_rho",
      "train.adadelta_eps",
  };
  return keys;
}

std::vector<std::string> parse_label_set(const std::string& value) {
  if (value == "scicite") return {"background", "method", "result"};
  if (value == "acl-arc") {
    return {"Background", "Extends", "Uses", "Motivation", "CompareOrContrast", "Future"};
  }
  std::vector<std::string> labels;
  std::string current;
  for (char c : value) {
    if (c == ',') {
      current = trim(current);
      if (!current.empty()) labels.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  current = trim(current);
  if (!current.empty()) labels.push_back(current);
  return labels;
}

RunConfig make_run_config(const std::map<std::string, std::string>& kv) {
  const auto& keys = config_keys();
  for (const auto& [key, value] : kv) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ContractError("config: unknown key '" + key + "'");
    }
  }

  RunConfig config;
  const auto get = [&kv](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("data.train")) config.train_path = *v;
  if (const auto* v = get("data.dev")) config.dev_path = *v;
  if (const auto* v = get("data.test")) config.test_path = *v;
  if (const auto* v = get("data.scaffold_worthiness")) config.scaffold_worthiness_path = *v;
  if (const auto* v = get("data.scaffold_section")) config.scaffold_section_path = *v;
  if (const auto* v = get("data.word_vectors")) config.word_vectors_path = *v;
  if (const auto* v = get("data.sidecar")) config.sidecar_path = *v;
  if (const auto* v = get("data.labels")) config.labels = parse_label_set(*v);
  if (const auto* v = get("data.min_count")) {
    config.min_count = std::max<std::size_t>(1, to_count("data.min_count", *v));
  }
  if (const auto* v = get("out.dir")) config.output_dir = *v;

  if (const auto* v = get("model.embed_dim")) config.train.embed_dim = to_count("model.embed_dim", *v);
  if (const auto* v = get("model.hidden_dim")) {
    config.train.hidden_dim = to_count("model.hidden_dim", *v);
  }
  if (const auto* v = get("model.mlp_hidden")) {
    config.train.mlp_hidden = to_count("model.mlp_hidden", *v);
  }
  if (const auto* v = get("model.dropout")) config.train.dropout = to_real("model.dropout", *v);
  if (const auto* v = get("model.fine_tune_embeddings")) {
    config.train.fine_tune_embeddings = to_flag("model.fine_tune_embeddings", *v);
  }
  if (const auto* v = get("train.lambda2")) config.train.lambda2 = to_real("train.lambda2", *v);
  if (const auto* v = get("train.lambda3")) config.train.lambda3 = to_real("train.lambda3", *v);
  if (const auto* v = get("train.batch_size")) {
    config.train.batch_size = to_count("train.batch_size", *v);
  }
  if (const auto* v = get("train.patience")) config.train.patience = to_count("train.patience", *v);
  if (const auto* v = get("train.max_epochs")) {
    config.train.max_epochs = to_count("train.max_epochs", *v);
  }
  if (const auto* v = get("train.seed")) config.train.seed = to_count("train.seed", *v);
  if (const auto* v = get("train.clip_threshold")) {
    config.train.clip_threshold = to_real("train.clip_threshold", *v);
  }
  if (const auto* v = get("train.adadelta_rho")) {
    config.train.adadelta_rho = to_real("train.adadelta_rho", *v);
  }
  if (const auto* v = get("train.adadelta_eps")) {
    config.train.adadelta_eps = to_real("train.adadelta_eps", *v);
  }
  return config;
}

void check_run_paths(const RunConfig& config, bool needs_train, bool needs_dev, bool needs_test) {
  const auto require = [](const std::string& path, const std::string& key, bool required) {
    if (path.empty()) {
      if (required) throw ContractError("config: " + key + " is required for this command");
      return;
    }
    if (!fs::exists(path)) throw DataError("config: " + key + " points at missing file " + path);
  };
  require(config.train_path, "data.train", needs_train);
  require(config.dev_path, "data.dev", needs_dev);
  require(config.test_path, "data.test", needs_test);
  require(config.scaffold_worthiness_path, "data.scaffold_worthiness", false);
  require(config.scaffold_section_path, "data.scaffold_section", false);
  require(config.word_vectors_path, "data.word_vectors", false);
  require(config.sidecar_path, "data.sidecar", false);

  fs::create_directories(config.output_dir);
  const fs::path probe = fs::path(config.output_dir) / ".write_probe";
  std::ofstream out(probe);
  if (!out) throw DataError("config: output dir " + config.output_dir + " is not writable");
  out.close();
  fs::remove(probe);
}

}  // namespace scaffcite::cli
