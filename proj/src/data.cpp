#include "scaffcite/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "scaffcite/errors.hpp"

namespace scaffcite::data {

using nlohmann::json;

namespace {

bool is_marker_token(const std::string& tok) {
  static const std::regex marker(R"(^\[[0-9][0-9,\-]*\]$)");
  return std::regex_match(tok, marker);
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

void emit_word(const std::string& word, std::vector<std::string>& out) {
  if (word.empty()) return;
  if (word.size() == 1 || is_marker_token(word)) {
    out.push_back(word);
    return;
  }
  // peel trailing punctuation first so "[4]." exposes the marker "[4]"
  if (is_punct(word.back())) {
    emit_word(word.substr(0, word.size() - 1), out);
    out.push_back(word.substr(word.size() - 1));
    return;
  }
  if (is_punct(word.front())) {
    out.push_back(word.substr(0, 1));
    emit_word(word.substr(1), out);
    return;
  }
  out.push_back(word);
}

json parse_json_line(const std::string& line, const std::string& path, std::size_t line_no) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    throw FormatError(path + ":" + std::to_string(line_no) + ": malformed JSON record");
  }
  return record;
}

int label_index(const std::vector<std::string>& label_set, const std::string& label) {
  auto it = std::find(label_set.begin(), label_set.end(), label);
  return it == label_set.end() ? -1 : static_cast<int>(it - label_set.begin());
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  std::istringstream stream(lowered);
  std::string word;
  while (stream >> word) emit_word(word, out);
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  index_to_token_ = {"<pad>", "<unk>"};
  token_to_index_ = {{"<pad>", kPad}, {"<unk>", kUnk}};
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t min_count) {
  if (min_count < 1) throw ContractError("vocabulary: min_count must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  kept.reserve(counts.size());
  for (auto& [tok, count] : counts) {
    if (count >= min_count) kept.emplace_back(tok, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (auto& [tok, count] : kept) {
    v.token_to_index_.emplace(tok, static_cast<int>(v.index_to_token_.size()));
    v.index_to_token_.push_back(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (const auto& tok : tokens) {
    if (!v.token_to_index_.emplace(tok, static_cast<int>(v.index_to_token_.size())).second) {
      throw DataError("vocabulary: duplicate stored token '" + tok + "'");
    }
    v.index_to_token_.push_back(tok);
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_index_.find(token);
  return it == token_to_index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= index_to_token_.size()) {
    throw ContractError("vocabulary: index " + std::to_string(id) + " out of range");
  }
  return index_to_token_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_index_.count(token) > 0;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) ids.push_back(id(tok));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int i : ids) tokens.push_back(token(i));
  return tokens;
}

std::vector<std::string> Vocabulary::stored_tokens() const {
  return {index_to_token_.begin() + 2, index_to_token_.end()};
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
  for (const auto& tok : index_to_token_) {
    for (char c : tok) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= static_cast<unsigned char>('\n');
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<CitationInstance> read_citations_jsonl(const std::string& path,
                                                   const std::vector<std::string>& label_set) {
  std::ifstream in = open_or_throw(path);
  std::vector<CitationInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_json_line(line, path, line_no);
    if (!record.contains("string") || !record.contains("label")) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": record needs \"string\" and \"label\" fields");
    }
    CitationInstance inst;
    inst.text = record["string"].get<std::string>();
    inst.label = record["label"].get<std::string>();
    if (label_index(label_set, inst.label) < 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown label '" + inst.label +
                      "'");
    }
    inst.id = record.value("id", "line-" + std::to_string(line_no));
    inst.section_name = record.value("sectionName", "");
    inst.source_paper_id = record.value("citingPaperId", record.value("paper_id", ""));
    inst.extended_context = record.value("extended_context", "");
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<CitationInstance> read_unlabeled_jsonl(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<CitationInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_json_line(line, path, line_no);
    if (!record.contains("string")) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": record needs a \"string\" field");
    }
    CitationInstance inst;
    inst.text = record["string"].get<std::string>();
    inst.label = record.value("label", "");
    inst.id = record.value("id", "line-" + std::to_string(line_no));
    inst.section_name = record.value("sectionName", "");
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<ScaffoldInstance> read_scaffold_jsonl(const std::string& path,
                                                  const std::vector<std::string>& label_set,
                                                  int task_id) {
  std::ifstream in = open_or_throw(path);
  std::vector<ScaffoldInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_json_line(line, path, line_no);
    if (!record.contains("string") || !record.contains("label")) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": record needs \"string\" and \"label\" fields");
    }
    ScaffoldInstance inst;
    inst.text = record["string"].get<std::string>();
    inst.label = record["label"].get<std::string>();
    inst.task_id = task_id;
    if (label_index(label_set, inst.label) < 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown label '" + inst.label +
                      "'");
    }
    out.push_back(std::move(inst));
  }
  return out;
}

void write_scaffold_jsonl(const std::string& path, const std::vector<ScaffoldInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (const auto& inst : instances) {
    json record{{"string", inst.text}, {"label", inst.label}};
    out << record.dump() << "\n";
  }
}

nn::TokenEmbeddingTable load_word_vectors(const std::string& path, const Vocabulary& vocab,
                                          bool trainable, std::uint64_t seed) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (values.empty()) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": no vector values");
    }
    if (dim == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, found " + std::to_string(values.size()));
    }
    if (vocab.contains(token)) rows.emplace(std::move(token), std::move(values));
  }
  if (dim == 0) throw FormatError(path + ": empty word-vector file");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  ad::Tensor table({vocab.size(), dim});
  for (std::size_t idx = 2; idx < vocab.size(); ++idx) {
    const std::string& tok = vocab.token(static_cast<int>(idx));
    auto it = rows.find(tok);
    if (it != rows.end()) {
      for (std::size_t j = 0; j < dim; ++j) table.at(idx, j) = it->second[j];
    } else {
      for (std::size_t j = 0; j < dim; ++j) table.at(idx, j) = dist(rng);
    }
  }
  return {vocab.size(), dim, ad::leaf(std::move(table), trainable), trainable};
}

nn::TokenEmbeddingTable random_embedding_table(const Vocabulary& vocab, std::size_t dim,
                                               bool trainable, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  ad::Tensor table({vocab.size(), dim});
  for (std::size_t idx = 2; idx < vocab.size(); ++idx) {
    for (std::size_t j = 0; j < dim; ++j) table.at(idx, j) = dist(rng);
  }
  return {vocab.size(), dim, ad::leaf(std::move(table), trainable), trainable};
}

SidecarStore SidecarStore::load(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  SidecarStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_json_line(line, path, line_no);
    if (!record.contains("id") || !record.contains("vectors") || !record["vectors"].is_array()) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": record needs \"id\" and \"vectors\"");
    }
    const std::string id = record["id"].get<std::string>();
    nn::ContextVectors vectors;
    for (const auto& row : record["vectors"]) {
      vectors.push_back(row.get<std::vector<double>>());
      if (store.dim_ == 0) store.dim_ = vectors.back().size();
      if (vectors.back().size() != store.dim_) {
        throw DataError("sidecar entry '" + id + "' has inconsistent vector width");
      }
    }
    if (!store.vectors_.emplace(id, std::move(vectors)).second) {
      throw DataError("sidecar entry '" + id + "' appears twice");
    }
  }
  return store;
}

const nn::ContextVectors& SidecarStore::require(const std::string& id,
                                                std::size_t token_count) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) {
    throw DataError("sidecar is missing vectors for instance '" + id + "'");
  }
  if (it->second.size() != token_count) {
    throw DataError("sidecar vectors for instance '" + id + "' cover " +
                    std::to_string(it->second.size()) + " tokens, expected " +
                    std::to_string(token_count));
  }
  return it->second;
}

}  // namespace scaffcite::data
