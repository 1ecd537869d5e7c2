#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scaffcite/layers.hpp"

namespace scaffcite::data {

/// Lowercases, splits on whitespace, then peels leading/trailing punctuation
/// into separate tokens. Square-bracketed citation markers like "[12]" or
/// "[3,5]" survive as single tokens.
std::vector<std::string> tokenize(const std::string& text);

std::string join_tokens(const std::vector<std::string>& tokens);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  /// Tokens with corpus frequency >= min_count, ordered by descending
  /// frequency with lexicographic tie-breaks, after the reserved entries.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t min_count);
  /// Rebuild from a stored non-reserved token list (checkpoint loading).
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  std::size_t size() const { return index_to_token_.size(); }
  bool contains(const std::string& token) const;

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  /// Non-reserved tokens in index order.
  std::vector<std::string> stored_tokens() const;
  /// FNV-1a over the stored token list; identifies the vocabulary in
  /// checkpoints.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> index_to_token_;
  std::unordered_map<std::string, int> token_to_index_;
};

struct CitationInstance {
  std::string id;
  std::string text;          // citation context
  std::string label;         // intent
  std::string section_name;  // raw header, may be empty
  std::string source_paper_id;
  std::string extended_context;  // surrounding text; carried through, never modeled
};

struct ScaffoldInstance {
  std::string text;
  std::string label;
  int task_id = 2;  // 2 = citation worthiness, 3 = section title
};

inline const std::vector<std::string>& worthiness_labels() {
  static const std::vector<std::string> labels{"not_worthy", "worthy"};
  return labels;
}

inline const std::vector<std::string>& section_labels() {
  static const std::vector<std::string> labels{"introduction", "related work", "method",
                                               "experiments", "conclusion"};
  return labels;
}

/// One record per line with required "string" and "label" fields and
/// optional "sectionName" / "id". Labels are validated against label_set.
std::vector<CitationInstance> read_citations_jsonl(const std::string& path,
                                                   const std::vector<std::string>& label_set);

/// Prediction inputs: "string" required, "label" and "id" optional and
/// unvalidated.
std::vector<CitationInstance> read_unlabeled_jsonl(const std::string& path);

std::vector<ScaffoldInstance> read_scaffold_jsonl(const std::string& path,
                                                  const std::vector<std::string>& label_set,
                                                  int task_id);

void write_scaffold_jsonl(const std::string& path, const std::vector<ScaffoldInstance>& instances);

/// Text format "token f1 ... fD" per line. Rows for in-vocab tokens are
/// copied; tokens absent from the file get seeded uniform [-0.1, 0.1] rows;
/// PAD and UNK rows are zero.
nn::TokenEmbeddingTable load_word_vectors(const std::string& path, const Vocabulary& vocab,
                                          bool trainable, std::uint64_t seed);

/// Table with every non-reserved row drawn from seeded uniform [-0.1, 0.1].
nn::TokenEmbeddingTable random_embedding_table(const Vocabulary& vocab, std::size_t dim,
                                               bool trainable, std::uint64_t seed);

/// Sidecar of precomputed per-token contextual vectors, JSONL records
/// {"id": ..., "vectors": [[...], ...]}.
class SidecarStore {
 public:
  SidecarStore() = default;
  static SidecarStore load(const std::string& path);

  bool empty() const { return vectors_.empty(); }
  std::size_t dim() const { return dim_; }
  /// Vectors for an instance; token_count must match. DataError names the id
  /// when missing or mismatched.
  const nn::ContextVectors& require(const std::string& id, std::size_t token_count) const;

 private:
  std::map<std::string, nn::ContextVectors> vectors_;
  std::size_t dim_ = 0;
};

}  // namespace scaffcite::data
