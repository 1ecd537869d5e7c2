#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scaffcite/data.hpp"

namespace scaffcite::scaffolds {

enum class MarkerKind { numeric_bracket, name_year };

struct MarkerSpan {
  std::size_t begin = 0;  // character offsets into the sentence
  std::size_t end = 0;    // exclusive
  MarkerKind kind = MarkerKind::numeric_bracket;
};

/// Citation markers in a sentence: bracketed or parenthesized numeric groups
/// ("[12]", "[1-4]", "[3,5]", "(12)") and name-year patterns ("Lee et al
/// (2010)", "Lee et al., 2010", "(Lee, 2010)", "Lee and Kim (2010)").
/// Spans are sorted and non-overlapping; on overlap the longest match wins.
std::vector<MarkerSpan> detect_citation_markers(const std::string& sentence);

/// Sentence with all marker spans removed, doubled whitespace collapsed,
/// dangling empty bracket pairs dropped, and space pulled back before
/// sentence punctuation. Idempotent; detection on the result is empty.
std::string strip_markers(const std::string& sentence);

struct CorpusSentence {
  std::string text;
  std::string section;   // raw header, may be empty
  std::string paper_id;  // may be empty
};

std::vector<CorpusSentence> read_corpus_jsonl(const std::string& path);

/// Citation-worthiness dataset (task 2): sentences containing a marker
/// become positive examples with the markers stripped; the rest are negative
/// and unchanged. Output order is a seeded shuffle. A nonzero balance_cap
/// limits every class to that many instances.
std::vector<data::ScaffoldInstance> make_worthiness_dataset(
    const std::vector<CorpusSentence>& sentences, std::uint64_t seed, std::size_t balance_cap = 0);

enum class SectionCategory { introduction, related_work, method, experiments, conclusion };

const char* to_string(SectionCategory category);

/// Maps a raw section header onto one of the five normalized titles via a
/// case-insensitive pattern table, after stripping leading numbering.
/// Headers that match nothing return nullopt.
std::optional<SectionCategory> normalize_section_title(const std::string& raw);

/// Section-title dataset (task 3): keeps only contexts whose header
/// normalizes; the label is the normalized category.
std::vector<data::ScaffoldInstance> make_section_dataset(
    const std::vector<CorpusSentence>& citation_contexts);

// --- crowd annotation aggregation -------------------------------------------

struct Annotation {
  std::string worker_id;
  std::string instance_id;
  std::string choice;
  double trust = 0.0;  // in [0, 1]
};

struct Qualification {
  bool qualified = false;
  double trust = 0.0;
};

/// Trust is the fraction of gold questions answered correctly; workers below
/// 75% accuracy are disqualified (exactly 75% passes).
Qualification qualify_annotator(const std::map<std::string, std::string>& gold_answers,
                                const std::map<std::string, std::string>& responses);

struct AggregatedLabel {
  std::string label;
  double confidence = 0.0;
};

/// Trust-weighted plurality: score(L) = sum of trusts choosing L divided by
/// total trust; the winner's score is the confidence. Instances are
/// discarded (nullopt) on a tied vote, when confidence <= 0.7, or when the
/// winner is the dummy OTHER option.
std::optional<AggregatedLabel> aggregate_annotations(const std::vector<Annotation>& annotations,
                                                     const std::string& other_label = "Other");

}  // namespace scaffcite::scaffolds
