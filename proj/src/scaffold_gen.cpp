#include "scaffcite/scaffold_gen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <regex>

#include <json.hpp>

#include "scaffcite/errors.hpp"

namespace scaffcite::scaffolds {

using nlohmann::json;

namespace {

struct Candidate {
  std::size_t begin, end;
  MarkerKind kind;
};

// Numeric groups with ranges and lists: 12, 1-4, 3,5, 6-9, 1, 3-5, 7.
const char* kNumericGroup = R"(\d+(?:\s*(?:-|–)\s*\d+)?(?:\s*,\s*\d+(?:\s*(?:-|–)\s*\d+)?)*)";
// Capitalized surname token.
const char* kName = R"([A-Z][A-Za-z'\-]*)";
// Plausible publication year 1800-2099, optionally suffixed (2010a).
const char* kYear = R"((?:1[89]\d\d|20\d\d)[a-z]?)";

std::string fmt(const char* pattern, std::initializer_list<std::pair<char, const char*>> subs) {
  std::string out;
  for (const char* p = pattern; *p; ++p) {
    bool replaced = false;
    if (*p == '$') {
      for (const auto& [key, value] : subs) {
        if (p[1] == key) {
          out += value;
          ++p;
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += *p;
  }
  return out;
}

const std::vector<std::pair<std::regex, MarkerKind>>& marker_patterns() {
  static const std::vector<std::pair<std::regex, MarkerKind>> patterns = [] {
    std::vector<std::pair<std::regex, MarkerKind>> out;
    const auto add = [&out](const std::string& pattern, MarkerKind kind) {
      out.emplace_back(std::regex(pattern), kind);
    };
    // [12], [1-4], [3,5]
    add(fmt(R"(\[\s*$G\s*\])", {{'G', kNumericGroup}}), MarkerKind::numeric_bracket);
    // (12), (1-4)
    add(fmt(R"(\(\s*$G\s*\))", {{'G', kNumericGroup}}), MarkerKind::numeric_bracket);
    // Lee et al (2010) / Lee et al. (2010) / Lee and Kim et al (2010)
    add(fmt(R"($N(?:\s+(?:and|&)\s+$N)?\s+et\s+al\.?,?\s*\(\s*$Y\s*\))",
            {{'N', kName}, {'Y', kYear}}),
        MarkerKind::name_year);
    // Lee et al., 2010 / Lee et al. 2010
    add(fmt(R"($N(?:\s+(?:and|&)\s+$N)?\s+et\s+al\.?,?\s+$Y)", {{'N', kName}, {'Y', kYear}}),
        MarkerKind::name_year);
    // Lee and Kim (2010)
    add(fmt(R"($N\s+(?:and|&)\s+$N\s*\(\s*$Y\s*\))", {{'N', kName}, {'Y', kYear}}),
        MarkerKind::name_year);
    // Lee (2010)
    add(fmt(R"($N\s*\(\s*$Y\s*\))", {{'N', kName}, {'Y', kYear}}), MarkerKind::name_year);
    // (Lee, 2010), (Mao et al., 2016), (Lee, 2010; Kim and Cho, 2012)
    const std::string item =
        fmt(R"($N(?:\s+(?:and|&)\s+$N)?(?:\s+et\s+al\.?)?\s*,?\s+$Y)", {{'N', kName}, {'Y', kYear}});
    add(fmt(R"(\(\s*$I(?:\s*;\s*$I)*\s*\))", {{'I', item.c_str()}}), MarkerKind::name_year);
    return out;
  }();
  return patterns;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<MarkerSpan> detect_once(const std::string& sentence) {
  std::vector<Candidate> candidates;
  for (const auto& [pattern, kind] : marker_patterns()) {
    for (auto it = std::sregex_iterator(sentence.begin(), sentence.end(), pattern);
         it != std::sregex_iterator(); ++it) {
      candidates.push_back({static_cast<std::size_t>(it->position()),
                            static_cast<std::size_t>(it->position() + it->length()), kind});
    }
  }
  // longest match wins on overlap
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    const std::size_t la = a.end - a.begin, lb = b.end - b.begin;
    if (la != lb) return la > lb;
    return a.begin < b.begin;
  });
  std::vector<MarkerSpan> chosen;
  for (const Candidate& c : candidates) {
    bool overlaps = false;
    for (const MarkerSpan& s : chosen) {
      if (c.begin < s.end && s.begin < c.end) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) chosen.push_back({c.begin, c.end, c.kind});
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const MarkerSpan& a, const MarkerSpan& b) { return a.begin < b.begin; });
  return chosen;
}

std::string remove_spans(const std::string& sentence, const std::vector<MarkerSpan>& spans) {
  std::string out;
  out.reserve(sentence.size());
  std::size_t pos = 0;
  for (const MarkerSpan& s : spans) {
    out.append(sentence, pos, s.begin - pos);
    pos = s.end;
  }
  out.append(sentence, pos, std::string::npos);
  return out;
}

std::string tidy_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  // collapse whitespace runs
  bool in_space = false;
  for (char c : text) {
    if (is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += c;
  }
  // drop empty bracket pairs left behind
  for (bool changed = true; changed;) {
    changed = false;
    for (const char* pair : {"()", "( )", "[]", "[ ]"}) {
      for (std::size_t at = out.find(pair); at != std::string::npos; at = out.find(pair)) {
        out.erase(at, std::string(pair).size());
        changed = true;
      }
    }
  }
  // pull space back before closing punctuation
  std::string packed;
  packed.reserve(out.size());
  for (char c : out) {
    if (!packed.empty() && packed.back() == ' ' &&
        (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')')) {
      packed.back() = c;
    } else {
      packed += c;
    }
  }
  while (!packed.empty() && is_space(packed.front())) packed.erase(packed.begin());
  while (!packed.empty() && is_space(packed.back())) packed.pop_back();
  return packed;
}

std::string lowercase(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<MarkerSpan> detect_citation_markers(const std::string& sentence) {
  return detect_once(sentence);
}

std::string strip_markers(const std::string& sentence) {
  std::string text = sentence;
  // Re-detect after removal: splicing can, in odd nesting cases, expose a
  // marker that was previously shadowed by a longer overlapping span.
  for (int round = 0; round < 8; ++round) {
    std::vector<MarkerSpan> spans = detect_once(text);
    if (spans.empty()) break;
    text = remove_spans(text, spans);
  }
  return tidy_whitespace(text);
}

std::vector<CorpusSentence> read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus: " + path);
  std::vector<CorpusSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("text")) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": corpus records need a \"text\" field");
    }
    out.push_back({record["text"].get<std::string>(), record.value("section", ""),
                   record.value("paper_id", "")});
  }
  return out;
}

std::vector<data::ScaffoldInstance> make_worthiness_dataset(
    const std::vector<CorpusSentence>& sentences, std::uint64_t seed, std::size_t balance_cap) {
  std::vector<data::ScaffoldInstance> out;
  out.reserve(sentences.size());
  for (const CorpusSentence& s : sentences) {
    if (detect_once(s.text).empty()) {
      out.push_back({s.text, data::worthiness_labels()[0], 2});
    } else {
      std::string stripped = strip_markers(s.text);
      if (stripped.empty()) continue;  // the sentence was nothing but markers
      out.push_back({std::move(stripped), data::worthiness_labels()[1], 2});
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  if (balance_cap > 0) {
    std::size_t kept_pos = 0, kept_neg = 0;
    std::vector<data::ScaffoldInstance> capped;
    for (auto& inst : out) {
      std::size_t& counter = inst.label == data::worthiness_labels()[1] ? kept_pos : kept_neg;
      if (counter < balance_cap) {
        ++counter;
        capped.push_back(std::move(inst));
      }
    }
    out = std::move(capped);
  }
  return out;
}

const char* to_string(SectionCategory category) {
  switch (category) {
    case SectionCategory::introduction: return "introduction";
    case SectionCategory::related_work: return "related work";
    case SectionCategory::method: return "method";
    case SectionCategory::experiments: return "experiments";
    case SectionCategory::conclusion: return "conclusion";
  }
  return "";
}

std::optional<SectionCategory> normalize_section_title(const std::string& raw) {
  static const std::regex leading_numbering(R"(^\s*(?:\d+(?:\.\d+)*|[ivxlc]+)[\.\):]?(\s+|$))");
  static const std::vector<std::pair<const char*, SectionCategory>> table = {
      {"introduction", SectionCategory::introduction},
      {"intro", SectionCategory::introduction},
      {"related work", SectionCategory::related_work},
      {"background", SectionCategory::related_work},
      {"prior work", SectionCategory::related_work},
      {"previous work", SectionCategory::related_work},
      {"method", SectionCategory::method},
      {"methods", SectionCategory::method},
      {"methodology", SectionCategory::method},
      {"model", SectionCategory::method},
      {"models", SectionCategory::method},
      {"approach", SectionCategory::method},
      {"architecture", SectionCategory::method},
      {"materials and methods", SectionCategory::method},
      {"experimental setup", SectionCategory::experiments},
      {"experiment", SectionCategory::experiments},
      {"experiments", SectionCategory::experiments},
      {"results", SectionCategory::experiments},
      {"evaluation", SectionCategory::experiments},
      {"experimental results", SectionCategory::experiments},
      {"experiments and results", SectionCategory::experiments},
      {"conclusion", SectionCategory::conclusion},
      {"conclusions", SectionCategory::conclusion},
      {"concluding remarks", SectionCategory::conclusion},
      {"discussion and conclusion", SectionCategory::conclusion},
      {"summary", SectionCategory::conclusion},
  };

  std::string header = tidy_whitespace(lowercase(raw));
  std::smatch numbering;
  while (std::regex_search(header, numbering, leading_numbering) && numbering.position(0) == 0) {
    header.erase(0, static_cast<std::size_t>(numbering.length(0)));
  }
  while (!header.empty() &&
         (std::ispunct(static_cast<unsigned char>(header.back())) || is_space(header.back()))) {
    header.pop_back();
  }
  while (!header.empty() &&
         (std::ispunct(static_cast<unsigned char>(header.front())) || is_space(header.front()))) {
    header.erase(header.begin());
  }

  for (const auto& [pattern, category] : table) {
    if (header == pattern) return category;
  }
  return std::nullopt;
}

std::vector<data::ScaffoldInstance> make_section_dataset(
    const std::vector<CorpusSentence>& citation_contexts) {
  std::vector<data::ScaffoldInstance> out;
  for (const CorpusSentence& s : citation_contexts) {
    std::optional<SectionCategory> category = normalize_section_title(s.section);
    if (!category) continue;
    out.push_back({s.text, to_string(*category), 3});
  }
  return out;
}

Qualification qualify_annotator(const std::map<std::string, std::string>& gold_answers,
                                const std::map<std::string, std::string>& responses) {
  if (gold_answers.empty()) throw ContractError("qualify_annotator: empty gold question set");
  std::size_t correct = 0;
  for (const auto& [instance_id, answer] : gold_answers) {
    auto it = responses.find(instance_id);
    if (it != responses.end() && it->second == answer) ++correct;
  }
  const double trust = static_cast<double>(correct) / static_cast<double>(gold_answers.size());
  return {trust >= 0.75, trust};
}

std::optional<AggregatedLabel> aggregate_annotations(const std::vector<Annotation>& annotations,
                                                     const std::string& other_label) {
  if (annotations.empty()) {
    throw ContractError("aggregate_annotations: no annotations for instance");
  }
  double total_trust = 0.0;
  std::map<std::string, double> scores;
  for (const Annotation& a : annotations) {
    if (a.trust < 0.0 || a.trust > 1.0) {
      throw ContractError("aggregate_annotations: trust " + std::to_string(a.trust) +
                          " outside [0,1] for worker '" + a.worker_id + "'");
    }
    scores[a.choice] += a.trust;
    total_trust += a.trust;
  }
  if (total_trust == 0.0) return std::nullopt;

  std::string best;
  double best_score = -1.0;
  bool tied = false;
  for (const auto& [label, score] : scores) {
    if (score > best_score) {
      best = label;
      best_score = score;
      tied = false;
    } else if (score == best_score) {
      tied = true;
    }
  }
  const double confidence = best_score / total_trust;
  if (tied || confidence <= 0.7 || best == other_label) return std::nullopt;
  return AggregatedLabel{best, confidence};
}

}  // namespace scaffcite::scaffolds
