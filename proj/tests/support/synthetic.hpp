#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scaffcite/data.hpp"
#include "scaffcite/model.hpp"

namespace scaffcite::synth {

/// Knobs for the synthetic intent corpus. Each intent class owns a pool of
/// cue tokens; the main training split only ever uses the first
/// `train_cue_count` cues of each pool while dev/test draw from the whole
/// pool, so generalizing to held-out cues requires the signal carried by the
/// scaffold corpora (which use every cue).
struct GeneratorSpec {
  std::size_t num_classes = 3;
  std::size_t cue_pool_size = 6;
  std::size_t train_cue_count = 3;
  std::size_t filler_vocab = 40;
  std::size_t sentence_length = 10;  // tokens including the cue
  std::uint64_t seed = 1;
};

struct SyntheticData {
  std::vector<std::string> intent_labels;
  std::vector<data::CitationInstance> train, dev, test;
  std::vector<data::ScaffoldInstance> worthiness, sections;
};

SyntheticData make_dataset(const GeneratorSpec& spec, std::size_t train_size, std::size_t dev_size,
                           std::size_t test_size, std::size_t scaffold_size);

/// Vocabulary over every split plus both scaffold corpora.
data::Vocabulary build_vocab(const SyntheticData& data);

std::vector<nn::EncodedInstance> encode_split(const std::vector<data::CitationInstance>& split,
                                              const data::Vocabulary& vocab,
                                              const std::vector<std::string>& labels);

}  // namespace scaffcite::synth
