#include "synthetic.hpp"

#include <algorithm>
#include <random>

namespace scaffcite::synth {

namespace {

std::string cue_token(std::size_t cls, std::size_t slot) {
  return "cue" + std::to_string(cls) + "x" + std::to_string(slot);
}

std::string filler_token(std::size_t i) { return "w" + std::to_string(i); }

// A sentence is fillers plus (optionally) one cue, shuffled.
std::string make_sentence(const GeneratorSpec& spec, std::mt19937_64& rng, int cue_class,
                          std::size_t cue_slot) {
  std::uniform_int_distribution<std::size_t> filler(0, spec.filler_vocab - 1);
  std::vector<std::string> tokens;
  const std::size_t fillers = spec.sentence_length - (cue_class >= 0 ? 1 : 0);
  for (std::size_t i = 0; i < fillers; ++i) tokens.push_back(filler_token(filler(rng)));
  if (cue_class >= 0) tokens.push_back(cue_token(static_cast<std::size_t>(cue_class), cue_slot));
  std::shuffle(tokens.begin(), tokens.end(), rng);
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) text += ' ';
    text += tokens[i];
  }
  return text;
}

}  // namespace

SyntheticData make_dataset(const GeneratorSpec& spec, std::size_t train_size, std::size_t dev_size,
                           std::size_t test_size, std::size_t scaffold_size) {
  std::mt19937_64 rng(spec.seed);
  SyntheticData out;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    out.intent_labels.push_back("intent" + std::to_string(c));
  }
  // each intent class maps onto one section category, cycling through five
  const auto section_of = [](std::size_t cls) {
    return data::section_labels()[cls % data::section_labels().size()];
  };

  std::uniform_int_distribution<std::size_t> any_class(0, spec.num_classes - 1);
  std::uniform_int_distribution<std::size_t> train_slot(0, spec.train_cue_count - 1);
  std::uniform_int_distribution<std::size_t> full_slot(0, spec.cue_pool_size - 1);
  // dev/test cues are the ones train never sees, unless the pool is exhausted
  std::uniform_int_distribution<std::size_t> eval_slot(
      spec.train_cue_count < spec.cue_pool_size ? spec.train_cue_count : 0,
      spec.cue_pool_size - 1);

  std::size_t next_id = 0;
  const auto make_split = [&](std::size_t size, bool train_cues_only) {
    std::vector<data::CitationInstance> split;
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t cls = any_class(rng);
      const std::size_t slot = train_cues_only ? train_slot(rng) : eval_slot(rng);
      data::CitationInstance inst;
      inst.id = "syn-" + std::to_string(next_id++);
      inst.text = make_sentence(spec, rng, static_cast<int>(cls), slot);
      inst.label = out.intent_labels[cls];
      split.push_back(std::move(inst));
    }
    return split;
  };
  out.train = make_split(train_size, true);
  out.dev = make_split(dev_size, false);
  out.test = make_split(test_size, false);

  // worthiness scaffold: cue-bearing sentences are "worthy", pure filler is
  // not; teaches the encoder which tokens are distinctive
  for (std::size_t i = 0; i < scaffold_size; ++i) {
    const bool worthy = i % 2 == 0;
    data::ScaffoldInstance inst;
    inst.task_id = 2;
    inst.label = data::worthiness_labels()[worthy ? 1 : 0];
    inst.text = worthy ? make_sentence(spec, rng, static_cast<int>(any_class(rng)), full_slot(rng))
                       : make_sentence(spec, rng, -1, 0);
    out.worthiness.push_back(std::move(inst));
  }

  // section scaffold: every cue in a class's pool appears under that class's
  // section, tying held-out cues to the clusters the main head learns
  for (std::size_t i = 0; i < scaffold_size; ++i) {
    const std::size_t cls = any_class(rng);
    data::ScaffoldInstance inst;
    inst.task_id = 3;
    inst.label = section_of(cls);
    inst.text = make_sentence(spec, rng, static_cast<int>(cls), full_slot(rng));
    out.sections.push_back(std::move(inst));
  }
  return out;
}

data::Vocabulary build_vocab(const SyntheticData& data) {
  // training-side text only: main train plus both scaffold corpora
  std::vector<std::vector<std::string>> corpus;
  for (const auto& inst : data.train) corpus.push_back(data::tokenize(inst.text));
  for (const auto* scaffold : {&data.worthiness, &data.sections}) {
    for (const auto& inst : *scaffold) corpus.push_back(data::tokenize(inst.text));
  }
  return data::Vocabulary::build(corpus, 1);
}

std::vector<nn::EncodedInstance> encode_split(const std::vector<data::CitationInstance>& split,
                                              const data::Vocabulary& vocab,
                                              const std::vector<std::string>& labels) {
  return nn::encode_citations(split, vocab, labels);
}

}  // namespace scaffcite::synth
