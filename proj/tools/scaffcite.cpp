// scaffcite: multitask citation-intent classifier with structural auxiliary
// tasks, plus the data tooling around it.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scaffcite/checkpoint.hpp"
#include "scaffcite/errors.hpp"
#include "scaffcite/gradcheck_suite.hpp"
#include "scaffcite/metrics.hpp"
#include "scaffcite/run_config.hpp"
#include "scaffcite/scaffold_gen.hpp"
#include "scaffcite/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scaffcite;

namespace {

bool verbose_logging() {
  const char* level = std::getenv("SCAFFCITE_LOG");
  return level == nullptr || std::string(level) != "quiet";
}

void info(const std::string& message) {
  if (verbose_logging()) std::cerr << "scaffcite: " << message << "\n";
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::string full_precision(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

// Config file plus --key value overrides, one flag per config key.
struct ConfigCli {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "config file of 'key = value' lines");
    for (const std::string& key : cli::config_keys()) {
      cmd->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& value) { overrides[key] = value; },
          "override config key " + key);
    }
  }

  cli::RunConfig resolve() const {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = cli::parse_config_file(config_path);
    for (const auto& [key, value] : overrides) kv[key] = value;
    return cli::make_run_config(kv);
  }
};

struct LoadedData {
  data::Vocabulary vocab;
  data::SidecarStore sidecar;
  std::vector<nn::EncodedInstance> train, dev;
  std::vector<std::vector<nn::EncodedInstance>> scaffolds;
  std::vector<nn::TaskSpec> tasks;
};

LoadedData load_training_data(const cli::RunConfig& config) {
  if (config.labels.empty()) {
    throw ContractError("config: data.labels is required (a preset name or a comma list)");
  }
  LoadedData out;
  auto train_raw = data::read_citations_jsonl(config.train_path, config.labels);
  auto dev_raw = data::read_citations_jsonl(config.dev_path, config.labels);
  info("loaded " + std::to_string(train_raw.size()) + " train / " +
       std::to_string(dev_raw.size()) + " dev instances");

  std::vector<data::ScaffoldInstance> worthiness, sections;
  if (!config.scaffold_worthiness_path.empty()) {
    worthiness = data::read_scaffold_jsonl(config.scaffold_worthiness_path,
                                           data::worthiness_labels(), 2);
    info("loaded " + std::to_string(worthiness.size()) + " worthiness scaffold instances");
  }
  if (!config.scaffold_section_path.empty()) {
    sections = data::read_scaffold_jsonl(config.scaffold_section_path, data::section_labels(), 3);
    info("loaded " + std::to_string(sections.size()) + " section scaffold instances");
  }

  // vocabulary over the training-side text: main train plus scaffolds
  std::vector<std::vector<std::string>> corpus;
  for (const auto& inst : train_raw) corpus.push_back(data::tokenize(inst.text));
  for (const auto& inst : worthiness) corpus.push_back(data::tokenize(inst.text));
  for (const auto& inst : sections) corpus.push_back(data::tokenize(inst.text));
  out.vocab = data::Vocabulary::build(corpus, config.min_count);
  info("vocabulary of " + std::to_string(out.vocab.size()) + " entries");

  const data::SidecarStore* sidecar = nullptr;
  if (!config.sidecar_path.empty()) {
    out.sidecar = data::SidecarStore::load(config.sidecar_path);
    sidecar = &out.sidecar;
    info("sidecar vectors of width " + std::to_string(out.sidecar.dim()));
  }

  out.train = nn::encode_citations(train_raw, out.vocab, config.labels, sidecar);
  out.dev = nn::encode_citations(dev_raw, out.vocab, config.labels, sidecar);
  if (!worthiness.empty()) {
    out.scaffolds.push_back(nn::encode_scaffolds(worthiness, out.vocab, data::worthiness_labels()));
  }
  if (!sections.empty()) {
    out.scaffolds.push_back(nn::encode_scaffolds(sections, out.vocab, data::section_labels()));
  }

  out.tasks = {
      {1, "intent", config.labels, 1.0},
      {2, "worthiness", data::worthiness_labels(), config.train.lambda2},
      {3, "section", data::section_labels(), config.train.lambda3},
  };
  return out;
}

nn::ModelParams build_model(const cli::RunConfig& config, const LoadedData& loaded) {
  nn::ModelConfig mc;
  mc.vocab_size = loaded.vocab.size();
  mc.embed_dim = config.train.embed_dim;
  mc.sidecar_dim = loaded.sidecar.empty() ? 0 : loaded.sidecar.dim();
  mc.hidden_dim = config.train.hidden_dim;
  mc.mlp_hidden = config.train.mlp_hidden;
  mc.dropout = config.train.dropout;
  mc.fine_tune_embeddings = config.train.fine_tune_embeddings;

  nn::ModelParams model = nn::init_params(mc, loaded.tasks, config.train.seed);
  if (!config.word_vectors_path.empty()) {
    nn::TokenEmbeddingTable table = data::load_word_vectors(
        config.word_vectors_path, loaded.vocab, mc.fine_tune_embeddings, config.train.seed);
    if (table.dim != mc.embed_dim) {
      throw DataError("word vectors are " + std::to_string(table.dim) +
                      "-dimensional but model.embed_dim is " + std::to_string(mc.embed_dim));
    }
    model.embedding = table;
  }
  return model;
}

void write_train_log(const std::string& path, const cli::RunConfig& config,
                     const training::TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write training log: " + path);
  // header lines carry the only non-deterministic content (timestamps)
  out << "# scaffcite train log\n";
  out << "# started_at: " << iso_now() << "\n";
  out << "# epoch_seconds:";
  for (const auto& record : history.epochs) {
    out << " " << std::setprecision(3) << std::fixed << record.seconds;
    out.unsetf(std::ios::fixed);
  }
  out << "\n";
  out << "seed " << config.train.seed << "\n";
  out << "lambda2 " << full_precision(config.train.lambda2) << " lambda3 "
      << full_precision(config.train.lambda3) << " batch_size " << config.train.batch_size
      << " patience " << config.train.patience << "\n";
  for (const auto& record : history.epochs) {
    out << "epoch " << record.epoch;
    for (std::size_t t = 0; t < record.task_loss.size(); ++t) {
      out << " loss" << (t + 1) << " " << full_precision(record.task_loss[t]);
    }
    out << " dev_macro_f1 " << full_precision(record.dev_macro_f1) << "\n";
  }
  out << "best_epoch " << history.best_epoch << " best_dev_f1 "
      << full_precision(history.best_dev_f1) << "\n";
}

metrics::ClassificationReport evaluate_instances(const nn::ModelParams& model,
                                                 const std::vector<nn::EncodedInstance>& instances) {
  std::vector<int> golds, preds;
  for (const auto& inst : instances) {
    golds.push_back(inst.gold);
    preds.push_back(nn::predict(inst.token_ids, model, inst.sidecar, inst.id).label_index);
  }
  return metrics::per_class_prf(golds, preds, model.tasks[0].labels);
}

int cmd_train(const ConfigCli& cli_config) {
  cli::RunConfig config = cli_config.resolve();
  cli::check_run_paths(config, true, true, false);
  info("seed " + std::to_string(config.train.seed));

  LoadedData loaded = load_training_data(config);
  nn::ModelParams model = build_model(config, loaded);

  training::TrainResult result =
      training::train(model, loaded.train, loaded.scaffolds, loaded.dev, config.train);
  info("best epoch " + std::to_string(result.history.best_epoch) + " with dev macro F1 " +
       std::to_string(result.history.best_dev_f1));

  const fs::path out_dir(config.output_dir);
  nn::save_checkpoint((out_dir / "checkpoint.ckpt").string(), result.best_params, loaded.vocab);
  write_train_log((out_dir / "train_log.txt").string(), config, result.history);

  metrics::ClassificationReport dev_report = evaluate_instances(result.best_params, loaded.dev);
  std::ofstream dev_out(out_dir / "dev_report.json");
  dev_out << metrics::report_json(dev_report) << "\n";
  std::cout << metrics::render_report(dev_report);
  return 0;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& test_path,
                 const std::string& report_dir, const std::string& sidecar_path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint_path);
  auto test_raw = data::read_citations_jsonl(test_path, ckpt.params.tasks[0].labels);

  data::SidecarStore sidecar;
  const data::SidecarStore* sidecar_ptr = nullptr;
  if (ckpt.params.config.sidecar_dim > 0) {
    if (sidecar_path.empty()) {
      throw ContractError("the checkpoint expects contextual sidecar vectors; pass --sidecar");
    }
    sidecar = data::SidecarStore::load(sidecar_path);
    sidecar_ptr = &sidecar;
  }
  auto test = nn::encode_citations(test_raw, ckpt.vocab, ckpt.params.tasks[0].labels, sidecar_ptr);

  metrics::ClassificationReport report = evaluate_instances(ckpt.params, test);
  fs::create_directories(report_dir);
  std::ofstream json_out(fs::path(report_dir) / "report.json");
  json_out << metrics::report_json(report) << "\n";
  std::ofstream table_out(fs::path(report_dir) / "report.txt");
  table_out << metrics::render_report(report);
  std::ofstream confusion_out(fs::path(report_dir) / "confusion.txt");
  confusion_out << metrics::render_confusion(report, /*mask_diagonal=*/true);

  std::cout << metrics::render_report(report);
  std::cout << metrics::render_confusion(report, true);
  return 0;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& input_path,
                const std::string& out_path, bool attention, const std::string& sidecar_path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint_path);
  auto inputs = data::read_unlabeled_jsonl(input_path);

  data::SidecarStore sidecar;
  bool use_sidecar = ckpt.params.config.sidecar_dim > 0;
  if (use_sidecar) {
    if (sidecar_path.empty()) {
      throw ContractError("the checkpoint expects contextual sidecar vectors; pass --sidecar");
    }
    sidecar = data::SidecarStore::load(sidecar_path);
  }

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write predictions: " + out_path);
  fs::path attention_dir = fs::path(out_path).parent_path() / "attention";
  if (attention) fs::create_directories(attention_dir);

  for (const auto& inst : inputs) {
    std::vector<std::string> tokens = data::tokenize(inst.text);
    std::vector<int> ids = ckpt.vocab.encode(tokens);
    if (ids.empty()) throw DataError("instance '" + inst.id + "' tokenizes to nothing");
    const nn::ContextVectors* ctx =
        use_sidecar ? &sidecar.require(inst.id, ids.size()) : nullptr;
    nn::Prediction pred = nn::predict(ids, ckpt.params, ctx, inst.id);

    json record;
    record["id"] = inst.id;
    record["predicted"] = pred.label;
    json probs;
    for (std::size_t c = 0; c < pred.probabilities.size(); ++c) {
      probs[ckpt.params.tasks[0].labels[c]] = pred.probabilities[c];
    }
    record["probabilities"] = probs;
    if (!inst.label.empty()) record["gold"] = inst.label;
    if (attention) {
      record["attention"] = pred.attention;
      std::ofstream svg(attention_dir / (inst.id + ".svg"));
      svg << metrics::attention_svg(tokens, pred.attention, pred.label, inst.label);
      std::ofstream rec(attention_dir / (inst.id + ".json"));
      rec << metrics::attention_record_json(inst.id, tokens, pred.attention, pred.label,
                                            inst.label)
          << "\n";
    }
    out << record.dump() << "\n";
  }
  info("wrote predictions for " + std::to_string(inputs.size()) + " instances to " + out_path);
  return 0;
}

int cmd_gen_scaffolds(const std::string& corpus_path, const std::string& out_dir,
                      const std::string& task, std::uint64_t seed, std::size_t balance_cap) {
  auto corpus = scaffolds::read_corpus_jsonl(corpus_path);
  fs::create_directories(out_dir);
  json stats;
  stats["corpus_sentences"] = corpus.size();
  stats["seed"] = seed;

  if (task == "worthiness" || task == "both") {
    auto dataset = scaffolds::make_worthiness_dataset(corpus, seed, balance_cap);
    data::write_scaffold_jsonl((fs::path(out_dir) / "worthiness.jsonl").string(), dataset);
    std::map<std::string, std::size_t> counts;
    for (const auto& inst : dataset) ++counts[inst.label];
    stats["worthiness"] = {{"total", dataset.size()}, {"per_label", counts}};
    info("worthiness scaffold: " + std::to_string(dataset.size()) + " instances");
  }
  if (task == "section" || task == "both") {
    // citation contexts are the sentences that carry at least one marker
    std::vector<scaffolds::CorpusSentence> contexts;
    for (const auto& sentence : corpus) {
      if (!scaffolds::detect_citation_markers(sentence.text).empty()) {
        contexts.push_back(sentence);
      }
    }
    auto dataset = scaffolds::make_section_dataset(contexts);
    data::write_scaffold_jsonl((fs::path(out_dir) / "section.jsonl").string(), dataset);
    std::map<std::string, std::size_t> counts;
    for (const auto& inst : dataset) ++counts[inst.label];
    stats["section"] = {{"total", dataset.size()},
                        {"per_label", counts},
                        {"citation_contexts", contexts.size()}};
    info("section scaffold: " + std::to_string(dataset.size()) + " instances");
  }

  std::ofstream stats_out(fs::path(out_dir) / "scaffold_stats.json");
  stats_out << stats.dump(2) << "\n";
  std::cout << stats.dump(2) << "\n";
  return 0;
}

int cmd_aggregate(const std::string& annotations_path, const std::string& gold_path,
                  const std::string& out_path) {
  // gold test questions: {"instance_id", "label"}
  std::map<std::string, std::string> gold;
  {
    std::ifstream in(gold_path);
    if (!in) throw DataError("cannot open gold questions: " + gold_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.contains("instance_id") || !record.contains("label")) {
        throw FormatError(gold_path + ":" + std::to_string(line_no) +
                          ": gold records need \"instance_id\" and \"label\"");
      }
      gold[record["instance_id"].get<std::string>()] = record["label"].get<std::string>();
    }
  }
  if (gold.empty()) throw DataError(gold_path + ": no gold questions");

  struct RawAnnotation {
    std::string worker, instance, choice, text;
  };
  std::vector<RawAnnotation> raw;
  {
    std::ifstream in(annotations_path);
    if (!in) throw DataError("cannot open annotations: " + annotations_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.contains("instance_id") ||
          !record.contains("worker_id") || !record.contains("choice")) {
        throw FormatError(annotations_path + ":" + std::to_string(line_no) +
                          ": annotation records need \"instance_id\", \"worker_id\", \"choice\"");
      }
      raw.push_back({record["worker_id"].get<std::string>(),
                     record["instance_id"].get<std::string>(),
                     record["choice"].get<std::string>(), record.value("string", "")});
    }
  }

  // qualification: accuracy over the gold questions
  std::map<std::string, std::map<std::string, std::string>> gold_responses;
  for (const auto& a : raw) {
    if (gold.count(a.instance)) gold_responses[a.worker][a.instance] = a.choice;
  }
  std::map<std::string, double> trust;
  std::size_t disqualified = 0;
  std::set<std::string> workers;
  for (const auto& a : raw) workers.insert(a.worker);
  for (const auto& worker : workers) {
    auto it = gold_responses.find(worker);
    if (it == gold_responses.end()) {
      ++disqualified;  // never answered a test question
      continue;
    }
    scaffolds::Qualification q = scaffolds::qualify_annotator(gold, it->second);
    if (q.qualified) {
      trust[worker] = q.trust;
    } else {
      ++disqualified;
    }
  }

  // aggregate non-gold instances over qualified workers only
  std::map<std::string, std::vector<scaffolds::Annotation>> by_instance;
  std::map<std::string, std::string> instance_text;
  for (const auto& a : raw) {
    if (gold.count(a.instance)) continue;
    auto t = trust.find(a.worker);
    if (t == trust.end()) continue;
    by_instance[a.instance].push_back({a.worker, a.instance, a.choice, t->second});
    if (!a.text.empty()) instance_text.emplace(a.instance, a.text);
  }

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write aggregated labels: " + out_path);
  std::size_t kept = 0, discarded = 0;
  for (const auto& [instance, annotations] : by_instance) {
    auto result = scaffolds::aggregate_annotations(annotations);
    if (!result) {
      ++discarded;
      continue;
    }
    ++kept;
    json record{{"instance_id", instance},
                {"label", result->label},
                {"confidence", result->confidence},
                {"annotations", annotations.size()}};
    if (instance_text.count(instance)) record["string"] = instance_text[instance];
    out << record.dump() << "\n";
  }

  json stats{{"workers", workers.size()},
             {"qualified_workers", trust.size()},
             {"disqualified_workers", disqualified},
             {"gold_questions", gold.size()},
             {"instances", by_instance.size()},
             {"kept", kept},
             {"discarded", discarded}};
  std::cout << stats.dump(2) << "\n";
  const fs::path stats_path = fs::path(out_path).parent_path() / "aggregate_stats.json";
  std::ofstream stats_out(stats_path);
  stats_out << stats.dump(2) << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& scope) {
  auto results = gradcheck::check_scope(scope);
  double worst = 0.0;
  for (const auto& r : results) {
    std::printf("%-24s max relative error %.3e\n", r.name.c_str(), r.max_rel_error);
    worst = std::max(worst, r.max_rel_error);
  }
  std::printf("worst                    %.3e (tolerance 1e-4)\n", worst);
  return worst < 1e-4 ? 0 : 1;
}

int cmd_grid(const ConfigCli& cli_config, double step, bool axis_aligned) {
  if (step <= 0.0 || step > 0.3) throw ContractError("grid: --step must be in (0, 0.3]");
  cli::RunConfig config = cli_config.resolve();
  cli::check_run_paths(config, true, true, false);

  LoadedData loaded = load_training_data(config);
  std::vector<double> values;
  for (double v = 0.0; v <= 0.3 + 1e-12; v += step) values.push_back(v);

  const auto score = [&](double l2, double l3) {
    cli::RunConfig point = config;
    point.train.lambda2 = l2;
    point.train.lambda3 = l3;
    LoadedData point_data = loaded;  // re-tag task lambdas
    point_data.tasks[1].lambda = l2;
    point_data.tasks[2].lambda = l3;
    nn::ModelParams model = build_model(point, point_data);
    training::TrainResult result =
        training::train(model, point_data.train, point_data.scaffolds, point_data.dev,
                        point.train);
    info("grid point lambda2=" + std::to_string(l2) + " lambda3=" + std::to_string(l3) +
         " dev F1 " + std::to_string(result.history.best_dev_f1));
    return result.history.best_dev_f1;
  };

  training::GridResult result = training::grid_search_lambda(score, values, values, axis_aligned);

  fs::create_directories(config.output_dir);
  std::ofstream tsv(fs::path(config.output_dir) / "grid.tsv");
  tsv << "lambda2\tlambda3\tdev_macro_f1\n";
  for (const auto& point : result.table) {
    tsv << full_precision(point.lambda2) << "\t" << full_precision(point.lambda3) << "\t"
        << full_precision(point.dev_f1) << "\n";
  }
  json summary{{"best_lambda2", result.best_lambda2},
               {"best_lambda3", result.best_lambda3},
               {"best_dev_f1", result.best_dev_f1},
               {"points", result.table.size()},
               {"seed", config.train.seed}};
  std::ofstream json_out(fs::path(config.output_dir) / "grid.json");
  json_out << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multitask citation-intent classification toolkit"};
  app.require_subcommand(1);

  ConfigCli train_config;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model from a run config");
  train_config.attach(train_cmd);

  std::string eval_checkpoint, eval_test, eval_report_dir = "report", eval_sidecar;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a labeled test set");
  eval_cmd->add_option("--checkpoint", eval_checkpoint)->required();
  eval_cmd->add_option("--test", eval_test)->required();
  eval_cmd->add_option("--report-dir", eval_report_dir);
  eval_cmd->add_option("--sidecar", eval_sidecar);

  std::string pred_checkpoint, pred_input, pred_out = "predictions.jsonl", pred_sidecar;
  bool pred_attention = false;
  CLI::App* pred_cmd = app.add_subcommand("predict", "label new citation contexts");
  pred_cmd->add_option("--checkpoint", pred_checkpoint)->required();
  pred_cmd->add_option("--input", pred_input)->required();
  pred_cmd->add_option("--out", pred_out);
  pred_cmd->add_flag("--attention", pred_attention, "also write attention heatmaps");
  pred_cmd->add_option("--sidecar", pred_sidecar);

  std::string gen_corpus, gen_out = "scaffolds", gen_task = "both";
  std::uint64_t gen_seed = 13370;
  std::size_t gen_cap = 0;
  CLI::App* gen_cmd = app.add_subcommand("gen-scaffolds", "build scaffold datasets from a corpus");
  gen_cmd->add_option("--corpus", gen_corpus)->required();
  gen_cmd->add_option("--out-dir", gen_out);
  gen_cmd->add_option("--task", gen_task)->check(CLI::IsMember({"worthiness", "section", "both"}));
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--balance-cap", gen_cap, "cap instances per worthiness label (0 = off)");

  std::string agg_annotations, agg_gold, agg_out = "aggregated.jsonl";
  CLI::App* agg_cmd =
      app.add_subcommand("aggregate", "aggregate crowd annotations with trust weighting");
  agg_cmd->add_option("--annotations", agg_annotations)->required();
  agg_cmd->add_option("--gold", agg_gold)->required();
  agg_cmd->add_option("--out", agg_out);

  std::string gc_scope = "all";
  CLI::App* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  gc_cmd->add_option("--scope", gc_scope)->check(CLI::IsMember({"ops", "layers", "model", "all"}));

  ConfigCli grid_config;
  double grid_step = 0.05;
  bool grid_axis = false;
  CLI::App* grid_cmd = app.add_subcommand("grid", "lambda grid search over [0, 0.3]");
  grid_config.attach(grid_cmd);
  grid_cmd->add_option("--step", grid_step);
  grid_cmd->add_flag("--axis-aligned", grid_axis, "sweep lambda2 first, then lambda3");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(train_config);
    if (*eval_cmd) return cmd_evaluate(eval_checkpoint, eval_test, eval_report_dir, eval_sidecar);
    if (*pred_cmd) {
      return cmd_predict(pred_checkpoint, pred_input, pred_out, pred_attention, pred_sidecar);
    }
    if (*gen_cmd) return cmd_gen_scaffolds(gen_corpus, gen_out, gen_task, gen_seed, gen_cap);
    if (*agg_cmd) return cmd_aggregate(agg_annotations, agg_gold, agg_out);
    if (*gc_cmd) return cmd_gradcheck(gc_scope);
    if (*grid_cmd) return cmd_grid(grid_config, grid_step, grid_axis);
  } catch (const std::exception& e) {
    std::cerr << "scaffcite: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
