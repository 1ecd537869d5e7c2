#include "scaffcite/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "scaffcite/errors.hpp"

namespace scaffcite::nn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'C', 'F', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.write(buf, 8);
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
  char buf[8];
  if (!in.read(buf, 8)) throw FormatError(path + ": truncated checkpoint");
  std::uint64_t v;
  std::memcpy(&v, buf, 8);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const data::Vocabulary& vocab) {
  if (vocab.size() != params.config.vocab_size) {
    throw ContractError("checkpoint: vocabulary size " + std::to_string(vocab.size()) +
                        " does not match model config " +
                        std::to_string(params.config.vocab_size));
  }
  json meta;
  meta["format_version"] = 1;
  meta["config"] = {{"vocab_size", params.config.vocab_size},
                    {"embed_dim", params.config.embed_dim},
                    {"sidecar_dim", params.config.sidecar_dim},
                    {"hidden_dim", params.config.hidden_dim},
                    {"mlp_hidden", params.config.mlp_hidden},
                    {"dropout", params.config.dropout},
                    {"fine_tune_embeddings", params.config.fine_tune_embeddings}};
  meta["tasks"] = json::array();
  for (const TaskSpec& t : params.tasks) {
    meta["tasks"].push_back(
        {{"task_id", t.task_id}, {"name", t.name}, {"labels", t.labels}, {"lambda", t.lambda}});
  }
  meta["vocab_tokens"] = vocab.stored_tokens();
  meta["vocab_hash"] = vocab.hash();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::string meta_str = meta.dump();
  write_u64(out, meta_str.size());
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

  const auto named = params.named_tensors();
  write_u64(out, named.size());
  for (const auto& [name, var] : named) {
    write_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const ad::Tensor& t = var->value;
    write_u64(out, t.ndim());
    for (std::size_t d : t.shape()) write_u64(out, d);
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.numel() * sizeof(double)));
  }
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError(path + ": not a model checkpoint");
  }
  const std::uint64_t meta_len = read_u64(in, path);
  std::string meta_str(meta_len, '\0');
  if (!in.read(meta_str.data(), static_cast<std::streamsize>(meta_len))) {
    throw FormatError(path + ": truncated checkpoint metadata");
  }
  json meta = json::parse(meta_str, nullptr, false);
  if (meta.is_discarded()) throw FormatError(path + ": corrupt checkpoint metadata");

  ModelConfig config;
  config.vocab_size = meta["config"]["vocab_size"].get<std::size_t>();
  config.embed_dim = meta["config"]["embed_dim"].get<std::size_t>();
  config.sidecar_dim = meta["config"]["sidecar_dim"].get<std::size_t>();
  config.hidden_dim = meta["config"]["hidden_dim"].get<std::size_t>();
  config.mlp_hidden = meta["config"]["mlp_hidden"].get<std::size_t>();
  config.dropout = meta["config"]["dropout"].get<double>();
  config.fine_tune_embeddings = meta["config"]["fine_tune_embeddings"].get<bool>();

  std::vector<TaskSpec> tasks;
  for (const auto& t : meta["tasks"]) {
    tasks.push_back({t["task_id"].get<int>(), t["name"].get<std::string>(),
                     t["labels"].get<std::vector<std::string>>(), t["lambda"].get<double>()});
  }

  data::Vocabulary vocab =
      data::Vocabulary::from_tokens(meta["vocab_tokens"].get<std::vector<std::string>>());
  if (vocab.hash() != meta["vocab_hash"].get<std::uint64_t>()) {
    throw FormatError(path + ": vocabulary hash mismatch");
  }

  ModelParams params = init_params(config, tasks, 0);
  const auto named = params.named_tensors();
  const std::uint64_t count = read_u64(in, path);
  if (count != named.size()) {
    throw FormatError(path + ": checkpoint holds " + std::to_string(count) +
                      " tensors, model expects " + std::to_string(named.size()));
  }
  for (const auto& [name, var] : named) {
    const std::uint64_t name_len = read_u64(in, path);
    std::string stored_name(name_len, '\0');
    if (!in.read(stored_name.data(), static_cast<std::streamsize>(name_len))) {
      throw FormatError(path + ": truncated checkpoint");
    }
    if (stored_name != name) {
      throw FormatError(path + ": tensor '" + stored_name + "' where '" + name + "' expected");
    }
    const std::uint64_t ndim = read_u64(in, path);
    std::vector<std::size_t> shape(ndim);
    for (std::uint64_t d = 0; d < ndim; ++d) shape[d] = read_u64(in, path);
    if (shape != var->value.shape()) {
      throw FormatError(path + ": tensor '" + name + "' has shape " + ad::shape_to_string(shape) +
                        ", model expects " + var->value.shape_str());
    }
    if (!in.read(reinterpret_cast<char*>(var->value.values().data()),
                 static_cast<std::streamsize>(var->value.numel() * sizeof(double)))) {
      throw FormatError(path + ": truncated tensor data for '" + name + "'");
    }
  }
  return {std::move(params), std::move(vocab)};
}

}  // namespace scaffcite::nn
