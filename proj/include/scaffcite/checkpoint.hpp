#pragma once

#include <string>

#include "scaffcite/data.hpp"
#include "scaffcite/model.hpp"

namespace scaffcite::nn {

/// Model checkpoint: a single binary file holding the config, the task
/// specs, the vocabulary (tokens plus hash), and every parameter tensor with
/// its shape. Save/load round-trips bitwise.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const data::Vocabulary& vocab);

struct Checkpoint {
  ModelParams params;
  data::Vocabulary vocab;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace scaffcite::nn
