#pragma once

#include <string>
#include <utility>
#include <vector>

namespace scaffcite::gradcheck {

struct ComponentResult {
  std::string name;
  double max_rel_error = 0.0;
};

/// Finite-difference verification (central differences, h = 1e-5) of every
/// autodiff op against analytic gradients, at fixed random points.
std::vector<ComponentResult> check_ops();

/// Same verification through each neural layer.
std::vector<ComponentResult> check_layers();

/// Full three-task model: joint loss over a two-instance mixed batch,
/// differentiated against every parameter tensor.
std::vector<ComponentResult> check_model();

std::vector<ComponentResult> check_scope(const std::string& scope);  // ops | layers | model | all

}  // namespace scaffcite::gradcheck
