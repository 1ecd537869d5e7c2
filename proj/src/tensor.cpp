#include "scaffcite/tensor.hpp"

#include <utility>

#include "scaffcite/errors.hpp"

namespace scaffcite::ad {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_numel(shape_) != values_.size()) {
    throw DimensionError("tensor: shape " + shape_to_string(shape_) + " does not hold " +
                         std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::filled(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  for (double& x : t.values_) x = v;
  return t;
}

std::size_t Tensor::rows() const {
  if (ndim() != 2) throw ContractError("tensor: rows() needs a 2-d tensor, got " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (ndim() != 2) throw ContractError("tensor: cols() needs a 2-d tensor, got " + shape_str());
  return shape_[1];
}

double Tensor::at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
double& Tensor::at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }

std::vector<double>& Tensor::grad() {
  if (grad_.empty()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

const std::vector<double>& Tensor::grad() const {
  if (grad_.empty()) throw ContractError("tensor: gradient requested but never populated");
  return grad_;
}

void Tensor::zero_grad() { grad_.assign(values_.size(), 0.0); }
void Tensor::drop_grad() { grad_.clear(); }

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

}  // namespace scaffcite::ad
