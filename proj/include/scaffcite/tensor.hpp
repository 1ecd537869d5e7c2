#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace scaffcite::ad {

/// Dense n-dimensional array of doubles in row-major order, with a lazily
/// allocated gradient buffer of the same length.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor filled(std::vector<std::size_t> shape, double v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return values_.size(); }
  bool is_scalar() const { return numel() == 1; }

  // 2-d accessors; contract-checked.
  std::size_t rows() const;
  std::size_t cols() const;
  double at(std::size_t r, std::size_t c) const;
  double& at(std::size_t r, std::size_t c);

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool has_grad() const { return !grad_.empty(); }
  /// Grad buffer, zero-filled on first access.
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();
  void drop_grad();

  std::string shape_str() const;  // e.g. "[3x4]"

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

}  // namespace scaffcite::ad
