#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fd3::nn {

// Dense row-major float tensor. Image batches use NCHW.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f);
  Tensor(std::initializer_list<int> shape, float fill = 0.0f)
      : Tensor(std::vector<int>(shape), fill) {}

  const std::vector<int>& shape() const { return shape_; }
  int dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  void fill(float v);
  std::string shape_string() const;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

std::size_t numel_of(const std::vector<int>& shape);

}  // namespace fd3::nn
