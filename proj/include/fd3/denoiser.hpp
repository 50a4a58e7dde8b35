#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fd3/image.hpp"

namespace fd3 {

// Time-conditioned regressor F(x_t, t) ~ E[x_0 | x_t].
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  // One output per input image, same shape. Outputs are unconstrained.
  // Throws ArgumentError when x_t and t differ in length or images differ in
  // shape.
  virtual std::vector<Image> predict(std::span<const Image> x_t, std::span<const double> t) const = 0;

  virtual std::size_t parameter_count() const { return 0; }

  bool training() const { return training_; }
  void set_training(bool on) { training_ = on; }

  // Single-image convenience wrapper.
  Image predict_one(const Image& x_t, double t) const;

 private:
  bool training_ = false;
};

}  // namespace fd3
