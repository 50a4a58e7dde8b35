#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fd3/denoiser.hpp"
#include "fd3/image.hpp"
#include "fd3/random.hpp"

namespace fd3 {

// Direct bridge x_t = (1 - a(t)) x_0 + a(t) x_1 + s(t) z with a(t) = t.
// The noise schedule defaults to zero.
struct BridgeConfig {
  std::function<double(double)> sigma = [](double) { return 0.0; };

  static double alpha(double t) { return t; }
};

// Knots of a sampling trajectory: 1 = steps[0] > ... > steps[nfe] = 0.
class TimestepSchedule {
 public:
  // Throws ArgumentError unless the knots start at 1, end at 0 and strictly
  // decrease.
  explicit TimestepSchedule(std::vector<double> steps);

  const std::vector<double>& steps() const { return steps_; }
  int nfe() const { return static_cast<int>(steps_.size()) - 1; }

 private:
  std::vector<double> steps_;
};

// [1, (K-1)/K, ..., 1/K, 0].
TimestepSchedule uniform_schedule(int nfe);

Image bridge_state(const Image& x0, const Image& x1, double t, const BridgeConfig& cfg, Rng& rng);

// Draws t ~ U[0, 1], forms x_t and returns mean((F(x_t, t) - x0)^2) over all
// pixels and channels.
double training_loss(const Denoiser& predictor, const Image& x0, const Image& y,
                     const BridgeConfig& cfg, Rng& rng, double* sampled_t = nullptr);

struct StepCoefficients {
  double estimate;  // weight of F(x_t, t), 1 - s/t
  double state;     // weight of x_t, s/t
};

// Throws ArgumentError unless 0 <= s < t <= 1.
StepCoefficients ddb_coefficients(double t, double s);

// x_s = (1 - s/t) x0_hat + (s/t) x_t.
Image ddb_step(const Image& x_t, double t, double s, const Image& x0_hat);

// Iterates ddb_step from y = x_1 along the schedule; only the final state is
// clamped to [0, 1].
Image sample(const Denoiser& predictor, const Image& y, const TimestepSchedule& schedule);

// Batched variant: one network call per knot for the whole batch.
std::vector<Image> sample(const Denoiser& predictor, std::span<const Image> y,
                          const TimestepSchedule& schedule);

}  // namespace fd3
