#include "fd3/bridge.hpp"

#include <cmath>
#include <string>

#include "fd3/error.hpp"
#include "fd3/simd/kernels.hpp"

namespace fd3 {

Image Denoiser::predict_one(const Image& x_t, double t) const {
  std::vector<Image> out = predict(std::span<const Image>(&x_t, 1), std::span<const double>(&t, 1));
  return std::move(out.front());
}

TimestepSchedule::TimestepSchedule(std::vector<double> steps) : steps_(std::move(steps)) {
  if (steps_.size() < 2) throw ArgumentError("schedule needs at least two knots");
  if (steps_.front() != 1.0 || steps_.back() != 0.0) {
    throw ArgumentError("schedule must start at 1.0 and end at 0.0");
  }
  for (std::size_t i = 1; i < steps_.size(); ++i) {
    if (!(steps_[i] < steps_[i - 1])) throw ArgumentError("schedule must strictly decrease");
  }
}

TimestepSchedule uniform_schedule(int nfe) {
  if (nfe < 1) throw ArgumentError("uniform_schedule: nfe must be >= 1, got " + std::to_string(nfe));
  std::vector<double> steps(nfe + 1);
  for (int i = 0; i <= nfe; ++i) steps[i] = static_cast<double>(nfe - i) / nfe;
  return TimestepSchedule(std::move(steps));
}

Image bridge_state(const Image& x0, const Image& x1, double t, const BridgeConfig& cfg, Rng& rng) {
  require_same_shape(x0, x1, "bridge_state");
  if (!(t >= 0.0 && t <= 1.0)) throw ArgumentError("bridge_state: t must lie in [0, 1]");
  const double a = BridgeConfig::alpha(t);
  Image out(x0.height(), x0.width());
  simd::active().axpby_f64(out.size(), 1.0 - a, x0.data(), a, x1.data(), out.data());
  const double sigma = cfg.sigma ? cfg.sigma(t) : 0.0;
  if (sigma > 0.0) {
    std::normal_distribution<double> z(0.0, 1.0);
    for (double& v : out.values()) v += sigma * z(rng);
  }
  return out;
}

double training_loss(const Denoiser& predictor, const Image& x0, const Image& y,
                     const BridgeConfig& cfg, Rng& rng, double* sampled_t) {
  require_same_shape(x0, y, "training_loss");
  const double t = std::generate_canonical<double, 53>(rng);
  if (sampled_t != nullptr) *sampled_t = t;
  const Image xt = bridge_state(x0, y, t, cfg, rng);
  const Image pred = predictor.predict_one(xt, t);
  require_same_shape(pred, x0, "training_loss prediction");
  return simd::active().sum_sq_diff_f64(pred.size(), pred.data(), x0.data()) / static_cast<double>(x0.size());
}

StepCoefficients ddb_coefficients(double t, double s) {
  if (!(t > 0.0)) throw ArgumentError("ddb_step: t must be > 0");
  if (!(s >= 0.0 && s < t && t <= 1.0)) {
    throw ArgumentError("ddb_step: requires 0 <= s < t <= 1, got s=" + std::to_string(s) +
                        " t=" + std::to_string(t));
  }
  const double ratio = s / t;
  return {1.0 - ratio, ratio};
}

Image ddb_step(const Image& x_t, double t, double s, const Image& x0_hat) {
  require_same_shape(x_t, x0_hat, "ddb_step");
  const StepCoefficients c = ddb_coefficients(t, s);
  // x0_hat + (s/t)(x_t - x0_hat): exact at s = 0 and when x0_hat == x_t.
  Image out(x_t.height(), x_t.width());
  simd::active().lerp_f64(out.size(), c.state, x0_hat.data(), x_t.data(), out.data());
  return out;
}

std::vector<Image> sample(const Denoiser& predictor, std::span<const Image> y,
                          const TimestepSchedule& schedule) {
  std::vector<Image> x(y.begin(), y.end());
  const auto& steps = schedule.steps();
  std::vector<double> t(x.size());
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
    std::fill(t.begin(), t.end(), steps[k]);
    const std::vector<Image> x0_hat = predictor.predict(x, t);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = ddb_step(x[i], steps[k], steps[k + 1], x0_hat[i]);
  }
  for (Image& img : x) img = clamp01(std::move(img));
  return x;
}

Image sample(const Denoiser& predictor, const Image& y, const TimestepSchedule& schedule) {
  return std::move(sample(predictor, std::span<const Image>(&y, 1), schedule).front());
}

}  // namespace fd3
