#include "fd3/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fd3/adamw.hpp"
#include "fd3/bridge.hpp"
#include "fd3/degradation_io.hpp"
#include "fd3/error.hpp"
#include "fd3/metrics.hpp"
#include "fd3/nn/ops.hpp"
#include "fd3/parallel.hpp"
#include "fd3/random.hpp"

namespace fd3 {
namespace {

constexpr std::uint64_t kInitTag = 0x696E6974;
constexpr std::uint64_t kSplitTag = 0x73706C;
constexpr std::uint64_t kShuffleTag = 0x736875;
constexpr std::uint64_t kPairTag = 0x706169;
constexpr std::uint64_t kTimeTag = 0x74696D;

}  // namespace

void validate(const TrainingConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw ArgumentError("train.learning_rate must be > 0");
  }
  if (cfg.epochs < 1) throw ArgumentError("train.epochs must be >= 1");
  if (cfg.batch_size < 1) throw ArgumentError("train.batch_size must be >= 1");
  if (!(cfg.weight_decay >= 0.0)) throw ArgumentError("train.weight_decay must be >= 0");
  if (cfg.image_size < Image::kMinSide) throw ArgumentError("train.image_size must be >= 8");
  if (cfg.checkpoint_every < 0) throw ArgumentError("train.checkpoint_every must be >= 0");
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0)) throw ArgumentError("train.val_fraction must lie in (0, 1)");
  if (cfg.workers < 1) throw ArgumentError("workers must be >= 1");
  validate(cfg.ranges);
  validate(cfg.model);
  const int mult = 1 << (cfg.model.levels() - 1);
  if (cfg.image_size % mult != 0) {
    throw ArgumentError("train.image_size must be a multiple of " + std::to_string(mult));
  }
}

TrainingConfig training_config_from(const Config& cfg) {
  TrainingConfig t;
  t.learning_rate = cfg.get_double("train.learning_rate", t.learning_rate);
  t.epochs = static_cast<int>(cfg.get_int("train.epochs", t.epochs));
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size", t.batch_size));
  t.weight_decay = cfg.get_double("train.weight_decay", t.weight_decay);
  t.image_size = static_cast<int>(cfg.get_int("train.image_size", t.image_size));
  t.checkpoint_every = static_cast<int>(cfg.get_int("train.checkpoint_every", t.checkpoint_every));
  t.val_fraction = cfg.get_double("train.val_fraction", t.val_fraction);
  t.dataset_dir = cfg.get_string("train.dataset_dir", "");
  t.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  t.ranges = ranges_from_config(cfg.subtree("ranges"));
  t.clahe = clahe_from_config(cfg);
  const Config model = cfg.subtree("model");
  std::map<std::string, std::string> kv = t.model.to_map();
  for (const auto& [k, v] : model.entries()) {
    if (!kv.count(k)) throw ArgumentError("model: unknown key '" + k + "'");
    kv[k] = v;
  }
  try {
    t.model = UNetConfig::from_map(kv);
  } catch (const DecodeError& e) {
    throw ArgumentError(e.what());
  }
  validate(t);
  return t;
}

Config to_config(const TrainingConfig& t) {
  Config c;
  c.set("train.learning_rate", format_number(t.learning_rate));
  c.set("train.epochs", std::to_string(t.epochs));
  c.set("train.batch_size", std::to_string(t.batch_size));
  c.set("train.weight_decay", format_number(t.weight_decay));
  c.set("train.image_size", std::to_string(t.image_size));
  c.set("train.checkpoint_every", std::to_string(t.checkpoint_every));
  c.set("train.val_fraction", format_number(t.val_fraction));
  c.set("train.dataset_dir", t.dataset_dir.string());
  c.set("seed", std::to_string(t.seed));
  ranges_to_config(t.ranges, c);
  clahe_to_config(t.clahe, c);
  for (const auto& [k, v] : t.model.to_map()) c.set("model." + k, v);
  return c;
}

DatasetSplit split_dataset(std::size_t n, double val_fraction, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("dataset needs at least 2 images, found " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, kSplitTag));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(val_fraction * n)), 1, n - 1);
  DatasetSplit s;
  s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::vector<TrainingPair> validation_pairs(std::span<const Image> images, const DatasetSplit& split,
                                           const TrainingConfig& cfg) {
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < split.val.size(); ++i) {
    Rng rng(derive_seed(cfg.seed, kValidationTag, i));
    pairs.push_back(make_training_pair(images[split.val[i]], cfg.ranges, cfg.clahe, rng));
  }
  return pairs;
}

double validation_psnr(const Denoiser& model, std::span<const TrainingPair> pairs) {
  if (pairs.empty()) throw ArgumentError("validation_psnr: no pairs");
  std::vector<Image> y;
  for (const auto& p : pairs) y.push_back(p.y);
  const std::vector<Image> est = sample(model, y, uniform_schedule(1));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double v = psnr(pairs[i].x0, est[i]);
    if (std::isfinite(v)) {
      sum += v;
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(count);
}

std::string dataset_hash(std::span<const Image> images) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto feed = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001B3ull;
  };
  for (const Image& img : images) {
    for (int s : {img.height(), img.width()}) {
      for (int b = 0; b < 4; ++b) feed(static_cast<unsigned char>(s >> (8 * b)));
    }
    for (double v : img.values()) feed(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrainingResult train(const TrainingConfig& cfg, std::span<const Image> images, const TrainingHooks& hooks) {
  validate(cfg);
  for (const Image& img : images) {
    if (img.height() != cfg.image_size || img.width() != cfg.image_size) {
      throw ArgumentError("train: images must be " + std::to_string(cfg.image_size) + "x" +
                          std::to_string(cfg.image_size));
    }
  }
  const DatasetSplit split = split_dataset(images.size(), cfg.val_fraction, cfg.seed);
  const std::vector<TrainingPair> val = validation_pairs(images, split, cfg);

  TrainingResult result;
  result.model = std::make_unique<UNet>(cfg.model, derive_seed(cfg.seed, kInitTag));
  UNet& model = *result.model;
  result.metadata = {{"seed", std::to_string(cfg.seed)},
                     {"dataset_hash", dataset_hash(images)},
                     {"learning_rate", format_number(cfg.learning_rate)},
                     {"batch_size", std::to_string(cfg.batch_size)},
                     {"image_size", std::to_string(cfg.image_size)}};

  std::vector<nn::Var> params;
  for (const auto& p : model.parameters()) params.push_back(p.var);
  AdamW opt(params, {cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay});
  Rng time_rng(derive_seed(cfg.seed, kTimeTag));

  std::vector<std::size_t> order = split.train;
  const std::size_t n_train = order.size();
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    model.set_training(true);
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
    order = split.train;
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t b0 = 0; b0 < n_train; b0 += bs) {
      const std::size_t count = std::min(bs, n_train - b0);
      std::vector<TrainingPair> pairs(count, TrainingPair{images[0], images[0]});
      parallel_for(count, cfg.workers, [&](std::size_t j) {
        const std::size_t idx = order[b0 + j];
        Rng rng(derive_seed(cfg.seed, kPairTag ^ (static_cast<std::uint64_t>(epoch) << 32), idx));
        pairs[j] = make_training_pair(images[idx], cfg.ranges, cfg.clahe, rng);
      });

      std::vector<double> t(count);
      std::vector<Image> xt;
      std::vector<Image> x0;
      xt.reserve(count);
      x0.reserve(count);
      const BridgeConfig bridge;
      for (std::size_t j = 0; j < count; ++j) {
        t[j] = uniform(time_rng, 0.0, 1.0);
        xt.push_back(bridge_state(pairs[j].x0, pairs[j].y, t[j], bridge, time_rng));
        x0.push_back(pairs[j].x0);
      }

      model.zero_grad();
      const nn::Var pred = model.forward(nn::constant(images_to_tensor(xt)), t);
      const nn::Var loss = nn::mse_loss(pred, images_to_tensor(x0));
      const double value = loss->value[0];
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite loss " << value << " at epoch " << epoch << ", batch " << batches + 1;
        throw TrainingError(msg.str());
      }
      nn::backward(loss);
      opt.step();
      loss_sum += value;
      ++batches;
    }

    model.set_training(false);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / batches;
    rec.val_psnr = validation_psnr(model, val);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);

    const bool boundary = epoch == cfg.epochs || (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0);
    if (boundary && hooks.on_checkpoint) {
      auto meta = result.metadata;
      meta["epochs"] = std::to_string(epoch);
      hooks.on_checkpoint(epoch, model, meta);
    }
  }
  result.metadata["epochs"] = std::to_string(cfg.epochs);
  return result;
}

}  // namespace fd3
