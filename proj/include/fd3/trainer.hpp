#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fd3/clahe.hpp"
#include "fd3/config.hpp"
#include "fd3/degradation.hpp"
#include "fd3/image.hpp"
#include "fd3/unet.hpp"

namespace fd3 {

struct TrainingConfig {
  double learning_rate = 1e-4;
  int epochs = 30;
  int batch_size = 4;
  double weight_decay = 0.0;
  int image_size = 64;
  std::uint64_t seed = 0;
  ParamRanges ranges;
  std::optional<ClaheParams> clahe = ClaheParams{};  // nullopt: x0 is the image itself
  int checkpoint_every = 0;                           // 0: final epoch only
  std::filesystem::path dataset_dir;
  double val_fraction = 0.1;
  UNetConfig model;
  int workers = 1;  // pair synthesis only; results do not depend on it
};

// Throws ArgumentError for any invalid field.
void validate(const TrainingConfig& cfg);

// Keys: train.learning_rate, train.epochs, train.batch_size,
// train.weight_decay, train.image_size, train.checkpoint_every,
// train.val_fraction, train.dataset_dir, seed, model.*, clahe.*, ranges.*.
TrainingConfig training_config_from(const Config& cfg);
Config to_config(const TrainingConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;      // mean over the epoch's batches
  double val_psnr = 0.0;  // mean PSNR at NFE=1 on the held-out images
  double seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
};

struct TrainingResult {
  std::unique_ptr<UNet> model;
  TrainingLog log;
  std::map<std::string, std::string> metadata;
};

struct TrainingHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  // Called after epochs that are checkpoint boundaries.
  std::function<void(int epoch, const UNet&, const std::map<std::string, std::string>&)> on_checkpoint;
};

// Validation images are the first max(1, round(val_fraction * n)) entries
// of a seeded permutation of the dataset; the rest are trained on.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
DatasetSplit split_dataset(std::size_t n, double val_fraction, std::uint64_t seed);

// Fixed held-out pairs: image i of the validation split uses stream
// derive_seed(seed, kValidationTag, i).
std::vector<TrainingPair> validation_pairs(std::span<const Image> images, const DatasetSplit& split,
                                           const TrainingConfig& cfg);

// Mean PSNR of one-step enhancement against x0.
double validation_psnr(const Denoiser& model, std::span<const TrainingPair> pairs);

// Content hash of the training images (FNV-1a over 8-bit quantised pixels).
std::string dataset_hash(std::span<const Image> images);

// Images must already be cfg.image_size square. Throws ArgumentError for
// fewer than 2 images and TrainingError on a non-finite loss.
TrainingResult train(const TrainingConfig& cfg, std::span<const Image> images, const TrainingHooks& hooks = {});

inline constexpr std::uint64_t kValidationTag = 0x76616C;

}  // namespace fd3
