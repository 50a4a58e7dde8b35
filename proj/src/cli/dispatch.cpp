#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fd3/bridge.hpp"
#include "fd3/checkpoint.hpp"
#include "fd3/cli.hpp"
#include "fd3/degradation_io.hpp"
#include "fd3/error.hpp"
#include "fd3/metrics.hpp"
#include "fd3/parallel.hpp"
#include "fd3/random.hpp"
#include "fd3/trainer.hpp"

namespace fd3::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flags shared by every subcommand. Resolution order: built-in defaults,
// --config files in order, --set pairs, then explicit flags.
struct Common {
  std::vector<std::string> config_files;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

// A flag bound to a config key; only applied when given.
struct Binding {
  std::string key;
  std::optional<std::string> value;
};

struct Command {
  std::string name;
  Common common;
  std::vector<std::unique_ptr<Binding>> bindings;
  CLI::App* app = nullptr;

  void bind(const std::string& flag, const std::string& key, const std::string& help) {
    bindings.push_back(std::make_unique<Binding>(Binding{key, std::nullopt}));
    app->add_option(flag, bindings.back()->value, help + " [" + key + "]");
  }
};

void add_common(Command& cmd) {
  cmd.app->add_option("--config", cmd.common.config_files, "key = value config file or run manifest");
  cmd.app->add_option("--set", cmd.common.sets, "override one key: key=value");
  cmd.app->add_option("--seed", cmd.common.seed, "seed for every random draw [seed]");
  cmd.app->add_option("--workers", cmd.common.workers, "threads for per-image work")->check(CLI::PositiveNumber);
}

Config resolve(const Command& cmd, Config defaults) {
  Config cfg = std::move(defaults);
  for (const auto& file : cmd.common.config_files) cfg.merge(Config::load(file));
  for (const auto& kv : cmd.common.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ArgumentError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& b : cmd.bindings) {
    if (b->value) cfg.set(b->key, *b->value);
  }
  if (cmd.common.seed) cfg.set("seed", std::to_string(*cmd.common.seed));
  return cfg;
}

std::string require_key(const Config& cfg, const std::string& key, const std::string& flag) {
  const auto v = cfg.find(key);
  if (!v || v->empty()) throw ArgumentError("missing required option " + flag + " (or " + key + " in --config)");
  return *v;
}

std::uint64_t seed_of(const Config& cfg) {
  const long long s = cfg.get_int("seed", 0);
  if (s < 0) throw ArgumentError("seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path manifest_for_report(const fs::path& report) {
  return report.parent_path() / (report.filename().string() + ".manifest.json");
}

json number_or_sentinel(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

// Loads a ranges file: either unprefixed field names or ranges.* keys.
Config ranges_file(const std::string& path) {
  const Config file = Config::load(path);
  const Config sub = file.subtree("ranges");
  Config out;
  for (const auto& [k, v] : (sub.entries().empty() ? file : sub).entries()) out.set("ranges." + k, v);
  return out;
}

Config ranges_and_clahe_defaults() {
  Config c;
  ranges_to_config(ParamRanges{}, c);
  clahe_to_config(ClaheParams{}, c);
  return c;
}

// Re-serialises the ranges/clahe sections in canonical form.
void canonicalise(Config& cfg) {
  ranges_to_config(ranges_from_config(cfg.subtree("ranges")), cfg);
  clahe_to_config(clahe_from_config(cfg), cfg);
}

std::vector<Image> enhance_all(const UNet& model, const std::vector<Image>& inputs, int nfe, int batch,
                               int workers) {
  const TimestepSchedule schedule = uniform_schedule(nfe);
  std::vector<Image> out(inputs.size(), inputs.empty() ? Image(8, 8) : inputs.front());
  // Chunks hold consecutive inputs of one shape so results do not depend
  // on the worker count.
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  for (std::size_t i = 0; i < inputs.size();) {
    std::size_t j = i + 1;
    while (j < inputs.size() && j - i < static_cast<std::size_t>(batch) && same_shape(inputs[i], inputs[j])) ++j;
    chunks.emplace_back(i, j);
    i = j;
  }
  parallel_for(chunks.size(), workers, [&](std::size_t c) {
    const auto [lo, hi] = chunks[c];
    const auto res = sample(model, std::span<const Image>(inputs.data() + lo, hi - lo), schedule);
    for (std::size_t k = 0; k < res.size(); ++k) out[lo + k] = res[k];
  });
  return out;
}

struct Paired {
  std::vector<std::string> keys;
  std::vector<Image> first;
  std::vector<Image> second;
};

Paired pair_by_key(std::vector<NamedImage> a, std::vector<NamedImage> b, const std::string& what_a,
                   const std::string& what_b) {
  Paired p;
  std::map<std::string, Image*> index;
  for (auto& item : b) index[item.key] = &item.image;
  for (auto& item : a) {
    const auto it = index.find(item.key);
    if (it == index.end()) throw ArgumentError("no " + what_b + " image for key '" + item.key + "'");
    p.keys.push_back(item.key);
    p.first.push_back(std::move(item.image));
    p.second.push_back(std::move(*it->second));
    index.erase(it);
  }
  if (!index.empty()) throw ArgumentError("no " + what_a + " image for key '" + index.begin()->first + "'");
  if (p.keys.empty()) throw ArgumentError("no images to compare");
  return p;
}

MetricReport score(const Paired& p, const std::vector<Image>& est, bool segment, const std::string& fid_mode) {
  std::vector<ImagePair> pairs;
  for (std::size_t i = 0; i < p.keys.size(); ++i) pairs.push_back({&p.first[i], &est[i]});
  const LumaPoolExtractor extractor;
  const TopHatSegmenter segmenter;
  MetricReport r = evaluate(pairs, extractor, segment ? &segmenter : nullptr);
  if (fid_mode == "frechet" && r.fid) {
    FeatureSet ref;
    FeatureSet test;
    for (const auto& pr : pairs) {
      ref.push_back(extractor.extract(*pr.gt));
      test.push_back(extractor.extract(*pr.est));
    }
    r.fid = fid_frechet(ref, test);
  } else if (fid_mode != "gaussian" && fid_mode != "frechet") {
    throw ArgumentError("evaluate.fid_mode must be 'gaussian' or 'frechet'");
  }
  return r;
}

int run_degrade(const Command& cmd, const std::vector<std::string>& argv, const std::optional<std::string>& ranges,
                std::ostream& out) {
  Config defaults = ranges_and_clahe_defaults();
  defaults.set("degrade.size", "64");
  defaults.set("seed", "0");
  Config cfg = defaults;
  for (const auto& file : cmd.common.config_files) cfg.merge(Config::load(file));
  if (ranges) cfg.merge(ranges_file(*ranges));
  Command rest{cmd.name, {{}, cmd.common.sets, cmd.common.seed, cmd.common.workers}, {}, cmd.app};
  for (const auto& b : cmd.bindings) rest.bindings.push_back(std::make_unique<Binding>(*b));
  cfg = resolve(rest, cfg);
  canonicalise(cfg);

  const fs::path in = require_key(cfg, "degrade.in", "--in");
  const fs::path dir = require_key(cfg, "degrade.out", "--out");
  const int size = static_cast<int>(cfg.get_int("degrade.size", 64));
  if (size < Image::kMinSide) throw ArgumentError("--size must be >= 8");
  const std::uint64_t seed = seed_of(cfg);
  const ParamRanges r = ranges_from_config(cfg.subtree("ranges"));
  const auto target = clahe_from_config(cfg);

  const auto files = list_images(in);
  if (files.empty()) throw ArgumentError("no images in " + in.string());
  ensure_dir(dir);
  RunManifest manifest("degrade", argv, cfg, seed);
  manifest.add_inputs(files, in);
  manifest.begin(dir / "manifest.json");

  const auto images = load_directory(in, size);
  std::vector<std::string> records(images.size());
  parallel_for(images.size(), cmd.common.workers, [&](std::size_t i) {
    const NamedImage& item = images[i];
    const std::uint64_t stream = derive_seed(seed, fnv1a(item.key));
    Rng rng(stream);
    DegradationParams drawn;
    const TrainingPair pair = make_training_pair(item.image, r, target, rng, &drawn);
    save_png(pair.x0, dir / (item.key + "_gt.png"));
    save_png(pair.y, dir / (item.key + "_deg.png"));
    json rec = {{"name", item.key}, {"stream_seed", stream}, {"params", to_json(drawn)}};
    records[i] = rec.dump();
  });
  std::string jsonl;
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < images.size(); ++i) {
    jsonl += records[i] + "\n";
    outputs.push_back(images[i].key + "_gt.png");
    outputs.push_back(images[i].key + "_deg.png");
  }
  write_text(dir / "params.jsonl", jsonl);
  outputs.push_back("params.jsonl");
  manifest.finish(outputs);
  out << "degraded " << images.size() << " images into " << dir.string() << "\n";
  return kOk;
}

int run_train(const Command& cmd, const std::vector<std::string>& argv, std::ostream& out) {
  Config cfg = resolve(cmd, to_config(TrainingConfig{}));
  TrainingConfig tc = training_config_from(cfg);
  tc.workers = cmd.common.workers;
  const fs::path dir = require_key(cfg, "train.out", "--out");
  if (tc.dataset_dir.empty()) throw ArgumentError("missing required option --data (or train.dataset_dir in --config)");
  Config resolved = to_config(tc);
  resolved.set("train.out", dir.string());

  const auto files = list_images(tc.dataset_dir);
  if (files.size() < 2) {
    throw ArgumentError("dataset " + tc.dataset_dir.string() + " needs at least 2 images, found " +
                        std::to_string(files.size()));
  }
  ensure_dir(dir);
  RunManifest manifest("train", argv, resolved, tc.seed);
  manifest.add_inputs(files, tc.dataset_dir);
  manifest.begin(dir / "manifest.json");

  const auto named = load_directory(tc.dataset_dir, tc.image_size);
  std::vector<Image> images;
  for (const auto& n : named) images.push_back(n.image);

  std::ofstream log(dir / "log.jsonl");
  if (!log) throw IoError("cannot write " + (dir / "log.jsonl").string());
  std::vector<std::string> outputs{"log.jsonl"};
  TrainingHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) {
    log << json{{"epoch", r.epoch}, {"loss", r.loss}, {"val_psnr", number_or_sentinel(r.val_psnr)},
                {"seconds", r.seconds}}
               .dump()
        << "\n"
        << std::flush;
    out << "epoch " << r.epoch << " loss " << r.loss << " val_psnr " << r.val_psnr << "\n" << std::flush;
  };
  hooks.on_checkpoint = [&](int epoch, const UNet& model, const std::map<std::string, std::string>& meta) {
    const std::string name = "ckpt_epoch" + std::to_string(epoch) + ".bin";
    save_checkpoint(model, meta, dir / name);
    outputs.push_back(name);
  };
  train(tc, images, hooks);
  manifest.finish(outputs);
  return kOk;
}

int run_enhance(const Command& cmd, const std::vector<std::string>& argv, std::ostream& out) {
  Config defaults;
  defaults.set("enhance.nfe", "10");
  defaults.set("enhance.batch", "8");
  defaults.set("seed", "0");
  const Config cfg = resolve(cmd, defaults);
  const fs::path ckpt = require_key(cfg, "enhance.checkpoint", "--checkpoint");
  const fs::path in = require_key(cfg, "enhance.in", "--in");
  const fs::path dir = require_key(cfg, "enhance.out", "--out");
  const long long nfe = cfg.get_int("enhance.nfe", 10);
  const long long batch = cfg.get_int("enhance.batch", 8);
  if (nfe < 1) throw ArgumentError("--nfe must be >= 1");
  if (batch < 1) throw ArgumentError("enhance.batch must be >= 1");

  const auto files = select_role(list_images(in), "_deg");
  if (files.empty()) throw ArgumentError("no images in " + in.string());
  ensure_dir(dir);
  RunManifest manifest("enhance", argv, cfg, seed_of(cfg));
  manifest.add_input(ckpt);
  manifest.add_inputs(files, in);
  manifest.begin(dir / "manifest.json");

  const Checkpoint c = load_checkpoint(ckpt);
  const auto named = load_files(files);
  std::vector<Image> inputs;
  for (const auto& n : named) inputs.push_back(n.image);
  const auto est = enhance_all(*c.model, inputs, static_cast<int>(nfe), static_cast<int>(batch), cmd.common.workers);
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < named.size(); ++i) {
    outputs.push_back(named[i].key + "_enh.png");
    save_png(est[i], dir / outputs.back());
  }
  manifest.finish(outputs);
  out << "enhanced " << named.size() << " images with " << nfe << " steps\n";
  return kOk;
}

json report_json(const MetricReport& r, const std::vector<std::string>& keys) {
  json per = json::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    json item = {{"key", keys[i]}, {"psnr", number_or_sentinel(r.psnr[i])}};
    if (!r.iou.empty()) item["iou"] = r.iou[i];
    per.push_back(item);
  }
  return {{"n_images", r.n_images},
          {"psnr_mean", number_or_sentinel(r.psnr_mean)},
          {"psnr_inf_count", r.psnr_inf_count},
          {"fid", r.fid ? json(*r.fid) : json(nullptr)},
          {"iou_mean", r.iou_mean ? json(*r.iou_mean) : json(nullptr)},
          {"per_image", per}};
}

int run_evaluate(const Command& cmd, const std::vector<std::string>& argv, std::ostream& out) {
  Config defaults;
  defaults.set("evaluate.segmenter", "true");
  defaults.set("evaluate.fid_mode", "gaussian");
  defaults.set("seed", "0");
  const Config cfg = resolve(cmd, defaults);
  const fs::path gt = require_key(cfg, "evaluate.gt", "--gt");
  const fs::path est = require_key(cfg, "evaluate.est", "--est");
  const fs::path report = require_key(cfg, "evaluate.report", "--report");
  const bool segment = cfg.get_bool("evaluate.segmenter", true);
  const std::string fid_mode = cfg.get_string("evaluate.fid_mode", "gaussian");

  const auto gt_files = select_role(list_images(gt), "_gt");
  const auto est_files = select_role(list_images(est), "_enh");
  if (!report.parent_path().empty()) ensure_dir(report.parent_path());
  RunManifest manifest("evaluate", argv, cfg, seed_of(cfg));
  manifest.add_inputs(gt_files, gt);
  manifest.add_inputs(est_files, est);
  manifest.begin(manifest_for_report(report));

  const Paired p = pair_by_key(load_files(gt_files), load_files(est_files), "ground-truth", "estimate");
  const MetricReport r = score(p, p.second, segment, fid_mode);
  write_text(report, report_json(r, p.keys).dump(2) + "\n");
  manifest.finish({report.filename().string()});
  out << "psnr_mean " << r.psnr_mean << " fid " << (r.fid ? std::to_string(*r.fid) : "null") << "\n";
  return kOk;
}

int run_sweep(const Command& cmd, const std::vector<std::string>& argv, std::ostream& out) {
  Config defaults;
  defaults.set("sweep.nfe_list", "1,2,5,10,20");
  defaults.set("sweep.batch", "8");
  defaults.set("sweep.segmenter", "false");
  defaults.set("seed", "0");
  const Config cfg = resolve(cmd, defaults);
  const fs::path ckpt = require_key(cfg, "sweep.checkpoint", "--checkpoint");
  const fs::path gt = require_key(cfg, "sweep.gt", "--gt");
  const fs::path deg = require_key(cfg, "sweep.deg", "--deg");
  const fs::path report = require_key(cfg, "sweep.report", "--report");
  const auto list = parse_number_list(cfg.get_string("sweep.nfe_list", ""), "sweep.nfe_list");
  const long long batch = cfg.get_int("sweep.batch", 8);
  const bool segment = cfg.get_bool("sweep.segmenter", false);
  if (list.empty()) throw ArgumentError("--nfe-list is empty");
  for (double v : list) {
    if (v < 1 || v != std::floor(v)) throw ArgumentError("--nfe-list entries must be positive integers");
  }
  if (batch < 1) throw ArgumentError("sweep.batch must be >= 1");

  const auto gt_files = select_role(list_images(gt), "_gt");
  const auto deg_files = select_role(list_images(deg), "_deg");
  if (!report.parent_path().empty()) ensure_dir(report.parent_path());
  RunManifest manifest("sweep-nfe", argv, cfg, seed_of(cfg));
  manifest.add_input(ckpt);
  manifest.add_inputs(gt_files, gt);
  manifest.add_inputs(deg_files, deg);
  manifest.begin(manifest_for_report(report));

  const Checkpoint c = load_checkpoint(ckpt);
  const Paired p = pair_by_key(load_files(gt_files), load_files(deg_files), "ground-truth", "degraded");
  json rows = json::array();
  for (double v : list) {
    const int nfe = static_cast<int>(v);
    const auto est = enhance_all(*c.model, p.second, nfe, static_cast<int>(batch), cmd.common.workers);
    const MetricReport r = score(p, est, segment, "gaussian");
    json row = {{"nfe", nfe},
                {"psnr_mean", number_or_sentinel(r.psnr_mean)},
                {"psnr_inf_count", r.psnr_inf_count},
                {"fid", r.fid ? json(*r.fid) : json(nullptr)}};
    if (r.iou_mean) row["iou_mean"] = *r.iou_mean;
    rows.push_back(row);
    out << "nfe " << nfe << " psnr_mean " << r.psnr_mean << "\n";
  }
  write_text(report, rows.dump(2) + "\n");
  manifest.finish({report.filename().string()});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fd3: fundus image enhancement with direct diffusion bridges", "fd3"};
  app.set_version_flag("--version",
                       std::string("fd3 ") + kToolVersion + " (checkpoint format " +
                           std::to_string(kCheckpointVersion) + ")");
  app.require_subcommand(1);

  Command degrade{"degrade"}, trn{"train"}, enhance{"enhance"}, eval{"evaluate"}, sweep{"sweep-nfe"};
  degrade.app = app.add_subcommand("degrade", "synthesise (CLAHE target, degraded) pairs from clean images");
  trn.app = app.add_subcommand("train", "train the bridge denoiser");
  enhance.app = app.add_subcommand("enhance", "enhance degraded images with a checkpoint");
  eval.app = app.add_subcommand("evaluate", "PSNR / FID / IOU report for paired directories");
  sweep.app = app.add_subcommand("sweep-nfe", "PSNR and FID over a list of step counts");
  for (Command* c : {&degrade, &trn, &enhance, &eval, &sweep}) add_common(*c);

  std::optional<std::string> ranges;
  degrade.bind("--in", "degrade.in", "directory of clean images");
  degrade.bind("--out", "degrade.out", "output directory");
  degrade.bind("--size", "degrade.size", "square output side in pixels");
  degrade.app->add_option("--ranges", ranges, "ParamRanges config file");

  trn.bind("--out", "train.out", "output directory");
  trn.bind("--data", "train.dataset_dir", "directory of clean training images");
  trn.bind("--epochs", "train.epochs", "number of epochs");
  trn.bind("--lr", "train.learning_rate", "learning rate");

  enhance.bind("--checkpoint", "enhance.checkpoint", "checkpoint file");
  enhance.bind("--in", "enhance.in", "directory of degraded images");
  enhance.bind("--out", "enhance.out", "output directory");
  enhance.bind("--nfe", "enhance.nfe", "sampling steps");

  eval.bind("--gt", "evaluate.gt", "ground-truth directory");
  eval.bind("--est", "evaluate.est", "estimate directory");
  eval.bind("--report", "evaluate.report", "JSON report path");
  eval.bind("--fid-mode", "evaluate.fid_mode", "gaussian or frechet");

  sweep.bind("--checkpoint", "sweep.checkpoint", "checkpoint file");
  sweep.bind("--gt", "sweep.gt", "ground-truth directory");
  sweep.bind("--deg", "sweep.deg", "degraded directory");
  sweep.bind("--nfe-list", "sweep.nfe_list", "comma separated step counts");
  sweep.bind("--report", "sweep.report", "JSON report path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0 && app.get_subcommands().empty()) err << app.help();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (degrade.app->parsed()) return run_degrade(degrade, args, ranges, out);
    if (trn.app->parsed()) return run_train(trn, args, out);
    if (enhance.app->parsed()) return run_enhance(enhance, args, out);
    if (eval.app->parsed()) return run_evaluate(eval, args, out);
    if (sweep.app->parsed()) return run_sweep(sweep, args, out);
  } catch (const ArgumentError& e) {
    err << "fd3: error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "fd3: failed: " << e.what() << "\n";
    return kFailure;
  }
  err << app.help();
  return kUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace fd3::cli
