#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fd3/checkpoint.hpp"
#include "fd3/cli.hpp"
#include "fd3/phantom.hpp"
#include "helpers.hpp"

using namespace fd3;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_phantoms(const fs::path& dir, int n, int size) {
  fs::create_directories(dir);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(5, i));
    save_png(make_phantom(size, rng), dir / ("img" + std::to_string(i) + ".png"));
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

const std::vector<std::string> kTinyModel{"--set", "model.base_channels=8", "--set", "model.time_embed_dim=16",
                                         "--set", "model.groups=4"};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == 1);
    const Result unknown = run({"frobnicate"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("degrade") != std::string::npos);  // usage text lists subcommands
    const Result missing = run({"degrade", "--out", "x"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("--in") != std::string::npos);
    CHECK(run({"enhance", "--in", "a", "--out", "b"}).err.find("--checkpoint") != std::string::npos);
    CHECK(run({"degrade", "--in", "a", "--out", "b", "--seed", "-3"}).code == 1);
    CHECK(run({"degrade", "--in", "a", "--out", "b", "--set", "novalue"}).code == 1);
  }

  TEST_CASE("version flag") {
    const Result r = run({"--version"});
    CHECK(r.code == 0);
    CHECK(r.out.find("checkpoint format " + std::to_string(kCheckpointVersion)) != std::string::npos);
  }

  TEST_CASE("runtime failures exit 2") {
    const auto dir = test::temp_dir("cli_fail");
    CHECK(run({"degrade", "--in", (dir / "nope").string(), "--out", (dir / "o").string()}).code == 2);
    write_phantoms(dir / "in", 2, 16);
    std::ofstream(dir / "bad.bin") << "garbage";
    CHECK(run({"enhance", "--checkpoint", (dir / "bad.bin").string(), "--in", (dir / "in").string(), "--out",
               (dir / "o").string()})
              .code == 2);
  }

  TEST_CASE("degrade writes pairs, params and a manifest; reruns are identical") {
    const auto dir = test::temp_dir("cli_degrade");
    write_phantoms(dir / "in", 3, 20);
    const std::vector<std::string> base{"degrade", "--in", (dir / "in").string(), "--size", "16", "--seed", "7"};
    auto with_out = [&](const std::string& o) {
      auto a = base;
      a.insert(a.end(), {"--out", (dir / o).string()});
      return a;
    };
    REQUIRE(run(with_out("a")).code == 0);
    REQUIRE(run(with_out("b")).code == 0);
    for (const std::string name : {"img0_gt.png", "img0_deg.png", "img2_deg.png", "params.jsonl"}) {
      CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }
    CHECK(load_image(dir / "a" / "img1_gt.png").height() == 16);

    const auto manifest = read_json(dir / "a" / "manifest.json");
    CHECK(manifest["command"] == "degrade");
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["inputs"]["in/img0.png"] == cli::git_blob_sha1(dir / "in" / "img0.png"));
    CHECK(manifest.contains("started"));
    CHECK(manifest.contains("finished"));

    std::istringstream lines(slurp(dir / "a" / "params.jsonl"));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
      const auto rec = nlohmann::json::parse(line);
      CHECK(rec["params"]["transmission"]["alpha"].get<double>() >= 0.5);
      ++count;
    }
    CHECK(count == 3);

    // The manifest alone reproduces the run.
    REQUIRE(run({"degrade", "--config", (dir / "a" / "manifest.json").string(), "--out", (dir / "c").string()}).code == 0);
    CHECK(slurp(dir / "a" / "img1_deg.png") == slurp(dir / "c" / "img1_deg.png"));

    // A different seed changes the output.
    auto other = base;
    other[6] = "8";
    other.insert(other.end(), {"--out", (dir / "d").string()});
    REQUIRE(run(other).code == 0);
    CHECK(slurp(dir / "a" / "img1_deg.png") != slurp(dir / "d" / "img1_deg.png"));
  }

  TEST_CASE("ranges file overrides defaults") {
    const auto dir = test::temp_dir("cli_ranges");
    write_phantoms(dir / "in", 2, 16);
    std::ofstream(dir / "id.cfg") << "alpha = 1,1\nbeta = 0,0\ngamma = 1,1\nbias_amplitude = 0,0\n"
                                     "bias_blur_sigma = 0,0\nblur_sigma = 0,0\nnoise_std = 0,0\nspot_count = 0,0\n";
    REQUIRE(run({"degrade", "--in", (dir / "in").string(), "--out", (dir / "o").string(), "--ranges",
                 (dir / "id.cfg").string(), "--size", "16", "--set", "clahe.enabled=false"})
                .code == 0);
    CHECK(slurp(dir / "o" / "img0_deg.png") == slurp(dir / "o" / "img0_gt.png"));
    std::ofstream(dir / "bad.cfg") << "alpah = 1,1\n";
    CHECK(run({"degrade", "--in", (dir / "in").string(), "--out", (dir / "p").string(), "--ranges",
               (dir / "bad.cfg").string()})
              .code == 1);
  }

  TEST_CASE("train, enhance, evaluate and sweep end to end") {
    const auto dir = test::temp_dir("cli_pipeline");
    write_phantoms(dir / "clean", 5, 16);
    std::vector<std::string> train_args{"train",   "--data",       (dir / "clean").string(), "--out",
                                        (dir / "run").string(), "--epochs", "2",  "--seed",
                                        "3",       "--set",        "train.image_size=16",    "--set",
                                        "train.batch_size=2"};
    train_args.insert(train_args.end(), kTinyModel.begin(), kTinyModel.end());
    const Result tr = run(train_args);
    REQUIRE_MESSAGE(tr.code == 0, tr.err);
    CHECK(fs::exists(dir / "run" / "ckpt_epoch2.bin"));
    CHECK(fs::exists(dir / "run" / "manifest.json"));
    std::istringstream log(slurp(dir / "run" / "log.jsonl"));
    std::string line;
    int epochs = 0;
    while (std::getline(log, line)) {
      const auto rec = nlohmann::json::parse(line);
      CHECK(rec.contains("loss"));
      CHECK(rec.contains("val_psnr"));
      CHECK(rec.contains("seconds"));
      CHECK(rec["epoch"] == ++epochs);
    }
    CHECK(epochs == 2);

    REQUIRE(run({"degrade", "--in", (dir / "clean").string(), "--out", (dir / "pairs").string(), "--size", "16"}).code == 0);
    const std::string ckpt = (dir / "run" / "ckpt_epoch2.bin").string();
    fs::create_directories(dir / "deg");
    fs::create_directories(dir / "gt");
    for (int i = 0; i < 5; ++i) {
      const std::string k = "img" + std::to_string(i);
      fs::copy_file(dir / "pairs" / (k + "_deg.png"), dir / "deg" / (k + "_deg.png"));
      fs::copy_file(dir / "pairs" / (k + "_gt.png"), dir / "gt" / (k + "_gt.png"));
    }
    REQUIRE(run({"enhance", "--checkpoint", ckpt, "--in", (dir / "deg").string(), "--out", (dir / "enh2").string(),
                 "--nfe", "3", "--workers", "2"})
                .code == 0);
    CHECK(fs::exists(dir / "enh2" / "img4_enh.png"));
    // A degrade output directory works directly: only its _deg files are read.
    REQUIRE(run({"enhance", "--checkpoint", ckpt, "--in", (dir / "pairs").string(), "--out", (dir / "enh").string(),
                 "--nfe", "3"})
                .code == 0);
    CHECK(slurp(dir / "enh" / "img2_enh.png") == slurp(dir / "enh2" / "img2_enh.png"));
    CHECK(cli::list_images(dir / "enh").size() == 5);
    REQUIRE(run({"evaluate", "--gt", (dir / "pairs").string(), "--est", (dir / "enh").string(), "--report",
                 (dir / "report_pairs.json").string()})
                .code == 0);
    REQUIRE(run({"evaluate", "--gt", (dir / "gt").string(), "--est", (dir / "enh2").string(), "--report",
                 (dir / "report.json").string()})
                .code == 0);
    const auto report = read_json(dir / "report.json");
    for (const char* key : {"psnr_mean", "psnr_inf_count", "fid", "iou_mean", "per_image"}) CHECK(report.contains(key));
    CHECK(report["per_image"].size() == 5);
    CHECK(fs::exists(dir / "report.json.manifest.json"));

    REQUIRE(run({"evaluate", "--gt", (dir / "gt").string(), "--est", (dir / "gt").string(), "--report",
                 (dir / "self.json").string()})
                .code == 0);
    const auto self = read_json(dir / "self.json");
    CHECK(self["psnr_inf_count"] == 5);
    CHECK(self["per_image"][0]["psnr"] == "inf");
    CHECK(self["fid"] == 0.0);

    REQUIRE(run({"sweep-nfe", "--checkpoint", ckpt, "--gt", (dir / "gt").string(), "--deg", (dir / "deg").string(),
                 "--nfe-list", "1,2", "--report", (dir / "sweep.json").string()})
                .code == 0);
    const auto sweep = read_json(dir / "sweep.json");
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[1]["nfe"] == 2);
    CHECK(sweep[0].contains("psnr_mean"));
    CHECK(sweep[0].contains("fid"));

    // Unpaired directories are a usage error.
    fs::remove(dir / "gt" / "img0_gt.png");
    CHECK(run({"evaluate", "--gt", (dir / "gt").string(), "--est", (dir / "enh2").string(), "--report",
               (dir / "r2.json").string()})
              .code == 1);
  }

  TEST_CASE("image keys and listing") {
    CHECK(cli::image_key("a/b/eye_01_deg.png") == "eye_01");
    CHECK(cli::image_key("eye_gt.jpg") == "eye");
    CHECK(cli::image_key("x_enh.png") == "x");
    CHECK(cli::image_key("_gt.png") == "_gt");
    CHECK(cli::image_key("plain.png") == "plain");
    const std::vector<fs::path> files{"a_deg.png", "a_gt.png", "b_deg.png"};
    CHECK(cli::select_role(files, "_deg") == std::vector<fs::path>{"a_deg.png", "b_deg.png"});
    CHECK(cli::select_role(files, "_enh") == files);
  }
}
