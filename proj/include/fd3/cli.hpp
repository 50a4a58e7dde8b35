#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fd3/config.hpp"
#include "fd3/image.hpp"

namespace fd3::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kFailure = 2 };

// Runs one subcommand: degrade, train, enhance, evaluate or sweep-nfe.
// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

// Hash git assigns to a blob: SHA-1 of "blob <size>\0" followed by the bytes.
std::string git_blob_sha1(const std::filesystem::path& file);

// Command, argv, resolved config, seed, input hashes and timestamps. The
// manifest is written before any other output and completed at the end.
class RunManifest {
 public:
  RunManifest(std::string command, const std::vector<std::string>& argv, const Config& resolved,
              std::uint64_t seed);
  void add_inputs(const std::vector<std::filesystem::path>& files, const std::filesystem::path& root);
  void add_input(const std::filesystem::path& file);
  // Writes the manifest with a start timestamp.
  void begin(const std::filesystem::path& path);
  // Rewrites it with the finish timestamp and output list.
  void finish(const std::vector<std::string>& outputs);

  const nlohmann::json& json() const { return doc_; }

 private:
  nlohmann::json doc_;
  std::filesystem::path path_;
};

// Sorted .png/.jpg/.jpeg files directly inside dir. IoError if dir is missing.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// File stem with a trailing _gt, _deg or _enh removed.
std::string image_key(const std::filesystem::path& file);

struct NamedImage {
  std::string key;
  std::filesystem::path path;
  Image image;
};

// When some files carry `role` (e.g. "_deg") as their stem suffix, keeps
// only those; otherwise returns files unchanged. Lets a degrade output
// directory serve directly as --in, --gt or --deg.
std::vector<std::filesystem::path> select_role(std::vector<std::filesystem::path> files, const std::string& role);

// Loads images keyed by image_key; duplicate keys raise ArgumentError.
// size > 0 applies center_crop_resize.
std::vector<NamedImage> load_directory(const std::filesystem::path& dir, int size = 0, const std::string& role = "");
std::vector<NamedImage> load_files(const std::vector<std::filesystem::path>& files, int size = 0);

}  // namespace fd3::cli
