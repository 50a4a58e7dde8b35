#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "fd3/checkpoint.hpp"
#include "fd3/cli.hpp"
#include "fd3/error.hpp"

namespace fd3::cli {
namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::string git_blob_sha1(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "blob " + std::to_string(body.size()) + '\0';

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, body.data(), body.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw IoError("sha1 failed for " + file.string());
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

RunManifest::RunManifest(std::string command, const std::vector<std::string>& argv, const Config& resolved,
                         std::uint64_t seed) {
  doc_["tool"] = "fd3";
  doc_["tool_version"] = kToolVersion;
  doc_["checkpoint_format"] = kCheckpointVersion;
  doc_["command"] = std::move(command);
  doc_["argv"] = argv;
  doc_["config"] = nlohmann::json::object();
  for (const auto& [k, v] : resolved.entries()) doc_["config"][k] = v;
  doc_["seed"] = seed;
  doc_["inputs"] = nlohmann::json::object();
}

void RunManifest::add_inputs(const std::vector<std::filesystem::path>& files, const std::filesystem::path& root) {
  for (const auto& f : files) {
    doc_["inputs"][(root.filename() / f.lexically_relative(root)).generic_string()] = git_blob_sha1(f);
  }
}

void RunManifest::add_input(const std::filesystem::path& file) {
  doc_["inputs"][file.filename().generic_string()] = git_blob_sha1(file);
}

void RunManifest::begin(const std::filesystem::path& path) {
  path_ = path;
  doc_["started"] = utc_now();
  std::ofstream out(path_);
  if (!out) throw IoError("cannot write " + path_.string());
  out << doc_.dump(2) << '\n';
}

void RunManifest::finish(const std::vector<std::string>& outputs) {
  doc_["finished"] = utc_now();
  doc_["outputs"] = outputs;
  std::ofstream out(path_);
  if (!out) throw IoError("cannot write " + path_.string());
  out << doc_.dump(2) << '\n';
}

}  // namespace fd3::cli
