#include "fd3/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "fd3/error.hpp"
#include "fd3/random.hpp"

namespace fd3 {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void str(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<char>& buf, std::size_t end, std::string path)
      : buf_(buf), end_(end), path_(std::move(path)) {}

  template <typename T>
  T get(const char* what) {
    T v;
    need(sizeof(T), what);
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void bytes(void* out, std::size_t n, const std::string& what) {
    need(n, what);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::string str(const char* what) {
    const auto n = get<std::uint32_t>(what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n, const std::string& what) {
    if (end_ - pos_ < n) throw DecodeError(path_ + ": truncated while reading " + what);
  }
  const std::vector<char>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
  std::string path_;
};

std::uint64_t checksum(const char* data, std::size_t n) {
  return fnv1a(std::string_view(data, n));
}

}  // namespace

void save_checkpoint(const UNet& model, const std::map<std::string, std::string>& metadata,
                     const std::filesystem::path& path) {
  std::string config;
  for (const auto& [k, v] : model.config().to_map()) config += "arch." + k + "=" + v + "\n";
  for (const auto& [k, v] : metadata) {
    if (k.find('\n') != std::string::npos || v.find('\n') != std::string::npos || k.find('=') != std::string::npos) {
      throw ArgumentError("checkpoint metadata may not contain newlines or '=' in keys");
    }
    config += "meta." + k + "=" + v + "\n";
  }

  Writer w;
  w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.put(kCheckpointVersion);
  w.str(config);
  w.put(static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& p : model.parameters()) {
    const nn::Tensor& t = p.var->value;
    w.str(p.name);
    w.put(static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) w.put(static_cast<std::int32_t>(d));
    w.bytes(t.data(), t.numel() * sizeof(float));
  }
  w.put(checksum(w.buffer().data(), w.buffer().size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open checkpoint");
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < sizeof(kCheckpointMagic) + 4 + 8 || std::memcmp(buf.data(), kCheckpointMagic, 4) != 0) {
    throw DecodeError(name + ": not an FD3 checkpoint (bad magic)");
  }

  Reader header(buf, buf.size(), name);
  char magic[4];
  header.bytes(magic, 4, "magic");
  const auto version = header.get<std::uint32_t>("format_version");
  if (version != kCheckpointVersion) {
    throw VersionError(name + ": checkpoint format_version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }

  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored = 0;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  if (stored != checksum(buf.data(), body)) throw DecodeError(name + ": checksum mismatch (corrupt blob)");

  Reader r(buf, body, name);
  r.bytes(magic, 4, "magic");
  r.get<std::uint32_t>("format_version");
  const std::string config = r.str("config block");

  std::map<std::string, std::string> arch;
  Checkpoint ck;
  std::istringstream lines(config);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DecodeError(name + ": malformed config line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key.rfind("arch.", 0) == 0) {
      arch[key.substr(5)] = value;
    } else if (key.rfind("meta.", 0) == 0) {
      ck.metadata[key.substr(5)] = value;
    }
  }
  UNetConfig cfg;
  try {
    cfg = UNetConfig::from_map(arch);
  } catch (const ArgumentError& e) {
    throw DecodeError(name + ": invalid architecture config: " + e.what());
  }
  ck.model = std::make_unique<UNet>(cfg, 0);

  const auto count = r.get<std::uint32_t>("tensor count");
  const auto& params = ck.model->parameters();
  if (count != params.size()) {
    throw DecodeError(name + ": blob holds " + std::to_string(count) + " tensors but the architecture needs " +
                      std::to_string(params.size()));
  }
  for (const auto& p : params) {
    const std::string tname = r.str("tensor name");
    if (tname != p.name) throw DecodeError(name + ": expected tensor '" + p.name + "', found '" + tname + "'");
    const auto rank = r.get<std::uint32_t>("tensor rank");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = r.get<std::int32_t>("tensor dims");
    nn::Tensor& dst = p.var->value;
    if (shape != dst.shape()) {
      std::string got = "[";
      for (std::size_t i = 0; i < shape.size(); ++i) got += (i ? "," : "") + std::to_string(shape[i]);
      throw DecodeError(name + ": tensor '" + tname + "' has shape " + got + "]" +
                        " but the architecture expects " + dst.shape_string());
    }
    r.bytes(dst.data(), dst.numel() * sizeof(float), "tensor '" + tname + "'");
  }
  if (!r.done()) throw DecodeError(name + ": trailing bytes after weight blob");
  return ck;
}

}  // namespace fd3
