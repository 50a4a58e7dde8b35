#include "fd3/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fd3/error.hpp"

namespace fd3 {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::logic_error&) {
  }
  throw ArgumentError(what + ": expected a number, got '" + text + "'");
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + json_scalar(v[i]);
    return s;
  }
  return v.dump();
}

}  // namespace

std::vector<double> parse_number_list(std::string_view text, const std::string& what) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), what));
  if (out.empty()) throw ArgumentError(what + ": empty list");
  return out;
}

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ArgumentError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.set(key, trim(body.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError(path.string() + ": " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw DecodeError(path.string() + ": JSON config must hold a \"config\" object");
    }
    Config cfg;
    for (const auto& [k, v] : doc["config"].items()) cfg.set(k, json_scalar(v));
    return cfg;
  }
  return parse(text, path.string());
}

void Config::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

std::optional<std::string> Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  return v ? to_double(*v, key) : fallback;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  long long out = 0;
  const std::string s = trim(*v);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ArgumentError(key + ": expected an integer, got '" + *v + "'");
  }
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  std::string s = trim(*v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ArgumentError(key + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> fallback) const {
  const auto v = find(key);
  return v ? parse_number_list(*v, key) : fallback;
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

Config Config::subtree(const std::string& prefix) const {
  Config out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : entries_) {
    if (k.rfind(p, 0) == 0) out.entries_[k.substr(p.size())] = v;
  }
  return out;
}

std::string Config::to_text() const {
  std::string s;
  for (const auto& [k, v] : entries_) s += k + " = " + v + "\n";
  return s;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace fd3
