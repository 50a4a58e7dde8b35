#include <algorithm>
#include <set>

#include "fd3/cli.hpp"
#include "fd3/error.hpp"

namespace fd3::cli {

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string image_key(const std::filesystem::path& file) {
  std::string stem = file.stem().string();
  for (const char* suffix : {"_gt", "_deg", "_enh"}) {
    const std::string s(suffix);
    if (stem.size() > s.size() && stem.compare(stem.size() - s.size(), s.size(), s) == 0) {
      return stem.substr(0, stem.size() - s.size());
    }
  }
  return stem;
}

std::vector<std::filesystem::path> select_role(std::vector<std::filesystem::path> files, const std::string& role) {
  if (role.empty()) return files;
  auto has_role = [&role](const std::filesystem::path& f) {
    const std::string stem = f.stem().string();
    return stem.size() > role.size() && stem.compare(stem.size() - role.size(), role.size(), role) == 0;
  };
  if (std::none_of(files.begin(), files.end(), has_role)) return files;
  std::erase_if(files, [&](const auto& f) { return !has_role(f); });
  return files;
}

std::vector<NamedImage> load_files(const std::vector<std::filesystem::path>& files, int size) {
  std::vector<NamedImage> out;
  std::set<std::string> seen;
  for (const auto& f : files) {
    NamedImage item{image_key(f), f, load_image(f)};
    if (!seen.insert(item.key).second) {
      throw ArgumentError("duplicate image key '" + item.key + "' in " + f.parent_path().string());
    }
    if (size > 0) item.image = center_crop_resize(item.image, size);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<NamedImage> load_directory(const std::filesystem::path& dir, int size, const std::string& role) {
  return load_files(select_role(list_images(dir), role), size);
}

}  // namespace fd3::cli
