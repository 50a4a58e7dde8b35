#include <cmath>
#include <functional>

#include "fd3/degradation_io.hpp"
#include "fd3/error.hpp"

namespace fd3 {
namespace {

std::vector<std::pair<const char*, Interval ParamRanges::*>> real_fields() {
  return {{"alpha", &ParamRanges::alpha},
          {"beta", &ParamRanges::beta},
          {"gamma", &ParamRanges::gamma},
          {"bias_amplitude", &ParamRanges::bias_amplitude},
          {"bias_radius", &ParamRanges::bias_radius},
          {"bias_center_row", &ParamRanges::bias_center_row},
          {"bias_center_col", &ParamRanges::bias_center_col},
          {"bias_blur_sigma", &ParamRanges::bias_blur_sigma},
          {"blur_sigma", &ParamRanges::blur_sigma},
          {"noise_std", &ParamRanges::noise_std},
          {"spot_center_row", &ParamRanges::spot_center_row},
          {"spot_center_col", &ParamRanges::spot_center_col},
          {"spot_radius", &ParamRanges::spot_radius},
          {"spot_amplitude", &ParamRanges::spot_amplitude},
          {"spot_blur_sigma", &ParamRanges::spot_blur_sigma}};
}

}  // namespace

ParamRanges ranges_from_config(const Config& cfg) {
  ParamRanges r;
  const auto fields = real_fields();
  for (const auto& [key, value] : cfg.entries()) {
    const auto bounds = parse_number_list(value, "ranges." + key);
    if (bounds.size() != 2) throw ArgumentError("ranges." + key + ": expected 'lo, hi'");
    if (key == "spot_count") {
      if (bounds[0] != std::floor(bounds[0]) || bounds[1] != std::floor(bounds[1])) {
        throw ArgumentError("ranges.spot_count: bounds must be integers");
      }
      r.spot_count = {static_cast<int>(bounds[0]), static_cast<int>(bounds[1])};
      continue;
    }
    bool known = false;
    for (const auto& [name, member] : fields) {
      if (key == name) {
        r.*member = {bounds[0], bounds[1]};
        known = true;
      }
    }
    if (!known) throw ArgumentError("ranges: unknown field '" + key + "'");
  }
  validate(r);
  return r;
}

void ranges_to_config(const ParamRanges& ranges, Config& out, const std::string& prefix) {
  for (const auto& [name, member] : real_fields()) {
    const Interval& iv = ranges.*member;
    out.set(prefix + name, format_number(iv.lo) + "," + format_number(iv.hi));
  }
  out.set(prefix + "spot_count", std::to_string(ranges.spot_count.lo) + "," + std::to_string(ranges.spot_count.hi));
}

nlohmann::json to_json(const DegradationParams& p) {
  const TransmissionParams& t = p.transmission;
  nlohmann::json spots = nlohmann::json::array();
  for (const Spot& s : p.artifacts.spots) {
    spots.push_back({{"center_row", s.center_row},
                     {"center_col", s.center_col},
                     {"radius", s.radius},
                     {"amplitude", s.amplitude},
                     {"blur_sigma", s.blur_sigma}});
  }
  return {{"transmission",
           {{"alpha", t.alpha},
            {"beta", t.beta},
            {"gamma", t.gamma},
            {"bias_center_row", t.bias_center_row},
            {"bias_center_col", t.bias_center_col},
            {"bias_radius", t.bias_radius},
            {"bias_amplitude", t.bias_amplitude},
            {"bias_blur_sigma", t.bias_blur_sigma}}},
          {"blur", {{"blur_sigma", p.blur.blur_sigma}, {"noise_std", p.blur.noise_std}}},
          {"artifacts", {{"count", p.artifacts.spots.size()}, {"spots", spots}}},
          {"seed", p.seed}};
}

std::optional<ClaheParams> clahe_from_config(const Config& cfg) {
  if (!cfg.get_bool("clahe.enabled", true)) return std::nullopt;
  ClaheParams p;
  p.clip_limit = cfg.get_double("clahe.clip_limit", p.clip_limit);
  const auto grid = cfg.get_list("clahe.tile_grid", {8.0, 8.0});
  if (grid.size() != 2 || grid[0] != std::floor(grid[0]) || grid[1] != std::floor(grid[1])) {
    throw ArgumentError("clahe.tile_grid: expected two integers");
  }
  p.tile_rows = static_cast<int>(grid[0]);
  p.tile_cols = static_cast<int>(grid[1]);
  if (!(p.clip_limit > 0.0)) throw ArgumentError("clahe.clip_limit must be > 0");
  if (p.tile_rows < 1 || p.tile_cols < 1) throw ArgumentError("clahe.tile_grid entries must be >= 1");
  return p;
}

void clahe_to_config(const std::optional<ClaheParams>& clahe, Config& out) {
  out.set("clahe.enabled", clahe ? "true" : "false");
  const ClaheParams p = clahe.value_or(ClaheParams{});
  out.set("clahe.clip_limit", format_number(p.clip_limit));
  out.set("clahe.tile_grid", std::to_string(p.tile_rows) + "," + std::to_string(p.tile_cols));
}

}  // namespace fd3
