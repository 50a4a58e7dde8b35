#pragma once

#include <optional>

#include <json.hpp>

#include "fd3/clahe.hpp"
#include "fd3/config.hpp"
#include "fd3/degradation.hpp"

namespace fd3 {

// Reads unprefixed field names (`alpha = 0.5, 1.0`, `spot_count = 0, 5`);
// missing fields keep their defaults, unknown keys raise ArgumentError.
ParamRanges ranges_from_config(const Config& cfg);
// Writes every field as `<prefix><field> = lo,hi`.
void ranges_to_config(const ParamRanges& ranges, Config& out, const std::string& prefix = "ranges.");

nlohmann::json to_json(const DegradationParams& p);

// `clahe.enabled` (default true), `clahe.clip_limit` (2.0),
// `clahe.tile_grid` ([8, 8]). Returns nullopt when disabled.
std::optional<ClaheParams> clahe_from_config(const Config& cfg);
void clahe_to_config(const std::optional<ClaheParams>& clahe, Config& out);

}  // namespace fd3
