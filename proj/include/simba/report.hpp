#pragma once

#include <filesystem>
#include <span>

#include <json.hpp>

#include "simba/pipeline.hpp"

namespace simba {

// NaN metrics (e.g. head accuracy of a split without head graphs) become null.
nlohmann::json to_json(const MetricsReport& report);

// {"schema_version": 1, "runs": [...], "summary": {metric: {"mean", "std"}}}
// The summary uses the population standard deviation over runs and skips
// null entries.
nlohmann::json make_report(std::span<const MetricsReport> runs);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace simba
