#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "simba/pipeline.hpp"

namespace simba {

// Sets one field by its flat key, e.g. "encoder.backbone", "g2g.k",
// "rew.lambda", "optimizer.lr", "epochs". Throws ArgumentError for unknown
// keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Reads "key = value" lines; '#' starts a comment, blank lines are skipped.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// All settable fields with their current values, in a stable order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

}  // namespace simba
