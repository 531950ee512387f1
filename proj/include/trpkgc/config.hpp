#pragma once

#include "trpkgc/evaluation.hpp"
#include "trpkgc/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace trpkgc {

struct RunConfig {
    std::filesystem::path dataset_dir;
    std::filesystem::path output_dir = "runs/default";
    TrainConfig train;
    FilterScope filter_scope = FilterScope::Standard;
};

// Flat keys mirroring the command-line flag names, e.g. "max-epochs", "no-encoder".
nlohmann::json to_json(const RunConfig& config);

// Overlays `j` onto `config`. Unknown keys and type errors are appended to `errors`.
void apply_json(RunConfig& config, const nlohmann::json& j, std::vector<std::string>& errors);

// Structural problems (bad enums, non-positive sizes, missing paths). Empty when valid.
std::vector<std::string> validate(const RunConfig& config, bool require_dataset);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace trpkgc
