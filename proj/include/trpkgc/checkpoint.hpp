#pragma once

#include "trpkgc/kg_data.hpp"
#include "trpkgc/model.hpp"
#include "trpkgc/training.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace trpkgc {

// Layout: 8-byte magic, u32 version, u64 header length, JSON header, then
// little-endian float64 payloads in header order (parameters, then Adam moments).
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;
    static constexpr std::string_view kMagic = "TRPKGCKP";

    nlohmann::json config;  // effective run config
    ModelConfig model;
    Vocab vocab;
    ModelParams params;
    std::optional<AdamState> adam;
    double best_dev_mrr = 0.0;
    int epoch = 0;
};

nlohmann::json to_json(const ModelConfig& m);
ModelConfig model_config_from_json(const nlohmann::json& j);

std::uint64_t vocab_hash(const SymbolTable& table);

std::string serialize(const Checkpoint& ckpt);
Checkpoint deserialize(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace trpkgc
