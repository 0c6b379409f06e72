#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "agn/network.hpp"

#include <json.hpp>

namespace agn {

// Binary snapshot layout (little-endian, documented in docs/FORMATS.md):
//   "AGNW" | u32 version | u64 m | u64 d | f64 leaky_slope | u8 activation |
//   u8 flags (bit0 biases, bit1 outer_trainable) | u16 reserved |
//   u32 extra_layers | f64[m*d] hidden | f64[m] outer | f64[m] biases? |
//   f64[m*m] x extra_layers
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::vector<std::uint8_t> to_binary(const NetworkParams& params);
NetworkParams from_binary(std::span<const std::uint8_t> bytes);

nlohmann::json to_json(const NetworkParams& params);
NetworkParams network_from_json(const nlohmann::json& j);

// Format chosen by extension: ".json" for JSON, anything else binary.
void save_network(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_network(const std::filesystem::path& path);

}  // namespace agn
