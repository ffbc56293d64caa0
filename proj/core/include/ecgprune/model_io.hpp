#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgprune/model.hpp"

namespace ecgprune {

// Single-file binary model format, explicit little-endian layout:
// magic "ECGPRUNE", u32 format version, u64 seed, layer table, per-layer
// parameter blobs, masks as packed bit-arrays, trainability flags, and the
// training history. Round-trips are bit-exact.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace ecgprune
