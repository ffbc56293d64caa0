#pragma once

#include <cstdint>

namespace ecgprune {

constexpr const char* kArtifactVersion = "1.0.0";

// Bumped whenever the model file layout changes.
constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace ecgprune
