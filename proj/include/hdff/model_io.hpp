#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hdff/model.hpp"

namespace hdff {

inline constexpr std::uint16_t kModelPackVersion = 1;

/// Little-endian ModelPack bytes: "HDFF", u16 version, then the model body
/// (layout in docs/formats.md). Projection matrices are not stored.
std::string serialize_model(const FittedModel& model);

/// Checks magic and version before reading anything else; rejects truncated
/// input and trailing bytes with FormatError.
FittedModel deserialize_model(const std::string& bytes, const std::string& origin = "model");

void save_model(const FittedModel& model, const std::filesystem::path& path);

FittedModel load_model(const std::filesystem::path& path);

}  // namespace hdff
