#pragma once

#include <filesystem>

#include "edgemig/tensor.hpp"

namespace edgemig::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Writes `<stem>.bin` (magic, version, raw little-endian doubles) and
/// `<stem>.json` (name -> shape, offset manifest).
void save_checkpoint(const std::filesystem::path& stem, const ParamStore& params);
/// Loads into a store of identical layout; throws BadCheckpoint otherwise.
void load_checkpoint(const std::filesystem::path& stem, ParamStore& params);

}  // namespace edgemig::nn
