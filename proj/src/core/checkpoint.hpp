#pragma once

#include <filesystem>

#include "core/trainer.hpp"

namespace fnetae {

inline constexpr char kCheckpointMagic[4] = {'F', 'N', 'A', 'E'};
inline constexpr uint32_t kCheckpointVersion = 1;

// Binary layout: magic "FNAE", u32 version, length-prefixed UTF-8 JSON
// (config, vocabulary, training metadata), u32 parameter-tensor count and
// tensors, u32 optimizer-tensor count and tensors, trailing CRC32 over all
// preceding bytes. Tensors are name (u16 length + bytes), rank (u8), dims
// (u32 each), then 32-bit little-endian values. Roundtrips are bit-exact.
void checkpoint_save(const std::filesystem::path& path, const ModelState& state);
ModelState checkpoint_load(const std::filesystem::path& path);

}  // namespace fnetae
