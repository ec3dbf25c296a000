#pragma once

#include <cstddef>
#include <cstdint>

namespace fnetae {

// CRC-32 (IEEE 802.3 polynomial, reflected). Pass the previous value to
// checksum a stream incrementally; start from 0.
uint32_t crc32(const void* data, size_t len, uint32_t crc = 0);

}  // namespace fnetae
