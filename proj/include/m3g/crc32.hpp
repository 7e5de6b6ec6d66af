#pragma once

#include <cstddef>
#include <cstdint>

namespace m3g {

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320), the same checksum
// zlib computes. Used to validate embedding blobs against their manifest.
uint32_t crc32(const void* data, std::size_t n, uint32_t crc = 0);

} // namespace m3g
