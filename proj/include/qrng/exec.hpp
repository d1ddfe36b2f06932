#pragma once

#include <cstddef>
#include <cstdint>

namespace qrng {

/// Fixed partition granularity for parallel kernels. Partials are always
/// formed per chunk of this many elements and combined in chunk order, so the
/// result does not depend on the number of OpenMP threads.
inline constexpr std::size_t kChunk = 1 << 16;

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kChunk) {
    return (n + chunk - 1) / chunk;
}

}  // namespace qrng
