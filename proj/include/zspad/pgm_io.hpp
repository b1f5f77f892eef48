#pragma once

#include <filesystem>

#include "zspad/bscan.hpp"

namespace zspad {

// Binary PGM (P5), 8-bit or 16-bit (big-endian payload). Intensities are
// scaled to [0,1] by the header maxval on load.
BScan load_bscan(const std::filesystem::path& path);

// bit_depth is 8 or 16. Quantization keeps the round-trip L-inf error
// within 1/(2^bit_depth - 1).
void save_bscan(const BScan& b, const std::filesystem::path& path, int bit_depth);

}  // namespace zspad
