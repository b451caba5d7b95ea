#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace sad::io {

/// Decoded PNG, interleaved row-major samples widened to 16 bits.
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 (gray) or 3 (rgb)
    int bit_depth = 0; // 8 or 16
    std::vector<std::uint16_t> samples;
};

void write_png(const std::filesystem::path& path, const RawImage& image);
RawImage read_png(const std::filesystem::path& path);

} // namespace sad::io
