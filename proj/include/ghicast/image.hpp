#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ghicast {

/// 8-bit interleaved RGB raster, row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // width * height * 3, R,G,B

    std::uint8_t& at(int row, int col, int channel) { return pixels[(std::size_t(row) * width + col) * 3 + channel]; }
    std::uint8_t at(int row, int col, int channel) const
    {
        return pixels[(std::size_t(row) * width + col) * 3 + channel];
    }
};

/// Decodes a JPEG/PNG (grayscale and alpha inputs are converted to RGB).
/// Throws DecodeError carrying the path.
RgbImage decode_image(const std::filesystem::path& path);

/// Writes a PNG. Throws IoError.
void write_png(const RgbImage& image, const std::filesystem::path& path);

} // namespace ghicast
