#pragma once

#include "ghicast/image.hpp"
#include "ghicast/ingest.hpp"
#include "ghicast/time.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace ghicast::testing {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t")
    {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path()
            / ("ghicast_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline RgbImage solid_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b)
{
    RgbImage image{width, height, std::vector<std::uint8_t>(std::size_t(width) * height * 3)};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            image.at(y, x, 0) = r;
            image.at(y, x, 1) = g;
            image.at(y, x, 2) = b;
        }
    }
    return image;
}

inline Timestamp at(int hour, int minute, int day = 1)
{
    return make_timestamp(2016, 6, unsigned(day), hour, minute, 0);
}

/// Writes one small PNG per timestamp (gray level varying with the index)
/// and returns aligned samples with GHI = 100 + index.
inline std::vector<ingest::AlignedSample> image_series(const fs::path& dir, const std::vector<Timestamp>& times,
    int side = 8)
{
    std::vector<ingest::AlignedSample> samples;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto level = static_cast<std::uint8_t>((i * 37) % 256);
        const fs::path path = dir / (format_compact(times[i]) + ".png");
        write_png(solid_image(side, side, level, std::uint8_t(255 - level), std::uint8_t(level / 2)), path);
        samples.push_back({times[i], {times[i], path, fs::file_size(path)}, 100.0 + double(i)});
    }
    return samples;
}

inline std::vector<Timestamp> regular_times(std::size_t n, Timestamp start = at(12, 0),
    Seconds step = std::chrono::minutes{10})
{
    std::vector<Timestamp> times;
    for (std::size_t i = 0; i < n; ++i) {
        times.push_back(start + static_cast<long>(i) * step);
    }
    return times;
}

} // namespace ghicast::testing
