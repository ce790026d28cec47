#pragma once

#include "ghicast/image.hpp"
#include "ghicast/time.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ghicast::synth {

/// Clipped AR(1) occlusion: c_t = clamp(mean + phi (c_{t-1} - mean) +
/// sd sqrt(1 - phi^2) e_t, 0, 1), one step per frame.
struct CloudProcess {
    double mean = 0.4;
    double sd = 0.3; // stationary standard deviation before clipping
    double phi = 0.9; // lag-one correlation per cadence step
};

struct SynthConfig {
    int days = 3;
    Seconds cadence = std::chrono::minutes{10};
    int image_side = 64;
    CloudProcess cloud;
    double noise_sd = 20.0; // W/m^2
    std::uint64_t seed = 0;
    int start_year = 2016;
    unsigned start_month = 6;
    unsigned start_day = 1;
    int utc_offset_minutes = -420; // days start at local midnight
    double peak_ghi = 1000.0;
};

/// One generated instant.
struct Sample {
    Timestamp timestamp;
    double clear_sky = 0.0;
    double cloud = 0.0;
    double ghi_true = 0.0; // clear_sky * (1 - 0.8 cloud)
    double ghi = 0.0;      // ghi_true + noise, clamped at 0
};

struct Summary {
    std::vector<Sample> samples;
    std::filesystem::path images_dir;
    std::filesystem::path ghi_csv;
    std::filesystem::path oracle_csv;
};

/// Half-sine between local 06:00 and 18:00 peaking at `peak` at local noon,
/// zero otherwise.
double clear_sky(Timestamp t, int utc_offset_minutes, double peak = 1000.0);

/// Draws the time series without touching the filesystem.
std::vector<Sample> simulate(const SynthConfig& config);

/// Sky image for one sample: a dark frame holding a sky dome whose diffuse
/// glow follows the clear-sky level, and a sun disk that crosses the dome
/// over the day. The disk's brightness is 1 - cloud and its area follows the
/// clear-sky level, so mean image brightness tracks GHI.
RgbImage render(const Sample& sample, const SynthConfig& config);

/// Writes `images/<YYYYMMDDHHMMSS>.png`, `ghi.csv` (`timestamp_utc,ghi_wm2`)
/// and `oracle.csv` (`timestamp_utc,ghi_true_wm2`) under `out_dir`.
Summary generate(const SynthConfig& config, const std::filesystem::path& out_dir);

} // namespace ghicast::synth
