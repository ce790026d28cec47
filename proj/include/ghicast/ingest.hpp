#pragma once

#include "ghicast/time.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ghicast::ingest {

struct GhiReading {
    Timestamp timestamp;
    double ghi = 0.0; // W/m^2, >= 0
};

struct GhiSeries {
    std::vector<GhiReading> readings;
    std::size_t clamped = 0;    // negative values raised to 0
    std::size_t duplicates = 0; // same-minute rows collapsed (last wins)
};

struct ImageRecord {
    Timestamp timestamp;
    std::filesystem::path path;
    std::uintmax_t byte_size = 0;
};

struct ImageScan {
    std::vector<ImageRecord> records;
    std::size_t skipped = 0; // files whose name does not match the pattern
};

struct AlignedSample {
    Timestamp timestamp; // the image's timestamp
    ImageRecord image;
    double ghi = 0.0;
};

struct Alignment {
    std::vector<AlignedSample> samples;
    std::size_t dropped_images = 0;
};

enum class SplitKind { chronological_prefix, random_by_fraction, random_by_year };

/// Unit shuffled by random_by_fraction. Shuffling whole UTC days keeps
/// consecutive frames together so look-back windows survive the split.
enum class SplitGranularity { sample, day };

struct SplitPolicy {
    SplitKind kind = SplitKind::chronological_prefix;
    double fraction = 0.7; // train fraction for prefix / random modes
    SplitGranularity granularity = SplitGranularity::sample;
    std::vector<int> test_years; // random_by_year: explicit test years ...
    int random_test_years = 0;   // ... or this many years drawn by seed
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<AlignedSample> train;
    std::vector<AlignedSample> test;
};

struct NightFilter {
    bool enabled = true;
    double ghi_threshold = 5.0; // W/m^2
    int first_day_hour = 4;     // local hours [first, last] count as day
    int last_day_hour = 22;
};

/// Default file stem template: YYYYMMDDHHMMSS.
inline constexpr const char* default_filename_pattern = "YYYYMMDDHHMMSS";

/// Reads a `timestamp_utc,ghi_wm2` CSV. Readings come back sorted with
/// same-minute duplicates collapsed (last row wins) and negatives clamped.
GhiSeries load_ghi_series(const std::filesystem::path& path);

/// Recursively lists JPEG/PNG files whose stem matches `pattern`.
///
/// Pattern tokens: `YYYY` year, `MM` month (first occurrence) or minute
/// (after `HH`), `DD` day, `HH` hour, `SS` second, `*` any run of
/// characters. Everything else is literal.
ImageScan scan_image_directory(const std::filesystem::path& root, const std::string& pattern = default_filename_pattern);

/// Pairs each image with the nearest unused reading within `tolerance`,
/// processing candidate pairs closest-first (ties go to the earlier reading).
/// Images sharing a timestamp with an earlier image are dropped.
Alignment align(const std::vector<ImageRecord>& images, const std::vector<GhiReading>& readings,
    Seconds tolerance = std::chrono::minutes{5});

/// Removes samples that are both dark (GHI below threshold) and outside the
/// local daytime hour range. Returns the number removed.
std::size_t filter_night(std::vector<AlignedSample>& samples, const NightFilter& filter, int utc_offset_minutes);

Split split(const std::vector<AlignedSample>& samples, const SplitPolicy& policy);

/// Aggregate of the full ingest chain used by the CLI and pipeline.
struct IngestOptions {
    std::string filename_pattern = default_filename_pattern;
    Seconds tolerance = std::chrono::minutes{5};
    Seconds cadence = std::chrono::minutes{10};
    NightFilter night;
    int utc_offset_minutes = -420;
};

struct Dataset {
    std::vector<AlignedSample> samples;
    std::size_t images_found = 0;
    std::size_t images_skipped = 0;
    std::size_t readings = 0;
    std::size_t clamped = 0;
    std::size_t duplicates = 0;
    std::size_t aligned = 0;
    std::size_t dropped = 0;
    std::size_t night_removed = 0;
    std::size_t gaps = 0; // consecutive samples further apart than 1.5 cadence
};

Dataset load_dataset(const std::filesystem::path& images_dir, const std::filesystem::path& ghi_csv,
    const IngestOptions& options);

std::size_t count_gaps(const std::vector<AlignedSample>& samples, Seconds cadence);

} // namespace ghicast::ingest
