#pragma once

#include "ghicast/ingest.hpp"
#include "ghicast/lsa.hpp"
#include "ghicast/regress.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ghicast {

/// Everything that determines a trained bundle. Defaults: 32x32 frames,
/// 12-frame (120 min) look-back, k = 20, KNN with K = 2, horizons
/// +1h..+4h at a 10-minute cadence.
struct PipelineConfig {
    int image_side = 32;
    int lookback = 12;
    Index k = 20;
    Seconds cadence = std::chrono::minutes{10};
    std::vector<int> horizons = {6, 12, 18, 24}; // in cadence steps
    regress::RegressorConfig regressor;
    ingest::SplitPolicy split{ingest::SplitKind::chronological_prefix, 0.7, ingest::SplitGranularity::day, {}, 0, 0};
    std::uint64_t seed = 0;
    int utc_offset_minutes = -420; // US Mountain standard time
    std::string filename_pattern = ingest::default_filename_pattern;
    Seconds align_tolerance = std::chrono::minutes{5};
    ingest::NightFilter night;
    lsa::Options lsa;
    int threads = 1; // affects speed only, excluded from the config hash

    int lookback_minutes() const;
    ingest::IngestOptions ingest_options() const;
    lsa::Options lsa_options() const;
    regress::RegressorConfig regressor_config(std::uint64_t stream) const;
};

/// Applies one `key=value` setting. Throws ConfigError on unknown keys or
/// unparsable values. `lookback_min` is accepted as an alias that converts
/// minutes to frames using the current cadence.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// Flat INI-style file: `key = value` lines, `#`/`;` comments, section
/// headers ignored.
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Splits `key=value`; throws ConfigError when '=' is missing.
std::pair<std::string, std::string> split_assignment(const std::string& text);

/// Checks cross-field invariants (horizons strictly increasing, k within the
/// look-back feature width, ...). Throws ConfigError.
void validate(const PipelineConfig& config);

/// Canonical key -> value rendering of every result-affecting field.
std::map<std::string, std::string> config_entries(const PipelineConfig& config);

PipelineConfig config_from_entries(const std::map<std::string, std::string>& entries);

/// CRC-32 (hex) of the canonical entries.
std::string config_hash(const PipelineConfig& config);

/// "+1h" for whole hours, "+30min" otherwise.
std::string horizon_label(int steps, Seconds cadence);

std::vector<int> parse_int_list(const std::string& text);

} // namespace ghicast
