#pragma once

#include "ghicast/pipeline.hpp"

#include <filesystem>

namespace ghicast {

inline constexpr int bundle_format_version = 1;

/// Writes `manifest.json` plus one GHIM matrix file per stored array into
/// `dir` (created if missing). Fit wall time goes to `training_log.json` so
/// the manifest depends only on data, config and seed.
void save_bundle(const pipeline::ModelBundle& bundle, const std::filesystem::path& dir);

/// Loads a bundle written by save_bundle. Every payload is checked against
/// the CRC-32 recorded in the manifest. When `expected` is given its config
/// hash must equal the stored one (strict mode).
pipeline::ModelBundle load_bundle(const std::filesystem::path& dir, const PipelineConfig* expected = nullptr);

} // namespace ghicast
