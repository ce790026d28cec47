#pragma once

#include "ghicast/forest.hpp"
#include "ghicast/ingest.hpp"
#include "ghicast/knn.hpp"

#include <span>
#include <string>
#include <variant>

namespace ghicast::regress {

enum class RegressorKind { knn, forest };

struct RegressorConfig {
    RegressorKind kind = RegressorKind::knn;
    int knn_neighbors = 2;
    KnnIndex knn_index = KnnIndex::automatic;
    ForestConfig forest;
};

using Regressor = std::variant<KnnModel, ForestModel>;

Regressor fit_regressor(const RowMatrix& x, const TargetVector& y, const RegressorConfig& config);

PredictionVector predict(const Regressor& model, const RowMatrix& queries);

std::string kind_name(RegressorKind kind);
RegressorKind parse_kind(const std::string& name);

/// Persistence baseline: the forecast for t + horizon is the GHI at t.
PredictionVector persistence_predict(std::span<const double> anchor_ghi);

/// Looks up the GHI of each anchor instant in `history`. Throws ConfigError
/// when an anchor has no sample.
PredictionVector persistence_predict(const std::vector<ingest::AlignedSample>& history,
    std::span<const Timestamp> anchors, int horizon_steps);

} // namespace ghicast::regress
