#include "ghicast/regress.hpp"

#include "ghicast/error.hpp"

#include <algorithm>

namespace ghicast::regress {

Regressor fit_regressor(const RowMatrix& x, const TargetVector& y, const RegressorConfig& config)
{
    if (config.kind == RegressorKind::knn) {
        return KnnModel(x, y, config.knn_neighbors, config.knn_index);
    }
    return rf_fit(x, y, config.forest);
}

PredictionVector predict(const Regressor& model, const RowMatrix& queries)
{
    return std::visit([&](const auto& m) { return m.predict(queries); }, model);
}

std::string kind_name(RegressorKind kind)
{
    return kind == RegressorKind::knn ? "knn" : "rf";
}

RegressorKind parse_kind(const std::string& name)
{
    if (name == "knn") {
        return RegressorKind::knn;
    }
    if (name == "rf" || name == "forest") {
        return RegressorKind::forest;
    }
    throw ConfigError("unknown regressor '" + name + "' (expected knn or rf)");
}

PredictionVector persistence_predict(std::span<const double> anchor_ghi)
{
    return {anchor_ghi.begin(), anchor_ghi.end()};
}

PredictionVector persistence_predict(const std::vector<ingest::AlignedSample>& history,
    std::span<const Timestamp> anchors, int horizon_steps)
{
    if (horizon_steps < 0) {
        throw ConfigError("horizon steps must be >= 0");
    }
    PredictionVector out;
    out.reserve(anchors.size());
    for (Timestamp t : anchors) {
        const auto it = std::lower_bound(history.begin(), history.end(), t,
            [](const ingest::AlignedSample& s, Timestamp v) { return s.timestamp < v; });
        if (it == history.end() || it->timestamp != t) {
            throw ConfigError("no GHI sample at anchor " + format_iso8601(t));
        }
        out.push_back(it->ghi);
    }
    return out;
}

} // namespace ghicast::regress
