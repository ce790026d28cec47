#pragma once

#include "ghicast/time.hpp"

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ghicast::metrics {

/// 100 * sum|y - yhat| / sum y. Throws UndefinedMetricError when sum y <= 0
/// and ShapeError on length mismatch or empty input.
double nmape(std::span<const double> y, std::span<const double> yhat);

/// sqrt(mean((y - yhat)^2)).
double rmse(std::span<const double> y, std::span<const double> yhat);

/// 100 * rmse / (max y - min y). Throws UndefinedMetricError on constant y.
double nrmse(std::span<const double> y, std::span<const double> yhat);

struct HourBucket {
    double nmape_pct = 0.0;
    std::size_t n = 0;
    double sum_y = 0.0;
};

struct HourlyBreakdown {
    std::map<int, HourBucket> hours;    // local hour -> nMAPE within the bucket
    std::vector<int> omitted_hours;     // non-empty buckets whose sum y is 0
};

HourlyBreakdown hourly_breakdown(std::span<const Timestamp> timestamps, std::span<const double> y,
    std::span<const double> yhat, int utc_offset_minutes);

struct EvalReport {
    std::string horizon_label; // nowcast, +1h, ...
    std::string model;         // knn, rf or persistence
    double nmape_pct = 0.0;
    double rmse_wm2 = 0.0;
    double nrmse_pct = 0.0;
    std::size_t n_samples = 0;
    HourlyBreakdown per_hour;
};

EvalReport evaluate_predictions(const std::string& horizon_label, const std::string& model,
    std::span<const Timestamp> timestamps, std::span<const double> y, std::span<const double> yhat,
    int utc_offset_minutes);

/// `horizon,nmape_pct,rmse_wm2,nrmse_pct,n`
void write_summary_csv(std::ostream& out, const std::vector<EvalReport>& reports);

/// `horizon,hour,nmape_pct,n`
void write_hourly_csv(std::ostream& out, const std::vector<EvalReport>& reports);

/// JSON array mirroring EvalReport.
std::string reports_to_json(const std::vector<EvalReport>& reports);

/// Fixed-precision rendering used by every report writer.
std::string format_number(double value);

} // namespace ghicast::metrics
