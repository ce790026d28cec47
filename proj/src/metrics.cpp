#include "ghicast/metrics.hpp"

#include "ghicast/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ghicast::metrics {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat)
{
    if (y.size() != yhat.size()) {
        throw ShapeError("metric inputs differ in length: " + std::to_string(y.size()) + " vs "
            + std::to_string(yhat.size()));
    }
    if (y.empty()) {
        throw ShapeError("metric inputs are empty");
    }
}

} // namespace

double nmape(std::span<const double> y, std::span<const double> yhat)
{
    check_lengths(y, yhat);
    double abs_error = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        abs_error += std::abs(y[i] - yhat[i]);
        total += y[i];
    }
    if (!(total > 0.0)) {
        throw UndefinedMetricError("nMAPE undefined: sum of true GHI is " + std::to_string(total));
    }
    return 100.0 * abs_error / total;
}

double rmse(std::span<const double> y, std::span<const double> yhat)
{
    check_lengths(y, yhat);
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(y.size()));
}

double nrmse(std::span<const double> y, std::span<const double> yhat)
{
    check_lengths(y, yhat);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) {
        throw UndefinedMetricError("nRMSE undefined: true GHI has zero range");
    }
    return 100.0 * rmse(y, yhat) / range;
}

HourlyBreakdown hourly_breakdown(std::span<const Timestamp> timestamps, std::span<const double> y,
    std::span<const double> yhat, int utc_offset_minutes)
{
    check_lengths(y, yhat);
    if (timestamps.size() != y.size()) {
        throw ShapeError("hourly breakdown: timestamps and values differ in length");
    }
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> buckets;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& bucket = buckets[local_hour(timestamps[i], utc_offset_minutes)];
        bucket.first.push_back(y[i]);
        bucket.second.push_back(yhat[i]);
    }
    HourlyBreakdown out;
    for (const auto& [hour, bucket] : buckets) {
        double sum_y = 0.0;
        for (double v : bucket.first) {
            sum_y += v;
        }
        if (!(sum_y > 0.0)) {
            out.omitted_hours.push_back(hour);
            continue;
        }
        out.hours[hour] = {nmape(bucket.first, bucket.second), bucket.first.size(), sum_y};
    }
    return out;
}

EvalReport evaluate_predictions(const std::string& horizon_label, const std::string& model,
    std::span<const Timestamp> timestamps, std::span<const double> y, std::span<const double> yhat,
    int utc_offset_minutes)
{
    EvalReport report;
    report.horizon_label = horizon_label;
    report.model = model;
    report.nmape_pct = nmape(y, yhat);
    report.rmse_wm2 = rmse(y, yhat);
    report.nrmse_pct = nrmse(y, yhat);
    report.n_samples = y.size();
    report.per_hour = hourly_breakdown(timestamps, y, yhat, utc_offset_minutes);
    return report;
}

std::string format_number(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

void write_summary_csv(std::ostream& out, const std::vector<EvalReport>& reports)
{
    out << "horizon,nmape_pct,rmse_wm2,nrmse_pct,n\n";
    for (const auto& r : reports) {
        out << r.horizon_label << ',' << format_number(r.nmape_pct) << ',' << format_number(r.rmse_wm2) << ','
            << format_number(r.nrmse_pct) << ',' << r.n_samples << '\n';
    }
}

void write_hourly_csv(std::ostream& out, const std::vector<EvalReport>& reports)
{
    out << "horizon,hour,nmape_pct,n\n";
    for (const auto& r : reports) {
        for (const auto& [hour, bucket] : r.per_hour.hours) {
            out << r.horizon_label << ',' << hour << ',' << format_number(bucket.nmape_pct) << ',' << bucket.n << '\n';
        }
    }
}

std::string reports_to_json(const std::vector<EvalReport>& reports)
{
    nlohmann::json array = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json per_hour = nlohmann::json::object();
        for (const auto& [hour, bucket] : r.per_hour.hours) {
            per_hour[std::to_string(hour)] = {{"nmape_pct", bucket.nmape_pct}, {"n", bucket.n}};
        }
        array.push_back({{"horizon", r.horizon_label}, {"model", r.model}, {"nmape_pct", r.nmape_pct},
            {"rmse_wm2", r.rmse_wm2}, {"nrmse_pct", r.nrmse_pct}, {"n_samples", r.n_samples}, {"per_hour", per_hour},
            {"omitted_hours", r.per_hour.omitted_hours}});
    }
    return array.dump(2);
}

} // namespace ghicast::metrics
