#include "ghicast/pipeline.hpp"

#include "ghicast/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ghicast::pipeline {

namespace {

// Regressor seeds: stream 0 is the nowcast model, stream `steps` a horizon.
constexpr std::uint64_t nowcast_stream = 0;

void fill_info(TrainingInfo& info, const preprocess::FrameSet& frames)
{
    info.frames = frames.size();
    info.skipped_images = frames.skipped;
    if (!frames.timestamps.empty()) {
        info.first = frames.timestamps.front();
        info.last = frames.timestamps.back();
    }
}

} // namespace

HorizonModel train_horizon(const PipelineConfig& config, const preprocess::FrameSet& frames, int steps)
{
    const std::string label = horizon_label(steps, config.cadence);
    auto windows = preprocess::lookback_windows(frames.timestamps, config.lookback, steps, config.cadence);
    if (windows.empty()) {
        throw ConfigError("horizon " + label + " yields no training windows (look-back " + std::to_string(config.lookback)
            + " frames, " + std::to_string(frames.size()) + " frames available)");
    }
    const TargetVector targets = preprocess::window_targets(frames, windows);
    const preprocess::LookbackOperator design(frames, std::move(windows), config.lookback);
    if (design.rows() < 2 || config.k > design.rows()) {
        throw ConfigError("horizon " + label + " has " + std::to_string(design.rows())
            + " training windows, too few for k=" + std::to_string(config.k));
    }

    lsa::Fit reduced = lsa::fit(design, config.k, config.lsa_options());
    regress::Regressor regressor = regress::fit_regressor(reduced.embedding.values, targets,
        config.regressor_config(static_cast<std::uint64_t>(steps)));
    return HorizonModel{steps, label, std::move(reduced.model), std::move(regressor), targets.size()};
}

ModelBundle train(const PipelineConfig& config, const preprocess::FrameSet& frames)
{
    validate(config);
    if (frames.size() == 0) {
        throw EmptyInputError("no decodable training frames");
    }
    const auto started = std::chrono::steady_clock::now();

    ModelBundle bundle{config, regress::fit_regressor(frames.pixels, frames.ghi, config.regressor_config(nowcast_stream)),
        {}, {}};
    for (int steps : config.horizons) {
        bundle.horizons.push_back(train_horizon(config, frames, steps));
    }
    fill_info(bundle.info, frames);
    bundle.info.samples = frames.size() + frames.skipped;
    bundle.info.fit_seconds
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return bundle;
}

ModelBundle train(const PipelineConfig& config, const std::vector<ingest::AlignedSample>& samples)
{
    validate(config);
    if (samples.empty()) {
        throw EmptyInputError("no training samples");
    }
    const auto frames = preprocess::decode_frames(samples, config.image_side);
    return train(config, frames);
}

HorizonPredictions predict_horizon(const HorizonModel& model, const PipelineConfig& config,
    const preprocess::FrameSet& frames)
{
    HorizonPredictions out;
    out.windows = preprocess::lookback_windows(frames.timestamps, config.lookback, model.steps, config.cadence);
    if (out.windows.empty()) {
        return out;
    }
    out.targets = preprocess::window_targets(frames, out.windows);
    out.persistence = regress::persistence_predict(preprocess::anchor_ghi(frames, out.windows));
    for (const auto& w : out.windows) {
        out.target_times.push_back(frames.timestamps[w.target]);
    }
    const preprocess::LookbackOperator design(frames, out.windows, config.lookback);
    const RowMatrix reduced = lsa::transform(model.lsa, design);
    out.predictions = regress::predict(model.regressor, reduced);
    return out;
}

Evaluation evaluate(const ModelBundle& bundle, const preprocess::FrameSet& frames)
{
    const PipelineConfig& config = bundle.config;
    if (frames.size() == 0) {
        throw EmptyReportError("no decodable test frames");
    }
    if (frames.pixels.cols() != preprocess::pixel_count(config.image_side)) {
        throw IncompatibleError("test frames are " + std::to_string(frames.pixels.cols())
            + " values wide, bundle expects " + std::to_string(preprocess::pixel_count(config.image_side)));
    }

    Evaluation eval;
    const std::string model_name = regress::kind_name(config.regressor.kind);
    const PredictionVector nowcast = regress::predict(bundle.nowcast, frames.pixels);
    eval.reports.push_back(metrics::evaluate_predictions("nowcast", model_name, frames.timestamps, frames.ghi, nowcast,
        config.utc_offset_minutes));

    for (const auto& horizon : bundle.horizons) {
        const HorizonPredictions p = predict_horizon(horizon, config, frames);
        if (p.windows.empty()) {
            throw EmptyReportError("no usable test windows for horizon " + horizon.label);
        }
        eval.reports.push_back(metrics::evaluate_predictions(horizon.label, model_name, p.target_times, p.targets,
            p.predictions, config.utc_offset_minutes));
        eval.baselines.push_back(metrics::evaluate_predictions(horizon.label, "persistence", p.target_times, p.targets,
            p.persistence, config.utc_offset_minutes));
    }
    return eval;
}

Evaluation evaluate(const ModelBundle& bundle, const std::vector<ingest::AlignedSample>& test_samples)
{
    if (test_samples.empty()) {
        throw EmptyReportError("no test samples");
    }
    return evaluate(bundle, preprocess::decode_frames(test_samples, bundle.config.image_side));
}

Forecast forecast_latest(const ModelBundle& bundle, const std::vector<ingest::ImageRecord>& images)
{
    const PipelineConfig& config = bundle.config;
    const auto required = static_cast<std::size_t>(config.lookback);

    std::vector<ingest::ImageRecord> sorted = images;
    std::stable_sort(sorted.begin(), sorted.end(),
        [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    std::vector<ingest::AlignedSample> recent;
    for (std::size_t i = sorted.size() > required ? sorted.size() - required : 0; i < sorted.size(); ++i) {
        recent.push_back({sorted[i].timestamp, sorted[i], 0.0});
    }
    preprocess::FrameSet frames = preprocess::decode_frames(recent, config.image_side);

    // Longest gap-free run ending at the newest frame.
    std::size_t run = frames.size() == 0 ? 0 : 1;
    while (run < frames.size() && run < required) {
        const std::size_t i = frames.size() - run;
        const Seconds gap = frames.timestamps[i] - frames.timestamps[i - 1];
        if (gap <= Seconds{0} || 2 * gap > 3 * config.cadence) {
            break;
        }
        ++run;
    }
    if (run < required) {
        throw ConfigError("forecast needs " + std::to_string(required) + " consecutive recent frames, found "
            + std::to_string(run));
    }

    Forecast out;
    const std::size_t anchor = frames.size() - 1;
    out.anchor = frames.timestamps[anchor];
    const RowMatrix latest = frames.pixels.row(Index(anchor));
    out.nowcast = regress::predict(bundle.nowcast, latest).front();

    const std::vector<preprocess::Window> windows{{anchor + 1 - required, anchor, anchor}};
    const preprocess::LookbackOperator design(frames, windows, config.lookback);
    for (const auto& horizon : bundle.horizons) {
        const RowMatrix reduced = lsa::transform(horizon.lsa, design);
        const double ghi = regress::predict(horizon.regressor, reduced).front();
        out.horizons.push_back({horizon.steps, horizon.label, out.anchor + horizon.steps * config.cadence, ghi});
    }
    return out;
}

TuningReport tune(const PipelineConfig& base, const std::vector<Index>& ks, const std::vector<int>& lookbacks,
    const std::vector<ingest::AlignedSample>& train_samples)
{
    if (ks.empty() || lookbacks.empty()) {
        throw ConfigError("tuning grid is empty");
    }
    validate(base);
    const ingest::SplitPolicy validation{ingest::SplitKind::chronological_prefix, 0.8, ingest::SplitGranularity::sample,
        {}, 0, base.seed};
    const ingest::Split parts = ingest::split(train_samples, validation);
    const auto fit_frames = preprocess::decode_frames(parts.train, base.image_side);
    const auto val_frames = preprocess::decode_frames(parts.test, base.image_side);

    TuningReport report;
    double best = std::numeric_limits<double>::infinity();
    for (int lookback : lookbacks) {
        for (Index k : ks) {
            PipelineConfig config = base;
            config.lookback = lookback;
            config.k = k;
            double sum = 0.0;
            bool all_ok = true;
            for (int steps : config.horizons) {
                TuningRow row;
                row.k = k;
                row.lookback = lookback;
                row.lookback_minutes = config.lookback_minutes();
                row.steps = steps;
                row.horizon = horizon_label(steps, config.cadence);
                try {
                    validate(config);
                    const HorizonModel model = train_horizon(config, fit_frames, steps);
                    const HorizonPredictions p = predict_horizon(model, config, val_frames);
                    if (p.windows.empty()) {
                        throw EmptyReportError("no validation windows for " + row.horizon);
                    }
                    row.nmape_pct = metrics::nmape(p.targets, p.predictions);
                    sum += row.nmape_pct;
                } catch (const Error& e) {
                    row.ok = false;
                    row.nmape_pct = std::numeric_limits<double>::quiet_NaN();
                    row.error = std::string(category_name(e.category())) + ": " + e.what();
                    all_ok = false;
                }
                report.rows.push_back(row);
            }
            const double mean = sum / static_cast<double>(config.horizons.size());
            if (all_ok && mean < best) {
                best = mean;
                report.best_k = k;
                report.best_lookback = lookback;
                report.best_mean_nmape = mean;
            }
        }
    }
    return report;
}

void write_tuning_csv(std::ostream& out, const TuningReport& report)
{
    out << "k,lookback_min,horizon,nmape_pct\n";
    for (const auto& row : report.rows) {
        out << row.k << ',' << row.lookback_minutes << ',' << row.horizon << ','
            << (row.ok ? metrics::format_number(row.nmape_pct) : std::string("nan")) << '\n';
    }
}

} // namespace ghicast::pipeline
