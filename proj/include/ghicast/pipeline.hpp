#pragma once

#include "ghicast/config.hpp"
#include "ghicast/ingest.hpp"
#include "ghicast/lsa.hpp"
#include "ghicast/metrics.hpp"
#include "ghicast/preprocess.hpp"
#include "ghicast/regress.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ghicast::pipeline {

/// Reducer plus regressor for one lead time.
struct HorizonModel {
    int steps = 0;
    std::string label;
    lsa::Model lsa;
    regress::Regressor regressor;
    std::size_t train_rows = 0;
};

struct TrainingInfo {
    std::size_t samples = 0;
    std::size_t frames = 0;
    std::size_t skipped_images = 0;
    std::optional<Timestamp> first;
    std::optional<Timestamp> last;
    double fit_seconds = 0.0; // wall time; kept out of the manifest
};

/// Trained models: a nowcast regressor on raw frames (no reduction) and one
/// (reducer, regressor) pair per configured horizon.
struct ModelBundle {
    PipelineConfig config;
    regress::Regressor nowcast;
    std::vector<HorizonModel> horizons;
    TrainingInfo info;
};

ModelBundle train(const PipelineConfig& config, const std::vector<ingest::AlignedSample>& samples);
ModelBundle train(const PipelineConfig& config, const preprocess::FrameSet& frames);

/// Reducer + regressor for one horizon, fitted on `frames`. Throws
/// ConfigError naming the horizon when it yields no windows.
HorizonModel train_horizon(const PipelineConfig& config, const preprocess::FrameSet& frames, int steps);

struct Evaluation {
    std::vector<metrics::EvalReport> reports;   // nowcast, then each horizon
    std::vector<metrics::EvalReport> baselines; // persistence, per horizon
};

Evaluation evaluate(const ModelBundle& bundle, const std::vector<ingest::AlignedSample>& test_samples);
Evaluation evaluate(const ModelBundle& bundle, const preprocess::FrameSet& test_frames);

/// Windows evaluated for one horizon, with targets and predictions.
struct HorizonPredictions {
    std::vector<preprocess::Window> windows;
    std::vector<Timestamp> target_times;
    TargetVector targets;
    PredictionVector predictions;
    PredictionVector persistence;
};

HorizonPredictions predict_horizon(const HorizonModel& model, const PipelineConfig& config,
    const preprocess::FrameSet& frames);

struct Forecast {
    Timestamp anchor;
    double nowcast = 0.0;
    struct Point {
        int steps;
        std::string label;
        Timestamp valid_time;
        double ghi;
    };
    std::vector<Point> horizons;
};

/// Forecasts from the `lookback` newest frames among `images`. Throws
/// ConfigError when fewer than `lookback` consecutive frames are available.
Forecast forecast_latest(const ModelBundle& bundle, const std::vector<ingest::ImageRecord>& images);

struct TuningRow {
    Index k = 0;
    int lookback = 0;
    int lookback_minutes = 0;
    int steps = 0;
    std::string horizon;
    double nmape_pct = 0.0;
    bool ok = true;
    std::string error; // category:message when !ok
};

struct TuningReport {
    std::vector<TuningRow> rows;
    std::optional<Index> best_k;
    std::optional<int> best_lookback;
    double best_mean_nmape = 0.0;
};

/// Trains and scores every (k, look-back) pair on a chronological
/// 80/20 split of `train_samples`. Failed cells become flagged rows.
/// The best pair minimizes nMAPE averaged over horizons (first wins ties).
TuningReport tune(const PipelineConfig& base, const std::vector<Index>& ks, const std::vector<int>& lookbacks,
    const std::vector<ingest::AlignedSample>& train_samples);

/// `k,lookback_min,horizon,nmape_pct`
void write_tuning_csv(std::ostream& out, const TuningReport& report);

} // namespace ghicast::pipeline
