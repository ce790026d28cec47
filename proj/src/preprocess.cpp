#include "ghicast/preprocess.hpp"

#include "ghicast/error.hpp"

#include <cstdint>

namespace ghicast::preprocess {

namespace {

struct Tap {
    int source;
    std::int64_t weight; // overlap length in units of 1/side source pixels
};

// For each output cell along one axis, the source cells it covers. Output
// cell o spans [o*src, (o+1)*src) and source cell i spans [i*out, (i+1)*out)
// in a common integer coordinate, so overlaps are exact.
std::vector<std::vector<Tap>> axis_taps(int source_len, int out_len)
{
    std::vector<std::vector<Tap>> taps(out_len);
    for (int o = 0; o < out_len; ++o) {
        const std::int64_t lo = std::int64_t(o) * source_len;
        const std::int64_t hi = lo + source_len;
        for (std::int64_t i = lo / out_len; i < source_len && i * out_len < hi; ++i) {
            const std::int64_t overlap = std::min(hi, (i + 1) * out_len) - std::max(lo, i * out_len);
            if (overlap > 0) {
                taps[o].push_back({static_cast<int>(i), overlap});
            }
        }
    }
    return taps;
}

bool spacing_ok(Timestamp earlier, Timestamp later, Seconds cadence)
{
    const Seconds gap = later - earlier;
    return gap > Seconds{0} && 2 * gap <= 3 * cadence;
}

} // namespace

std::vector<double> area_downsample(const RgbImage& image, int side)
{
    if (side < 2) {
        throw ConfigError("image side must be >= 2, got " + std::to_string(side));
    }
    if (image.width <= 0 || image.height <= 0) {
        throw ShapeError("cannot resample an empty image");
    }
    const auto row_taps = axis_taps(image.height, side);
    const auto col_taps = axis_taps(image.width, side);
    const double denom = double(image.height) * double(image.width) * 255.0;

    std::vector<double> out(static_cast<std::size_t>(pixel_count(side)));
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            std::int64_t acc[3] = {0, 0, 0};
            for (const Tap& tr : row_taps[r]) {
                for (const Tap& tc : col_taps[c]) {
                    const std::int64_t w = tr.weight * tc.weight;
                    for (int ch = 0; ch < 3; ++ch) {
                        acc[ch] += w * image.at(tr.source, tc.source, ch);
                    }
                }
            }
            for (int ch = 0; ch < 3; ++ch) {
                out[(std::size_t(r) * side + c) * 3 + ch] = double(acc[ch]) / denom;
            }
        }
    }
    return out;
}

PixelVector decode_and_resize(const ingest::ImageRecord& image, int side)
{
    return {area_downsample(decode_image(image.path), side), image.timestamp};
}

FrameSet decode_frames(const std::vector<ingest::AlignedSample>& samples, int side)
{
    FrameSet frames;
    frames.side = side;
    frames.pixels.resize(static_cast<Index>(samples.size()), pixel_count(side));
    Index row = 0;
    for (const auto& sample : samples) {
        std::vector<double> values;
        try {
            values = area_downsample(decode_image(sample.image.path), side);
        } catch (const DecodeError&) {
            ++frames.skipped;
            continue;
        }
        frames.pixels.row(row) = Eigen::Map<const Eigen::RowVectorXd>(values.data(), pixel_count(side));
        frames.timestamps.push_back(sample.timestamp);
        frames.ghi.push_back(sample.ghi);
        ++row;
    }
    frames.pixels.conservativeResize(row, pixel_count(side));
    return frames;
}

std::vector<Window> lookback_windows(std::span<const Timestamp> timestamps, int lookback, int horizon_steps,
    Seconds cadence)
{
    if (lookback < 1) {
        throw ConfigError("look-back must be >= 1, got " + std::to_string(lookback));
    }
    if (horizon_steps < 0) {
        throw ConfigError("horizon steps must be >= 0, got " + std::to_string(horizon_steps));
    }
    std::vector<Window> windows;
    const std::size_t n = timestamps.size();
    const std::size_t span = std::size_t(lookback - 1) + std::size_t(horizon_steps);
    if (n == 0 || span >= n) {
        return windows;
    }

    // breaks[i] = number of bad spacings among (0,1), ..., (i-1,i)
    std::vector<std::size_t> breaks(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
        breaks[i] = breaks[i - 1] + (spacing_ok(timestamps[i - 1], timestamps[i], cadence) ? 0 : 1);
    }
    for (std::size_t first = 0; first + span < n; ++first) {
        const std::size_t last = first + span;
        if (breaks[last] == breaks[first]) {
            const std::size_t anchor = first + std::size_t(lookback - 1);
            windows.push_back({first, anchor, anchor + std::size_t(horizon_steps)});
        }
    }
    return windows;
}

FeatureMatrix materialize(const FrameSet& frames, std::span<const Window> windows, int lookback)
{
    const Index p = frames.pixels.cols();
    FeatureMatrix out;
    out.values.resize(static_cast<Index>(windows.size()), p * lookback);
    out.row_timestamps.reserve(windows.size());
    for (std::size_t r = 0; r < windows.size(); ++r) {
        for (int j = 0; j < lookback; ++j) {
            out.values.row(Index(r)).segment(j * p, p) = frames.pixels.row(Index(windows[r].first) + j);
        }
        out.row_timestamps.push_back(frames.timestamps[windows[r].anchor]);
    }
    return out;
}

TargetVector window_targets(const FrameSet& frames, std::span<const Window> windows)
{
    TargetVector targets;
    targets.reserve(windows.size());
    for (const Window& w : windows) {
        targets.push_back(frames.ghi[w.target]);
    }
    return targets;
}

std::vector<double> anchor_ghi(const FrameSet& frames, std::span<const Window> windows)
{
    std::vector<double> values;
    values.reserve(windows.size());
    for (const Window& w : windows) {
        values.push_back(frames.ghi[w.anchor]);
    }
    return values;
}

LookbackOperator::LookbackOperator(const FrameSet& frames, std::vector<Window> windows, int lookback)
    : frames_(frames), windows_(std::move(windows)), lookback_(lookback)
{
}

Matrix LookbackOperator::apply(const Matrix& rhs) const
{
    if (rhs.rows() != cols()) {
        throw ShapeError("look-back product: rhs has " + std::to_string(rhs.rows()) + " rows, operator has "
            + std::to_string(cols()) + " cols");
    }
    const Index p = frames_.pixels.cols();
    Matrix out = Matrix::Zero(rows(), rhs.cols());
    for (int j = 0; j < lookback_; ++j) {
        const Matrix projected = frames_.pixels * rhs.middleRows(j * p, p);
        for (std::size_t r = 0; r < windows_.size(); ++r) {
            out.row(Index(r)) += projected.row(Index(windows_[r].first) + j);
        }
    }
    return out;
}

Matrix LookbackOperator::apply_transposed(const Matrix& rhs) const
{
    if (rhs.rows() != rows()) {
        throw ShapeError("look-back transposed product: rhs has " + std::to_string(rhs.rows())
            + " rows, operator has " + std::to_string(rows()) + " rows");
    }
    const Index p = frames_.pixels.cols();
    Matrix out(cols(), rhs.cols());
    Matrix scattered(frames_.pixels.rows(), rhs.cols());
    for (int j = 0; j < lookback_; ++j) {
        scattered.setZero();
        for (std::size_t r = 0; r < windows_.size(); ++r) {
            scattered.row(Index(windows_[r].first) + j) += rhs.row(Index(r));
        }
        out.middleRows(j * p, p).noalias() = frames_.pixels.transpose() * scattered;
    }
    return out;
}

RowMatrix LookbackOperator::to_dense() const
{
    return materialize(frames_, windows_, lookback_).values;
}

Dataset build_nowcast(const std::vector<ingest::AlignedSample>& samples, int side)
{
    if (samples.empty()) {
        throw EmptyInputError("nowcast dataset needs at least one sample");
    }
    FrameSet frames = decode_frames(samples, side);
    Dataset out;
    out.skipped = frames.skipped;
    out.features.values = std::move(frames.pixels);
    out.features.row_timestamps = std::move(frames.timestamps);
    out.targets = std::move(frames.ghi);
    if (out.targets.empty()) {
        out.note = "no decodable images";
    }
    return out;
}

Dataset build_lookback(const std::vector<ingest::AlignedSample>& samples, int side, int lookback, int horizon_steps,
    Seconds cadence)
{
    if (horizon_steps < 1) {
        throw ConfigError("look-back datasets need horizon_steps >= 1; use build_nowcast for horizon 0");
    }
    const FrameSet frames = decode_frames(samples, side);
    const auto windows = lookback_windows(frames.timestamps, lookback, horizon_steps, cadence);
    Dataset out;
    out.skipped = frames.skipped;
    out.features = materialize(frames, windows, lookback);
    out.targets = window_targets(frames, windows);
    if (windows.empty()) {
        const std::size_t need = std::size_t(lookback) + std::size_t(horizon_steps);
        out.note = frames.size() < need
            ? "series of " + std::to_string(frames.size()) + " frames is shorter than look-back + horizon ("
                + std::to_string(need) + ")"
            : "no gap-free run of " + std::to_string(need) + " frames";
    }
    return out;
}

} // namespace ghicast::preprocess
