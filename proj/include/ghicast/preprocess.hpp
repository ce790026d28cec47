#pragma once

#include "ghicast/image.hpp"
#include "ghicast/ingest.hpp"
#include "ghicast/linear_operator.hpp"
#include "ghicast/matrix.hpp"

#include <span>
#include <string>
#include <vector>

namespace ghicast::preprocess {

/// Flattened M*M*3 image, entries in [0,1], laid out row, column, channel
/// (R,G,B).
struct PixelVector {
    std::vector<double> values;
    Timestamp source_timestamp;
};

inline Index pixel_count(int side)
{
    return Index(side) * side * 3;
}

/// Box-filter resample to side x side: each output pixel is the
/// coverage-weighted mean of the source pixels under it, divided by 255.
std::vector<double> area_downsample(const RgbImage& image, int side);

PixelVector decode_and_resize(const ingest::ImageRecord& image, int side);

/// Decoded frames of a sample sequence; undecodable images are left out.
struct FrameSet {
    int side = 0;
    RowMatrix pixels; // one flattened frame per row
    std::vector<Timestamp> timestamps;
    std::vector<double> ghi;
    std::size_t skipped = 0;

    std::size_t size() const { return timestamps.size(); }
};

FrameSet decode_frames(const std::vector<ingest::AlignedSample>& samples, int side);

/// One look-back row: frames [first, anchor] are concatenated oldest first,
/// the target is the GHI of frame `target`.
struct Window {
    std::size_t first = 0;
    std::size_t anchor = 0;
    std::size_t target = 0;
};

/// Enumerates anchors t with frames t-m+1..t+h all present and every
/// consecutive spacing in that run at most 1.5 * cadence. horizon_steps = 0
/// and lookback = 1 gives one window per frame (the nowcast layout).
std::vector<Window> lookback_windows(std::span<const Timestamp> timestamps, int lookback, int horizon_steps,
    Seconds cadence);

/// Explicit rows for `windows`, cols = frames.pixels.cols() * lookback.
FeatureMatrix materialize(const FrameSet& frames, std::span<const Window> windows, int lookback);

TargetVector window_targets(const FrameSet& frames, std::span<const Window> windows);

/// GHI at each window's anchor frame (what persistence predicts).
std::vector<double> anchor_ghi(const FrameSet& frames, std::span<const Window> windows);

/// Implicit look-back design matrix. Products cost the same as with the
/// explicit matrix, but memory stays at one copy of the decoded frames.
class LookbackOperator final : public LinearOperator {
public:
    LookbackOperator(const FrameSet& frames, std::vector<Window> windows, int lookback);

    Index rows() const override { return static_cast<Index>(windows_.size()); }
    Index cols() const override { return frames_.pixels.cols() * lookback_; }
    Matrix apply(const Matrix& rhs) const override;
    Matrix apply_transposed(const Matrix& rhs) const override;
    RowMatrix to_dense() const override;

    const std::vector<Window>& windows() const { return windows_; }

private:
    const FrameSet& frames_;
    std::vector<Window> windows_;
    int lookback_;
};

struct Dataset {
    FeatureMatrix features;
    TargetVector targets;
    std::size_t skipped = 0; // undecodable images
    std::string note;        // set when no rows could be formed
};

/// One row per decodable sample, target = GHI at the same instant.
Dataset build_nowcast(const std::vector<ingest::AlignedSample>& samples, int side);

Dataset build_lookback(const std::vector<ingest::AlignedSample>& samples, int side, int lookback, int horizon_steps,
    Seconds cadence = std::chrono::minutes{10});

} // namespace ghicast::preprocess
