#include "ghicast/synth.hpp"

#include "ghicast/error.hpp"
#include "ghicast/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace ghicast::synth {

namespace fs = std::filesystem;

namespace {

// Share of GHI that clouds cannot remove.
constexpr double diffuse_share = 0.2;

constexpr double background = 10.0;
constexpr double dome_base[3] = {15.0, 20.0, 25.0};
// Dome glow at full clear sky, per channel. Its mean (8) against the sun's
// peak contribution keeps the diffuse/direct brightness ratio near 1:4,
// matching the GHI model.
constexpr double dome_glow[3] = {4.0, 8.0, 12.0};
constexpr double sun_peak = 170.0;
constexpr double dome_radius = 0.46;   // fractions of the image side
constexpr double sun_max_radius = 0.2;
constexpr double sun_path_x = 0.28;
constexpr double sun_path_y = 0.18;

void validate(const SynthConfig& c)
{
    if (c.days < 1) {
        throw ConfigError("synth days must be >= 1, got " + std::to_string(c.days));
    }
    if (!(c.noise_sd >= 0.0)) {
        throw ConfigError("synth noise_sd must be >= 0");
    }
    if (c.cadence <= Seconds{0} || std::chrono::hours{24} % c.cadence != Seconds{0}) {
        throw ConfigError("synth cadence must divide one day");
    }
    if (c.image_side < 8) {
        throw ConfigError("synth image_side must be >= 8");
    }
    if (c.cloud.mean < 0.0 || c.cloud.mean > 1.0 || c.cloud.sd < 0.0 || c.cloud.phi < 0.0 || c.cloud.phi >= 1.0) {
        throw ConfigError("synth cloud process needs mean in [0,1], sd >= 0 and phi in [0,1)");
    }
}

std::string format_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

double clear_sky(Timestamp t, int utc_offset_minutes, double peak)
{
    const double hour = local_hour_fraction(t, utc_offset_minutes);
    if (hour <= 6.0 || hour >= 18.0) {
        return 0.0;
    }
    return peak * std::sin(std::numbers::pi * (hour - 6.0) / 12.0);
}

std::vector<Sample> simulate(const SynthConfig& config)
{
    validate(config);
    const Timestamp start = make_timestamp(config.start_year, config.start_month, config.start_day, 0, 0, 0)
        - std::chrono::minutes{config.utc_offset_minutes};
    const auto per_day = static_cast<long>(std::chrono::hours{24} / config.cadence);
    const long count = per_day * config.days;

    Rng cloud_rng(mix_seed(config.seed, 1));
    Rng noise_rng(mix_seed(config.seed, 2));
    const auto& p = config.cloud;
    const double innovation = p.sd * std::sqrt(1.0 - p.phi * p.phi);

    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(count));
    double cloud = std::clamp(p.mean + p.sd * cloud_rng.normal(), 0.0, 1.0);
    for (long i = 0; i < count; ++i) {
        if (i > 0) {
            cloud = std::clamp(p.mean + p.phi * (cloud - p.mean) + innovation * cloud_rng.normal(), 0.0, 1.0);
        }
        Sample s;
        s.timestamp = start + i * config.cadence;
        s.clear_sky = clear_sky(s.timestamp, config.utc_offset_minutes, config.peak_ghi);
        s.cloud = cloud;
        s.ghi_true = s.clear_sky * (1.0 - (1.0 - diffuse_share) * cloud);
        const double noise = config.noise_sd > 0.0 ? config.noise_sd * noise_rng.normal() : 0.0;
        s.ghi = std::max(0.0, s.ghi_true + noise);
        out.push_back(s);
    }
    return out;
}

RgbImage render(const Sample& sample, const SynthConfig& config)
{
    const int side = config.image_side;
    const double n = static_cast<double>(side);
    const double level = config.peak_ghi > 0.0 ? sample.clear_sky / config.peak_ghi : 0.0;

    // The sun rises on the left, culminates near the top and sets on the right.
    const double hour = local_hour_fraction(sample.timestamp, config.utc_offset_minutes);
    const double angle = std::numbers::pi * std::clamp((hour - 6.0) / 12.0, 0.0, 1.0);
    const double centre = n / 2.0;
    const double sun_x = centre - sun_path_x * n * std::cos(angle);
    const double sun_y = centre - sun_path_y * n * std::sin(angle);
    const double sun_r = sun_max_radius * n * std::sqrt(level);
    const double sun_level = sun_peak * (1.0 - sample.cloud);

    RgbImage image{side, side, std::vector<std::uint8_t>(std::size_t(side) * side * 3)};
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const double x = c + 0.5;
            const double y = r + 0.5;
            const double dome_cover = std::clamp(dome_radius * n - std::hypot(x - centre, y - centre) + 0.5, 0.0, 1.0);
            const double sun_cover
                = sun_r > 0.0 ? std::clamp(sun_r - std::hypot(x - sun_x, y - sun_y) + 0.5, 0.0, 1.0) : 0.0;
            for (int ch = 0; ch < 3; ++ch) {
                const double sky = dome_base[ch] + dome_glow[ch] * level;
                const double v = background + dome_cover * (sky - background) + sun_cover * sun_level;
                image.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return image;
}

Summary generate(const SynthConfig& config, const fs::path& out_dir)
{
    Summary summary;
    summary.samples = simulate(config);
    summary.images_dir = out_dir / "images";
    summary.ghi_csv = out_dir / "ghi.csv";
    summary.oracle_csv = out_dir / "oracle.csv";

    std::error_code ec;
    fs::create_directories(summary.images_dir, ec);
    if (ec) {
        throw IoError("cannot create " + summary.images_dir.string() + ": " + ec.message());
    }

    std::ofstream ghi(summary.ghi_csv, std::ios::binary);
    std::ofstream oracle(summary.oracle_csv, std::ios::binary);
    if (!ghi || !oracle) {
        throw IoError("cannot write CSV output under " + out_dir.string());
    }
    ghi << "timestamp_utc,ghi_wm2\n";
    oracle << "timestamp_utc,ghi_true_wm2\n";
    for (const auto& s : summary.samples) {
        const std::string stamp = format_iso8601(s.timestamp);
        ghi << stamp << ',' << format_value(s.ghi) << '\n';
        oracle << stamp << ',' << format_value(s.ghi_true) << '\n';
        write_png(render(s, config), summary.images_dir / (format_compact(s.timestamp) + ".png"));
    }
    if (!ghi || !oracle) {
        throw IoError("failed writing CSV output under " + out_dir.string());
    }
    return summary;
}

} // namespace ghicast::synth
