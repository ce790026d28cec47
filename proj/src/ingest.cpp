#include "ghicast/ingest.hpp"

#include "ghicast/error.hpp"
#include "ghicast/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <tuple>

namespace fs = std::filesystem;

namespace ghicast::ingest {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<double> parse_double(std::string_view s)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

} // namespace

GhiSeries load_ghi_series(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open GHI file " + path.string());
    }

    struct Row {
        Timestamp minute;
        std::size_t order;
        double ghi;
    };
    std::vector<Row> rows;
    GhiSeries series;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') {
            continue;
        }
        if (line_no == 1 && view.starts_with("timestamp")) {
            continue;
        }
        const auto comma = view.find(',');
        if (comma == std::string_view::npos) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'timestamp,ghi'");
        }
        Timestamp ts;
        try {
            ts = parse_iso8601(trim(view.substr(0, comma)));
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const auto value = parse_double(trim(view.substr(comma + 1)));
        if (!value || !std::isfinite(*value)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": GHI value is not a number");
        }
        double ghi = *value;
        if (ghi < 0.0) {
            ghi = 0.0;
            ++series.clamped;
        }
        rows.push_back({floor_to_minute(ts), rows.size(), ghi});
    }
    if (in.bad()) {
        throw IoError("read failure on " + path.string());
    }
    if (rows.empty()) {
        throw EmptyInputError("no GHI readings in " + path.string());
    }

    std::sort(rows.begin(), rows.end(),
        [](const Row& a, const Row& b) { return std::tie(a.minute, a.order) < std::tie(b.minute, b.order); });
    for (const Row& row : rows) {
        if (!series.readings.empty() && series.readings.back().timestamp == row.minute) {
            series.readings.back().ghi = row.ghi;
            ++series.duplicates;
        } else {
            series.readings.push_back({row.minute, row.ghi});
        }
    }
    return series;
}

namespace {

enum class Field { year, month, day, hour, minute, second };

struct CompiledPattern {
    std::regex regex;
    std::vector<Field> groups;
};

CompiledPattern compile_pattern(const std::string& pattern)
{
    CompiledPattern compiled;
    std::string expr;
    bool seen_hour = false;
    bool seen_month = false;
    std::size_t i = 0;
    while (i < pattern.size()) {
        const std::string_view rest = std::string_view(pattern).substr(i);
        if (rest.starts_with("YYYY")) {
            expr += "(\\d{4})";
            compiled.groups.push_back(Field::year);
            i += 4;
        } else if (rest.starts_with("MM")) {
            expr += "(\\d{2})";
            if (seen_hour || seen_month) {
                compiled.groups.push_back(Field::minute);
            } else {
                compiled.groups.push_back(Field::month);
                seen_month = true;
            }
            i += 2;
        } else if (rest.starts_with("DD")) {
            expr += "(\\d{2})";
            compiled.groups.push_back(Field::day);
            i += 2;
        } else if (rest.starts_with("HH")) {
            expr += "(\\d{2})";
            compiled.groups.push_back(Field::hour);
            seen_hour = true;
            i += 2;
        } else if (rest.starts_with("SS")) {
            expr += "(\\d{2})";
            compiled.groups.push_back(Field::second);
            i += 2;
        } else if (rest.front() == '*') {
            expr += ".*";
            ++i;
        } else {
            const char c = rest.front();
            if (std::string_view("\\^$.|?+()[]{}").find(c) != std::string_view::npos) {
                expr += '\\';
            }
            expr += c;
            ++i;
        }
    }
    for (Field required : {Field::year, Field::month, Field::day, Field::hour, Field::minute}) {
        if (std::find(compiled.groups.begin(), compiled.groups.end(), required) == compiled.groups.end()) {
            throw ConfigError("filename pattern '" + pattern + "' lacks a full date-time capture");
        }
    }
    compiled.regex = std::regex(expr);
    return compiled;
}

bool is_image_extension(std::string ext)
{
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

std::optional<Timestamp> match_stem(const CompiledPattern& compiled, const std::string& stem)
{
    std::smatch m;
    if (!std::regex_match(stem, m, compiled.regex)) {
        return std::nullopt;
    }
    int fields[6] = {0, 1, 1, 0, 0, 0};
    for (std::size_t g = 0; g < compiled.groups.size(); ++g) {
        fields[static_cast<int>(compiled.groups[g])] = std::stoi(m[g + 1].str());
    }
    try {
        return make_timestamp(fields[0], static_cast<unsigned>(fields[1]), static_cast<unsigned>(fields[2]), fields[3],
            fields[4], fields[5]);
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

} // namespace

ImageScan scan_image_directory(const fs::path& root, const std::string& pattern)
{
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IoError("image directory not found: " + root.string());
    }
    const CompiledPattern compiled = compile_pattern(pattern);

    ImageScan scan;
    for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (!it->is_regular_file()) {
            continue;
        }
        const fs::path& p = it->path();
        std::optional<Timestamp> ts;
        if (is_image_extension(p.extension().string())) {
            ts = match_stem(compiled, p.stem().string());
        }
        if (!ts) {
            ++scan.skipped;
            continue;
        }
        scan.records.push_back({*ts, p, it->file_size()});
    }
    if (ec) {
        throw IoError("cannot list " + root.string() + ": " + ec.message());
    }
    if (scan.records.empty()) {
        throw EmptyInputError("no images matching '" + pattern + "' under " + root.string());
    }
    std::sort(scan.records.begin(), scan.records.end(), [](const ImageRecord& a, const ImageRecord& b) {
        return std::tie(a.timestamp, a.path) < std::tie(b.timestamp, b.path);
    });
    return scan;
}

Alignment align(const std::vector<ImageRecord>& images, const std::vector<GhiReading>& readings, Seconds tolerance)
{
    Alignment result;

    std::vector<std::size_t> unique_images;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!unique_images.empty() && images[unique_images.back()].timestamp == images[i].timestamp) {
            ++result.dropped_images;
            continue;
        }
        unique_images.push_back(i);
    }

    struct Candidate {
        Seconds distance;
        std::size_t reading;
        std::size_t image;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i : unique_images) {
        const Timestamp t = images[i].timestamp;
        auto it = std::lower_bound(readings.begin(), readings.end(), t - tolerance,
            [](const GhiReading& r, Timestamp v) { return r.timestamp < v; });
        for (; it != readings.end() && it->timestamp <= t + tolerance; ++it) {
            const Seconds d = it->timestamp > t ? it->timestamp - t : t - it->timestamp;
            candidates.push_back({d, static_cast<std::size_t>(it - readings.begin()), i});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.distance, a.reading, a.image) < std::tie(b.distance, b.reading, b.image);
    });

    std::vector<std::optional<std::size_t>> match(images.size());
    std::vector<bool> reading_used(readings.size(), false);
    for (const Candidate& c : candidates) {
        if (match[c.image] || reading_used[c.reading]) {
            continue;
        }
        match[c.image] = c.reading;
        reading_used[c.reading] = true;
    }

    for (std::size_t i : unique_images) {
        if (!match[i]) {
            ++result.dropped_images;
            continue;
        }
        result.samples.push_back({images[i].timestamp, images[i], readings[*match[i]].ghi});
    }
    return result;
}

std::size_t filter_night(std::vector<AlignedSample>& samples, const NightFilter& filter, int utc_offset_minutes)
{
    if (!filter.enabled) {
        return 0;
    }
    const auto before = samples.size();
    std::erase_if(samples, [&](const AlignedSample& s) {
        const int hour = local_hour(s.timestamp, utc_offset_minutes);
        const bool outside = hour < filter.first_day_hour || hour > filter.last_day_hour;
        return s.ghi < filter.ghi_threshold && outside;
    });
    return before - samples.size();
}

namespace {

Split partition(const std::vector<AlignedSample>& samples, const std::vector<bool>& is_test)
{
    Split out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (is_test[i] ? out.test : out.train).push_back(samples[i]);
    }
    return out;
}

std::size_t train_count(double fraction, std::size_t n)
{
    const auto rounded = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(rounded, 1, n - 1);
}

} // namespace

Split split(const std::vector<AlignedSample>& samples, const SplitPolicy& policy)
{
    if (samples.size() < 2) {
        throw ConfigError("split needs at least 2 samples, got " + std::to_string(samples.size()));
    }
    const bool needs_fraction = policy.kind != SplitKind::random_by_year;
    if (needs_fraction && !(policy.fraction > 0.0 && policy.fraction < 1.0)) {
        throw ConfigError("split fraction must lie in (0,1), got " + std::to_string(policy.fraction));
    }

    const std::size_t n = samples.size();
    std::vector<bool> is_test(n, false);

    switch (policy.kind) {
    case SplitKind::chronological_prefix: {
        const std::size_t n_train = train_count(policy.fraction, n);
        std::fill(is_test.begin() + static_cast<std::ptrdiff_t>(n_train), is_test.end(), true);
        break;
    }
    case SplitKind::random_by_fraction: {
        Rng rng(policy.seed);
        if (policy.granularity == SplitGranularity::sample) {
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) {
                order[i] = i;
            }
            rng.shuffle(order);
            const std::size_t n_train = train_count(policy.fraction, n);
            for (std::size_t i = n_train; i < n; ++i) {
                is_test[order[i]] = true;
            }
        } else {
            std::vector<long long> days;
            std::vector<long long> day_of(n);
            for (std::size_t i = 0; i < n; ++i) {
                day_of[i] = std::chrono::floor<std::chrono::days>(samples[i].timestamp).time_since_epoch().count();
                days.push_back(day_of[i]);
            }
            std::sort(days.begin(), days.end());
            days.erase(std::unique(days.begin(), days.end()), days.end());
            if (days.size() < 2) {
                throw ConfigError("day-granular split needs samples from at least 2 days");
            }
            rng.shuffle(days);
            const std::size_t n_train = train_count(policy.fraction, days.size());
            const std::set<long long> test_days(days.begin() + static_cast<std::ptrdiff_t>(n_train), days.end());
            for (std::size_t i = 0; i < n; ++i) {
                is_test[i] = test_days.contains(day_of[i]);
            }
        }
        break;
    }
    case SplitKind::random_by_year: {
        std::set<int> years;
        for (const auto& s : samples) {
            years.insert(utc_year(s.timestamp));
        }
        std::set<int> test_years(policy.test_years.begin(), policy.test_years.end());
        if (test_years.empty()) {
            if (policy.random_test_years <= 0 || static_cast<std::size_t>(policy.random_test_years) >= years.size()) {
                throw ConfigError("random-by-year split needs test years, or a random count below the "
                    + std::to_string(years.size()) + " years present");
            }
            std::vector<int> pool(years.begin(), years.end());
            Rng rng(policy.seed);
            rng.shuffle(pool);
            test_years.insert(pool.begin(), pool.begin() + policy.random_test_years);
        }
        std::size_t selected = 0;
        for (std::size_t i = 0; i < n; ++i) {
            is_test[i] = test_years.contains(utc_year(samples[i].timestamp));
            selected += is_test[i] ? 1 : 0;
        }
        if (selected == 0) {
            throw ConfigError("test year list selects no samples");
        }
        if (selected == n) {
            throw ConfigError("test year list selects every sample; training set would be empty");
        }
        break;
    }
    }
    return partition(samples, is_test);
}

std::size_t count_gaps(const std::vector<AlignedSample>& samples, Seconds cadence)
{
    std::size_t gaps = 0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (2 * (samples[i].timestamp - samples[i - 1].timestamp) > 3 * cadence) {
            ++gaps;
        }
    }
    return gaps;
}

Dataset load_dataset(const fs::path& images_dir, const fs::path& ghi_csv, const IngestOptions& options)
{
    Dataset ds;
    const ImageScan scan = scan_image_directory(images_dir, options.filename_pattern);
    ds.images_found = scan.records.size();
    ds.images_skipped = scan.skipped;

    const GhiSeries series = load_ghi_series(ghi_csv);
    ds.readings = series.readings.size();
    ds.clamped = series.clamped;
    ds.duplicates = series.duplicates;

    Alignment alignment = align(scan.records, series.readings, options.tolerance);
    ds.aligned = alignment.samples.size();
    ds.dropped = alignment.dropped_images;
    ds.samples = std::move(alignment.samples);
    ds.night_removed = filter_night(ds.samples, options.night, options.utc_offset_minutes);
    ds.gaps = count_gaps(ds.samples, options.cadence);
    return ds;
}

} // namespace ghicast::ingest
