#include "ghicast/config.hpp"

#include "ghicast/error.hpp"
#include "ghicast/matrix_io.hpp"
#include "ghicast/preprocess.hpp"
#include "ghicast/random.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ghicast {

int PipelineConfig::lookback_minutes() const
{
    return static_cast<int>(lookback * std::chrono::duration_cast<std::chrono::minutes>(cadence).count());
}

ingest::IngestOptions PipelineConfig::ingest_options() const
{
    ingest::IngestOptions options;
    options.filename_pattern = filename_pattern;
    options.tolerance = align_tolerance;
    options.cadence = cadence;
    options.night = night;
    options.utc_offset_minutes = utc_offset_minutes;
    return options;
}

lsa::Options PipelineConfig::lsa_options() const
{
    lsa::Options options = lsa;
    options.seed = seed;
    return options;
}

regress::RegressorConfig PipelineConfig::regressor_config(std::uint64_t stream) const
{
    regress::RegressorConfig out = regressor;
    out.forest.seed = mix_seed(seed, stream);
    out.forest.threads = threads;
    return out;
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template<typename T>
T parse_number(const std::string& key, const std::string& value)
{
    T out{};
    const std::string v = trim(value);
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("setting '" + key + "': cannot parse '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value)
{
    std::string v = trim(value);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw ConfigError("setting '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            parts.push_back(item);
        }
    }
    return parts;
}

std::string join_ints(const std::vector<int>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? "," : "") + std::to_string(values[i]);
    }
    return out;
}

std::string render_double(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

int parse_horizon(const std::string& item, Seconds cadence)
{
    auto steps_from = [&](long long seconds) {
        if (seconds <= 0 || seconds % cadence.count() != 0) {
            throw ConfigError("horizon '" + item + "' is not a positive multiple of the cadence");
        }
        return static_cast<int>(seconds / cadence.count());
    };
    if (item.ends_with("min")) {
        return steps_from(60LL * parse_number<long long>("horizons", item.substr(0, item.size() - 3)));
    }
    if (item.ends_with('m')) {
        return steps_from(60LL * parse_number<long long>("horizons", item.substr(0, item.size() - 1)));
    }
    if (item.ends_with('h')) {
        return steps_from(3600LL * parse_number<long long>("horizons", item.substr(0, item.size() - 1)));
    }
    return parse_number<int>("horizons", item);
}

const char* split_name(ingest::SplitKind kind)
{
    switch (kind) {
    case ingest::SplitKind::chronological_prefix: return "chrono";
    case ingest::SplitKind::random_by_fraction: return "random";
    case ingest::SplitKind::random_by_year: return "year";
    }
    return "chrono";
}

const char* backend_name(lsa::Backend backend)
{
    switch (backend) {
    case lsa::Backend::automatic: return "auto";
    case lsa::Backend::randomized: return "randomized";
    case lsa::Backend::dense: return "dense";
    }
    return "auto";
}

const char* index_name(regress::KnnIndex index)
{
    switch (index) {
    case regress::KnnIndex::automatic: return "auto";
    case regress::KnnIndex::brute_force: return "brute";
    case regress::KnnIndex::kd_tree: return "kdtree";
    }
    return "auto";
}

} // namespace

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    for (const auto& item : split_list(text)) {
        out.push_back(parse_number<int>("list", item));
    }
    return out;
}

std::pair<std::string, std::string> split_assignment(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("expected key=value, got '" + text + "'");
    }
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

void apply_setting(PipelineConfig& c, const std::string& raw_key, const std::string& value)
{
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');

    if (key == "image_side" || key == "M") {
        c.image_side = parse_number<int>(key, value);
    } else if (key == "lookback" || key == "m") {
        c.lookback = parse_number<int>(key, value);
    } else if (key == "lookback_min") {
        const int minutes = parse_number<int>(key, value);
        const auto cadence_min = std::chrono::duration_cast<std::chrono::minutes>(c.cadence).count();
        if (minutes <= 0 || minutes % cadence_min != 0) {
            throw ConfigError("lookback_min=" + value + " is not a positive multiple of the cadence");
        }
        c.lookback = static_cast<int>(minutes / cadence_min);
    } else if (key == "k") {
        c.k = parse_number<Index>(key, value);
    } else if (key == "cadence_min") {
        c.cadence = std::chrono::minutes{parse_number<int>(key, value)};
    } else if (key == "horizons") {
        c.horizons.clear();
        for (const auto& item : split_list(value)) {
            c.horizons.push_back(parse_horizon(item, c.cadence));
        }
    } else if (key == "regressor") {
        c.regressor.kind = regress::parse_kind(trim(value));
    } else if (key == "knn_neighbors" || key == "K") {
        c.regressor.knn_neighbors = parse_number<int>(key, value);
    } else if (key == "knn_index") {
        const std::string v = trim(value);
        if (v == "auto") {
            c.regressor.knn_index = regress::KnnIndex::automatic;
        } else if (v == "brute") {
            c.regressor.knn_index = regress::KnnIndex::brute_force;
        } else if (v == "kdtree") {
            c.regressor.knn_index = regress::KnnIndex::kd_tree;
        } else {
            throw ConfigError("knn_index must be auto, brute or kdtree");
        }
    } else if (key == "rf_trees") {
        c.regressor.forest.n_trees = parse_number<int>(key, value);
    } else if (key == "rf_max_depth") {
        c.regressor.forest.max_depth = parse_number<int>(key, value);
    } else if (key == "rf_min_samples_leaf") {
        c.regressor.forest.min_samples_leaf = parse_number<int>(key, value);
    } else if (key == "rf_max_features") {
        c.regressor.forest.max_features = parse_number<int>(key, value);
    } else if (key == "split") {
        const std::string v = trim(value);
        if (v == "chrono") {
            c.split.kind = ingest::SplitKind::chronological_prefix;
        } else if (v == "random") {
            c.split.kind = ingest::SplitKind::random_by_fraction;
        } else if (v == "year") {
            c.split.kind = ingest::SplitKind::random_by_year;
        } else {
            throw ConfigError("split must be chrono, random or year");
        }
    } else if (key == "split_fraction") {
        c.split.fraction = parse_number<double>(key, value);
    } else if (key == "split_unit") {
        const std::string v = trim(value);
        if (v == "sample") {
            c.split.granularity = ingest::SplitGranularity::sample;
        } else if (v == "day") {
            c.split.granularity = ingest::SplitGranularity::day;
        } else {
            throw ConfigError("split_unit must be sample or day");
        }
    } else if (key == "split_test_years") {
        c.split.test_years = parse_int_list(value);
    } else if (key == "split_random_years") {
        c.split.random_test_years = parse_number<int>(key, value);
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "utc_offset_min") {
        c.utc_offset_minutes = parse_number<int>(key, value);
    } else if (key == "filename_pattern") {
        c.filename_pattern = trim(value);
    } else if (key == "align_tolerance_min") {
        c.align_tolerance = std::chrono::minutes{parse_number<int>(key, value)};
    } else if (key == "night_filter") {
        c.night.enabled = parse_bool(key, value);
    } else if (key == "night_ghi_threshold") {
        c.night.ghi_threshold = parse_number<double>(key, value);
    } else if (key == "night_first_hour") {
        c.night.first_day_hour = parse_number<int>(key, value);
    } else if (key == "night_last_hour") {
        c.night.last_day_hour = parse_number<int>(key, value);
    } else if (key == "lsa_backend") {
        const std::string v = trim(value);
        if (v == "auto") {
            c.lsa.backend = lsa::Backend::automatic;
        } else if (v == "randomized") {
            c.lsa.backend = lsa::Backend::randomized;
        } else if (v == "dense") {
            c.lsa.backend = lsa::Backend::dense;
        } else {
            throw ConfigError("lsa_backend must be auto, randomized or dense");
        }
    } else if (key == "lsa_oversampling") {
        c.lsa.oversampling = parse_number<int>(key, value);
    } else if (key == "lsa_power_iterations") {
        c.lsa.power_iterations = parse_number<int>(key, value);
    } else if (key == "lsa_tolerance") {
        c.lsa.tolerance = parse_number<double>(key, value);
    } else if (key == "lsa_max_iterations") {
        c.lsa.max_iterations = parse_number<int>(key, value);
    } else if (key == "lsa_dense_threshold") {
        c.lsa.dense_threshold = parse_number<Index>(key, value);
    } else if (key == "threads") {
        c.threads = parse_number<int>(key, value);
    } else {
        throw ConfigError("unknown setting '" + raw_key + "'");
    }
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';' || t.front() == '[') {
            continue;
        }
        try {
            const auto [key, value] = split_assignment(t);
            apply_setting(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void validate(const PipelineConfig& c)
{
    if (c.image_side < 2) {
        throw ConfigError("image_side must be >= 2");
    }
    if (c.lookback < 1) {
        throw ConfigError("lookback must be >= 1");
    }
    if (c.cadence <= Seconds{0}) {
        throw ConfigError("cadence must be positive");
    }
    if (c.horizons.empty()) {
        throw ConfigError("at least one forecast horizon is required");
    }
    for (std::size_t i = 0; i < c.horizons.size(); ++i) {
        if (c.horizons[i] < 1 || (i > 0 && c.horizons[i] <= c.horizons[i - 1])) {
            throw ConfigError("horizons must be positive and strictly increasing");
        }
    }
    const Index width = preprocess::pixel_count(c.image_side) * c.lookback;
    if (c.k < 1 || c.k > width) {
        throw ConfigError("k=" + std::to_string(c.k) + " must lie in [1, " + std::to_string(width) + "]");
    }
    if (c.regressor.knn_neighbors < 1) {
        throw ConfigError("knn_neighbors must be >= 1");
    }
    if (c.regressor.forest.n_trees < 1 || c.regressor.forest.max_depth < 0 || c.regressor.forest.min_samples_leaf < 1) {
        throw ConfigError("forest needs rf_trees >= 1, rf_max_depth >= 0, rf_min_samples_leaf >= 1");
    }
    if (c.lsa.oversampling < 0 || c.lsa.power_iterations < 0) {
        throw ConfigError("lsa_oversampling and lsa_power_iterations must be >= 0");
    }
    if (c.threads < 1) {
        throw ConfigError("threads must be >= 1");
    }
}

std::map<std::string, std::string> config_entries(const PipelineConfig& c)
{
    std::map<std::string, std::string> e;
    e["image_side"] = std::to_string(c.image_side);
    e["lookback"] = std::to_string(c.lookback);
    e["k"] = std::to_string(c.k);
    e["cadence_min"] = std::to_string(std::chrono::duration_cast<std::chrono::minutes>(c.cadence).count());
    e["horizons"] = join_ints(c.horizons);
    e["regressor"] = regress::kind_name(c.regressor.kind);
    e["knn_neighbors"] = std::to_string(c.regressor.knn_neighbors);
    e["knn_index"] = index_name(c.regressor.knn_index);
    e["rf_trees"] = std::to_string(c.regressor.forest.n_trees);
    e["rf_max_depth"] = std::to_string(c.regressor.forest.max_depth);
    e["rf_min_samples_leaf"] = std::to_string(c.regressor.forest.min_samples_leaf);
    e["rf_max_features"] = std::to_string(c.regressor.forest.max_features);
    e["split"] = split_name(c.split.kind);
    e["split_fraction"] = render_double(c.split.fraction);
    e["split_unit"] = c.split.granularity == ingest::SplitGranularity::day ? "day" : "sample";
    e["split_test_years"] = join_ints(c.split.test_years);
    e["split_random_years"] = std::to_string(c.split.random_test_years);
    e["seed"] = std::to_string(c.seed);
    e["utc_offset_min"] = std::to_string(c.utc_offset_minutes);
    e["filename_pattern"] = c.filename_pattern;
    e["align_tolerance_min"] = std::to_string(std::chrono::duration_cast<std::chrono::minutes>(c.align_tolerance).count());
    e["night_filter"] = c.night.enabled ? "true" : "false";
    e["night_ghi_threshold"] = render_double(c.night.ghi_threshold);
    e["night_first_hour"] = std::to_string(c.night.first_day_hour);
    e["night_last_hour"] = std::to_string(c.night.last_day_hour);
    e["lsa_backend"] = backend_name(c.lsa.backend);
    e["lsa_oversampling"] = std::to_string(c.lsa.oversampling);
    e["lsa_power_iterations"] = std::to_string(c.lsa.power_iterations);
    e["lsa_tolerance"] = render_double(c.lsa.tolerance);
    e["lsa_max_iterations"] = std::to_string(c.lsa.max_iterations);
    e["lsa_dense_threshold"] = std::to_string(c.lsa.dense_threshold);
    return e;
}

PipelineConfig config_from_entries(const std::map<std::string, std::string>& entries)
{
    PipelineConfig c;
    // cadence first: horizons and look-back minutes are interpreted against it
    if (const auto it = entries.find("cadence_min"); it != entries.end()) {
        apply_setting(c, it->first, it->second);
    }
    for (const auto& [key, value] : entries) {
        if (key == "split_test_years" && value.empty()) {
            c.split.test_years.clear();
            continue;
        }
        apply_setting(c, key, value);
    }
    return c;
}

std::string config_hash(const PipelineConfig& config)
{
    std::string canonical;
    for (const auto& [key, value] : config_entries(config)) {
        canonical += key + "=" + value + "\n";
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc32_of(canonical));
    return buf;
}

std::string horizon_label(int steps, Seconds cadence)
{
    const long long seconds = static_cast<long long>(steps) * cadence.count();
    if (seconds % 3600 == 0) {
        return "+" + std::to_string(seconds / 3600) + "h";
    }
    return "+" + std::to_string(seconds / 60) + "min";
}

} // namespace ghicast
