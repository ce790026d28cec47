#include "ghicast/cli.hpp"

#include "ghicast/bundle.hpp"
#include "ghicast/config.hpp"
#include "ghicast/error.hpp"
#include "ghicast/ingest.hpp"
#include "ghicast/pipeline.hpp"
#include "ghicast/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <optional>

namespace ghicast {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string images;
    std::string ghi;
    std::string bundle;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string horizons;
    std::string k;
    std::string lookback_min;
    std::string regressor;
    std::string split;
    bool quiet = false;
    int threads = 0;

    // synth
    int days = 3;
    int side = 64;
    double noise_sd = 20.0;
    double cloud_mean = 0.4;
    double cloud_sd = 0.3;
    double cloud_phi = 0.9;
    int cadence_min = 10;
};

// Options shared by every subcommand that builds a PipelineConfig.
void add_config_options(CLI::App& cmd, Options& o, bool with_lists)
{
    cmd.add_option("--config", o.config_path, "INI-style key = value file");
    cmd.add_option("--set", o.overrides, "key=value override, applied last (repeatable)");
    cmd.add_option("--seed", o.seed, "master seed");
    cmd.add_option("--horizons", o.horizons, "comma list: steps or durations such as 1h, 90min");
    cmd.add_option("--k", o.k, with_lists ? "comma list of LSA ranks" : "LSA rank");
    cmd.add_option("--lookback-min", o.lookback_min,
        with_lists ? "comma list of look-back durations in minutes" : "look-back duration in minutes");
    cmd.add_option("--regressor", o.regressor, "knn or rf")->check(CLI::IsMember({"knn", "rf"}));
    cmd.add_option("--split", o.split, "chrono, random or year")->check(CLI::IsMember({"chrono", "random", "year"}));
    cmd.add_option("--threads", o.threads, "worker threads for forest growth");
}

PipelineConfig build_config(const Options& o, bool with_lists)
{
    PipelineConfig config;
    if (!o.config_path.empty()) {
        apply_config_file(config, o.config_path);
    }
    if (o.seed) {
        apply_setting(config, "seed", std::to_string(*o.seed));
    }
    if (!o.horizons.empty()) {
        apply_setting(config, "horizons", o.horizons);
    }
    if (!with_lists && !o.k.empty()) {
        apply_setting(config, "k", o.k);
    }
    if (!with_lists && !o.lookback_min.empty()) {
        apply_setting(config, "lookback_min", o.lookback_min);
    }
    if (!o.regressor.empty()) {
        apply_setting(config, "regressor", o.regressor);
    }
    if (!o.split.empty()) {
        apply_setting(config, "split", o.split);
    }
    if (o.threads > 0) {
        apply_setting(config, "threads", std::to_string(o.threads));
    }
    for (const auto& text : o.overrides) {
        const auto [key, value] = split_assignment(text);
        apply_setting(config, key, value);
    }
    validate(config);
    return config;
}

fs::path require_dir(const std::string& path, const char* flag)
{
    if (path.empty()) {
        throw ConfigError(std::string(flag) + " is required");
    }
    return path;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream file(path, std::ios::binary);
    file << text;
    if (!file) {
        throw IoError("cannot write " + path.string());
    }
}

template<typename Writer>
void write_with(const fs::path& path, Writer&& writer)
{
    std::ostringstream buffer;
    writer(buffer);
    write_text(path, buffer.str());
}

void make_out_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

ingest::Dataset load(const Options& o, const PipelineConfig& config)
{
    return ingest::load_dataset(require_dir(o.images, "--images"), require_dir(o.ghi, "--ghi"),
        config.ingest_options());
}

int cmd_check(const Options& o, std::ostream& out)
{
    const PipelineConfig config = build_config(o, false);
    const ingest::Dataset ds = load(o, config);
    if (!o.quiet) {
        out << "images found:          " << ds.images_found << '\n'
            << "unparsable filenames:  " << ds.images_skipped << '\n'
            << "GHI readings:          " << ds.readings << '\n'
            << "negative GHI clamped:  " << ds.clamped << '\n'
            << "duplicate readings:    " << ds.duplicates << '\n'
            << "aligned pairs:         " << ds.aligned << '\n'
            << "dropped images:        " << ds.dropped << '\n'
            << "night samples removed: " << ds.night_removed << '\n'
            << "usable samples:        " << ds.samples.size() << '\n'
            << "gaps > 1.5 cadence:    " << ds.gaps << '\n';
    }
    if (ds.aligned == 0) {
        throw EmptyInputError("no image could be aligned with a GHI reading");
    }
    return 0;
}

int cmd_train(const Options& o, std::ostream& out)
{
    const PipelineConfig config = build_config(o, false);
    const fs::path out_dir = require_dir(o.out, "--out");
    const ingest::Dataset ds = load(o, config);
    const ingest::Split parts = ingest::split(ds.samples, config.split);
    const pipeline::ModelBundle bundle = pipeline::train(config, parts.train);
    save_bundle(bundle, out_dir);
    if (!o.quiet) {
        out << "trained on " << bundle.info.frames << " frames (" << bundle.info.skipped_images
            << " undecodable), held out " << parts.test.size() << " samples\n";
        for (const auto& h : bundle.horizons) {
            out << "  " << h.label << ": " << h.train_rows << " windows, k=" << h.lsa.k
                << (h.lsa.rank_deficient ? " (rank deficient)" : "") << '\n';
        }
        out << "bundle written to " << out_dir.string() << '\n';
    }
    return 0;
}

void print_reports(std::ostream& out, const pipeline::Evaluation& eval)
{
    out << "horizon   model        nMAPE%     RMSE    nRMSE%      n\n";
    auto line = [&](const metrics::EvalReport& r) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-9s %-11s %7.3f %8.2f %9.3f %6zu\n", r.horizon_label.c_str(),
            r.model.c_str(), r.nmape_pct, r.rmse_wm2, r.nrmse_pct, r.n_samples);
        out << buf;
    };
    for (const auto& r : eval.reports) {
        line(r);
    }
    for (const auto& r : eval.baselines) {
        line(r);
    }
}

int cmd_evaluate(const Options& o, std::ostream& out)
{
    const fs::path out_dir = require_dir(o.out, "--out");
    const pipeline::ModelBundle bundle = load_bundle(require_dir(o.bundle, "--bundle"));
    const ingest::Dataset ds = load(o, bundle.config);
    const ingest::Split parts = ingest::split(ds.samples, bundle.config.split);
    const pipeline::Evaluation eval = pipeline::evaluate(bundle, parts.test);

    make_out_dir(out_dir);
    write_with(out_dir / "report.csv", [&](std::ostream& s) { metrics::write_summary_csv(s, eval.reports); });
    write_with(out_dir / "hourly.csv", [&](std::ostream& s) { metrics::write_hourly_csv(s, eval.reports); });
    write_with(out_dir / "baseline.csv", [&](std::ostream& s) { metrics::write_summary_csv(s, eval.baselines); });
    std::vector<metrics::EvalReport> all = eval.reports;
    all.insert(all.end(), eval.baselines.begin(), eval.baselines.end());
    write_text(out_dir / "report.json", metrics::reports_to_json(all) + "\n");
    if (!o.quiet) {
        print_reports(out, eval);
    }
    return 0;
}

std::vector<int> parse_list_or(const std::string& text, std::vector<int> fallback)
{
    return text.empty() ? fallback : parse_int_list(text);
}

int cmd_tune(const Options& o, std::ostream& out)
{
    const PipelineConfig config = build_config(o, true);
    const fs::path out_dir = require_dir(o.out, "--out");
    std::vector<Index> ks;
    for (int k : parse_list_or(o.k, {5, 10, 20, 40})) {
        ks.push_back(k);
    }
    std::vector<int> lookbacks;
    const auto cadence_min = std::chrono::duration_cast<std::chrono::minutes>(config.cadence).count();
    for (int minutes : parse_list_or(o.lookback_min, {30, 60, 120})) {
        if (minutes <= 0 || minutes % cadence_min != 0) {
            throw ConfigError("look-back " + std::to_string(minutes) + " min is not a positive multiple of the "
                + std::to_string(cadence_min) + " min cadence");
        }
        lookbacks.push_back(static_cast<int>(minutes / cadence_min));
    }

    const ingest::Dataset ds = load(o, config);
    const ingest::Split parts = ingest::split(ds.samples, config.split);
    const pipeline::TuningReport report = pipeline::tune(config, ks, lookbacks, parts.train);

    make_out_dir(out_dir);
    write_with(out_dir / "tuning.csv", [&](std::ostream& s) { pipeline::write_tuning_csv(s, report); });
    if (!o.quiet) {
        std::size_t failed = 0;
        for (const auto& row : report.rows) {
            failed += row.ok ? 0 : 1;
        }
        out << report.rows.size() << " rows written to " << (out_dir / "tuning.csv").string();
        if (failed > 0) {
            out << " (" << failed << " failed cells)";
        }
        out << '\n';
        if (report.best_k) {
            out << "best: k=" << *report.best_k << " lookback=" << *report.best_lookback * cadence_min
                << "min mean nMAPE=" << metrics::format_number(report.best_mean_nmape) << "%\n";
        } else {
            out << "best: none (every cell failed)\n";
        }
    }
    return 0;
}

int cmd_forecast(const Options& o, std::ostream& out)
{
    const pipeline::ModelBundle bundle = load_bundle(require_dir(o.bundle, "--bundle"));
    const ingest::ImageScan scan
        = ingest::scan_image_directory(require_dir(o.images, "--images"), bundle.config.filename_pattern);
    const pipeline::Forecast forecast = pipeline::forecast_latest(bundle, scan.records);

    nlohmann::json doc;
    doc["anchor"] = format_iso8601(forecast.anchor);
    doc["nowcast_wm2"] = forecast.nowcast;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : forecast.horizons) {
        points.push_back({{"horizon", p.label}, {"valid_time", format_iso8601(p.valid_time)}, {"ghi_wm2", p.ghi}});
    }
    doc["horizons"] = points;

    if (!o.quiet) {
        out << "anchor " << format_iso8601(forecast.anchor) << '\n';
        out << "nowcast " << metrics::format_number(forecast.nowcast) << " W/m2\n";
        for (const auto& p : forecast.horizons) {
            out << p.label << ' ' << format_iso8601(p.valid_time) << ' ' << metrics::format_number(p.ghi)
                << " W/m2\n";
        }
    }
    out << doc.dump() << '\n';
    if (!o.out.empty()) {
        make_out_dir(o.out);
        write_text(fs::path(o.out) / "forecast.json", doc.dump(2) + "\n");
    }
    return 0;
}

int cmd_synth(const Options& o, std::ostream& out)
{
    const fs::path out_dir = require_dir(o.out, "--out");
    synth::SynthConfig config;
    config.days = o.days;
    config.image_side = o.side;
    config.noise_sd = o.noise_sd;
    config.cloud = {o.cloud_mean, o.cloud_sd, o.cloud_phi};
    config.cadence = std::chrono::minutes{o.cadence_min};
    config.seed = o.seed.value_or(0);
    const synth::Summary summary = synth::generate(config, out_dir);
    if (!o.quiet) {
        out << summary.samples.size() << " samples written: images in " << summary.images_dir.string()
            << ", readings in " << summary.ghi_csv.string() << ", oracle in " << summary.oracle_csv.string()
            << '\n';
    }
    return 0;
}

int report(std::ostream& err, const char* category, const std::string& message)
{
    std::string flat = message;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    err << "error: " << category << ": " << flat << '\n';
    return exit_code_for(category);
}

} // namespace

int exit_code_for(const char* category)
{
    return std::strcmp(category, category_name(ErrorCategory::io)) == 0 ? 1 : 2;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sky-image GHI nowcasting and forecasting", "ghicast"};
    app.require_subcommand(1);
    Options o;

    auto* check = app.add_subcommand("check", "validate an image directory against a GHI CSV");
    auto* train = app.add_subcommand("train", "fit nowcast and per-horizon models, write a bundle");
    auto* evaluate = app.add_subcommand("evaluate", "score a bundle on the held-out split");
    auto* tune = app.add_subcommand("tune", "sweep LSA rank and look-back on a validation split");
    auto* forecast = app.add_subcommand("forecast", "predict GHI from the newest frames");
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");

    for (auto* cmd : {check, train, tune}) {
        add_config_options(*cmd, o, cmd == tune);
    }
    for (auto* cmd : {check, train, evaluate, tune, forecast}) {
        cmd->add_option("--images", o.images, "image directory (searched recursively)");
    }
    for (auto* cmd : {check, train, evaluate, tune}) {
        cmd->add_option("--ghi", o.ghi, "GHI CSV with header timestamp_utc,ghi_wm2");
    }
    for (auto* cmd : {evaluate, forecast}) {
        cmd->add_option("--bundle", o.bundle, "bundle directory written by train");
    }
    for (auto* cmd : {train, evaluate, tune, forecast, synth}) {
        cmd->add_option("--out", o.out, "output directory");
    }
    for (auto* cmd : {check, train, evaluate, tune, forecast, synth}) {
        cmd->add_flag("--quiet,-q", o.quiet, "suppress the printed summary");
    }
    synth->add_option("--days", o.days, "number of days")->check(CLI::PositiveNumber);
    synth->add_option("--seed", o.seed, "generator seed");
    synth->add_option("--side", o.side, "image side in pixels")->check(CLI::Range(8, 4096));
    synth->add_option("--noise-sd", o.noise_sd, "GHI noise standard deviation (W/m2)")->check(CLI::NonNegativeNumber);
    synth->add_option("--cloud-mean", o.cloud_mean, "AR(1) cloud mean")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--cloud-sd", o.cloud_sd, "AR(1) cloud stationary sd")->check(CLI::NonNegativeNumber);
    synth->add_option("--cloud-phi", o.cloud_phi, "AR(1) lag-one correlation")->check(CLI::Range(0.0, 0.999999));
    synth->add_option("--cadence-min", o.cadence_min, "minutes between frames")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return report(err, category_name(ErrorCategory::config), e.what());
    }

    try {
        if (check->parsed()) {
            return cmd_check(o, out);
        }
        if (train->parsed()) {
            return cmd_train(o, out);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(o, out);
        }
        if (tune->parsed()) {
            return cmd_tune(o, out);
        }
        if (forecast->parsed()) {
            return cmd_forecast(o, out);
        }
        return cmd_synth(o, out);
    } catch (const Error& e) {
        return report(err, category_name(e.category()), e.what());
    } catch (const fs::filesystem_error& e) {
        return report(err, category_name(ErrorCategory::io), e.what());
    } catch (const std::bad_alloc&) {
        return report(err, category_name(ErrorCategory::io), "out of memory");
    }
}

} // namespace ghicast
