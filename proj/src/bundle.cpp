#include "ghicast/bundle.hpp"

#include "ghicast/error.hpp"
#include "ghicast/matrix_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ghicast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* manifest_name = "manifest.json";
constexpr const char* format_name = "ghicast-bundle";

class PayloadWriter {
public:
    explicit PayloadWriter(fs::path dir) : dir_(std::move(dir)) {}

    std::string put(const std::string& name, const RowMatrix& values)
    {
        const WrittenFile file = write_matrix(dir_ / name, values);
        files_[name] = {{"bytes", file.bytes}, {"crc32", file.crc32}};
        return name;
    }

    const json& files() const { return files_; }

private:
    fs::path dir_;
    json files_ = json::object();
};

class PayloadReader {
public:
    PayloadReader(fs::path dir, const json& files) : dir_(std::move(dir)), files_(files) {}

    RowMatrix get(const std::string& name) const
    {
        if (!files_.contains(name)) {
            throw ChecksumError("manifest lists no checksum for " + name);
        }
        const auto crc = files_.at(name).at("crc32").get<std::uint32_t>();
        return read_matrix(dir_ / name, &crc);
    }

private:
    fs::path dir_;
    const json& files_;
};

RowMatrix column(const std::vector<double>& values)
{
    RowMatrix out(Index(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        out(Index(i), 0) = values[i];
    }
    return out;
}

std::vector<double> column_values(const RowMatrix& m)
{
    if (m.cols() != 1 && m.rows() > 0) {
        throw ChecksumError("expected a column payload, found " + std::to_string(m.cols()) + " columns");
    }
    return std::vector<double>(m.data(), m.data() + m.size());
}

json save_regressor(PayloadWriter& writer, const std::string& prefix, const regress::Regressor& model)
{
    if (const auto* knn = std::get_if<regress::KnnModel>(&model)) {
        return {{"kind", "knn"}, {"neighbors", knn->neighbors()},
            {"features", writer.put(prefix + "knn_features.ghim", knn->features())},
            {"targets", writer.put(prefix + "knn_targets.ghim", column(knn->targets()))}};
    }
    const auto& forest = std::get<regress::ForestModel>(model);
    std::size_t total = 0;
    for (const auto& tree : forest.trees()) {
        total += tree.nodes.size();
    }
    RowMatrix nodes(Index(total), 5);
    RowMatrix offsets(Index(forest.trees().size()) + 1, 1);
    Index r = 0;
    offsets(0, 0) = 0;
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
        for (const auto& node : forest.trees()[t].nodes) {
            nodes.row(r++) << node.feature, node.threshold, node.left, node.right, node.value;
        }
        offsets(Index(t) + 1, 0) = static_cast<double>(r);
    }
    return {{"kind", "rf"}, {"trees", forest.trees().size()}, {"input_dim", forest.input_dim()},
        {"nodes", writer.put(prefix + "rf_nodes.ghim", nodes)},
        {"offsets", writer.put(prefix + "rf_offsets.ghim", offsets)}};
}

regress::Regressor load_regressor(const PayloadReader& reader, const json& meta, const PipelineConfig& config)
{
    const auto kind = meta.at("kind").get<std::string>();
    if (kind == "knn") {
        const RowMatrix features = reader.get(meta.at("features").get<std::string>());
        const std::vector<double> targets = column_values(reader.get(meta.at("targets").get<std::string>()));
        if (Index(targets.size()) != features.rows()) {
            throw ChecksumError("KNN features and targets disagree in length");
        }
        return regress::KnnModel(features, targets, meta.at("neighbors").get<int>(), config.regressor.knn_index);
    }
    if (kind != "rf") {
        throw IncompatibleError("unknown regressor kind in bundle: " + kind);
    }
    const RowMatrix nodes = reader.get(meta.at("nodes").get<std::string>());
    const std::vector<double> offsets = column_values(reader.get(meta.at("offsets").get<std::string>()));
    if (nodes.cols() != 5 || offsets.empty() || offsets.back() != static_cast<double>(nodes.rows())) {
        throw ChecksumError("forest node table is inconsistent with its offsets");
    }
    std::vector<regress::DecisionTree> trees(offsets.size() - 1);
    for (std::size_t t = 0; t < trees.size(); ++t) {
        for (auto r = static_cast<Index>(offsets[t]); r < static_cast<Index>(offsets[t + 1]); ++r) {
            regress::TreeNode node;
            node.feature = static_cast<int>(nodes(r, 0));
            node.threshold = nodes(r, 1);
            node.left = static_cast<int>(nodes(r, 2));
            node.right = static_cast<int>(nodes(r, 3));
            node.value = nodes(r, 4);
            trees[t].nodes.push_back(node);
        }
    }
    return regress::ForestModel(std::move(trees), meta.at("input_dim").get<Index>());
}

json timestamp_json(const std::optional<Timestamp>& t)
{
    return t ? json(format_iso8601(*t)) : json(nullptr);
}

std::optional<Timestamp> timestamp_from(const json& value)
{
    if (value.is_null()) {
        return std::nullopt;
    }
    return parse_iso8601(value.get<std::string>());
}

} // namespace

void save_bundle(const pipeline::ModelBundle& bundle, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create bundle directory " + dir.string() + ": " + ec.message());
    }
    PayloadWriter writer(dir);

    json manifest;
    manifest["format"] = format_name;
    manifest["format_version"] = bundle_format_version;
    manifest["matrix_format_version"] = matrix_format_version;
    manifest["config"] = config_entries(bundle.config);
    manifest["config_hash"] = config_hash(bundle.config);
    const auto& info = bundle.info;
    manifest["training"] = {{"samples", info.samples}, {"frames", info.frames},
        {"skipped_images", info.skipped_images}, {"first", timestamp_json(info.first)},
        {"last", timestamp_json(info.last)}};
    manifest["nowcast"] = save_regressor(writer, "nowcast_", bundle.nowcast);

    json horizons = json::array();
    for (const auto& h : bundle.horizons) {
        const std::string prefix = "h" + std::to_string(h.steps) + "_";
        json lsa = {{"k", h.lsa.k}, {"input_dim", h.lsa.input_dim}, {"rank_deficient", h.lsa.rank_deficient},
            {"iterations", h.lsa.iterations},
            {"singular_values",
                writer.put(prefix + "lsa_singular_values.ghim", RowMatrix(h.lsa.singular_values))},
            {"right_vectors", writer.put(prefix + "lsa_right_vectors.ghim", RowMatrix(h.lsa.right_vectors))}};
        horizons.push_back({{"steps", h.steps}, {"label", h.label}, {"train_rows", h.train_rows}, {"lsa", lsa},
            {"regressor", save_regressor(writer, prefix, h.regressor)}});
    }
    manifest["horizons"] = horizons;
    manifest["files"] = writer.files();

    std::ofstream out(dir / manifest_name, std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw IoError("cannot write " + (dir / manifest_name).string());
    }

    std::ofstream log(dir / "training_log.json", std::ios::binary);
    log << json{{"fit_seconds", info.fit_seconds}}.dump(2) << '\n';
    if (!log) {
        throw IoError("cannot write " + (dir / "training_log.json").string());
    }
}

pipeline::ModelBundle load_bundle(const fs::path& dir, const PipelineConfig* expected)
{
    const fs::path manifest_path = dir / manifest_name;
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + manifest_path.string());
    }
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw ChecksumError(manifest_path.string() + " is not valid JSON: " + e.what());
    }

    try {
        if (manifest.value("format", std::string()) != format_name) {
            throw IncompatibleError(manifest_path.string() + " is not a ghicast bundle manifest");
        }
        const int version = manifest.at("format_version").get<int>();
        if (version != bundle_format_version) {
            throw IncompatibleError("bundle format version " + std::to_string(version) + ", this build reads version "
                + std::to_string(bundle_format_version));
        }

        const auto entries = manifest.at("config").get<std::map<std::string, std::string>>();
        PipelineConfig config = config_from_entries(entries);
        const auto stored_hash = manifest.at("config_hash").get<std::string>();
        if (config_hash(config) != stored_hash) {
            throw IncompatibleError("bundle config does not reproduce its recorded hash " + stored_hash);
        }
        if (expected != nullptr) {
            config.threads = expected->threads;
            const std::string wanted = config_hash(*expected);
            if (wanted != stored_hash) {
                throw IncompatibleError("bundle config hash " + stored_hash + " differs from requested config hash "
                    + wanted);
            }
        }

        const PayloadReader reader(dir, manifest.at("files"));
        const json& training = manifest.at("training");
        pipeline::TrainingInfo info;
        info.samples = training.at("samples").get<std::size_t>();
        info.frames = training.at("frames").get<std::size_t>();
        info.skipped_images = training.at("skipped_images").get<std::size_t>();
        info.first = timestamp_from(training.at("first"));
        info.last = timestamp_from(training.at("last"));

        pipeline::ModelBundle bundle{config, load_regressor(reader, manifest.at("nowcast"), config), {}, info};
        for (const auto& h : manifest.at("horizons")) {
            const json& lsa_meta = h.at("lsa");
            lsa::Model lsa;
            lsa.k = lsa_meta.at("k").get<Index>();
            lsa.input_dim = lsa_meta.at("input_dim").get<Index>();
            lsa.rank_deficient = lsa_meta.at("rank_deficient").get<bool>();
            lsa.iterations = lsa_meta.at("iterations").get<int>();
            const RowMatrix sv = reader.get(lsa_meta.at("singular_values").get<std::string>());
            const RowMatrix rv = reader.get(lsa_meta.at("right_vectors").get<std::string>());
            if (sv.size() != lsa.k || rv.rows() != lsa.input_dim || rv.cols() != lsa.k) {
                throw ChecksumError("LSA payload shape disagrees with the manifest for horizon "
                    + h.at("label").get<std::string>());
            }
            lsa.singular_values = Eigen::Map<const Vector>(sv.data(), sv.size());
            lsa.right_vectors = rv;
            bundle.horizons.push_back(pipeline::HorizonModel{h.at("steps").get<int>(), h.at("label").get<std::string>(),
                std::move(lsa), load_regressor(reader, h.at("regressor"), config),
                h.at("train_rows").get<std::size_t>()});
        }
        return bundle;
    } catch (const json::exception& e) {
        throw ChecksumError(manifest_path.string() + " is malformed: " + e.what());
    }
}

} // namespace ghicast
