#include "ghicast/forest.hpp"

#include "ghicast/error.hpp"
#include "ghicast/random.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <numeric>
#include <thread>

namespace ghicast::regress {

double DecisionTree::predict(const double* row) const
{
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(id)];
        id = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
}

int DecisionTree::depth() const
{
    if (nodes.empty()) {
        return 0;
    }
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (nodes[i].feature >= 0) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, Index input_dim)
    : trees_(std::move(trees)), input_dim_(input_dim)
{
}

double ForestModel::predict_row(const double* row) const
{
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& tree : trees_) {
        const double v = tree.predict(row);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // The rounded mean of values in [lo, hi] can land one ulp outside.
    return std::clamp(sum / static_cast<double>(trees_.size()), lo, hi);
}

PredictionVector ForestModel::predict(const RowMatrix& queries) const
{
    if (queries.cols() != input_dim_) {
        throw ShapeError("forest query matrix has " + std::to_string(queries.cols()) + " columns, model expects "
            + std::to_string(input_dim_));
    }
    if (trees_.empty()) {
        throw ConfigError("forest has no trees");
    }
    PredictionVector out(static_cast<std::size_t>(queries.rows()));
    for (Index q = 0; q < queries.rows(); ++q) {
        out[static_cast<std::size_t>(q)] = predict_row(queries.row(q).data());
    }
    return out;
}

int features_per_split(const ForestConfig& config, Index dim)
{
    if (config.max_features > 0) {
        return static_cast<int>(std::min<Index>(config.max_features, dim));
    }
    const auto p = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(dim))));
    return static_cast<int>(std::clamp<Index>(p, 1, dim));
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t tree_index)
{
    Rng rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(tree_index)));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) {
        r = rng.index(n);
    }
    return rows;
}

std::uint64_t tree_feature_seed(std::uint64_t seed, std::size_t tree_index)
{
    return mix_seed(seed, 2 * static_cast<std::uint64_t>(tree_index) + 1);
}

namespace {

class TreeGrower {
public:
    TreeGrower(const RowMatrix& x, std::span<const double> y, const ForestConfig& config, std::uint64_t seed)
        : x_(x), y_(y), config_(config), rng_(seed), candidates_(features_per_split(config, x.cols()))
    {
        permutation_.resize(static_cast<std::size_t>(x.cols()));
        std::iota(permutation_.begin(), permutation_.end(), 0);
    }

    DecisionTree grow(std::vector<std::size_t> rows)
    {
        DecisionTree tree;
        nodes_ = &tree.nodes;
        grow_node(std::move(rows), 0);
        return tree;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = -std::numeric_limits<double>::infinity();
    };

    int make_leaf(int id, std::vector<double>& sorted_targets)
    {
        const double sum = std::accumulate(sorted_targets.begin(), sorted_targets.end(), 0.0);
        const double mean = sum / static_cast<double>(sorted_targets.size());
        (*nodes_)[static_cast<std::size_t>(id)].value
            = std::clamp(mean, sorted_targets.front(), sorted_targets.back());
        return id;
    }

    int grow_node(std::vector<std::size_t> rows, int depth)
    {
        const int id = static_cast<int>(nodes_->size());
        nodes_->push_back({});

        // Targets are summed in sorted order so the leaf value depends only on
        // the multiset of samples, not on their row order.
        std::vector<double> targets;
        targets.reserve(rows.size());
        for (std::size_t r : rows) {
            targets.push_back(y_[r]);
        }
        std::sort(targets.begin(), targets.end());

        const auto n = rows.size();
        const bool pure = targets.front() == targets.back();
        if (depth >= config_.max_depth || pure || n < 2 * static_cast<std::size_t>(config_.min_samples_leaf)) {
            return make_leaf(id, targets);
        }

        const Split best = find_split(rows);
        if (best.feature < 0) {
            return make_leaf(id, targets);
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            (x_(Index(r), best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left = grow_node(std::move(left_rows), depth + 1);
        const int right = grow_node(std::move(right_rows), depth + 1);
        TreeNode& node = (*nodes_)[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    // Draws candidate dims without replacement; if none of the first p admits
    // a valid split (constant in this node), keeps drawing until one does.
    Split find_split(const std::vector<std::size_t>& rows)
    {
        Split best;
        const std::size_t dims = permutation_.size();
        for (std::size_t i = 0; i < dims; ++i) {
            if (i >= static_cast<std::size_t>(candidates_) && best.feature >= 0) {
                break;
            }
            std::swap(permutation_[i], permutation_[i + rng_.index(dims - i)]);
            evaluate_feature(rows, permutation_[i], best);
        }
        return best;
    }

    void evaluate_feature(const std::vector<std::size_t>& rows, int feature, Split& best)
    {
        points_.clear();
        for (std::size_t r : rows) {
            points_.emplace_back(x_(Index(r), feature), y_[r]);
        }
        std::sort(points_.begin(), points_.end());

        const std::size_t n = points_.size();
        const auto min_leaf = static_cast<std::size_t>(std::max(1, config_.min_samples_leaf));
        double total = 0.0;
        for (const auto& p : points_) {
            total += p.second;
        }
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += points_[i].second;
            const std::size_t n_left = i + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf || !(points_[i].first < points_[i + 1].first)) {
                continue;
            }
            // Maximizing this is minimizing the summed child squared error.
            const double right_sum = total - left_sum;
            const double score = left_sum * left_sum / double(n_left) + right_sum * right_sum / double(n_right);
            if (score > best.score) {
                const double a = points_[i].first;
                const double b = points_[i + 1].first;
                double threshold = a + (b - a) * 0.5;
                if (!(threshold < b) || threshold < a) {
                    threshold = a;
                }
                best = {feature, threshold, score};
            }
        }
    }

    const RowMatrix& x_;
    std::span<const double> y_;
    const ForestConfig& config_;
    Rng rng_;
    int candidates_;
    std::vector<int> permutation_;
    std::vector<std::pair<double, double>> points_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

} // namespace

DecisionTree grow_tree(const RowMatrix& x, std::span<const double> y, std::span<const std::size_t> rows,
    const ForestConfig& config, std::uint64_t feature_seed)
{
    if (rows.empty()) {
        throw ConfigError("cannot grow a tree on zero samples");
    }
    TreeGrower grower(x, y, config, feature_seed);
    return grower.grow(std::vector<std::size_t>(rows.begin(), rows.end()));
}

ForestModel rf_fit(const RowMatrix& x, const TargetVector& y, const ForestConfig& config)
{
    if (x.rows() == 0 || y.empty()) {
        throw ConfigError("random forest needs a non-empty training set");
    }
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ShapeError("forest: " + std::to_string(x.rows()) + " feature rows but " + std::to_string(y.size())
            + " targets");
    }
    if (x.rows() < 2) {
        throw ConfigError("random forest needs at least 2 training rows");
    }
    if (config.n_trees < 1 || config.max_depth < 0 || config.min_samples_leaf < 1) {
        throw ConfigError("forest needs n_trees >= 1, max_depth >= 0, min_samples_leaf >= 1");
    }

    const auto n_trees = static_cast<std::size_t>(config.n_trees);
    std::vector<DecisionTree> trees(n_trees);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < n_trees; t = next++) {
            const auto rows = bootstrap_rows(y.size(), config.seed, t);
            trees[t] = grow_tree(x, y, rows, config, tree_feature_seed(config.seed, t));
        }
    };
    const int threads = std::clamp(config.threads, 1, config.n_trees);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
    }
    return ForestModel(std::move(trees), x.cols());
}

ForestModel rf_fit(const FeatureMatrix& x, const TargetVector& y, const ForestConfig& config)
{
    return rf_fit(x.values, y, config);
}

PredictionVector rf_predict(const ForestModel& model, const FeatureMatrix& queries)
{
    return model.predict(queries.values);
}

} // namespace ghicast::regress
