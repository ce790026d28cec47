#pragma once

#include "ghicast/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ghicast::regress {

struct ForestConfig {
    int n_trees = 200;
    int max_depth = 100;
    int min_samples_leaf = 1;
    int max_features = 0; // candidate dims per split; 0 means ceil(sqrt(d))
    std::uint64_t seed = 0;
    int threads = 1; // growth parallelism; never changes the result
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0; // rows with x[feature] <= threshold go left
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf mean
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // preorder, root at 0

    double predict(const double* row) const;
    int depth() const;
};

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<DecisionTree> trees, Index input_dim);

    const std::vector<DecisionTree>& trees() const { return trees_; }
    Index input_dim() const { return input_dim_; }

    double predict_row(const double* row) const;
    PredictionVector predict(const RowMatrix& queries) const;

private:
    std::vector<DecisionTree> trees_;
    Index input_dim_ = 0;
};

int features_per_split(const ForestConfig& config, Index dim);

/// Bootstrap draw (n rows with replacement) for tree `tree_index`; depends
/// only on (seed, tree index, n).
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t tree_index);

/// Grows one variance-reduction regression tree on the given sample rows
/// (repeats allowed). `feature_seed` drives the per-split candidate draws.
DecisionTree grow_tree(const RowMatrix& x, std::span<const double> y, std::span<const std::size_t> rows,
    const ForestConfig& config, std::uint64_t feature_seed);

/// Seed for the candidate-feature stream of tree `tree_index`.
std::uint64_t tree_feature_seed(std::uint64_t seed, std::size_t tree_index);

ForestModel rf_fit(const FeatureMatrix& x, const TargetVector& y, const ForestConfig& config = {});
ForestModel rf_fit(const RowMatrix& x, const TargetVector& y, const ForestConfig& config = {});

PredictionVector rf_predict(const ForestModel& model, const FeatureMatrix& queries);

} // namespace ghicast::regress
