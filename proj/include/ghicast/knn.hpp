#pragma once

#include "ghicast/matrix.hpp"

#include <memory>
#include <span>
#include <vector>

namespace ghicast::regress {

enum class KnnIndex {
    automatic, // kd-tree for low-dimensional features, exhaustive otherwise
    brute_force,
    kd_tree,
};

class KdTree;

/// Lazy K-nearest-neighbours regressor (Euclidean, unweighted mean).
///
/// Neighbour order is (squared distance, training row) ascending, so ties go
/// to the lower row index. The kd-tree path evaluates distances with the
/// same arithmetic as the exhaustive path and prunes only on strict
/// inequality, so both return identical neighbour sets.
class KnnModel {
public:
    KnnModel(RowMatrix features, TargetVector targets, int neighbors, KnnIndex index = KnnIndex::automatic);
    ~KnnModel();
    KnnModel(const KnnModel&);
    KnnModel& operator=(const KnnModel&);
    KnnModel(KnnModel&&) noexcept;
    KnnModel& operator=(KnnModel&&) noexcept;

    const RowMatrix& features() const { return features_; }
    const TargetVector& targets() const { return targets_; }
    int neighbors() const { return neighbors_; }
    Index dim() const { return features_.cols(); }
    bool uses_tree() const { return tree_ != nullptr; }

    /// Training rows of the K nearest neighbours, nearest first.
    std::vector<std::size_t> nearest(std::span<const double> query) const;

    PredictionVector predict(const RowMatrix& queries) const;

private:
    RowMatrix features_;
    TargetVector targets_;
    int neighbors_;
    std::unique_ptr<KdTree> tree_;
};

/// Dimension at or below which `automatic` builds a kd-tree.
inline constexpr Index kd_tree_max_dim = 32;

KnnModel knn_fit(const FeatureMatrix& x, const TargetVector& y, int neighbors = 2,
    KnnIndex index = KnnIndex::automatic);

PredictionVector knn_predict(const KnnModel& model, const FeatureMatrix& queries);

/// Squared Euclidean distance with a fixed summation order.
double squared_distance(const double* a, const double* b, Index dim);

} // namespace ghicast::regress
