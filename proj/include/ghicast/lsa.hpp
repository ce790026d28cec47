#pragma once

#include "ghicast/linear_operator.hpp"
#include "ghicast/matrix.hpp"

#include <cstdint>

namespace ghicast::lsa {

enum class Backend {
    automatic,  // dense when min(rows, cols) <= dense_threshold, else randomized
    randomized,
    dense,
};

struct Options {
    Backend backend = Backend::automatic;
    Index dense_threshold = 512;
    int oversampling = 10;
    int power_iterations = 4;
    /// When > 0, subspace iteration continues past `power_iterations` until
    /// every residual |X v_i - sigma_i u_i| of the top k Ritz triplets is at
    /// most tolerance * sigma_1 (or `max_iterations` is reached).
    double tolerance = 0.0;
    int max_iterations = 300;
    std::uint64_t seed = 0;
};

/// Fitted truncated SVD reducer. No mean-centering is applied: the
/// projection is T * V_k on the raw rows.
struct Model {
    Index k = 0;
    Index input_dim = 0;
    Vector singular_values; // length k, non-increasing
    Matrix right_vectors;   // input_dim x k, orthonormal columns
    bool rank_deficient = false; // fewer than k non-zero singular values
    int iterations = 0;          // power sweeps used (0 for dense)
};

struct Fit {
    Model model;
    FeatureMatrix embedding; // X * V_k, rows x k
};

/// Fits a rank-k reducer on X and returns the training embedding X * V_k.
/// Requires X.rows >= 2 and 1 <= k <= min(rows, cols).
Fit fit(const FeatureMatrix& x, Index k, const Options& options = {});

/// Operator form; the embedding carries no timestamps.
Fit fit(const LinearOperator& x, Index k, const Options& options = {});

/// T * V_k. Throws ShapeError when T.cols != input_dim.
FeatureMatrix transform(const Model& model, const FeatureMatrix& t);
Matrix transform(const Model& model, const LinearOperator& t);

} // namespace ghicast::lsa
