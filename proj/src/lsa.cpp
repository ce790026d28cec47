#include "ghicast/lsa.hpp"

#include "ghicast/error.hpp"
#include "ghicast/random.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace ghicast::lsa {

namespace {

constexpr double zero_singular_value_ratio = 1e-10;

void validate(Index rows, Index cols, Index k)
{
    if (rows < 2) {
        throw ConfigError("truncated SVD needs at least 2 rows, got " + std::to_string(rows));
    }
    const Index limit = std::min(rows, cols);
    if (k < 1 || k > limit) {
        throw ConfigError("rank k=" + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
    }
}

Matrix orthonormal_basis(const Matrix& y)
{
    Eigen::HouseholderQR<Matrix> qr(y);
    return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

// Flip each column so its largest-magnitude entry is positive; fixes the
// sign freedom of singular vectors so every backend returns the same basis.
void canonicalize_signs(Matrix& v)
{
    for (Index j = 0; j < v.cols(); ++j) {
        Index arg = 0;
        v.col(j).cwiseAbs().maxCoeff(&arg);
        if (v(arg, j) < 0.0) {
            v.col(j) = -v.col(j);
        }
    }
}

void finish(Model& model)
{
    canonicalize_signs(model.right_vectors);
    const double top = model.singular_values.size() > 0 ? model.singular_values[0] : 0.0;
    Index nonzero = 0;
    for (Index i = 0; i < model.singular_values.size(); ++i) {
        if (model.singular_values[i] > zero_singular_value_ratio * top && top > 0.0) {
            ++nonzero;
        }
    }
    model.rank_deficient = nonzero < model.k;
}

Model fit_dense(const LinearOperator& x, Index k)
{
    const RowMatrix dense = x.to_dense();
    Model model;
    model.k = k;
    model.input_dim = x.cols();
    if (dense.rows() >= dense.cols()) {
        Eigen::BDCSVD<Matrix> svd(dense, Eigen::ComputeThinV);
        model.singular_values = svd.singularValues().head(k);
        model.right_vectors = svd.matrixV().leftCols(k);
    } else {
        // Wide input: the right singular vectors of X are the left ones of X^T.
        Eigen::BDCSVD<Matrix> svd(dense.transpose(), Eigen::ComputeThinU);
        model.singular_values = svd.singularValues().head(k);
        model.right_vectors = svd.matrixU().leftCols(k);
    }
    finish(model);
    return model;
}

Matrix gaussian(Index rows, Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = rng.normal();
        }
    }
    return m;
}

Model fit_randomized(const LinearOperator& x, Index k, const Options& options)
{
    const Index block = std::min(k + std::max(0, options.oversampling), std::min(x.rows(), x.cols()));
    Matrix basis = orthonormal_basis(x.apply(gaussian(x.cols(), block, options.seed)));

    const int min_sweeps = std::max(0, options.power_iterations);
    const int max_sweeps = options.tolerance > 0.0 ? std::max(min_sweeps, options.max_iterations) : min_sweeps;

    // Subspace iteration on X X^T. `projected` = X^T Q, whose SVD gives the
    // Ritz approximation: X ~ Q (X^T Q)^T = Q W S P^T, so V ~ P.
    Matrix projected = x.apply_transposed(basis);
    int sweep = 0;
    while (sweep < max_sweeps) {
        basis = orthonormal_basis(x.apply(orthonormal_basis(projected)));
        projected = x.apply_transposed(basis);
        ++sweep;
        if (options.tolerance > 0.0 && sweep >= min_sweeps) {
            // X^T u_i = s_i v_i holds exactly for the Ritz pairs, so the
            // remaining residual X v_i - s_i u_i measures convergence.
            Eigen::BDCSVD<Matrix> ritz(projected, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const Vector s = ritz.singularValues().head(k);
            const Matrix left = basis * ritz.matrixV().leftCols(k);
            const Matrix residual = x.apply(ritz.matrixU().leftCols(k)) - left * s.asDiagonal();
            if (residual.colwise().norm().maxCoeff() <= options.tolerance * std::max(s[0], 0.0)) {
                break;
            }
        }
    }

    Eigen::BDCSVD<Matrix> svd(projected, Eigen::ComputeThinU);
    Model model;
    model.k = k;
    model.input_dim = x.cols();
    model.singular_values = svd.singularValues().head(k);
    model.right_vectors = svd.matrixU().leftCols(k);
    model.iterations = sweep;
    finish(model);
    return model;
}

Model fit_model(const LinearOperator& x, Index k, const Options& options)
{
    validate(x.rows(), x.cols(), k);
    bool dense = false;
    switch (options.backend) {
    case Backend::dense: dense = true; break;
    case Backend::randomized: dense = false; break;
    case Backend::automatic: dense = std::min(x.rows(), x.cols()) <= options.dense_threshold; break;
    }
    return dense ? fit_dense(x, k) : fit_randomized(x, k, options);
}

} // namespace

Fit fit(const FeatureMatrix& x, Index k, const Options& options)
{
    const DenseOperator op(x.values);
    Fit result;
    result.model = fit_model(op, k, options);
    result.embedding = transform(result.model, x);
    return result;
}

Fit fit(const LinearOperator& x, Index k, const Options& options)
{
    Fit result;
    result.model = fit_model(x, k, options);
    result.embedding.values = transform(result.model, x);
    return result;
}

FeatureMatrix transform(const Model& model, const FeatureMatrix& t)
{
    if (t.cols() != model.input_dim) {
        throw ShapeError("transform: input has " + std::to_string(t.cols()) + " columns, model expects "
            + std::to_string(model.input_dim));
    }
    FeatureMatrix out;
    out.values = t.values * model.right_vectors;
    out.row_timestamps = t.row_timestamps;
    return out;
}

Matrix transform(const Model& model, const LinearOperator& t)
{
    if (t.cols() != model.input_dim) {
        throw ShapeError("transform: input has " + std::to_string(t.cols()) + " columns, model expects "
            + std::to_string(model.input_dim));
    }
    return t.apply(model.right_vectors);
}

} // namespace ghicast::lsa
