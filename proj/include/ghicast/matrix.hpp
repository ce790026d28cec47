#pragma once

#include "ghicast/time.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ghicast {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major design matrix with one timestamp per row (the row's anchor frame).
struct FeatureMatrix {
    RowMatrix values;
    std::vector<Timestamp> row_timestamps;

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }
};

/// Measured GHI (W/m^2), one per FeatureMatrix row.
using TargetVector = std::vector<double>;

/// Predicted GHI (W/m^2), one per query row.
using PredictionVector = std::vector<double>;

} // namespace ghicast
