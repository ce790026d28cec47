#pragma once

#include "ghicast/matrix.hpp"

namespace ghicast {

/// A matrix known only through its products. Lets the reducer work on
/// look-back designs without materializing rows * (M*M*3*m) doubles.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual Index rows() const = 0;
    virtual Index cols() const = 0;

    /// this * rhs, rhs has cols() rows.
    virtual Matrix apply(const Matrix& rhs) const = 0;

    /// this^T * rhs, rhs has rows() rows.
    virtual Matrix apply_transposed(const Matrix& rhs) const = 0;

    virtual RowMatrix to_dense() const = 0;
};

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(const RowMatrix& values) : values_(values) {}

    Index rows() const override { return values_.rows(); }
    Index cols() const override { return values_.cols(); }
    Matrix apply(const Matrix& rhs) const override { return values_ * rhs; }
    Matrix apply_transposed(const Matrix& rhs) const override { return values_.transpose() * rhs; }
    RowMatrix to_dense() const override { return values_; }

private:
    const RowMatrix& values_;
};

} // namespace ghicast
