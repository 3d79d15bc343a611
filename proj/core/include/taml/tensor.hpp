#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace taml {

using Index = std::int64_t;
using Shape = std::vector<Index>;

Index shape_numel(const Shape& shape);

/// Linear offset of a multi-index in a row-major layout (last index fastest).
Index linear_index(const Shape& shape, std::span<const Index> idx);

/// n-dimensional array of doubles, row-major. The universal numeric carrier:
/// construction validates that product(shape) matches the payload and that
/// every stored value is finite.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    Index ndim() const { return static_cast<Index>(shape_.size()); }
    Index size() const { return static_cast<Index>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](Index linear) const { return data_[static_cast<std::size_t>(linear)]; }
    double& operator[](Index linear) { return data_[static_cast<std::size_t>(linear)]; }

    double at(std::span<const Index> idx) const;
    double& at(std::span<const Index> idx);

    /// Reinterprets the data with a new shape of identical element count.
    DenseTensor reshaped(Shape shape) const;

    bool all_finite() const;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Row-major 2-D array. Kept separate from DenseTensor so matrix contracts
/// (rows/cols) stay explicit in the linear-algebra layer.
class Matrix {
public:
    Matrix() = default;
    Matrix(Index rows, Index cols);
    Matrix(Index rows, Index cols, std::vector<double> data);

    static Matrix identity(Index n);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index size() const { return static_cast<Index>(data_.size()); }

    double operator()(Index r, Index c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    double& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

/// Mode-k matricization: rows index mode `mode`, columns enumerate the
/// remaining modes in ascending mode order, row-major within.
Matrix unfold(const DenseTensor& t, Index mode);

/// Inverse of unfold for the given mode and original shape.
DenseTensor fold(const Matrix& m, Index mode, const Shape& shape);

/// Axis permutation: output axis p carries input axis perm[p].
DenseTensor permute(const DenseTensor& t, const std::vector<Index>& perm);

std::string shape_to_string(const Shape& shape);

}  // namespace taml
