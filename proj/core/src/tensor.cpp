#include "taml/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace taml {

Index shape_numel(const Shape& shape) {
    Index n = 1;
    for (Index d : shape) {
        if (d <= 0) throw std::invalid_argument("shape dimensions must be positive");
        n *= d;
    }
    return n;
}

Index linear_index(const Shape& shape, std::span<const Index> idx) {
    if (idx.size() != shape.size()) throw std::invalid_argument("multi-index rank mismatch");
    Index lin = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= shape[k]) throw std::out_of_range("multi-index out of range");
        lin = lin * shape[k] + idx[k];
    }
    return lin;
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(shape_numel(shape_)), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != static_cast<Index>(data_.size()))
        throw std::invalid_argument("tensor data length does not match shape");
    if (!all_finite()) throw std::invalid_argument("tensor contains non-finite values");
}

double DenseTensor::at(std::span<const Index> idx) const {
    return data_[static_cast<std::size_t>(linear_index(shape_, idx))];
}

double& DenseTensor::at(std::span<const Index> idx) {
    return data_[static_cast<std::size_t>(linear_index(shape_, idx))];
}

DenseTensor DenseTensor::reshaped(Shape shape) const {
    if (shape_numel(shape) != size()) throw std::invalid_argument("reshape changes element count");
    DenseTensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

bool DenseTensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix::Matrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows * cols), 0.0);
}

Matrix::Matrix(Index rows, Index cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
    if (rows * cols != static_cast<Index>(data_.size()))
        throw std::invalid_argument("matrix data length does not match rows*cols");
}

Matrix Matrix::identity(Index n) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix unfold(const DenseTensor& t, Index mode) {
    const Shape& shape = t.shape();
    const Index d = t.ndim();
    if (mode < 0 || mode >= d) throw std::out_of_range("unfold mode out of range");

    Index rows = shape[static_cast<std::size_t>(mode)];
    Index cols = t.size() / rows;

    // Strides of the original row-major layout.
    std::vector<Index> stride(static_cast<std::size_t>(d), 1);
    for (Index k = d - 2; k >= 0; --k)
        stride[static_cast<std::size_t>(k)] = stride[static_cast<std::size_t>(k + 1)] * shape[static_cast<std::size_t>(k + 1)];

    // Remaining modes in ascending order define the column ordering.
    std::vector<Index> rest;
    rest.reserve(static_cast<std::size_t>(d - 1));
    for (Index k = 0; k < d; ++k)
        if (k != mode) rest.push_back(k);

    Matrix out(rows, cols);
    std::vector<Index> ridx(rest.size(), 0);
    for (Index c = 0; c < cols; ++c) {
        Index base = 0;
        for (std::size_t j = 0; j < rest.size(); ++j)
            base += ridx[j] * stride[static_cast<std::size_t>(rest[j])];
        const Index mstride = stride[static_cast<std::size_t>(mode)];
        for (Index r = 0; r < rows; ++r) out(r, c) = t[base + r * mstride];
        // advance the row-major counter over the remaining modes
        for (Index j = static_cast<Index>(rest.size()) - 1; j >= 0; --j) {
            auto uj = static_cast<std::size_t>(j);
            if (++ridx[uj] < shape[static_cast<std::size_t>(rest[uj])]) break;
            ridx[uj] = 0;
        }
    }
    return out;
}

DenseTensor fold(const Matrix& m, Index mode, const Shape& shape) {
    const Index d = static_cast<Index>(shape.size());
    if (mode < 0 || mode >= d) throw std::out_of_range("fold mode out of range");
    const Index numel = shape_numel(shape);
    if (m.rows() != shape[static_cast<std::size_t>(mode)] || m.rows() * m.cols() != numel)
        throw std::invalid_argument("fold: matrix size does not match target shape");

    std::vector<Index> stride(static_cast<std::size_t>(d), 1);
    for (Index k = d - 2; k >= 0; --k)
        stride[static_cast<std::size_t>(k)] = stride[static_cast<std::size_t>(k + 1)] * shape[static_cast<std::size_t>(k + 1)];

    std::vector<Index> rest;
    for (Index k = 0; k < d; ++k)
        if (k != mode) rest.push_back(k);

    DenseTensor out(shape);
    std::vector<Index> ridx(rest.size(), 0);
    for (Index c = 0; c < m.cols(); ++c) {
        Index base = 0;
        for (std::size_t j = 0; j < rest.size(); ++j)
            base += ridx[j] * stride[static_cast<std::size_t>(rest[j])];
        const Index mstride = stride[static_cast<std::size_t>(mode)];
        for (Index r = 0; r < m.rows(); ++r) out[base + r * mstride] = m(r, c);
        for (Index j = static_cast<Index>(rest.size()) - 1; j >= 0; --j) {
            auto uj = static_cast<std::size_t>(j);
            if (++ridx[uj] < shape[static_cast<std::size_t>(rest[uj])]) break;
            ridx[uj] = 0;
        }
    }
    return out;
}

DenseTensor permute(const DenseTensor& t, const std::vector<Index>& perm) {
    const Index d = t.ndim();
    if (static_cast<Index>(perm.size()) != d) throw std::invalid_argument("permute: axis count mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    Shape out_shape(static_cast<std::size_t>(d));
    for (Index p = 0; p < d; ++p) {
        const Index src = perm[static_cast<std::size_t>(p)];
        if (src < 0 || src >= d || seen[static_cast<std::size_t>(src)])
            throw std::invalid_argument("permute: invalid permutation");
        seen[static_cast<std::size_t>(src)] = true;
        out_shape[static_cast<std::size_t>(p)] = t.shape()[static_cast<std::size_t>(src)];
    }

    std::vector<Index> in_stride(static_cast<std::size_t>(d), 1);
    for (Index k = d - 2; k >= 0; --k)
        in_stride[static_cast<std::size_t>(k)] =
            in_stride[static_cast<std::size_t>(k + 1)] * t.shape()[static_cast<std::size_t>(k + 1)];

    DenseTensor out(out_shape);
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    for (Index lin = 0; lin < out.size(); ++lin) {
        Index src_lin = 0;
        for (Index p = 0; p < d; ++p)
            src_lin += idx[static_cast<std::size_t>(p)] * in_stride[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
        out[lin] = t[src_lin];
        for (Index p = d - 1; p >= 0; --p) {
            auto up = static_cast<std::size_t>(p);
            if (++idx[up] < out_shape[up]) break;
            idx[up] = 0;
        }
    }
    return out;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

}  // namespace taml
