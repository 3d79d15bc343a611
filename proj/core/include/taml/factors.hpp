#pragma once

#include <cstdint>
#include <vector>

#include "taml/linalg.hpp"
#include "taml/tensor.hpp"

namespace taml {

/// Channel-bottleneck factorization of a 4-D conv kernel
/// (C_out, C_in, D, D): K[o,i,d1,d2] = Σ_{a,b} u_out[o,a]·core[a,b,d1,d2]·u_in[i,b].
struct Tucker2Factors {
    Matrix u_in;       // C_in x R
    DenseTensor core;  // (R, R, D, D)
    Matrix u_out;      // C_out x R

    Index rank() const { return u_in.cols(); }
    Index param_count() const { return u_in.size() + core.size() + u_out.size(); }
};

/// Parameter count of a bottleneck-factorized conv layer: C_in·R + D²·R² + R·C_out.
Index tucker2_param_count(Index c_in, Index c_out, Index d, Index r);

/// TT representation of an M x N matrix with factored, interleaved row/col
/// dimensions: cores are 4-way (r_{k-1}, m_k, n_k, r_k), Π m_k = M, Π n_k = N.
struct TTMatrix {
    std::vector<Index> row_factors;
    std::vector<Index> col_factors;
    std::vector<DenseTensor> cores;

    Index rows() const;
    Index cols() const;
    std::vector<Index> ranks() const;
    Index param_count() const;
};

/// Contracts the TT chain back to the dense M x N matrix.
Matrix ttm_to_matrix(const TTMatrix& w);

/// b-bit asymmetric affine quantization storage: value ≈ (code - zero_point)·scale.
struct QuantizedTensor {
    std::vector<std::uint8_t> codes;  // one code per element, also for 4-bit
    int bits = 8;                     // 4 or 8
    double scale = 1.0;
    std::int64_t zero_point = 0;
    Shape shape;
};

}  // namespace taml
