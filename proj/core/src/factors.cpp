#include "taml/factors.hpp"

#include <stdexcept>

#include "taml/tt.hpp"

namespace taml {

Index tucker2_param_count(Index c_in, Index c_out, Index d, Index r) {
    return c_in * r + d * d * r * r + r * c_out;
}

Index TTMatrix::rows() const {
    Index m = 1;
    for (Index f : row_factors) m *= f;
    return m;
}

Index TTMatrix::cols() const {
    Index n = 1;
    for (Index f : col_factors) n *= f;
    return n;
}

std::vector<Index> TTMatrix::ranks() const {
    std::vector<Index> r{1};
    for (const auto& c : cores) r.push_back(c.shape()[3]);
    return r;
}

Index TTMatrix::param_count() const {
    Index n = 0;
    for (const auto& c : cores) n += c.size();
    return n;
}

Matrix ttm_to_matrix(const TTMatrix& w) {
    const auto d = static_cast<Index>(w.cores.size());
    if (d == 0) throw std::invalid_argument("ttm: no cores");
    // Merge the (m_k, n_k) pair of every core and materialize the TT chain.
    std::vector<DenseTensor> merged;
    merged.reserve(w.cores.size());
    for (const auto& c : w.cores) {
        if (c.ndim() != 4) throw std::invalid_argument("ttm: cores must be 4-way");
        merged.push_back(c.reshaped({c.shape()[0], c.shape()[1] * c.shape()[2], c.shape()[3]}));
    }
    DenseTensor full = tt_to_full(TTTensor(std::move(merged)));

    const Index rows = w.rows(), cols = w.cols();
    Matrix out(rows, cols);
    std::vector<Index> ri(static_cast<std::size_t>(d)), ci(static_cast<std::size_t>(d));
    for (Index r = 0; r < rows; ++r) {
        Index rem = r;
        for (Index k = d - 1; k >= 0; --k) {
            ri[static_cast<std::size_t>(k)] = rem % w.row_factors[static_cast<std::size_t>(k)];
            rem /= w.row_factors[static_cast<std::size_t>(k)];
        }
        for (Index c = 0; c < cols; ++c) {
            rem = c;
            for (Index k = d - 1; k >= 0; --k) {
                ci[static_cast<std::size_t>(k)] = rem % w.col_factors[static_cast<std::size_t>(k)];
                rem /= w.col_factors[static_cast<std::size_t>(k)];
            }
            Index lin = 0;
            for (Index k = 0; k < d; ++k) {
                const Index merged_size = w.row_factors[static_cast<std::size_t>(k)] * w.col_factors[static_cast<std::size_t>(k)];
                const Index merged_idx =
                    ri[static_cast<std::size_t>(k)] * w.col_factors[static_cast<std::size_t>(k)] + ci[static_cast<std::size_t>(k)];
                lin = lin * merged_size + merged_idx;
            }
            out(r, c) = full[lin];
        }
    }
    return out;
}

}  // namespace taml
