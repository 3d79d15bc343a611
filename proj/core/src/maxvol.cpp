#include "taml/maxvol.hpp"

#include <cmath>
#include <stdexcept>

namespace taml {

MaxvolResult maxvol(const Matrix& a, double delta, int max_iters) {
    const Index n = a.rows();
    const Index r = a.cols();
    if (n < r || r < 1) throw std::invalid_argument("maxvol requires n >= r >= 1");
    if (delta < 0) throw std::invalid_argument("maxvol: delta must be >= 0");

    const auto [smin, smax] = singular_value_range(a);
    if (!(smin > 1e-12 * smax)) throw std::invalid_argument("maxvol: input is numerically rank-deficient");

    // Initial index set: Gaussian elimination with partial (row) pivoting.
    Matrix w = a;
    std::vector<Index> index_set;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (Index j = 0; j < r; ++j) {
        Index pivot_row = -1;
        double best = -1.0;
        for (Index i = 0; i < n; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            const double v = std::abs(w(i, j));
            if (v > best) {
                best = v;
                pivot_row = i;
            }
        }
        used[static_cast<std::size_t>(pivot_row)] = true;
        index_set.push_back(pivot_row);
        const double pivot = w(pivot_row, j);
        if (pivot == 0.0) continue;  // deficiency was ruled out above; guard anyway
        for (Index i = 0; i < n; ++i) {
            if (i == pivot_row) continue;
            const double f = w(i, j) / pivot;
            if (f == 0.0) continue;
            for (Index c = j; c < r; ++c) w(i, c) -= f * w(pivot_row, c);
        }
    }

    // C = A · A[I]⁻¹.
    Matrix a_sub(r, r);
    for (Index j = 0; j < r; ++j)
        for (Index c = 0; c < r; ++c) a_sub(j, c) = a(index_set[static_cast<std::size_t>(j)], c);
    Matrix coeffs = solve_right(a_sub, a);

    MaxvolResult result;
    result.converged = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        Index bi = 0, bj = 0;
        double best = -1.0;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < r; ++j) {
                const double v = std::abs(coeffs(i, j));
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (best <= 1.0 + delta) {
            result.converged = true;
            break;
        }

        // Swap row bi into slot bj and apply the rank-1 update of C.
        std::vector<double> col(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = coeffs(i, bj);
        std::vector<double> row(static_cast<std::size_t>(r));
        for (Index j = 0; j < r; ++j) row[static_cast<std::size_t>(j)] = coeffs(bi, j);
        const double pivot = coeffs(bi, bj);
        for (Index i = 0; i < n; ++i) {
            const double ci = col[static_cast<std::size_t>(i)] / pivot;
            if (ci == 0.0) continue;
            for (Index j = 0; j < r; ++j) {
                const double rj = row[static_cast<std::size_t>(j)] - (j == bj ? 1.0 : 0.0);
                coeffs(i, j) -= ci * rj;
            }
        }
        result.swaps.push_back(MaxvolSwap{bj, index_set[static_cast<std::size_t>(bj)], bi, best});
        index_set[static_cast<std::size_t>(bj)] = bi;
    }

    result.row_indices = std::move(index_set);
    result.coeffs = std::move(coeffs);
    return result;
}

}  // namespace taml
