#pragma once

#include <vector>

#include "taml/linalg.hpp"
#include "taml/tensor.hpp"

namespace taml {

/// One row exchange performed by the maxvol iteration. The pivot magnitude
/// is the factor by which |det(A[I])| grew, so a replay of the swap list
/// doubles as a volume-monotonicity check.
struct MaxvolSwap {
    Index position;   // slot in the index set that was replaced
    Index old_row;    // row of A swapped out
    Index new_row;    // row of A swapped in
    double pivot_abs; // |C| entry that triggered the swap, > 1 + delta
};

struct MaxvolResult {
    std::vector<Index> row_indices;  // r distinct rows of A
    Matrix coeffs;                   // C = A · A[I]⁻¹, n×r
    bool converged = true;           // false when max_iters stopped the sweep
    std::vector<MaxvolSwap> swaps;
};

/// Quasi-maximum-volume row selection for a tall full-rank matrix. On
/// convergence every |C| entry is at most 1 + delta. Ties in pivot
/// selection go to the lowest linear index.
MaxvolResult maxvol(const Matrix& a, double delta = 0.01, int max_iters = 100);

}  // namespace taml
