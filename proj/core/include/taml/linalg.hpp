#pragma once

#include <limits>
#include <vector>

#include "taml/tensor.hpp"

namespace taml {

inline constexpr Index kNoRankLimit = std::numeric_limits<Index>::max();

/// m ≈ u · diag(s) · vᵀ with orthonormal columns in u and v and s sorted
/// non-increasing.
struct SvdResult {
    Matrix u;
    std::vector<double> s;
    Matrix v;
    Index rank() const { return static_cast<Index>(s.size()); }
};

/// Truncated SVD: keeps the minimal rank r such that the discarded tail
/// satisfies sqrt(sum_{i>r} s_i^2) <= tol * ||m||_F, capped at max_rank.
/// At least one singular triple is always kept.
SvdResult svd_truncated(const Matrix& m, double tol, Index max_rank = kNoRankLimit);

/// Same truncation rule against an absolute tail threshold; the workhorse
/// behind tt_svd where the budget is split across unfoldings.
SvdResult svd_truncated_abs(const Matrix& m, double abs_tol, Index max_rank = kNoRankLimit);

/// Thin QR of a tall matrix (rows >= cols): q has orthonormal columns,
/// r is upper triangular. Rank deficiency shows up as tiny diagonal
/// entries of r, not as an error.
struct QrResult {
    Matrix q;
    Matrix r;
};
QrResult qr(const Matrix& m);

/// LQ-style factorization m = l · qt where qt has orthonormal rows. Works
/// for any aspect ratio; the inner dimension is min(rows, cols).
struct LqResult {
    Matrix l;
    Matrix qt;
};
LqResult lq(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
double fro_norm(const Matrix& m);
double fro_norm(const DenseTensor& t);

/// Smallest and largest singular values (for rank checks).
std::pair<double, double> singular_value_range(const Matrix& m);

/// Solves x · a = b for x given square a (i.e. x = b · a⁻¹).
Matrix solve_right(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace taml
