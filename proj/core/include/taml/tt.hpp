#pragma once

#include <span>
#include <vector>

#include "taml/linalg.hpp"
#include "taml/tensor.hpp"

namespace taml {

/// Tensor in tensor-train format: a chain of 3-way cores, core k of shape
/// (r_{k-1}, n_k, r_k) with boundary ranks r_0 = r_d = 1.
class TTTensor {
public:
    explicit TTTensor(std::vector<DenseTensor> cores);

    Index ndim() const { return static_cast<Index>(cores_.size()); }
    Shape mode_sizes() const;
    /// All d+1 ranks including the unit boundaries.
    std::vector<Index> ranks() const;
    Index param_count() const;

    const DenseTensor& core(Index k) const { return cores_[static_cast<std::size_t>(k)]; }
    const std::vector<DenseTensor>& cores() const { return cores_; }

private:
    std::vector<DenseTensor> cores_;
};

/// Sequential-SVD construction of a TT with relative error at most tol;
/// the budget is split as tol/sqrt(d-1) across the d-1 truncations.
TTTensor tt_svd(const DenseTensor& t, double tol, Index max_rank = kNoRankLimit);

double tt_eval(const TTTensor& tt, std::span<const Index> idx);

inline constexpr Index kDefaultDenseCap = 10'000'000;

/// Materializes the dense tensor; refuses when the element count exceeds cap.
DenseTensor tt_to_full(const TTTensor& tt, Index cap = kDefaultDenseCap);

/// Re-compresses a TT to the given relative tolerance; ranks never grow.
TTTensor tt_round(const TTTensor& tt, double tol, Index max_rank = kNoRankLimit);

double tt_dot(const TTTensor& a, const TTTensor& b);
double tt_norm(const TTTensor& tt);

}  // namespace taml
