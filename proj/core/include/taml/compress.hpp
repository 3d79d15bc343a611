#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "taml/factors.hpp"
#include "taml/nn.hpp"
#include "taml/tensor.hpp"

namespace taml {

/// Plan/type mismatches (unknown layer, incompatible action) — mapped to
/// their own CLI exit code.
struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Tucker2Result {
    Tucker2Factors factors;
    double rel_error;
    std::vector<double> error_history;  // relative error after init and each ALS pass
};

/// Bottleneck factorization of a (C_out, C_in, D, D) kernel: HOSVD init on
/// the channel modes followed by alternating updates; the relative error is
/// non-increasing across iterations.
Tucker2Result tucker2_decompose(const DenseTensor& kernel, Index rank, int max_iters = 50, double tol = 1e-8);

DenseTensor tucker2_reconstruct(const Tucker2Factors& f);

struct TtmResult {
    TTMatrix ttm;
    double rel_error;
};

/// TT-matrix factorization: reshape to the factored row/col modes,
/// interleave, merge pairs, and run the TT sweep at the given tolerance.
TtmResult ttm_decompose(const Matrix& w, const std::vector<Index>& row_factors, const std::vector<Index>& col_factors,
                        double tol, Index max_rank = kNoRankLimit);

struct PruneResult {
    DenseTensor tensor;
    std::vector<std::uint8_t> mask;  // 1 = kept
    double achieved_sparsity;
};

/// Zeroes the floor(s*len) smallest-magnitude entries; magnitude ties are
/// broken toward the lowest linear index.
PruneResult prune_magnitude(const DenseTensor& t, double sparsity);

/// Asymmetric affine quantization to b in {4, 8} bits.
QuantizedTensor quantize_uniform(const DenseTensor& t, int bits);
DenseTensor dequantize(const QuantizedTensor& q);

// ---- whole-model compression ----

struct Tucker2Action {
    std::optional<Index> rank;  // empty = auto
    double target_ratio = 0.0;  // used when rank is empty
};
struct TtmActionSpec {
    std::vector<Index> row_factors;
    std::vector<Index> col_factors;
    double tol = 0.0;
    Index max_rank = kNoRankLimit;
};
struct PruneAction {
    double sparsity;
};
struct QuantAction {
    int bits;
};
using CompressAction = std::variant<Tucker2Action, TtmActionSpec, PruneAction, QuantAction>;

struct CompressionPlan {
    std::map<std::string, std::vector<CompressAction>> layers;
    std::vector<CompressAction> defaults;

    static CompressionPlan from_json(const std::string& text);
};

struct LayerReport {
    Index params_before = 0;
    Index params_after = 0;
    double rel_error = 0.0;
    std::vector<std::string> actions;
};

struct CompressionReport {
    std::map<std::string, LayerReport> layers;  // every layer, compressed or not
    Index params_before = 0;
    Index params_after = 0;
    double coefficient = 1.0;

    std::string to_json() const;
};

struct CompressResult {
    ModelGraph model;
    CompressionReport report;
};

/// Applies the plan layer by layer in the fixed pipeline order
/// factorize -> prune -> quantize. Explicit plan entries must match the
/// layer type; default actions skip incompatible layers.
CompressResult compress_model(const ModelGraph& model, const CompressionPlan& plan);

}  // namespace taml
