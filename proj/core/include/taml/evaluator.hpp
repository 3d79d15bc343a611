#pragma once

#include <span>
#include <unordered_map>

#include "taml/trace.hpp"

namespace taml {

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& idx) const {
        std::size_t h = 1469598103934665603ull;
        for (Index v : idx) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

/// Caching evaluation front-end shared by every optimizer: counts only
/// unique objective calls against the budget, records the trace, substitutes
/// a worst-possible sentinel for non-finite returns, and dispatches each
/// batch across up to `parallelism` threads with an order-independent merge.
class Evaluator {
public:
    Evaluator(Objective f, Shape dims, Index budget, OptMode mode, int parallelism = 1);

    /// Evaluates the unseen points of `block` in order until done or budget
    /// is exhausted. Returns false once the budget is spent.
    bool evaluate(std::span<const MultiIndex> block);

    bool has(const MultiIndex& idx) const { return cache_.contains(idx); }
    double value(const MultiIndex& idx) const { return cache_.at(idx); }

    Index evals() const { return static_cast<Index>(trace_.entries.size()); }
    Index budget() const { return budget_; }
    Index remaining() const { return budget_ - evals(); }
    bool exhausted() const { return remaining() <= 0 || evals() >= grid_size_; }
    Index grid_size() const { return grid_size_; }
    const Shape& dims() const { return dims_; }
    OptMode mode() const { return trace_.mode; }

    bool has_best() const { return best_idx_ >= 0; }
    double best_value() const { return trace_.entries[static_cast<std::size_t>(best_idx_)].value; }
    const MultiIndex& best_index() const { return trace_.entries[static_cast<std::size_t>(best_idx_)].index; }

    OptimizationTrace& trace() { return trace_; }
    const OptimizationTrace& trace() const { return trace_; }

private:
    Objective f_;
    Shape dims_;
    Index budget_;
    Index grid_size_;
    int parallelism_;
    std::unordered_map<MultiIndex, double, MultiIndexHash> cache_;
    OptimizationTrace trace_;
    Index best_idx_ = -1;
};

}  // namespace taml
