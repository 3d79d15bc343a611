#include "taml/evaluator.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace taml {

std::vector<double> OptimizationTrace::best_so_far() const {
    std::vector<double> out;
    out.reserve(entries.size());
    double best = worse_of(mode);
    bool any = false;
    for (const auto& e : entries) {
        if (!any || improves(mode, e.value, best)) {
            best = e.value;
            any = true;
        }
        out.push_back(best);
    }
    return out;
}

const TraceEntry* OptimizationTrace::best() const {
    const TraceEntry* b = nullptr;
    for (const auto& e : entries)
        if (!b || improves(mode, e.value, b->value)) b = &e;
    return b;
}

Evaluator::Evaluator(Objective f, Shape dims, Index budget, OptMode mode, int parallelism)
    : f_(std::move(f)), dims_(std::move(dims)), budget_(budget), parallelism_(parallelism) {
    if (dims_.empty()) throw std::invalid_argument("evaluator: empty dimension list");
    if (budget_ < 1) throw std::invalid_argument("evaluator: budget must be >= 1");
    if (parallelism_ < 1) throw std::invalid_argument("evaluator: parallelism must be >= 1");
    grid_size_ = shape_numel(dims_);
    trace_.mode = mode;
}

bool Evaluator::evaluate(std::span<const MultiIndex> block) {
    // Unseen points, in block order, trimmed to the remaining budget.
    std::vector<const MultiIndex*> todo;
    for (const auto& idx : block) {
        if (cache_.contains(idx)) continue;
        if (static_cast<Index>(todo.size()) >= remaining()) break;
        todo.push_back(&idx);
    }

    std::vector<double> results(todo.size());
    if (parallelism_ <= 1 || todo.size() <= 1) {
        for (std::size_t i = 0; i < todo.size(); ++i) results[i] = f_(*todo[i]);
    } else {
        // Results land in preassigned slots, so thread scheduling cannot
        // change the merge.
        const int workers = static_cast<int>(std::min<std::size_t>(todo.size(), static_cast<std::size_t>(parallelism_)));
        std::exception_ptr error;
        std::mutex error_mu;
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = static_cast<std::size_t>(w); i < todo.size(); i += static_cast<std::size_t>(workers))
                        results[i] = f_(*todo[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mu);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    for (std::size_t i = 0; i < todo.size(); ++i) {
        double v = results[i];
        const bool flagged = !std::isfinite(v);
        if (flagged) v = worse_of(trace_.mode);
        cache_.emplace(*todo[i], v);
        trace_.entries.push_back(TraceEntry{*todo[i], v, static_cast<Index>(trace_.entries.size()) + 1, flagged});
        if (best_idx_ < 0 || improves(trace_.mode, v, best_value()))
            best_idx_ = static_cast<Index>(trace_.entries.size()) - 1;
    }

    // False when the block was cut short by the budget.
    for (const auto& idx : block)
        if (!cache_.contains(idx)) return false;
    return true;
}

}  // namespace taml
