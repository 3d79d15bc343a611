#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "taml/search_space.hpp"

namespace taml {

enum class OptMode { maximize, minimize };

inline double worse_of(OptMode mode) {
    return mode == OptMode::maximize ? -1e18 : 1e18;
}

inline bool improves(OptMode mode, double candidate, double incumbent) {
    return mode == OptMode::maximize ? candidate > incumbent : candidate < incumbent;
}

struct TraceEntry {
    MultiIndex index;
    double value;
    Index ordinal;  // 1-based unique-evaluation counter
    bool flagged;   // objective returned a non-finite value; `value` is the substitute
};

/// Ordered record of every unique objective evaluation plus the config that
/// produced it. best_so_far() is monotone in the optimization direction.
struct OptimizationTrace {
    std::vector<TraceEntry> entries;
    OptMode mode = OptMode::maximize;
    std::string algo;
    std::string config;  // JSON snapshot of the configuration
    std::uint64_t seed = 0;

    std::vector<double> best_so_far() const;
    /// Entry with the best value; earliest ordinal wins ties. Null when empty.
    const TraceEntry* best() const;
};

using Objective = std::function<double(const MultiIndex&)>;

}  // namespace taml
