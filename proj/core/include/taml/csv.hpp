#pragma once

#include <string>
#include <vector>

#include "taml/nn.hpp"
#include "taml/trace.hpp"

namespace taml {

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string double_to_string(double v);

/// Pinned experiment schema: algo,seed,eval_ordinal,value,best_so_far.
std::string traces_to_csv(const std::vector<OptimizationTrace>& traces);

struct TraceRow {
    std::string algo;
    std::uint64_t seed;
    Index ordinal;
    double value;
    double best;
};
std::vector<TraceRow> parse_traces_csv(const std::string& text);

/// epoch,loss,accuracy rows for training histories.
std::string history_to_csv(const std::vector<EpochStats>& history);

}  // namespace taml
