#pragma once

#include <cstdint>
#include <string>

#include "taml/search_space.hpp"
#include "taml/tensor.hpp"
#include "taml/trace.hpp"

namespace taml {

/// Precomputed benchmark: a full grid of validation accuracies over a
/// discrete search space. Construction checks completeness (every grid
/// point present and finite) and the [0, 100] accuracy range.
struct TabularBenchmark {
    SearchSpace space;
    DenseTensor table;  // accuracy per multi-index, shape == grid_shape()
    std::string name;
    std::string metric;

    TabularBenchmark(SearchSpace space, DenseTensor table, std::string name, std::string metric);

    Objective objective() const;
    double max_value() const;
    MultiIndex argmax() const;
};

/// Validates a raw table against a space; non-finite entries count as
/// missing grid points and are reported, as is any shape mismatch.
void check_table(const SearchSpace& space, const DenseTensor& table);

/// NATS-shaped synthetic table generator: `num_dims` categorical dimensions
/// of `choices` operations each, a smooth per-dimension accuracy surface
/// plus Gaussian noise, and a planted optimum at the argmax of the smooth
/// part with a margin that makes it the unique global maximum.
struct PlantedTable {
    TabularBenchmark bench;
    MultiIndex planted;
};
PlantedTable make_planted_table(Index num_dims, Index choices, std::uint64_t seed, double noise = 0.3);

}  // namespace taml
