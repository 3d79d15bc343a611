#include "taml/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "taml/rng.hpp"

namespace taml {

void check_table(const SearchSpace& space, const DenseTensor& table) {
    const Shape expect = space.grid_shape();
    if (table.shape() != expect) {
        const Index have = table.size();
        const Index want = shape_numel(expect);
        throw std::invalid_argument("tabular: table shape " + shape_to_string(table.shape()) +
                                    " does not cover the grid " + shape_to_string(expect) + " (" +
                                    std::to_string(std::abs(want - have)) + " entries missing or extra)");
    }
    Index missing = 0;
    for (double v : table.values())
        if (!std::isfinite(v)) ++missing;
    if (missing > 0)
        throw std::invalid_argument("tabular: " + std::to_string(missing) + " missing grid entries (non-finite)");
    for (double v : table.values())
        if (v < 0.0 || v > 100.0)
            throw std::invalid_argument("tabular: accuracy " + std::to_string(v) + " outside [0, 100]");
}

TabularBenchmark::TabularBenchmark(SearchSpace space_, DenseTensor table_, std::string name_, std::string metric_)
    : space(std::move(space_)), table(std::move(table_)), name(std::move(name_)), metric(std::move(metric_)) {
    check_table(space, table);
}

Objective TabularBenchmark::objective() const {
    auto data = std::make_shared<DenseTensor>(table);
    return [data](const MultiIndex& idx) { return data->at(std::span<const Index>(idx.data(), idx.size())); };
}

double TabularBenchmark::max_value() const {
    return *std::max_element(table.values().begin(), table.values().end());
}

MultiIndex TabularBenchmark::argmax() const {
    const auto& v = table.values();
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[arg]) arg = i;
    const Shape shape = table.shape();
    MultiIndex idx(shape.size());
    Index lin = static_cast<Index>(arg);
    for (Index j = static_cast<Index>(shape.size()) - 1; j >= 0; --j) {
        idx[static_cast<std::size_t>(j)] = lin % shape[static_cast<std::size_t>(j)];
        lin /= shape[static_cast<std::size_t>(j)];
    }
    return idx;
}

PlantedTable make_planted_table(Index num_dims, Index choices, std::uint64_t seed, double noise) {
    if (num_dims < 1 || choices < 2) throw std::invalid_argument("planted table: need >= 1 dims, >= 2 choices");
    Rng rng(seed);

    // Smooth accuracy surface: per-dimension operation effects plus
    // adjacent-dimension interactions, over a base in the low 80s.
    std::vector<std::vector<double>> effects(static_cast<std::size_t>(num_dims));
    for (auto& e : effects) {
        e.resize(static_cast<std::size_t>(choices));
        for (auto& v : e) v = rng.uniform(0.0, 2.0);
    }
    std::vector<std::vector<double>> interactions(num_dims > 1 ? static_cast<std::size_t>(num_dims - 1) : 0);
    for (auto& w : interactions) {
        w.resize(static_cast<std::size_t>(choices * choices));
        for (auto& v : w) v = rng.uniform(0.0, 1.0);
    }

    Shape shape(static_cast<std::size_t>(num_dims), choices);
    DenseTensor table(shape);
    MultiIndex cur(static_cast<std::size_t>(num_dims), 0);
    const double base = 80.0;
    double best_smooth = -1.0;
    Index best_lin = 0;
    std::vector<double> smooth(static_cast<std::size_t>(table.size()));
    for (Index lin = 0; lin < table.size(); ++lin) {
        double v = base;
        for (Index j = 0; j < num_dims; ++j)
            v += effects[static_cast<std::size_t>(j)][static_cast<std::size_t>(cur[static_cast<std::size_t>(j)])];
        for (Index j = 0; j + 1 < num_dims; ++j)
            v += interactions[static_cast<std::size_t>(j)][static_cast<std::size_t>(
                cur[static_cast<std::size_t>(j)] * choices + cur[static_cast<std::size_t>(j + 1)])];
        smooth[static_cast<std::size_t>(lin)] = v;
        if (v > best_smooth) {
            best_smooth = v;
            best_lin = lin;
        }
        for (Index j = num_dims - 1; j >= 0; --j) {
            auto uj = static_cast<std::size_t>(j);
            if (++cur[uj] < choices) break;
            cur[uj] = 0;
        }
    }
    for (Index lin = 0; lin < table.size(); ++lin) {
        // Head-room below 100 keeps the planted lift strictly dominant.
        table[lin] = std::clamp(smooth[static_cast<std::size_t>(lin)] + noise * rng.normal(), 0.0, 99.4);
    }

    // The plant sits at the smooth argmax, lifted above everything else.
    MultiIndex planted(static_cast<std::size_t>(num_dims));
    Index rem = best_lin;
    for (Index j = num_dims - 1; j >= 0; --j) {
        planted[static_cast<std::size_t>(j)] = rem % choices;
        rem /= choices;
    }
    const double top = *std::max_element(table.values().begin(), table.values().end());
    table[best_lin] = std::min(100.0, top + 0.5);

    std::vector<Dimension> dims;
    for (Index j = 0; j < num_dims; ++j) {
        CategoricalDim c;
        for (Index v = 0; v < choices; ++v) c.labels.push_back("op" + std::to_string(v));
        dims.emplace_back(std::move(c));
    }
    TabularBenchmark bench(SearchSpace(std::move(dims)), std::move(table), "planted-" + std::to_string(seed),
                           "validation accuracy");
    return PlantedTable{std::move(bench), std::move(planted)};
}

}  // namespace taml
