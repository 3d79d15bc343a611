#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "taml/tensor.hpp"

namespace taml {

using MultiIndex = std::vector<Index>;

struct CategoricalDim {
    std::vector<std::string> labels;
};

/// Choices are {lo, lo+step, ...} up to hi inclusive when it lands on the grid.
struct IntegerRangeDim {
    std::int64_t lo;
    std::int64_t hi;
    std::int64_t step;
};

/// Grid index i maps to lo + i*(hi-lo)/(points-1), endpoints inclusive.
struct DiscretizedRealDim {
    double lo;
    double hi;
    Index points;
};

using Dimension = std::variant<CategoricalDim, IntegerRangeDim, DiscretizedRealDim>;
using PointValue = std::variant<std::string, std::int64_t, double>;
using Point = std::vector<PointValue>;

Index dim_size(const Dimension& d);

class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<Dimension> dims);

    Index ndim() const { return static_cast<Index>(dims_.size()); }
    const std::vector<Dimension>& dims() const { return dims_; }
    Index size_of(Index j) const { return dim_size(dims_[static_cast<std::size_t>(j)]); }
    Shape grid_shape() const;
    Index grid_size() const;

    Point decode(const MultiIndex& idx) const;
    MultiIndex encode(const Point& p) const;

    static SearchSpace from_json(const std::string& text);
    std::string to_json() const;

private:
    std::vector<Dimension> dims_;
};

}  // namespace taml
