#include "taml/search_space.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace taml {

using nlohmann::json;

Index dim_size(const Dimension& d) {
    return std::visit(
        [](const auto& v) -> Index {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CategoricalDim>) {
                return static_cast<Index>(v.labels.size());
            } else if constexpr (std::is_same_v<T, IntegerRangeDim>) {
                return static_cast<Index>((v.hi - v.lo) / v.step + 1);
            } else {
                return v.points;
            }
        },
        d);
}

namespace {

void validate_dim(const Dimension& d) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CategoricalDim>) {
                if (v.labels.empty()) throw std::invalid_argument("categorical dimension has no labels");
            } else if constexpr (std::is_same_v<T, IntegerRangeDim>) {
                if (v.step <= 0) throw std::invalid_argument("integer_range step must be positive");
                if (v.hi < v.lo) throw std::invalid_argument("integer_range requires hi >= lo");
            } else {
                if (v.points < 1) throw std::invalid_argument("discretized_real requires points >= 1");
                if (!(std::isfinite(v.lo) && std::isfinite(v.hi)) || v.hi < v.lo)
                    throw std::invalid_argument("discretized_real bounds invalid");
            }
        },
        d);
}

double real_grid_value(const DiscretizedRealDim& d, Index i) {
    if (d.points == 1) return d.lo;
    return d.lo + static_cast<double>(i) * (d.hi - d.lo) / static_cast<double>(d.points - 1);
}

}  // namespace

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("search space needs at least one dimension");
    for (const auto& d : dims_) validate_dim(d);
}

Shape SearchSpace::grid_shape() const {
    Shape s;
    s.reserve(dims_.size());
    for (const auto& d : dims_) s.push_back(dim_size(d));
    return s;
}

Index SearchSpace::grid_size() const {
    Index n = 1;
    for (const auto& d : dims_) n *= dim_size(d);
    return n;
}

Point SearchSpace::decode(const MultiIndex& idx) const {
    if (static_cast<Index>(idx.size()) != ndim()) throw std::invalid_argument("decode: index rank mismatch");
    Point p;
    p.reserve(dims_.size());
    for (std::size_t j = 0; j < dims_.size(); ++j) {
        const Index i = idx[j];
        if (i < 0 || i >= dim_size(dims_[j])) throw std::out_of_range("decode: index out of range");
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, CategoricalDim>) {
                    p.emplace_back(v.labels[static_cast<std::size_t>(i)]);
                } else if constexpr (std::is_same_v<T, IntegerRangeDim>) {
                    p.emplace_back(v.lo + i * v.step);
                } else {
                    p.emplace_back(real_grid_value(v, i));
                }
            },
            dims_[j]);
    }
    return p;
}

MultiIndex SearchSpace::encode(const Point& p) const {
    if (static_cast<Index>(p.size()) != ndim()) throw std::invalid_argument("encode: point rank mismatch");
    MultiIndex idx(p.size());
    for (std::size_t j = 0; j < dims_.size(); ++j) {
        idx[j] = std::visit(
            [&](const auto& v) -> Index {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, CategoricalDim>) {
                    const auto* s = std::get_if<std::string>(&p[j]);
                    if (!s) throw std::invalid_argument("encode: expected string for categorical dimension");
                    auto it = std::find(v.labels.begin(), v.labels.end(), *s);
                    if (it == v.labels.end()) throw std::invalid_argument("encode: unknown label '" + *s + "'");
                    return static_cast<Index>(it - v.labels.begin());
                } else if constexpr (std::is_same_v<T, IntegerRangeDim>) {
                    const auto* n = std::get_if<std::int64_t>(&p[j]);
                    if (!n) throw std::invalid_argument("encode: expected integer for integer_range dimension");
                    if (*n < v.lo || *n > v.hi || (*n - v.lo) % v.step != 0)
                        throw std::invalid_argument("encode: integer value off the grid");
                    return static_cast<Index>((*n - v.lo) / v.step);
                } else {
                    const auto* x = std::get_if<double>(&p[j]);
                    if (!x) throw std::invalid_argument("encode: expected real for discretized_real dimension");
                    Index i = 0;
                    if (v.points > 1) {
                        const double t = (*x - v.lo) * static_cast<double>(v.points - 1) / (v.hi - v.lo);
                        i = std::clamp<Index>(static_cast<Index>(std::llround(t)), 0, v.points - 1);
                    }
                    if (std::abs(real_grid_value(v, i) - *x) > 1e-9 * std::max(1.0, std::abs(*x)))
                        throw std::invalid_argument("encode: real value off the grid");
                    return i;
                }
            },
            dims_[j]);
    }
    return idx;
}

SearchSpace SearchSpace::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("space JSON malformed: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("dims") || !doc["dims"].is_array())
        throw std::invalid_argument("space JSON must be an object with a 'dims' array");
    std::vector<Dimension> dims;
    for (const auto& d : doc["dims"]) {
        const std::string kind = d.value("kind", "");
        if (kind == "categorical") {
            CategoricalDim c;
            for (const auto& l : d.at("labels")) c.labels.push_back(l.get<std::string>());
            dims.emplace_back(std::move(c));
        } else if (kind == "integer_range") {
            dims.emplace_back(IntegerRangeDim{d.at("lo").get<std::int64_t>(), d.at("hi").get<std::int64_t>(),
                                              d.at("step").get<std::int64_t>()});
        } else if (kind == "discretized_real") {
            dims.emplace_back(
                DiscretizedRealDim{d.at("lo").get<double>(), d.at("hi").get<double>(), d.at("points").get<Index>()});
        } else {
            throw std::invalid_argument("space JSON: unknown dimension kind '" + kind + "'");
        }
    }
    return SearchSpace(std::move(dims));
}

std::string SearchSpace::to_json() const {
    json dims = json::array();
    for (const auto& d : dims_) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, CategoricalDim>) {
                    dims.push_back({{"kind", "categorical"}, {"labels", v.labels}});
                } else if constexpr (std::is_same_v<T, IntegerRangeDim>) {
                    dims.push_back({{"kind", "integer_range"}, {"lo", v.lo}, {"hi", v.hi}, {"step", v.step}});
                } else {
                    dims.push_back({{"kind", "discretized_real"}, {"lo", v.lo}, {"hi", v.hi}, {"points", v.points}});
                }
            },
            d);
    }
    return json{{"dims", dims}}.dump();
}

}  // namespace taml
