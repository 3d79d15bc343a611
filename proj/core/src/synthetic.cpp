#include "taml/synthetic.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "taml/rng.hpp"

namespace taml {

namespace {

struct Box {
    double lo;
    double hi;
};

double grid_coord(const Box& box, Index i, Index points) {
    if (points == 1) return box.lo;
    return box.lo + static_cast<double>(i) * (box.hi - box.lo) / static_cast<double>(points - 1);
}

double ackley(const std::vector<double>& x) {
    constexpr double a = 20.0, b = 0.2;
    const double c = 2.0 * std::numbers::pi;
    double sq = 0.0, cs = 0.0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(c * v);
    }
    const double n = static_cast<double>(x.size());
    return -a * std::exp(-b * std::sqrt(sq / n)) - std::exp(cs / n) + a + std::numbers::e;
}

double rosenbrock(const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double t1 = x[i + 1] - x[i] * x[i];
        const double t2 = 1.0 - x[i];
        s += 100.0 * t1 * t1 + t2 * t2;
    }
    return s;
}

double schwefel(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * std::sin(std::sqrt(std::abs(v)));
    return 418.9829 * static_cast<double>(x.size()) - s;
}

MultiIndex nearest_grid_index(const Box& box, double target, Index points, Index dims) {
    Index best = 0;
    double bestd = std::abs(grid_coord(box, 0, points) - target);
    for (Index i = 1; i < points; ++i) {
        const double d = std::abs(grid_coord(box, i, points) - target);
        if (d < bestd) {
            bestd = d;
            best = i;
        }
    }
    return MultiIndex(static_cast<std::size_t>(dims), best);
}

}  // namespace

SyntheticObjective make_synthetic(const std::string& name, Index dims, Index points_per_dim, std::uint64_t seed) {
    if (dims < 1) throw std::invalid_argument("synthetic: dims must be >= 1");
    if (points_per_dim < 2) throw std::invalid_argument("synthetic: points_per_dim must be >= 2");

    SyntheticObjective out;
    out.name = name;
    out.dims.assign(static_cast<std::size_t>(dims), points_per_dim);

    if (name == "separable_planted") {
        // Random per-dimension score tables; the optimum is the sum of
        // per-dimension maxima, exact by separability.
        auto tables = std::make_shared<std::vector<std::vector<double>>>();
        Rng rng(seed);
        out.best_index.resize(static_cast<std::size_t>(dims));
        out.best_value = 0.0;
        for (Index j = 0; j < dims; ++j) {
            std::vector<double> t(static_cast<std::size_t>(points_per_dim));
            for (auto& v : t) v = rng.uniform(0.0, 1.0);
            Index arg = 0;
            for (Index i = 1; i < points_per_dim; ++i)
                if (t[static_cast<std::size_t>(i)] > t[static_cast<std::size_t>(arg)]) arg = i;
            out.best_index[static_cast<std::size_t>(j)] = arg;
            out.best_value += t[static_cast<std::size_t>(arg)];
            tables->push_back(std::move(t));
        }
        out.mode = OptMode::maximize;
        out.fn = [tables](const MultiIndex& idx) {
            double s = 0.0;
            for (std::size_t j = 0; j < idx.size(); ++j) s += (*tables)[j][static_cast<std::size_t>(idx[j])];
            return s;
        };
        return out;
    }

    Box box{};
    double (*fn)(const std::vector<double>&) = nullptr;
    double analytic_min = 0.0;
    if (name == "ackley") {
        box = {-32.768, 32.768};
        fn = ackley;
        analytic_min = 0.0;
    } else if (name == "rosenbrock") {
        box = {-2.048, 2.048};
        fn = rosenbrock;
        analytic_min = 1.0;
    } else if (name == "schwefel") {
        box = {-500.0, 500.0};
        fn = schwefel;
        analytic_min = 420.9687;
    } else {
        throw std::invalid_argument("synthetic: unknown objective '" + name + "'");
    }

    const Index points = points_per_dim;
    out.mode = OptMode::minimize;
    out.fn = [box, fn, points](const MultiIndex& idx) {
        std::vector<double> x(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) x[j] = grid_coord(box, idx[j], points);
        return fn(x);
    };

    double grid_total = 1.0;
    for (Index j = 0; j < dims; ++j) grid_total *= static_cast<double>(points_per_dim);
    if (grid_total <= 1e6) {
        // Exhaustive scan; ties resolve to the lowest linear index.
        MultiIndex cur(static_cast<std::size_t>(dims), 0);
        MultiIndex best = cur;
        double best_v = out.fn(cur);
        while (true) {
            Index j = dims - 1;
            for (; j >= 0; --j) {
                auto uj = static_cast<std::size_t>(j);
                if (++cur[uj] < points_per_dim) break;
                cur[uj] = 0;
            }
            if (j < 0) break;
            const double v = out.fn(cur);
            if (v < best_v) {
                best_v = v;
                best = cur;
            }
        }
        out.best_index = best;
        out.best_value = best_v;
    } else {
        out.best_index = nearest_grid_index(box, analytic_min, points_per_dim, dims);
        out.best_value = out.fn(out.best_index);
    }
    return out;
}

}  // namespace taml
