#include "taml/compress.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "taml/tt.hpp"

namespace taml {

using nlohmann::json;

namespace {

// t x_mode m': contracts `mode` of t with the columns of m (rows replace the mode).
DenseTensor mode_product(const DenseTensor& t, const Matrix& m, Index mode) {
    Shape out_shape = t.shape();
    out_shape[static_cast<std::size_t>(mode)] = m.rows();
    return fold(matmul(m, unfold(t, mode)), mode, out_shape);
}

// Leading left singular vectors, zero-padded to exactly `r` columns for
// degenerate inputs.
Matrix top_left_singular(const Matrix& m, Index r) {
    SvdResult svd = svd_truncated_abs(m, 0.0, r);
    if (svd.u.cols() == r) return svd.u;
    Matrix out(m.rows(), r);
    for (Index i = 0; i < m.rows(); ++i)
        for (Index c = 0; c < svd.u.cols(); ++c) out(i, c) = svd.u(i, c);
    return out;
}

}  // namespace

Tucker2Result tucker2_decompose(const DenseTensor& kernel, Index rank, int max_iters, double tol) {
    if (kernel.ndim() != 4 || kernel.shape()[2] != kernel.shape()[3])
        throw std::invalid_argument("tucker2: kernel must be (C_out, C_in, D, D)");
    const Index c_out = kernel.shape()[0], c_in = kernel.shape()[1];
    if (rank < 1 || rank > std::min(c_in, c_out))
        throw std::invalid_argument("tucker2: rank must be in [1, min(C_in, C_out)]");
    if (max_iters < 0) throw std::invalid_argument("tucker2: max_iters must be >= 0");

    const double knorm = fro_norm(kernel);

    Matrix u_out = top_left_singular(unfold(kernel, 0), rank);
    Matrix u_in = top_left_singular(unfold(kernel, 1), rank);

    const auto core_of = [&](const Matrix& uo, const Matrix& ui) {
        return mode_product(mode_product(kernel, transpose(uo), 0), transpose(ui), 1);
    };
    // Explicit reconstruction error; the ||K||^2 - ||core||^2 shortcut
    // cancels catastrophically near exact recovery.
    const auto rel_err = [&](const Tucker2Factors& f) {
        const DenseTensor rec = tucker2_reconstruct(f);
        double e2 = 0.0;
        for (Index i = 0; i < kernel.size(); ++i) {
            const double d = rec[i] - kernel[i];
            e2 += d * d;
        }
        return knorm > 0 ? std::sqrt(e2) / knorm : 0.0;
    };

    DenseTensor core = core_of(u_out, u_in);
    std::vector<double> history{rel_err(Tucker2Factors{u_in, core, u_out})};

    for (int it = 0; it < max_iters; ++it) {
        // u_out <- top-R basis of the C_out unfolding of K x_1 u_in^T
        DenseTensor contracted_in = mode_product(kernel, transpose(u_in), 1);
        u_out = top_left_singular(unfold(contracted_in, 0), rank);
        DenseTensor contracted_out = mode_product(kernel, transpose(u_out), 0);
        u_in = top_left_singular(unfold(contracted_out, 1), rank);
        core = core_of(u_out, u_in);
        const double e = rel_err(Tucker2Factors{u_in, core, u_out});
        const double gain = history.back() - e;
        history.push_back(e);
        if (gain < tol) break;
    }

    Tucker2Result out{Tucker2Factors{std::move(u_in), std::move(core), std::move(u_out)}, history.back(),
                      std::move(history)};
    return out;
}

DenseTensor tucker2_reconstruct(const Tucker2Factors& f) {
    const Index c_in = f.u_in.rows(), c_out = f.u_out.rows();
    const Index r_out = f.core.shape()[0], r_in = f.core.shape()[1], d = f.core.shape()[2];
    if (f.u_out.cols() != r_out || f.u_in.cols() != r_in)
        throw std::invalid_argument("tucker2_reconstruct: factor shapes disagree");
    DenseTensor k({c_out, c_in, d, d});
    for (Index o = 0; o < c_out; ++o)
        for (Index i = 0; i < c_in; ++i)
            for (Index d1 = 0; d1 < d; ++d1)
                for (Index d2 = 0; d2 < d; ++d2) {
                    double acc = 0.0;
                    for (Index a = 0; a < r_out; ++a)
                        for (Index b = 0; b < r_in; ++b)
                            acc += f.u_out(o, a) * f.core[((a * r_in + b) * d + d1) * d + d2] * f.u_in(i, b);
                    k[((o * c_in + i) * d + d1) * d + d2] = acc;
                }
    return k;
}

TtmResult ttm_decompose(const Matrix& w, const std::vector<Index>& row_factors, const std::vector<Index>& col_factors,
                        double tol, Index max_rank) {
    if (row_factors.empty() || row_factors.size() != col_factors.size())
        throw std::invalid_argument("ttm: row/col factor lists must be non-empty and equally long");
    const Index d = static_cast<Index>(row_factors.size());
    Index m = 1, n = 1;
    for (Index f : row_factors) m *= f;
    for (Index f : col_factors) n *= f;
    if (m != w.rows() || n != w.cols())
        throw std::invalid_argument("ttm: factored dimensions do not multiply to the matrix shape");

    // (m_1..m_d, n_1..n_d) view, then interleave to (m_1, n_1, m_2, n_2, ...).
    Shape split;
    split.insert(split.end(), row_factors.begin(), row_factors.end());
    split.insert(split.end(), col_factors.begin(), col_factors.end());
    DenseTensor t(std::move(split), w.values());

    std::vector<Index> perm;
    for (Index k = 0; k < d; ++k) {
        perm.push_back(k);
        perm.push_back(d + k);
    }
    DenseTensor interleaved = permute(t, perm);

    Shape merged(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k)
        merged[static_cast<std::size_t>(k)] = row_factors[static_cast<std::size_t>(k)] * col_factors[static_cast<std::size_t>(k)];
    TTTensor tt = tt_svd(interleaved.reshaped(std::move(merged)), tol, max_rank);

    TTMatrix ttm;
    ttm.row_factors = row_factors;
    ttm.col_factors = col_factors;
    for (Index k = 0; k < d; ++k) {
        const DenseTensor& c = tt.core(k);
        ttm.cores.push_back(c.reshaped(
            {c.shape()[0], row_factors[static_cast<std::size_t>(k)], col_factors[static_cast<std::size_t>(k)], c.shape()[2]}));
    }

    Matrix rec = ttm_to_matrix(ttm);
    const double wnorm = fro_norm(w);
    double err2 = 0.0;
    for (Index i = 0; i < w.size(); ++i) {
        const double dlt = w.values()[static_cast<std::size_t>(i)] - rec.values()[static_cast<std::size_t>(i)];
        err2 += dlt * dlt;
    }
    return TtmResult{std::move(ttm), wnorm > 0 ? std::sqrt(err2) / wnorm : 0.0};
}

PruneResult prune_magnitude(const DenseTensor& t, double sparsity) {
    if (sparsity < 0.0 || sparsity >= 1.0) throw std::invalid_argument("prune: sparsity must be in [0, 1)");
    const Index n = t.size();
    const Index kill = static_cast<Index>(sparsity * static_cast<double>(n));
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double ma = std::abs(t[a]), mb = std::abs(t[b]);
        if (ma != mb) return ma < mb;
        return a < b;
    });
    PruneResult out{t, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 1),
                    static_cast<double>(kill) / static_cast<double>(n)};
    for (Index i = 0; i < kill; ++i) {
        out.tensor[order[static_cast<std::size_t>(i)]] = 0.0;
        out.mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 0;
    }
    return out;
}

QuantizedTensor quantize_uniform(const DenseTensor& t, int bits) {
    if (bits != 4 && bits != 8) throw std::invalid_argument("quantize: bits must be 4 or 8");
    const auto [mn_it, mx_it] = std::minmax_element(t.values().begin(), t.values().end());
    const double mn = *mn_it, mx = *mx_it;
    const double levels = static_cast<double>((1 << bits) - 1);
    QuantizedTensor q;
    q.bits = bits;
    q.shape = t.shape();
    // Degenerate range: pick the scale that makes the constant exactly
    // representable as (code - zero_point) * scale.
    q.scale = mx > mn ? (mx - mn) / levels : (mn == 0.0 ? 1.0 : std::abs(mn));
    q.zero_point = static_cast<std::int64_t>(std::llround(-mn / q.scale));
    q.codes.resize(static_cast<std::size_t>(t.size()));
    const std::int64_t hi = (1 << bits) - 1;
    for (Index i = 0; i < t.size(); ++i) {
        const std::int64_t c = std::llround(t[i] / q.scale) + q.zero_point;
        q.codes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(c, 0, hi));
    }
    return q;
}

DenseTensor dequantize(const QuantizedTensor& q) {
    DenseTensor t(q.shape);
    for (std::size_t i = 0; i < q.codes.size(); ++i)
        t[static_cast<Index>(i)] = (static_cast<double>(q.codes[i]) - static_cast<double>(q.zero_point)) * q.scale;
    return t;
}

namespace {

bool action_compatible(const CompressAction& a, const Layer& l) {
    if (std::holds_alternative<Tucker2Action>(a)) return l.type == LayerType::conv2d;
    if (std::holds_alternative<TtmActionSpec>(a)) return l.type == LayerType::dense;
    return !l.params.empty();  // prune/quant need parameters
}

const char* action_kind(const CompressAction& a) {
    if (std::holds_alternative<Tucker2Action>(a)) return "tucker2";
    if (std::holds_alternative<TtmActionSpec>(a)) return "ttm";
    if (std::holds_alternative<PruneAction>(a)) return "prune";
    return "quant";
}

int pipeline_stage(const CompressAction& a) {
    if (std::holds_alternative<Tucker2Action>(a) || std::holds_alternative<TtmActionSpec>(a)) return 0;
    if (std::holds_alternative<PruneAction>(a)) return 1;
    return 2;
}

Index nonzero_count(const DenseTensor& t) {
    Index n = 0;
    for (double v : t.values())
        if (v != 0.0) ++n;
    return n;
}

// Effective weight of a (possibly factorized) layer for error reporting.
DenseTensor effective_weight(const Layer& l) {
    if (l.type == LayerType::conv2d_tucker2) {
        Tucker2Factors f;
        const auto& u_in = l.params.at("u_in");
        const auto& u_out = l.params.at("u_out");
        f.u_in = Matrix(u_in.shape()[0], u_in.shape()[1], u_in.values());
        f.u_out = Matrix(u_out.shape()[0], u_out.shape()[1], u_out.values());
        f.core = l.params.at("core");
        return tucker2_reconstruct(f);
    }
    if (l.type == LayerType::dense_ttm) {
        TTMatrix ttm;
        Index k = 0;
        while (true) {
            auto it = l.params.find("core" + std::to_string(k));
            if (it == l.params.end()) break;
            ttm.cores.push_back(it->second);
            ttm.row_factors.push_back(it->second.shape()[1]);
            ttm.col_factors.push_back(it->second.shape()[2]);
            ++k;
        }
        Matrix w = ttm_to_matrix(ttm);
        return DenseTensor({w.rows(), w.cols()}, w.values());
    }
    return l.params.at("weight");
}

}  // namespace

CompressionPlan CompressionPlan::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("plan JSON malformed: ") + e.what());
    }
    const auto parse_action = [](const json& a) -> CompressAction {
        const std::string op = a.value("op", "");
        if (op == "tucker2") {
            Tucker2Action act;
            if (a.contains("rank") && a["rank"].is_number_integer()) {
                act.rank = a["rank"].get<Index>();
            } else {
                act.target_ratio = a.value("target_ratio", 0.0);
                if (act.target_ratio <= 1.0)
                    throw PlanError("tucker2 auto rank needs target_ratio > 1");
            }
            return act;
        }
        if (op == "ttm") {
            TtmActionSpec act;
            for (const auto& v : a.at("row_factors")) act.row_factors.push_back(v.get<Index>());
            for (const auto& v : a.at("col_factors")) act.col_factors.push_back(v.get<Index>());
            act.tol = a.value("tol", 0.0);
            if (a.contains("max_rank")) act.max_rank = a["max_rank"].get<Index>();
            return act;
        }
        if (op == "prune") return PruneAction{a.at("sparsity").get<double>()};
        if (op == "quant") return QuantAction{a.at("bits").get<int>()};
        throw PlanError("unknown compression op '" + op + "'");
    };

    CompressionPlan plan;
    if (doc.contains("layers")) {
        for (const auto& [name, actions] : doc["layers"].items()) {
            std::vector<CompressAction> list;
            for (const auto& a : actions) list.push_back(parse_action(a));
            plan.layers[name] = std::move(list);
        }
    }
    if (doc.contains("default"))
        for (const auto& a : doc["default"]) plan.defaults.push_back(parse_action(a));
    return plan;
}

CompressResult compress_model(const ModelGraph& model, const CompressionPlan& plan) {
    for (const auto& [name, _] : plan.layers)
        if (!model.find(name)) throw PlanError("plan references unknown layer '" + name + "'");

    CompressResult out;
    out.model = model;
    CompressionReport& report = out.report;

    for (auto& layer : out.model.layers) {
        LayerReport lr;
        Index before = 0;
        for (const auto& [_, p] : layer.params) before += p.size();
        lr.params_before = before;

        // Resolve this layer's action chain.
        std::vector<CompressAction> actions;
        auto it = plan.layers.find(layer.name);
        if (it != plan.layers.end()) {
            for (const auto& a : it->second) {
                if (!action_compatible(a, layer))
                    throw PlanError("layer '" + layer.name + "' (" + layer_type_name(layer.type) +
                                    ") cannot take action '" + action_kind(a) + "'");
                actions.push_back(a);
            }
        } else {
            for (const auto& a : plan.defaults)
                if (action_compatible(a, layer)) actions.push_back(a);
        }

        // Fixed pipeline order: factorize, then prune, then quantize.
        std::stable_sort(actions.begin(), actions.end(),
                         [](const CompressAction& a, const CompressAction& b) { return pipeline_stage(a) < pipeline_stage(b); });
        for (std::size_t i = 1; i < actions.size(); ++i)
            if (pipeline_stage(actions[i]) == pipeline_stage(actions[i - 1]))
                throw PlanError("layer '" + layer.name + "': duplicate '" +
                                std::string(action_kind(actions[i])) + "'-stage action");

        const bool touched = !actions.empty();
        std::optional<DenseTensor> original_weight;
        if (touched && layer.params.contains("weight")) original_weight = layer.params.at("weight");

        for (const auto& action : actions) {
            if (const auto* t2 = std::get_if<Tucker2Action>(&action)) {
                const DenseTensor& kernel = layer.params.at("weight");
                const Index c_out = kernel.shape()[0], c_in = kernel.shape()[1], d = kernel.shape()[2];
                Index rank;
                if (t2->rank) {
                    rank = *t2->rank;
                } else {
                    // largest rank whose factor count meets the per-layer budget
                    const double budget = static_cast<double>(kernel.size()) / t2->target_ratio;
                    rank = 0;
                    for (Index r = std::min(c_in, c_out); r >= 1; --r)
                        if (static_cast<double>(tucker2_param_count(c_in, c_out, d, r)) <= budget) {
                            rank = r;
                            break;
                        }
                    if (rank == 0)
                        throw PlanError("layer '" + layer.name + "': no rank meets target_ratio " +
                                        std::to_string(t2->target_ratio));
                }
                Tucker2Result res = tucker2_decompose(kernel, rank);
                layer.type = LayerType::conv2d_tucker2;
                layer.params.erase("weight");
                layer.params["u_in"] =
                    DenseTensor({res.factors.u_in.rows(), res.factors.u_in.cols()}, res.factors.u_in.values());
                layer.params["u_out"] =
                    DenseTensor({res.factors.u_out.rows(), res.factors.u_out.cols()}, res.factors.u_out.values());
                layer.params["core"] = res.factors.core;
                lr.actions.push_back("tucker2(rank=" + std::to_string(rank) + ")");
            } else if (const auto* tm = std::get_if<TtmActionSpec>(&action)) {
                const DenseTensor& w = layer.params.at("weight");
                TtmResult res = ttm_decompose(Matrix(w.shape()[0], w.shape()[1], w.values()), tm->row_factors,
                                              tm->col_factors, tm->tol, tm->max_rank);
                layer.type = LayerType::dense_ttm;
                layer.params.erase("weight");
                for (std::size_t k = 0; k < res.ttm.cores.size(); ++k)
                    layer.params["core" + std::to_string(k)] = res.ttm.cores[k];
                std::string ranks;
                for (Index r : res.ttm.ranks()) ranks += (ranks.empty() ? "" : ",") + std::to_string(r);
                lr.actions.push_back("ttm(ranks=[" + ranks + "])");
            } else if (const auto* pr = std::get_if<PruneAction>(&action)) {
                for (auto& [pname, p] : layer.params) {
                    if (pname == "bias") continue;
                    p = prune_magnitude(p, pr->sparsity).tensor;
                }
                lr.actions.push_back("prune(sparsity=" + std::to_string(pr->sparsity) + ")");
            } else if (const auto* qa = std::get_if<QuantAction>(&action)) {
                for (auto& [pname, p] : layer.params) {
                    if (pname == "bias") continue;
                    QuantizedTensor q = quantize_uniform(p, qa->bits);
                    p = dequantize(q);
                    layer.quantized[pname] = std::move(q);
                }
                lr.actions.push_back("quant(bits=" + std::to_string(qa->bits) + ")");
            }
        }

        // Parameter accounting: pruned params count their surviving nonzeros.
        const bool pruned = std::any_of(actions.begin(), actions.end(),
                                        [](const CompressAction& a) { return std::holds_alternative<PruneAction>(a); });
        Index after = 0;
        for (const auto& [pname, p] : layer.params)
            after += (pruned && pname != "bias") ? nonzero_count(p) : p.size();
        lr.params_after = after;

        if (original_weight) {
            const DenseTensor eff = effective_weight(layer);
            double err2 = 0.0;
            for (Index i = 0; i < eff.size(); ++i) {
                const double dlt = eff[i] - (*original_weight)[i];
                err2 += dlt * dlt;
            }
            const double wn = fro_norm(*original_weight);
            lr.rel_error = wn > 0 ? std::sqrt(err2) / wn : 0.0;
        }

        report.params_before += lr.params_before;
        report.params_after += lr.params_after;
        report.layers[layer.name] = std::move(lr);
    }

    report.coefficient = report.params_after > 0
                             ? static_cast<double>(report.params_before) / static_cast<double>(report.params_after)
                             : 1.0;
    validate_model(out.model);
    return out;
}

std::string CompressionReport::to_json() const {
    json layers_json = json::object();
    for (const auto& [name, lr] : layers) {
        layers_json[name] = {{"params_before", lr.params_before},
                             {"params_after", lr.params_after},
                             {"rel_error", lr.rel_error},
                             {"actions", lr.actions}};
    }
    json doc{{"layers", layers_json},
             {"totals", {{"params_before", params_before}, {"params_after", params_after}}},
             {"coefficient", coefficient}};
    return doc.dump(2);
}

}  // namespace taml
