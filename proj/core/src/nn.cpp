#include "taml/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace taml {

std::string layer_type_name(LayerType t) {
    switch (t) {
        case LayerType::conv2d: return "conv2d";
        case LayerType::dense: return "dense";
        case LayerType::relu: return "relu";
        case LayerType::maxpool2d: return "maxpool2d";
        case LayerType::flatten: return "flatten";
        case LayerType::softmax: return "softmax";
        case LayerType::conv2d_tucker2: return "conv2d_tucker2";
        case LayerType::dense_ttm: return "dense_ttm";
    }
    return "?";
}

LayerType layer_type_from_name(const std::string& s) {
    if (s == "conv2d") return LayerType::conv2d;
    if (s == "dense") return LayerType::dense;
    if (s == "relu") return LayerType::relu;
    if (s == "maxpool2d") return LayerType::maxpool2d;
    if (s == "flatten") return LayerType::flatten;
    if (s == "softmax") return LayerType::softmax;
    if (s == "conv2d_tucker2") return LayerType::conv2d_tucker2;
    if (s == "dense_ttm") return LayerType::dense_ttm;
    throw std::invalid_argument("unknown layer type '" + s + "'");
}

Index Layer::attr(const std::string& key, Index fallback) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? fallback : it->second;
}

Index ModelGraph::param_count() const {
    Index n = 0;
    for (const auto& l : layers)
        for (const auto& [_, t] : l.params) n += t.size();
    return n;
}

const Layer* ModelGraph::find(const std::string& name) const {
    for (const auto& l : layers)
        if (l.name == name) return &l;
    return nullptr;
}

Layer* ModelGraph::find(const std::string& name) {
    for (auto& l : layers)
        if (l.name == name) return &l;
    return nullptr;
}

namespace {

[[noreturn]] void layer_error(const Layer& l, const std::string& what) {
    throw std::invalid_argument("layer '" + l.name + "' (" + layer_type_name(l.type) + "): " + what);
}

const DenseTensor& param(const Layer& l, const std::string& key) {
    auto it = l.params.find(key);
    if (it == l.params.end()) layer_error(l, "missing parameter '" + key + "'");
    return it->second;
}

// Shape of the activation after this layer; `shape` excludes the batch axis.
Shape layer_output_shape(const Layer& l, const Shape& shape) {
    switch (l.type) {
        case LayerType::conv2d:
        case LayerType::conv2d_tucker2: {
            if (shape.size() != 3) layer_error(l, "expected [C,H,W] input, got " + shape_to_string(shape));
            Index c_in, c_out, k;
            if (l.type == LayerType::conv2d) {
                const auto& w = param(l, "weight");
                if (w.ndim() != 4 || w.shape()[2] != w.shape()[3]) layer_error(l, "weight must be (C_out,C_in,D,D)");
                c_out = w.shape()[0];
                c_in = w.shape()[1];
                k = w.shape()[2];
            } else {
                const auto& u_in = param(l, "u_in");
                const auto& core = param(l, "core");
                const auto& u_out = param(l, "u_out");
                if (u_in.ndim() != 2 || core.ndim() != 4 || u_out.ndim() != 2)
                    layer_error(l, "factor shapes invalid");
                if (core.shape()[0] != core.shape()[1] || core.shape()[2] != core.shape()[3] ||
                    u_in.shape()[1] != core.shape()[1] || u_out.shape()[1] != core.shape()[0])
                    layer_error(l, "factor ranks disagree");
                c_in = u_in.shape()[0];
                c_out = u_out.shape()[0];
                k = core.shape()[2];
            }
            if (shape[0] != c_in)
                layer_error(l, "expects " + std::to_string(c_in) + " input channels, got " + std::to_string(shape[0]));
            const Index stride = l.attr("stride", 1);
            const Index pad = l.attr("pad", 0);
            const Index h = (shape[1] + 2 * pad - k) / stride + 1;
            const Index w2 = (shape[2] + 2 * pad - k) / stride + 1;
            if (shape[1] + 2 * pad < k || shape[2] + 2 * pad < k || h < 1 || w2 < 1)
                layer_error(l, "kernel does not fit input " + shape_to_string(shape));
            return {c_out, h, w2};
        }
        case LayerType::maxpool2d: {
            if (shape.size() != 3) layer_error(l, "expected [C,H,W] input, got " + shape_to_string(shape));
            const Index pool = l.attr("pool", 2);
            const Index stride = l.attr("stride", 0) > 0 ? l.attr("stride", 0) : pool;
            if (shape[1] < pool || shape[2] < pool) layer_error(l, "pool window does not fit input");
            return {shape[0], (shape[1] - pool) / stride + 1, (shape[2] - pool) / stride + 1};
        }
        case LayerType::flatten: {
            Index f = 1;
            for (Index d : shape) f *= d;
            return {f};
        }
        case LayerType::dense: {
            const auto& w = param(l, "weight");
            if (w.ndim() != 2) layer_error(l, "weight must be (out, in)");
            if (shape.size() != 1 || shape[0] != w.shape()[1])
                layer_error(l, "expects flat input of " + std::to_string(w.shape()[1]) + ", got " +
                                   shape_to_string(shape));
            return {w.shape()[0]};
        }
        case LayerType::dense_ttm: {
            TTMatrix ttm;
            Index k = 0;
            while (l.params.contains("core" + std::to_string(k))) {
                const auto& c = param(l, "core" + std::to_string(k));
                if (c.ndim() != 4) layer_error(l, "TT cores must be 4-way");
                ttm.row_factors.push_back(c.shape()[1]);
                ttm.col_factors.push_back(c.shape()[2]);
                ++k;
            }
            if (k == 0) layer_error(l, "missing TT cores");
            Index rows = 1, cols = 1;
            for (Index m : ttm.row_factors) rows *= m;
            for (Index n : ttm.col_factors) cols *= n;
            if (shape.size() != 1 || shape[0] != cols)
                layer_error(l, "expects flat input of " + std::to_string(cols) + ", got " + shape_to_string(shape));
            return {rows};
        }
        case LayerType::relu:
        case LayerType::softmax:
            return shape;
    }
    layer_error(l, "unhandled layer type");
}

struct ConvGrads {
    DenseTensor din;
    DenseTensor dw;
    std::vector<double> db;
};

DenseTensor conv_forward(const DenseTensor& in, const DenseTensor& w, const double* bias, Index stride, Index pad) {
    const Index b = in.shape()[0], ci = in.shape()[1], h = in.shape()[2], ww = in.shape()[3];
    const Index co = w.shape()[0], k = w.shape()[2];
    const Index ho = (h + 2 * pad - k) / stride + 1;
    const Index wo = (ww + 2 * pad - k) / stride + 1;
    DenseTensor out({b, co, ho, wo});
    const double* X = in.data();
    const double* W = w.data();
    double* Y = out.data();
    for (Index ib = 0; ib < b; ++ib)
        for (Index oc = 0; oc < co; ++oc) {
            const double base = bias ? bias[oc] : 0.0;
            for (Index oy = 0; oy < ho; ++oy)
                for (Index ox = 0; ox < wo; ++ox) {
                    double acc = base;
                    for (Index ic = 0; ic < ci; ++ic) {
                        const double* xp = X + ((ib * ci + ic) * h) * ww;
                        const double* wp = W + ((oc * ci + ic) * k) * k;
                        for (Index ky = 0; ky < k; ++ky) {
                            const Index iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= h) continue;
                            for (Index kx = 0; kx < k; ++kx) {
                                const Index ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= ww) continue;
                                acc += wp[ky * k + kx] * xp[iy * ww + ix];
                            }
                        }
                    }
                    Y[((ib * co + oc) * ho + oy) * wo + ox] = acc;
                }
        }
    return out;
}

ConvGrads conv_backward(const DenseTensor& in, const DenseTensor& w, Index stride, Index pad,
                        const DenseTensor& dout) {
    const Index b = in.shape()[0], ci = in.shape()[1], h = in.shape()[2], ww = in.shape()[3];
    const Index co = w.shape()[0], k = w.shape()[2];
    const Index ho = dout.shape()[2], wo = dout.shape()[3];
    ConvGrads g{DenseTensor(in.shape()), DenseTensor(w.shape()), std::vector<double>(static_cast<std::size_t>(co), 0.0)};
    const double* X = in.data();
    const double* W = w.data();
    const double* DY = dout.data();
    double* DX = g.din.data();
    double* DW = g.dw.data();
    for (Index ib = 0; ib < b; ++ib)
        for (Index oc = 0; oc < co; ++oc)
            for (Index oy = 0; oy < ho; ++oy)
                for (Index ox = 0; ox < wo; ++ox) {
                    const double dy = DY[((ib * co + oc) * ho + oy) * wo + ox];
                    if (dy == 0.0) continue;
                    g.db[static_cast<std::size_t>(oc)] += dy;
                    for (Index ic = 0; ic < ci; ++ic) {
                        const double* xp = X + ((ib * ci + ic) * h) * ww;
                        double* dxp = DX + ((ib * ci + ic) * h) * ww;
                        const double* wp = W + ((oc * ci + ic) * k) * k;
                        double* dwp = DW + ((oc * ci + ic) * k) * k;
                        for (Index ky = 0; ky < k; ++ky) {
                            const Index iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= h) continue;
                            for (Index kx = 0; kx < k; ++kx) {
                                const Index ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= ww) continue;
                                dwp[ky * k + kx] += dy * xp[iy * ww + ix];
                                dxp[iy * ww + ix] += dy * wp[ky * k + kx];
                            }
                        }
                    }
                }
    return g;
}

// bias accumulation happens in conv_backward; db for layers without bias is dropped

DenseTensor u_in_as_kernel(const DenseTensor& u_in) {
    const Index c_in = u_in.shape()[0], r = u_in.shape()[1];
    DenseTensor k({r, c_in, 1, 1});
    for (Index i = 0; i < c_in; ++i)
        for (Index a = 0; a < r; ++a) k[a * c_in + i] = u_in[i * r + a];
    return k;
}

DenseTensor u_out_as_kernel(const DenseTensor& u_out) {
    const Index c_out = u_out.shape()[0], r = u_out.shape()[1];
    DenseTensor k({c_out, r, 1, 1});
    for (Index o = 0; o < c_out; ++o)
        for (Index a = 0; a < r; ++a) k[o * r + a] = u_out[o * r + a];
    return k;
}

struct LayerCtx {
    DenseTensor input;   // activation fed into the layer
    DenseTensor output;  // produced activation (kept for relu/softmax/maxpool)
    DenseTensor z1, z2;  // tucker2 intermediates
};

DenseTensor layer_forward(const Layer& l, const DenseTensor& in, LayerCtx* ctx) {
    switch (l.type) {
        case LayerType::conv2d: {
            const auto& w = param(l, "weight");
            const auto& bias = param(l, "bias");
            return conv_forward(in, w, bias.data(), l.attr("stride", 1), l.attr("pad", 0));
        }
        case LayerType::conv2d_tucker2: {
            const auto& bias = param(l, "bias");
            DenseTensor k1 = u_in_as_kernel(param(l, "u_in"));
            DenseTensor k3 = u_out_as_kernel(param(l, "u_out"));
            DenseTensor z1 = conv_forward(in, k1, nullptr, 1, 0);
            DenseTensor z2 = conv_forward(z1, param(l, "core"), nullptr, l.attr("stride", 1), l.attr("pad", 0));
            DenseTensor y = conv_forward(z2, k3, bias.data(), 1, 0);
            if (ctx) {
                ctx->z1 = std::move(z1);
                ctx->z2 = std::move(z2);
            }
            return y;
        }
        case LayerType::dense: {
            const auto& w = param(l, "weight");
            const auto& bias = param(l, "bias");
            const Index b = in.shape()[0], fin = w.shape()[1], fout = w.shape()[0];
            DenseTensor out({b, fout});
            for (Index ib = 0; ib < b; ++ib)
                for (Index o = 0; o < fout; ++o) {
                    double acc = bias[o];
                    const double* xp = in.data() + ib * fin;
                    const double* wp = w.data() + o * fin;
                    for (Index f = 0; f < fin; ++f) acc += wp[f] * xp[f];
                    out[ib * fout + o] = acc;
                }
            return out;
        }
        case LayerType::dense_ttm: {
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
            const Index b = in.shape()[0], fin = w.cols(), fout = w.rows();
            const auto bias_it = l.params.find("bias");
            DenseTensor out({b, fout});
            for (Index ib = 0; ib < b; ++ib)
                for (Index o = 0; o < fout; ++o) {
                    double acc = bias_it != l.params.end() ? bias_it->second[o] : 0.0;
                    const double* xp = in.data() + ib * fin;
                    for (Index f = 0; f < fin; ++f) acc += w(o, f) * xp[f];
                    out[ib * fout + o] = acc;
                }
            return out;
        }
        case LayerType::relu: {
            DenseTensor out = in;
            for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
            return out;
        }
        case LayerType::maxpool2d: {
            const Index pool = l.attr("pool", 2);
            const Index stride = l.attr("stride", 0) > 0 ? l.attr("stride", 0) : pool;
            const Index b = in.shape()[0], c = in.shape()[1], h = in.shape()[2], w = in.shape()[3];
            const Index ho = (h - pool) / stride + 1, wo = (w - pool) / stride + 1;
            DenseTensor out({b, c, ho, wo});
            for (Index ib = 0; ib < b; ++ib)
                for (Index ic = 0; ic < c; ++ic) {
                    const double* xp = in.data() + ((ib * c + ic) * h) * w;
                    double* yp = out.data() + ((ib * c + ic) * ho) * wo;
                    for (Index oy = 0; oy < ho; ++oy)
                        for (Index ox = 0; ox < wo; ++ox) {
                            double best = xp[(oy * stride) * w + ox * stride];
                            for (Index ky = 0; ky < pool; ++ky)
                                for (Index kx = 0; kx < pool; ++kx) {
                                    const double v = xp[(oy * stride + ky) * w + ox * stride + kx];
                                    if (v > best) best = v;
                                }
                            yp[oy * wo + ox] = best;
                        }
                }
            return out;
        }
        case LayerType::flatten: {
            Index f = 1;
            for (std::size_t i = 1; i < in.shape().size(); ++i) f *= in.shape()[i];
            return in.reshaped({in.shape()[0], f});
        }
        case LayerType::softmax: {
            const Index b = in.shape()[0], kk = in.size() / in.shape()[0];
            DenseTensor out = in;
            for (Index ib = 0; ib < b; ++ib) {
                double* row = out.data() + ib * kk;
                double mx = row[0];
                for (Index j = 1; j < kk; ++j) mx = std::max(mx, row[j]);
                double sum = 0.0;
                for (Index j = 0; j < kk; ++j) {
                    row[j] = std::exp(row[j] - mx);
                    sum += row[j];
                }
                for (Index j = 0; j < kk; ++j) row[j] /= sum;
            }
            return out;
        }
    }
    layer_error(l, "unhandled layer type");
}

// Parameter gradients keyed like Layer::params; `din` is the gradient with
// respect to the layer input.
struct LayerGrads {
    DenseTensor din;
    std::map<std::string, DenseTensor> by_param;
};

LayerGrads layer_backward(const Layer& l, const LayerCtx& ctx, const DenseTensor& dout) {
    LayerGrads g;
    switch (l.type) {
        case LayerType::conv2d: {
            ConvGrads cg = conv_backward(ctx.input, param(l, "weight"), l.attr("stride", 1), l.attr("pad", 0), dout);
            g.din = std::move(cg.din);
            g.by_param["weight"] = std::move(cg.dw);
            g.by_param["bias"] = DenseTensor(param(l, "bias").shape(), std::move(cg.db));
            return g;
        }
        case LayerType::conv2d_tucker2: {
            const auto& u_in = param(l, "u_in");
            const auto& u_out = param(l, "u_out");
            DenseTensor k1 = u_in_as_kernel(u_in);
            DenseTensor k3 = u_out_as_kernel(u_out);
            ConvGrads g3 = conv_backward(ctx.z2, k3, 1, 0, dout);
            ConvGrads g2 = conv_backward(ctx.z1, param(l, "core"), l.attr("stride", 1), l.attr("pad", 0), g3.din);
            ConvGrads g1 = conv_backward(ctx.input, k1, 1, 0, g2.din);
            g.din = std::move(g1.din);
            g.by_param["core"] = std::move(g2.dw);
            // kernel-layout grads map back onto the factor matrices
            const Index c_in = u_in.shape()[0], r = u_in.shape()[1];
            DenseTensor du_in(u_in.shape());
            for (Index i = 0; i < c_in; ++i)
                for (Index a = 0; a < r; ++a) du_in[i * r + a] = g1.dw[a * c_in + i];
            g.by_param["u_in"] = std::move(du_in);
            const Index c_out = u_out.shape()[0];
            DenseTensor du_out(u_out.shape());
            for (Index o = 0; o < c_out; ++o)
                for (Index a = 0; a < r; ++a) du_out[o * r + a] = g3.dw[o * r + a];
            g.by_param["u_out"] = std::move(du_out);
            g.by_param["bias"] = DenseTensor(param(l, "bias").shape(), std::move(g3.db));
            return g;
        }
        case LayerType::dense: {
            const auto& w = param(l, "weight");
            const Index b = ctx.input.shape()[0], fin = w.shape()[1], fout = w.shape()[0];
            g.din = DenseTensor(ctx.input.shape());
            DenseTensor dw(w.shape());
            DenseTensor db(param(l, "bias").shape());
            for (Index ib = 0; ib < b; ++ib) {
                const double* dyp = dout.data() + ib * fout;
                const double* xp = ctx.input.data() + ib * fin;
                double* dxp = g.din.data() + ib * fin;
                for (Index o = 0; o < fout; ++o) {
                    const double dy = dyp[o];
                    if (dy == 0.0) continue;
                    db[o] += dy;
                    const double* wp = w.data() + o * fin;
                    double* dwp = dw.data() + o * fin;
                    for (Index f = 0; f < fin; ++f) {
                        dwp[f] += dy * xp[f];
                        dxp[f] += dy * wp[f];
                    }
                }
            }
            g.by_param["weight"] = std::move(dw);
            g.by_param["bias"] = std::move(db);
            return g;
        }
        case LayerType::dense_ttm: {
            // TT cores stay frozen; only the data gradient (and bias) flows.
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
            const Index b = ctx.input.shape()[0], fin = w.cols(), fout = w.rows();
            g.din = DenseTensor(ctx.input.shape());
            for (Index ib = 0; ib < b; ++ib) {
                const double* dyp = dout.data() + ib * fout;
                double* dxp = g.din.data() + ib * fin;
                for (Index o = 0; o < fout; ++o) {
                    const double dy = dyp[o];
                    if (dy == 0.0) continue;
                    for (Index f = 0; f < fin; ++f) dxp[f] += dy * w(o, f);
                }
            }
            if (l.params.contains("bias")) {
                DenseTensor db(l.params.at("bias").shape());
                for (Index ib = 0; ib < b; ++ib)
                    for (Index o = 0; o < fout; ++o) db[o] += dout[ib * fout + o];
                g.by_param["bias"] = std::move(db);
            }
            return g;
        }
        case LayerType::relu: {
            g.din = dout;
            for (Index i = 0; i < g.din.size(); ++i)
                if (ctx.input[i] <= 0.0) g.din[i] = 0.0;
            return g;
        }
        case LayerType::maxpool2d: {
            const Index pool = l.attr("pool", 2);
            const Index stride = l.attr("stride", 0) > 0 ? l.attr("stride", 0) : pool;
            const Index b = ctx.input.shape()[0], c = ctx.input.shape()[1];
            const Index h = ctx.input.shape()[2], w = ctx.input.shape()[3];
            const Index ho = dout.shape()[2], wo = dout.shape()[3];
            g.din = DenseTensor(ctx.input.shape());
            for (Index ib = 0; ib < b; ++ib)
                for (Index ic = 0; ic < c; ++ic) {
                    const double* xp = ctx.input.data() + ((ib * c + ic) * h) * w;
                    double* dxp = g.din.data() + ((ib * c + ic) * h) * w;
                    const double* dyp = dout.data() + ((ib * c + ic) * ho) * wo;
                    for (Index oy = 0; oy < ho; ++oy)
                        for (Index ox = 0; ox < wo; ++ox) {
                            // gradient goes to the first maximal element
                            Index by = 0, bx = 0;
                            double best = xp[(oy * stride) * w + ox * stride];
                            for (Index ky = 0; ky < pool; ++ky)
                                for (Index kx = 0; kx < pool; ++kx) {
                                    const double v = xp[(oy * stride + ky) * w + ox * stride + kx];
                                    if (v > best) {
                                        best = v;
                                        by = ky;
                                        bx = kx;
                                    }
                                }
                            dxp[(oy * stride + by) * w + ox * stride + bx] += dyp[oy * wo + ox];
                        }
                }
            return g;
        }
        case LayerType::flatten: {
            g.din = dout.reshaped(ctx.input.shape());
            return g;
        }
        case LayerType::softmax: {
            const Index b = ctx.output.shape()[0], kk = ctx.output.size() / ctx.output.shape()[0];
            g.din = DenseTensor(ctx.output.shape());
            for (Index ib = 0; ib < b; ++ib) {
                const double* y = ctx.output.data() + ib * kk;
                const double* dy = dout.data() + ib * kk;
                double dot = 0.0;
                for (Index j = 0; j < kk; ++j) dot += dy[j] * y[j];
                for (Index j = 0; j < kk; ++j) g.din[ib * kk + j] = y[j] * (dy[j] - dot);
            }
            return g;
        }
    }
    layer_error(l, "unhandled layer type");
}

DenseTensor slice_batch(const DenseTensor& images, std::span<const Index> sample_ids) {
    Shape s = images.shape();
    const Index stride = shape_numel(Shape(s.begin() + 1, s.end()));
    Shape out_shape = s;
    out_shape[0] = static_cast<Index>(sample_ids.size());
    DenseTensor out(out_shape);
    for (std::size_t i = 0; i < sample_ids.size(); ++i)
        std::copy_n(images.data() + sample_ids[i] * stride, stride, out.data() + static_cast<Index>(i) * stride);
    return out;
}

}  // namespace

void validate_model(const ModelGraph& m) {
    std::vector<std::string> names;
    for (const auto& l : m.layers) {
        if (std::find(names.begin(), names.end(), l.name) != names.end())
            throw std::invalid_argument("duplicate layer name '" + l.name + "'");
        names.push_back(l.name);
    }
    infer_output_shape(m);
}

Shape infer_output_shape(const ModelGraph& m) {
    if (m.input_shape.size() != 3) throw std::invalid_argument("model input shape must be [C,H,W]");
    Shape s = m.input_shape;
    for (const auto& l : m.layers) s = layer_output_shape(l, s);
    return s;
}

DenseTensor forward(const ModelGraph& m, const DenseTensor& batch) {
    if (batch.ndim() != 4) throw std::invalid_argument("forward: batch must be [B,C,H,W]");
    Shape expect = m.input_shape;
    for (std::size_t i = 0; i < 3; ++i)
        if (batch.shape()[i + 1] != expect[i])
            throw std::invalid_argument("forward: batch shape " + shape_to_string(batch.shape()) +
                                        " does not match model input " + shape_to_string(expect));
    DenseTensor act = batch;
    for (const auto& l : m.layers) act = layer_forward(l, act, nullptr);
    if (act.ndim() != 2) act = act.reshaped({act.shape()[0], act.size() / act.shape()[0]});
    return act;
}

Dataset gen_bars(Index n, Index size, double noise, std::uint64_t seed) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("gen_bars: n must be even and >= 2");
    if (size < 2) throw std::invalid_argument("gen_bars: size must be >= 2");
    Rng rng(seed);
    Dataset d;
    d.class_count = 2;
    d.images = DenseTensor({n, 1, size, size});
    d.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Index cls = i % 2;
        d.labels[static_cast<std::size_t>(i)] = cls;
        double* img = d.images.data() + i * size * size;
        const Index pos = rng.next_int(size);
        if (cls == 0) {
            for (Index x = 0; x < size; ++x) img[pos * size + x] = 1.0;
        } else {
            for (Index y = 0; y < size; ++y) img[y * size + pos] = 1.0;
        }
        if (noise != 0.0)
            for (Index p = 0; p < size * size; ++p) img[p] += noise * rng.normal();
    }
    return d;
}

double accuracy(const ModelGraph& m, const Dataset& data) {
    const Index n = data.size();
    if (n < 1) throw std::invalid_argument("accuracy: empty dataset");
    Index correct = 0;
    const Index chunk = 256;
    std::vector<Index> ids;
    for (Index start = 0; start < n; start += chunk) {
        const Index stop = std::min(n, start + chunk);
        ids.clear();
        for (Index i = start; i < stop; ++i) ids.push_back(i);
        DenseTensor logits = forward(m, slice_batch(data.images, ids));
        const Index k = logits.shape()[1];
        for (Index b = 0; b < stop - start; ++b) {
            Index arg = 0;
            for (Index j = 1; j < k; ++j)
                if (logits[b * k + j] > logits[b * k + arg]) arg = j;
            if (arg == data.labels[static_cast<std::size_t>(start + b)]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

GradientResult loss_and_gradients(const ModelGraph& m, const DenseTensor& batch,
                                  std::span<const std::int64_t> labels) {
    const Index bsize = batch.shape()[0];
    if (static_cast<Index>(labels.size()) != bsize)
        throw std::invalid_argument("loss_and_gradients: batch/labels length mismatch");

    std::vector<LayerCtx> ctx(m.layers.size());
    DenseTensor act = batch;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        ctx[li].input = act;
        act = layer_forward(m.layers[li], act, &ctx[li]);
        ctx[li].output = act;
    }
    DenseTensor logits = act.ndim() == 2 ? act : act.reshaped({bsize, act.size() / bsize});

    // softmax cross-entropy and its gradient
    const Index k = logits.shape()[1];
    DenseTensor dlogits(logits.shape());
    double loss = 0.0;
    for (Index b = 0; b < bsize; ++b) {
        const double* row = logits.data() + b * k;
        double mx = row[0];
        for (Index j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (Index j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
        const Index label = labels[static_cast<std::size_t>(b)];
        if (label < 0 || label >= k) throw std::invalid_argument("loss_and_gradients: label out of range");
        loss -= (row[label] - mx - std::log(sum));
        for (Index j = 0; j < k; ++j) {
            const double p = std::exp(row[j] - mx) / sum;
            dlogits[b * k + j] = (p - (j == label ? 1.0 : 0.0)) / static_cast<double>(bsize);
        }
    }
    loss /= static_cast<double>(bsize);

    GradientResult out{loss, std::vector<std::map<std::string, DenseTensor>>(m.layers.size())};
    DenseTensor grad = dlogits.reshaped(ctx.back().output.shape());
    for (Index li = static_cast<Index>(m.layers.size()) - 1; li >= 0; --li) {
        auto uli = static_cast<std::size_t>(li);
        LayerGrads lg = layer_backward(m.layers[uli], ctx[uli], grad);
        grad = std::move(lg.din);
        out.grads[uli] = std::move(lg.by_param);
    }
    return out;
}

TrainResult train(const ModelGraph& m, const Dataset& data, const TrainConfig& cfg) {
    validate_model(m);
    const Shape out_shape = infer_output_shape(m);
    if (out_shape.size() != 1 || out_shape[0] != data.class_count)
        throw std::invalid_argument("train: model output size does not match class count");
    if (cfg.epochs < 0 || cfg.batch < 1) throw std::invalid_argument("train: invalid epochs/batch");

    TrainResult result{m, {}};
    ModelGraph& model = result.model;
    Rng rng(cfg.seed);

    // momentum buffers per (layer, param)
    std::vector<std::map<std::string, DenseTensor>> velocity(model.layers.size());

    const Index n = data.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    std::vector<std::int64_t> batch_labels;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates shuffle from the pinned PRNG
        for (Index i = n - 1; i >= 1; --i)
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.next_int(i + 1))]);

        double loss_sum = 0.0;
        for (Index start = 0, step = 0; start < n; start += cfg.batch, ++step) {
            const Index stop = std::min(n, start + cfg.batch);
            const Index bsize = stop - start;
            std::span<const Index> ids(order.data() + start, static_cast<std::size_t>(bsize));
            DenseTensor batch = slice_batch(data.images, ids);
            batch_labels.clear();
            for (Index b = 0; b < bsize; ++b)
                batch_labels.push_back(data.labels[static_cast<std::size_t>(ids[static_cast<std::size_t>(b)])]);

            GradientResult g = loss_and_gradients(model, batch, batch_labels);
            if (!std::isfinite(g.loss))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                         std::to_string(step));
            loss_sum += g.loss * static_cast<double>(bsize);

            for (std::size_t uli = 0; uli < model.layers.size(); ++uli) {
                Layer& layer = model.layers[uli];
                for (auto& [pname, pgrad] : g.grads[uli]) {
                    DenseTensor& w = layer.params.at(pname);
                    auto [vit, inserted] = velocity[uli].try_emplace(pname, DenseTensor(w.shape()));
                    DenseTensor& v = vit->second;
                    for (Index i = 0; i < w.size(); ++i) {
                        v[i] = cfg.momentum * v[i] - cfg.lr * pgrad[i];
                        w[i] += v[i];
                    }
                    layer.quantized.erase(pname);  // stored codes are stale once trained
                }
            }
        }
        result.history.push_back(EpochStats{loss_sum / static_cast<double>(n), accuracy(model, data)});
    }
    return result;
}

Layer conv2d_layer(const std::string& name, Index c_in, Index c_out, Index kernel, Index stride, Index pad,
                   Rng& rng) {
    Layer l;
    l.name = name;
    l.type = LayerType::conv2d;
    DenseTensor w({c_out, c_in, kernel, kernel});
    const double scale = std::sqrt(2.0 / static_cast<double>(c_in * kernel * kernel));
    for (auto& v : w.values()) v = scale * rng.normal();
    l.params["weight"] = std::move(w);
    l.params["bias"] = DenseTensor({c_out});
    l.attrs["stride"] = stride;
    l.attrs["pad"] = pad;
    return l;
}

Layer dense_layer(const std::string& name, Index in, Index out, Rng& rng) {
    Layer l;
    l.name = name;
    l.type = LayerType::dense;
    DenseTensor w({out, in});
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    for (auto& v : w.values()) v = scale * rng.normal();
    l.params["weight"] = std::move(w);
    l.params["bias"] = DenseTensor({out});
    return l;
}

Layer relu_layer(const std::string& name) {
    return Layer{name, LayerType::relu, {}, {}, {}};
}

Layer maxpool2d_layer(const std::string& name, Index pool, Index stride) {
    Layer l{name, LayerType::maxpool2d, {}, {}, {}};
    l.attrs["pool"] = pool;
    l.attrs["stride"] = stride;
    return l;
}

Layer flatten_layer(const std::string& name) {
    return Layer{name, LayerType::flatten, {}, {}, {}};
}

Layer softmax_layer(const std::string& name) {
    return Layer{name, LayerType::softmax, {}, {}, {}};
}

ModelGraph make_bars_cnn(std::uint64_t seed, Index image_size) {
    Rng rng(seed);
    ModelGraph m;
    m.input_shape = {1, image_size, image_size};
    m.layers.push_back(conv2d_layer("conv1", 1, 16, 3, 1, 1, rng));
    m.layers.push_back(relu_layer("relu1"));
    m.layers.push_back(maxpool2d_layer("pool1"));
    m.layers.push_back(conv2d_layer("conv2", 16, 32, 3, 1, 1, rng));
    m.layers.push_back(relu_layer("relu2"));
    m.layers.push_back(maxpool2d_layer("pool2"));
    m.layers.push_back(flatten_layer("flat"));
    const Index side = image_size / 4;
    m.layers.push_back(dense_layer("fc", 32 * side * side, 2, rng));
    validate_model(m);
    return m;
}

}  // namespace taml
