#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taml/factors.hpp"
#include "taml/rng.hpp"
#include "taml/tensor.hpp"

namespace taml {

enum class LayerType { conv2d, dense, relu, maxpool2d, flatten, softmax, conv2d_tucker2, dense_ttm };

std::string layer_type_name(LayerType t);
LayerType layer_type_from_name(const std::string& s);

/// One layer of a sequential model. Parameter tensors live in `params`
/// keyed by role ("weight", "bias", "u_in", "core", "u_out", "core0"...);
/// integer attributes (stride, pad, pool) in `attrs`. `quantized` carries
/// the storage codes of params that were quantized, kept so containers can
/// persist the compact form; training invalidates it.
struct Layer {
    std::string name;
    LayerType type;
    std::map<std::string, DenseTensor> params;
    std::map<std::string, std::int64_t> attrs;
    std::map<std::string, QuantizedTensor> quantized;

    Index attr(const std::string& key, Index fallback) const;
};

struct ModelGraph {
    Shape input_shape;  // [C, H, W]
    std::vector<Layer> layers;

    Index param_count() const;
    const Layer* find(const std::string& name) const;
    Layer* find(const std::string& name);
};

/// Unique layer names plus a full shape-chain check from the declared input.
void validate_model(const ModelGraph& m);
/// Shape produced by the chain; throws naming the offending layer.
Shape infer_output_shape(const ModelGraph& m);

struct Dataset {
    DenseTensor images;  // [N, C, H, W]
    std::vector<std::int64_t> labels;
    Index class_count = 0;

    Index size() const { return images.shape().empty() ? 0 : images.shape()[0]; }
};

/// Deterministic forward pass; returns logits [B, classes].
DenseTensor forward(const ModelGraph& m, const DenseTensor& batch);

struct TrainConfig {
    int epochs = 10;
    double lr = 0.05;
    double momentum = 0.9;
    Index batch = 32;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double loss;
    double accuracy;
};

struct TrainResult {
    ModelGraph model;
    std::vector<EpochStats> history;
};

/// Mean softmax cross-entropy over the batch plus analytic parameter
/// gradients per layer (same keys as Layer::params; frozen params such as
/// TT-matrix cores are absent).
struct GradientResult {
    double loss;
    std::vector<std::map<std::string, DenseTensor>> grads;  // one map per layer
};
GradientResult loss_and_gradients(const ModelGraph& m, const DenseTensor& batch,
                                  std::span<const std::int64_t> labels);

/// SGD with momentum on softmax cross-entropy, deterministic given the
/// seed. Gradients flow through dense, conv (plain and factorized), relu,
/// maxpool, flatten and softmax; TT-matrix cores are frozen.
TrainResult train(const ModelGraph& m, const Dataset& data, const TrainConfig& cfg);

/// Two-class synthetic imagery: horizontal bar (class 0) vs vertical bar
/// (class 1) at a random position, optional Gaussian pixel noise.
Dataset gen_bars(Index n, Index size = 8, double noise = 0.1, std::uint64_t seed = 0);

/// argmax(logits) vs labels; prediction ties resolve to the lowest class.
double accuracy(const ModelGraph& m, const Dataset& data);

// Layer builders (He-style fan-in init from the pinned PRNG).
Layer conv2d_layer(const std::string& name, Index c_in, Index c_out, Index kernel, Index stride, Index pad, Rng& rng);
Layer dense_layer(const std::string& name, Index in, Index out, Rng& rng);
Layer relu_layer(const std::string& name);
Layer maxpool2d_layer(const std::string& name, Index pool = 2, Index stride = 0);  // stride 0 = pool
Layer flatten_layer(const std::string& name);
Layer softmax_layer(const std::string& name);

/// The two-conv CNN used throughout the examples and the end-to-end tests.
ModelGraph make_bars_cnn(std::uint64_t seed, Index image_size = 8);

}  // namespace taml
