#pragma once

#include <string>

#include "taml/container.hpp"
#include "taml/nn.hpp"
#include "taml/tabular.hpp"

namespace taml {

Container model_to_container(const ModelGraph& m);
ModelGraph model_from_container(const Container& c);

Container dataset_to_container(const Dataset& d);
Dataset dataset_from_container(const Container& c);

Container tabular_to_container(const TabularBenchmark& b);
TabularBenchmark tabular_from_container(const Container& c);

/// Builds an initialized sequential model from a small JSON description:
/// {"input_shape":[C,H,W],"layers":[{"type":"conv2d","out":16,"kernel":3,
/// "stride":1,"pad":1}, {"type":"relu"}, {"type":"maxpool2d","pool":2},
/// {"type":"flatten"}, {"type":"dense","out":2}]}. In-channels and input
/// features are inferred along the chain; weights use fan-in init from the
/// given seed.
ModelGraph arch_from_json(const std::string& text, std::uint64_t seed);

}  // namespace taml
