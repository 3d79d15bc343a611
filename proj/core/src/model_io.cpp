#include "taml/model_io.hpp"

#include <nlohmann/json.hpp>

#include <cstring>

#include "taml/compress.hpp"

namespace taml {

using nlohmann::json;

Container model_to_container(const ModelGraph& m) {
    Container c;
    json layers = json::array();
    for (const auto& l : m.layers) {
        json params = json::object();
        for (const auto& [pname, tensor] : l.params) {
            const std::string entry_name = l.name + "." + pname;
            json pj{{"entry", entry_name}};
            auto qit = l.quantized.find(pname);
            if (qit != l.quantized.end()) {
                const QuantizedTensor& q = qit->second;
                ContainerEntry e;
                e.name = entry_name;
                e.dtype = Dtype::u8;
                e.shape = q.shape;
                e.data = q.codes;
                c.entries.push_back(std::move(e));
                pj["quant"] = {{"bits", q.bits}, {"scale", q.scale}, {"zero_point", q.zero_point}};
            } else {
                c.entries.push_back(tensor_entry(entry_name, tensor));
            }
            params[pname] = std::move(pj);
        }
        json attrs = json::object();
        for (const auto& [k, v] : l.attrs) attrs[k] = v;
        layers.push_back(
            {{"name", l.name}, {"type", layer_type_name(l.type)}, {"attrs", attrs}, {"params", params}});
    }
    json meta{{"kind", "model"}, {"model", {{"input_shape", m.input_shape}, {"layers", layers}}}};
    c.meta_json = meta.dump();
    return c;
}

ModelGraph model_from_container(const Container& c) {
    json meta;
    try {
        meta = json::parse(c.meta_json);
    } catch (const json::exception& e) {
        throw InputError(std::string("model meta malformed: ") + e.what());
    }
    if (!meta.contains("model")) throw InputError("container holds no model manifest");
    const json& mj = meta["model"];

    ModelGraph m;
    try {
        for (const auto& d : mj.at("input_shape")) m.input_shape.push_back(d.get<Index>());
        for (const auto& lj : mj.at("layers")) {
            Layer l;
            l.name = lj.at("name").get<std::string>();
            l.type = layer_type_from_name(lj.at("type").get<std::string>());
            if (lj.contains("attrs"))
                for (const auto& [k, v] : lj["attrs"].items()) l.attrs[k] = v.get<std::int64_t>();
            if (lj.contains("params")) {
                for (const auto& [pname, pj] : lj["params"].items()) {
                    const std::string entry_name = pj.at("entry").get<std::string>();
                    const ContainerEntry* e = c.find(entry_name);
                    if (!e) throw InputError("model manifest references missing entry '" + entry_name + "'");
                    if (pj.contains("quant")) {
                        QuantizedTensor q;
                        q.bits = pj["quant"].at("bits").get<int>();
                        q.scale = pj["quant"].at("scale").get<double>();
                        q.zero_point = pj["quant"].at("zero_point").get<std::int64_t>();
                        q.shape = e->shape;
                        q.codes = e->data;
                        l.params[pname] = dequantize(q);
                        l.quantized[pname] = std::move(q);
                    } else {
                        l.params[pname] = tensor_from_entry(*e);
                    }
                }
            }
            m.layers.push_back(std::move(l));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("model manifest malformed: ") + e.what());
    }
    validate_model(m);
    return m;
}

Container dataset_to_container(const Dataset& d) {
    Container c;
    c.entries.push_back(tensor_entry("images", d.images));
    c.entries.push_back(i64_entry("labels", d.labels));
    c.meta_json = json{{"kind", "dataset"}, {"dataset", {{"class_count", d.class_count}}}}.dump();
    return c;
}

Dataset dataset_from_container(const Container& c) {
    const ContainerEntry* images = c.find("images");
    const ContainerEntry* labels = c.find("labels");
    if (!images || !labels) throw InputError("dataset container needs 'images' and 'labels' entries");
    Dataset d;
    d.images = tensor_from_entry(*images);
    d.labels = i64_from_entry(*labels);
    if (d.images.ndim() != 4) throw InputError("dataset images must be [N,C,H,W]");
    if (static_cast<Index>(d.labels.size()) != d.images.shape()[0])
        throw InputError("dataset images/labels length mismatch");
    json meta;
    try {
        meta = json::parse(c.meta_json);
        d.class_count = meta.at("dataset").at("class_count").get<Index>();
    } catch (const json::exception& e) {
        throw InputError(std::string("dataset meta malformed: ") + e.what());
    }
    for (std::int64_t lb : d.labels)
        if (lb < 0 || lb >= d.class_count) throw InputError("dataset label outside [0, class_count)");
    return d;
}

Container tabular_to_container(const TabularBenchmark& b) {
    Container c;
    c.entries.push_back(tensor_entry("table", b.table));
    json meta{{"kind", "table"},
              {"space", json::parse(b.space.to_json())},
              {"table", {{"name", b.name}, {"metric", b.metric}}}};
    c.meta_json = meta.dump();
    return c;
}

TabularBenchmark tabular_from_container(const Container& c) {
    const ContainerEntry* table = c.find("table");
    if (!table) throw InputError("benchmark container needs a 'table' entry");
    json meta;
    std::string name = "table", metric = "value";
    SearchSpace space;
    try {
        meta = json::parse(c.meta_json);
        space = SearchSpace::from_json(meta.at("space").dump());
        if (meta.contains("table")) {
            name = meta["table"].value("name", name);
            metric = meta["table"].value("metric", metric);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("benchmark meta malformed: ") + e.what());
    }
    DenseTensor values = [&] {
        if (table->dtype != Dtype::f32) throw InputError("benchmark table must be f32");
        const Index numel = static_cast<Index>(table->data.size() / 4);
        std::vector<double> v(static_cast<std::size_t>(numel));
        for (Index i = 0; i < numel; ++i) {
            float f;
            std::memcpy(&f, table->data.data() + static_cast<std::size_t>(i) * 4, 4);
            v[static_cast<std::size_t>(i)] = static_cast<double>(f);
        }
        // Construct without the finiteness check: NaNs encode missing grid
        // entries and are rejected with a count by the benchmark check.
        DenseTensor t(table->shape);
        t.values() = std::move(v);
        return t;
    }();
    try {
        return TabularBenchmark(std::move(space), std::move(values), std::move(name), std::move(metric));
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
}

ModelGraph arch_from_json(const std::string& text, std::uint64_t seed) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("arch JSON malformed: ") + e.what());
    }
    Rng rng(seed);
    ModelGraph m;
    try {
        for (const auto& d : doc.at("input_shape")) m.input_shape.push_back(d.get<Index>());
        if (m.input_shape.size() != 3) throw InputError("arch input_shape must be [C,H,W]");
        Shape shape = m.input_shape;
        int auto_name = 0;
        for (const auto& lj : doc.at("layers")) {
            const std::string type = lj.at("type").get<std::string>();
            std::string name = lj.value("name", type + std::to_string(auto_name));
            ++auto_name;
            if (type == "conv2d") {
                const Index out = lj.at("out").get<Index>();
                const Index kernel = lj.value("kernel", Index{3});
                const Index stride = lj.value("stride", Index{1});
                const Index pad = lj.value("pad", Index{0});
                m.layers.push_back(conv2d_layer(name, shape[0], out, kernel, stride, pad, rng));
            } else if (type == "dense") {
                if (shape.size() != 1) throw InputError("dense layer '" + name + "' needs a flattened input");
                m.layers.push_back(dense_layer(name, shape[0], lj.at("out").get<Index>(), rng));
            } else if (type == "relu") {
                m.layers.push_back(relu_layer(name));
            } else if (type == "maxpool2d") {
                m.layers.push_back(maxpool2d_layer(name, lj.value("pool", Index{2}), lj.value("stride", Index{0})));
            } else if (type == "flatten") {
                m.layers.push_back(flatten_layer(name));
            } else if (type == "softmax") {
                m.layers.push_back(softmax_layer(name));
            } else {
                throw InputError("arch JSON: unknown layer type '" + type + "'");
            }
            shape = [&] {
                ModelGraph probe;
                probe.input_shape = m.input_shape;
                probe.layers = m.layers;
                return infer_output_shape(probe);
            }();
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("arch JSON malformed: ") + e.what());
    }
    validate_model(m);
    return m;
}

}  // namespace taml
