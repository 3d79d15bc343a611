#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstring>

#include "taml/compress.hpp"
#include "taml/container.hpp"
#include "taml/model_io.hpp"
#include "taml/rng.hpp"

using namespace taml;

namespace {

Container random_container(Rng& rng) {
    Container c;
    const Index n_entries = rng.next_int(4);
    for (Index e = 0; e < n_entries; ++e) {
        ContainerEntry entry;
        entry.name = "entry" + std::to_string(e);
        switch (rng.next_int(4)) {
            case 0: entry.dtype = Dtype::f32; break;
            case 1: entry.dtype = Dtype::u8; break;
            case 2: entry.dtype = Dtype::i8; break;
            default: entry.dtype = Dtype::i64; break;
        }
        const Index d = rng.next_int(3) + 1;
        Index numel = 1;
        for (Index k = 0; k < d; ++k) {
            const Index dim = 1 + rng.next_int(5);
            entry.shape.push_back(dim);
            numel *= dim;
        }
        entry.data.resize(static_cast<std::size_t>(numel * dtype_size(entry.dtype)));
        for (auto& b : entry.data) b = static_cast<std::uint8_t>(rng.next_int(256));
        c.entries.push_back(std::move(entry));
    }
    c.meta_json = nlohmann::json{{"k", rng.next_int(100)}, {"tag", "t" + std::to_string(rng.next_int(10))}}.dump();
    return c;
}

}  // namespace

TEST_CASE("an empty entry list makes a valid minimal container") {
    Container c;
    std::vector<std::uint8_t> bytes = container_write(c);
    CHECK(bytes.size() >= 16);
    CHECK(std::memcmp(bytes.data(), "TAML", 4) == 0);
    Container back = container_read(bytes);
    CHECK(back.entries.empty());
    CHECK(back.meta_json == "{}");
}

TEST_CASE("a single 2x2 f32 tensor occupies 16 payload bytes at offset 0") {
    Container c;
    c.entries.push_back(tensor_entry("t", DenseTensor({2, 2}, {1, 2, 3, 4})));
    std::vector<std::uint8_t> bytes = container_write(c);

    std::uint64_t header_len;
    std::memcpy(&header_len, bytes.data() + 8, 8);
    const auto header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(header_len));
    CHECK(header["entries"][0]["offset"] == 0);
    CHECK(header["entries"][0]["length"] == 16);
    CHECK(bytes.size() == 16 + header_len + 16);

    DenseTensor back = tensor_from_entry(*container_read(bytes).find("t"));
    CHECK(back.shape() == Shape{2, 2});
    for (Index i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(static_cast<double>(i + 1)));
}

TEST_CASE("random containers round-trip byte-exactly") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Container c = random_container(rng);
        std::vector<std::uint8_t> bytes = container_write(c);
        Container back = container_read(bytes);
        std::vector<std::uint8_t> again = container_write(back);
        CHECK(bytes == again);
    }
}

TEST_CASE("duplicate names are rejected on write and on read") {
    Container c;
    c.entries.push_back(i64_entry("same", {1}));
    c.entries.push_back(i64_entry("same", {2}));
    CHECK_THROWS_AS((void)container_write(c), InputError);
}

TEST_CASE("structural corruption is rejected cleanly") {
    Container c;
    c.entries.push_back(i64_entry("x", {1, 2, 3}));
    std::vector<std::uint8_t> ok = container_write(c);

    SUBCASE("bad magic") {
        auto bytes = ok;
        bytes[0] = 'X';
        CHECK_THROWS_AS((void)container_read(bytes), InputError);
    }
    SUBCASE("bad version") {
        auto bytes = ok;
        bytes[4] = 9;
        CHECK_THROWS_AS((void)container_read(bytes), InputError);
    }
    SUBCASE("header length past the file end") {
        auto bytes = ok;
        bytes[8] = 0xFF;
        bytes[9] = 0xFF;
        CHECK_THROWS_AS((void)container_read(bytes), InputError);
    }
    SUBCASE("truncated file") {
        std::vector<std::uint8_t> bytes(ok.begin(), ok.begin() + 10);
        CHECK_THROWS_AS((void)container_read(bytes), InputError);
    }
    SUBCASE("payload out of bounds") {
        auto bytes = ok;
        bytes.resize(bytes.size() - 8);  // chop one i64
        CHECK_THROWS_AS((void)container_read(bytes), InputError);
    }
}

TEST_CASE("single-byte header fuzzing never crashes and fails cleanly") {
    Rng rng(13);
    Container c = random_container(rng);
    c.entries.push_back(tensor_entry("w", DenseTensor({3, 3})));
    const std::vector<std::uint8_t> ok = container_write(c);
    std::uint64_t header_len;
    std::memcpy(&header_len, ok.data() + 8, 8);
    const std::size_t fuzz_region = 16 + static_cast<std::size_t>(header_len);

    int rejected = 0, accepted = 0;
    for (std::size_t pos = 0; pos < fuzz_region; ++pos) {
        auto bytes = ok;
        bytes[pos] ^= static_cast<std::uint8_t>(1 + rng.next_int(255));
        try {
            (void)container_read(bytes);
            ++accepted;
        } catch (const std::exception&) {
            ++rejected;
        }
    }
    CHECK(rejected + accepted == static_cast<int>(fuzz_region));
    CHECK(rejected > 0);  // magic/version/length corruption must fail
}

TEST_CASE("models round-trip through containers within f32 precision") {
    ModelGraph m = make_bars_cnn(3);
    std::vector<std::uint8_t> bytes = container_write(model_to_container(m));
    ModelGraph back = model_from_container(container_read(bytes));
    REQUIRE(back.layers.size() == m.layers.size());
    CHECK(back.input_shape == m.input_shape);
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        CHECK(back.layers[li].name == m.layers[li].name);
        CHECK(back.layers[li].type == m.layers[li].type);
        CHECK(back.layers[li].attrs == m.layers[li].attrs);
        for (const auto& [pname, p] : m.layers[li].params) {
            const DenseTensor& q = back.layers[li].params.at(pname);
            REQUIRE(q.shape() == p.shape());
            for (Index i = 0; i < p.size(); ++i)
                CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("quantized parameters persist their codes exactly") {
    ModelGraph m = make_bars_cnn(4);
    CompressionPlan plan = CompressionPlan::from_json(R"({"layers":{"conv2":[{"op":"quant","bits":8}]}})");
    CompressResult r = compress_model(m, plan);
    std::vector<std::uint8_t> bytes = container_write(model_to_container(r.model));
    ModelGraph back = model_from_container(container_read(bytes));
    const Layer* orig = r.model.find("conv2");
    const Layer* load = back.find("conv2");
    REQUIRE(load != nullptr);
    REQUIRE(load->quantized.count("weight") == 1);
    CHECK(load->quantized.at("weight").codes == orig->quantized.at("weight").codes);
    CHECK(load->quantized.at("weight").scale == orig->quantized.at("weight").scale);
    const DenseTensor& w_orig = orig->params.at("weight");
    const DenseTensor& w_back = load->params.at("weight");
    for (Index i = 0; i < w_orig.size(); ++i) CHECK(w_back[i] == w_orig[i]);
}

TEST_CASE("datasets and benchmarks round-trip through containers") {
    Dataset d = gen_bars(8, 6, 0.05, 5);
    Dataset dback = dataset_from_container(container_read(container_write(dataset_to_container(d))));
    CHECK(dback.class_count == 2);
    CHECK(dback.labels == d.labels);
    for (Index i = 0; i < d.images.size(); ++i)
        CHECK(dback.images[i] == doctest::Approx(d.images[i]).epsilon(1e-6));

    PlantedTable p = make_planted_table(3, 4, 11);
    TabularBenchmark bback = tabular_from_container(container_read(container_write(tabular_to_container(p.bench))));
    CHECK(bback.space.grid_shape() == p.bench.space.grid_shape());
    CHECK(bback.argmax() == p.planted);
    CHECK(bback.name == p.bench.name);
}

TEST_CASE("a table with missing entries is rejected at load with a count") {
    PlantedTable p = make_planted_table(2, 3, 3);
    Container c = tabular_to_container(p.bench);
    // poke two NaNs into the f32 table payload
    ContainerEntry* table = nullptr;
    for (auto& e : c.entries)
        if (e.name == "table") table = &e;
    REQUIRE(table != nullptr);
    const float nan_f = std::nanf("");
    std::memcpy(table->data.data(), &nan_f, 4);
    std::memcpy(table->data.data() + 12, &nan_f, 4);
    CHECK_THROWS_WITH_AS((void)tabular_from_container(container_read(container_write(c))),
                         doctest::Contains("2 missing grid entries"), InputError);
}

TEST_CASE("arch JSON builds a runnable initialized model") {
    const std::string text = R"({
      "input_shape": [1, 8, 8],
      "layers": [
        {"type":"conv2d","name":"c1","out":8,"kernel":3,"pad":1},
        {"type":"relu"},
        {"type":"maxpool2d","pool":2},
        {"type":"flatten"},
        {"type":"dense","name":"head","out":2}
      ]})";
    ModelGraph m = arch_from_json(text, 7);
    Dataset d = gen_bars(4, 8, 0.0, 1);
    DenseTensor logits = forward(m, d.images);
    CHECK(logits.shape() == Shape{4, 2});
    CHECK_THROWS_AS((void)arch_from_json("{", 0), InputError);
    CHECK_THROWS_AS((void)arch_from_json(R"({"input_shape":[1,8,8],"layers":[{"type":"warp"}]})", 0), InputError);
}
