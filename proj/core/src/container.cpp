#include "taml/container.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace taml {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'T', 'A', 'M', 'L'};
constexpr std::uint32_t kVersion = 1;
constexpr Index kMaxElements = Index{1} << 40;

Index aligned8(Index n) { return (n + 7) & ~Index{7}; }

}  // namespace

Index dtype_size(Dtype d) {
    switch (d) {
        case Dtype::f32: return 4;
        case Dtype::u8: return 1;
        case Dtype::i8: return 1;
        case Dtype::i64: return 8;
    }
    throw InputError("container: unknown dtype");
}

std::string dtype_name(Dtype d) {
    switch (d) {
        case Dtype::f32: return "f32";
        case Dtype::u8: return "u8";
        case Dtype::i8: return "i8";
        case Dtype::i64: return "i64";
    }
    throw InputError("container: unknown dtype");
}

Dtype dtype_from_name(const std::string& s) {
    if (s == "f32") return Dtype::f32;
    if (s == "u8") return Dtype::u8;
    if (s == "i8") return Dtype::i8;
    if (s == "i64") return Dtype::i64;
    throw InputError("container: unknown dtype '" + s + "'");
}

const ContainerEntry* Container::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

std::vector<std::uint8_t> container_write(const Container& c) {
    json meta;
    try {
        meta = json::parse(c.meta_json);
    } catch (const json::exception& e) {
        throw InputError(std::string("container: meta is not valid JSON: ") + e.what());
    }

    // Assign sequential 8-byte-aligned offsets.
    json entries = json::array();
    Index offset = 0;
    for (const auto& e : c.entries) {
        Index numel = 1;
        for (Index d : e.shape) {
            if (d < 1) throw InputError("container: entry '" + e.name + "' has non-positive dimension");
            numel *= d;
        }
        const Index length = numel * dtype_size(e.dtype);
        if (length != static_cast<Index>(e.data.size()))
            throw InputError("container: entry '" + e.name + "' data length does not match shape");
        offset = aligned8(offset);
        entries.push_back({{"name", e.name},
                           {"dtype", dtype_name(e.dtype)},
                           {"shape", e.shape},
                           {"offset", offset},
                           {"length", length}});
        offset += length;
    }
    for (std::size_t i = 0; i < c.entries.size(); ++i)
        for (std::size_t j = i + 1; j < c.entries.size(); ++j)
            if (c.entries[i].name == c.entries[j].name)
                throw InputError("container: duplicate entry name '" + c.entries[i].name + "'");

    const std::string header = json{{"entries", entries}, {"meta", meta}}.dump();

    std::vector<std::uint8_t> out;
    out.reserve(16 + header.size() + static_cast<std::size_t>(offset));
    out.insert(out.end(), kMagic, kMagic + 4);
    const std::uint32_t version = kVersion;
    out.resize(out.size() + 4);
    std::memcpy(out.data() + 4, &version, 4);
    const std::uint64_t header_len = header.size();
    out.resize(out.size() + 8);
    std::memcpy(out.data() + 8, &header_len, 8);
    out.insert(out.end(), header.begin(), header.end());

    const std::size_t payload_start = out.size();
    out.resize(payload_start + static_cast<std::size_t>(offset), 0);
    Index at = 0;
    for (const auto& e : c.entries) {
        at = aligned8(at);
        std::memcpy(out.data() + payload_start + static_cast<std::size_t>(at), e.data.data(), e.data.size());
        at += static_cast<Index>(e.data.size());
    }
    return out;
}

Container container_read(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16) throw InputError("container: file too small");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw InputError("container: bad magic");
    std::uint32_t version;
    std::memcpy(&version, bytes.data() + 4, 4);
    if (version != kVersion) throw InputError("container: unsupported version " + std::to_string(version));
    std::uint64_t header_len;
    std::memcpy(&header_len, bytes.data() + 8, 8);
    if (header_len > bytes.size() - 16) throw InputError("container: header length exceeds file size");

    json doc;
    try {
        doc = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const json::exception& e) {
        throw InputError(std::string("container: header JSON malformed: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
        throw InputError("container: header must hold an 'entries' array");

    const std::size_t payload_start = 16 + static_cast<std::size_t>(header_len);
    const Index payload_size = static_cast<Index>(bytes.size() - payload_start);

    Container c;
    if (doc.contains("meta")) {
        if (!doc["meta"].is_object()) throw InputError("container: meta must be an object");
        c.meta_json = doc["meta"].dump();
    }

    std::vector<std::pair<Index, Index>> spans;  // (offset, length) for overlap checks
    for (const auto& je : doc["entries"]) {
        try {
            ContainerEntry e;
            e.name = je.at("name").get<std::string>();
            e.dtype = dtype_from_name(je.at("dtype").get<std::string>());
            Index numel = 1;
            for (const auto& d : je.at("shape")) {
                const Index dim = d.get<Index>();
                if (dim < 1) throw InputError("container: entry '" + e.name + "' has non-positive dimension");
                numel *= dim;
                if (numel > kMaxElements) throw InputError("container: entry '" + e.name + "' is implausibly large");
                e.shape.push_back(dim);
            }
            const Index offset = je.at("offset").get<Index>();
            const Index length = je.at("length").get<Index>();
            if (length != numel * dtype_size(e.dtype))
                throw InputError("container: entry '" + e.name + "' length does not match shape");
            if (offset < 0 || offset % 8 != 0)
                throw InputError("container: entry '" + e.name + "' offset invalid or unaligned");
            if (length < 0 || offset + length > payload_size)
                throw InputError("container: entry '" + e.name + "' extends past the payload");
            spans.emplace_back(offset, length);
            e.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload_start + static_cast<std::size_t>(offset)),
                          bytes.begin() + static_cast<std::ptrdiff_t>(payload_start + static_cast<std::size_t>(offset + length)));
            for (const auto& prev : c.entries)
                if (prev.name == e.name) throw InputError("container: duplicate entry name '" + e.name + "'");
            c.entries.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw InputError(std::string("container: entry metadata malformed: ") + ex.what());
        }
    }

    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].first + spans[i - 1].second)
            throw InputError("container: overlapping entries");
    return c;
}

ContainerEntry tensor_entry(const std::string& name, const DenseTensor& t) {
    ContainerEntry e;
    e.name = name;
    e.dtype = Dtype::f32;
    e.shape = t.shape();
    e.data.resize(static_cast<std::size_t>(t.size()) * 4);
    for (Index i = 0; i < t.size(); ++i) {
        const float f = static_cast<float>(t[i]);
        std::memcpy(e.data.data() + static_cast<std::size_t>(i) * 4, &f, 4);
    }
    return e;
}

DenseTensor tensor_from_entry(const ContainerEntry& e) {
    if (e.dtype != Dtype::f32) throw InputError("container: entry '" + e.name + "' is not f32");
    const Index numel = static_cast<Index>(e.data.size() / 4);
    std::vector<double> v(static_cast<std::size_t>(numel));
    for (Index i = 0; i < numel; ++i) {
        float f;
        std::memcpy(&f, e.data.data() + static_cast<std::size_t>(i) * 4, 4);
        v[static_cast<std::size_t>(i)] = static_cast<double>(f);
    }
    return DenseTensor(e.shape, std::move(v));
}

ContainerEntry i64_entry(const std::string& name, const std::vector<std::int64_t>& v) {
    ContainerEntry e;
    e.name = name;
    e.dtype = Dtype::i64;
    e.shape = {static_cast<Index>(v.size())};
    e.data.resize(v.size() * 8);
    std::memcpy(e.data.data(), v.data(), e.data.size());
    return e;
}

std::vector<std::int64_t> i64_from_entry(const ContainerEntry& e) {
    if (e.dtype != Dtype::i64) throw InputError("container: entry '" + e.name + "' is not i64");
    std::vector<std::int64_t> v(e.data.size() / 8);
    std::memcpy(v.data(), e.data.data(), e.data.size());
    return v;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "'");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write '" + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_file_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write '" + path + "'");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_file_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace taml
