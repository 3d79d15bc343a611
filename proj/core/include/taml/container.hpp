#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "taml/tensor.hpp"

namespace taml {

/// Malformed or inconsistent container bytes / input files.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Dtype : std::uint8_t { f32, u8, i8, i64 };

Index dtype_size(Dtype d);
std::string dtype_name(Dtype d);
Dtype dtype_from_name(const std::string& s);

struct ContainerEntry {
    std::string name;
    Dtype dtype;
    Shape shape;                     // may be empty for scalars
    std::vector<std::uint8_t> data;  // raw little-endian payload
};

/// In-memory form of the binary container: named tensor blobs plus a
/// free-form JSON meta object.
struct Container {
    std::vector<ContainerEntry> entries;
    std::string meta_json = "{}";

    const ContainerEntry* find(const std::string& name) const;
};

/// Serializes to the binary layout: magic "TAML", u32 version 1 (LE),
/// u64 header length (LE), UTF-8 JSON header, then 8-byte-aligned payload
/// blobs. Writing is canonical, so write(read(bytes)) == bytes for any
/// container this writer produced.
std::vector<std::uint8_t> container_write(const Container& c);

/// Parses and fully validates; throws InputError on any inconsistency.
Container container_read(std::span<const std::uint8_t> bytes);

// f32-on-disk <-> f64-in-memory tensor helpers.
ContainerEntry tensor_entry(const std::string& name, const DenseTensor& t);
DenseTensor tensor_from_entry(const ContainerEntry& e);
ContainerEntry i64_entry(const std::string& name, const std::vector<std::int64_t>& v);
std::vector<std::int64_t> i64_from_entry(const ContainerEntry& e);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file_text(const std::string& path, const std::string& text);
std::string read_file_text(const std::string& path);

}  // namespace taml
