#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace lsteer {

// Runtime failure surfaced to the operator (exit code 1 at the CLI).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad usage or configuration (exit code 2 at the CLI).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file then renames over the target.
void atomic_write_file(const std::filesystem::path& path, const std::string& bytes);

// Little-endian scalar packing used by the binary formats.
void put_u32_le(std::string& out, std::uint32_t v);
void put_f32_le(std::string& out, float v);
std::uint32_t get_u32_le(const std::string& in, std::size_t off);
float get_f32_le(const std::string& in, std::size_t off);

// FNV-1a 64-bit; the corpus content hash.
struct Fnv1a {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    void update(const void* data, std::size_t n);
    void update_u32(std::uint32_t v);
    std::uint64_t digest() const { return h; }
};

std::string hex_u64(std::uint64_t v);

}  // namespace lsteer
