#pragma once

#include <filesystem>

#include "lsteer/tensor.hpp"

namespace lsteer {

// Raw tensor container. Layout, all little-endian:
//   magic "LSTN", u8 version (=1), u8 rank, u32 extents[rank], f32 payload.
// Round trips are bit-exact.
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace lsteer
