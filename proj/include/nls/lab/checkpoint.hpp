#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nls/field.hpp"

namespace nls::lab {

/// Binary snapshot layout, all little-endian:
///   0  char[8] "NLSCHKPT"
///   8  u32 version
///  12  u32 d
///  16  f64 p
///  24  u32 n
///  28  f64 L
///  36  f64 t
///  44  n^d complex values as (re, im) f64 pairs, row-major
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 44;

std::vector<std::uint8_t> encode_checkpoint(const Field& f);
/// Throws FormatError (with the byte offset) on any mismatch and
/// UnsupportedVersion for a version other than kCheckpointVersion.
Field decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes to a temporary sibling and renames, so readers never see a
/// partial file.
void save_checkpoint(const Field& f, const std::filesystem::path& path);
Field load_checkpoint(const std::filesystem::path& path);

}  // namespace nls::lab
