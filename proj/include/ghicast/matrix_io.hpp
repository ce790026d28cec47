#pragma once

#include "ghicast/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace ghicast {

/// Binary matrix payload: magic `GHIM`, u32 format version, u64 rows,
/// u64 cols, then rows*cols little-endian IEEE-754 doubles, row-major.
inline constexpr std::uint32_t matrix_format_version = 1;

struct WrittenFile {
    std::string name;
    std::uint64_t bytes = 0;
    std::uint32_t crc32 = 0;
};

WrittenFile write_matrix(const std::filesystem::path& path, const RowMatrix& values);

/// Reads a matrix written by write_matrix. When `expected_crc32` is given the
/// file checksum is verified first (ChecksumError naming the file).
RowMatrix read_matrix(const std::filesystem::path& path, const std::uint32_t* expected_crc32 = nullptr);

std::uint32_t crc32_of(const std::string& bytes);
std::uint32_t file_crc32(const std::filesystem::path& path);

} // namespace ghicast
