#include "ghicast/matrix_io.hpp"

#include "ghicast/error.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ghicast {

namespace {

constexpr char magic[4] = {'G', 'H', 'I', 'M'};
constexpr std::size_t header_bytes = 4 + 4 + 8 + 8;

template<typename T>
void put_le(std::string& out, T value)
{
    static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

template<typename T>
T get_le(const std::string& in, std::size_t offset)
{
    T value;
    std::memcpy(&value, in.data() + offset, sizeof(T));
    return value;
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

std::uint32_t crc32_of(const std::string& bytes)
{
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset), chunk);
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::uint32_t file_crc32(const std::filesystem::path& path)
{
    return crc32_of(slurp(path));
}

WrittenFile write_matrix(const std::filesystem::path& path, const RowMatrix& values)
{
    std::string buffer;
    buffer.reserve(header_bytes + static_cast<std::size_t>(values.size()) * sizeof(double));
    buffer.append(magic, 4);
    put_le<std::uint32_t>(buffer, matrix_format_version);
    put_le<std::uint64_t>(buffer, static_cast<std::uint64_t>(values.rows()));
    put_le<std::uint64_t>(buffer, static_cast<std::uint64_t>(values.cols()));
    buffer.append(reinterpret_cast<const char*>(values.data()), static_cast<std::size_t>(values.size()) * sizeof(double));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()))) {
        throw IoError("cannot write " + path.string());
    }
    return {path.filename().string(), buffer.size(), crc32_of(buffer)};
}

RowMatrix read_matrix(const std::filesystem::path& path, const std::uint32_t* expected_crc32)
{
    const std::string bytes = slurp(path);
    const std::string name = path.filename().string();
    if (expected_crc32 && crc32_of(bytes) != *expected_crc32) {
        throw ChecksumError("checksum mismatch in " + name);
    }
    if (bytes.size() < header_bytes || std::memcmp(bytes.data(), magic, 4) != 0) {
        throw ChecksumError("bad matrix header in " + name);
    }
    const auto version = get_le<std::uint32_t>(bytes, 4);
    if (version != matrix_format_version) {
        throw IncompatibleError(name + " has matrix format version " + std::to_string(version) + ", expected "
            + std::to_string(matrix_format_version));
    }
    const auto rows = get_le<std::uint64_t>(bytes, 8);
    const auto cols = get_le<std::uint64_t>(bytes, 16);
    if (bytes.size() != header_bytes + rows * cols * sizeof(double)) {
        throw ChecksumError("payload size of " + name + " does not match its " + std::to_string(rows) + "x"
            + std::to_string(cols) + " header");
    }
    RowMatrix values(static_cast<Index>(rows), static_cast<Index>(cols));
    std::memcpy(values.data(), bytes.data() + header_bytes, rows * cols * sizeof(double));
    return values;
}

} // namespace ghicast
