#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace rdness {

/// Shortest round-trip decimal form of v; "nan", "inf", "-inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);

/**
 * Comma-separated writer with a fixed header. Fields are written verbatim;
 * callers never pass commas or newlines inside a field.
 */
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

    CsvWriter& field(double v);
    CsvWriter& field(std::int64_t v);
    CsvWriter& field(int v) { return field(static_cast<std::int64_t>(v)); }
    CsvWriter& field(std::uint64_t v) { return field(static_cast<std::int64_t>(v)); }
    CsvWriter& field(std::string_view v);
    CsvWriter& field(const char* v) { return field(std::string_view(v)); }
    CsvWriter& field(bool v) { return field(std::string_view(v ? "1" : "0")); }
    /// Ends the row. Throws IoError if the column count differs from the header.
    void end_row();
    void close();

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_ = 0;
    std::size_t pending_ = 0;
};

/// Lowercase hex SHA-256 of a byte string or file.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

/// git blob object id: SHA-1 of "blob <size>\0" + contents.
[[nodiscard]] std::string git_blob_sha1(std::string_view bytes);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace rdness
