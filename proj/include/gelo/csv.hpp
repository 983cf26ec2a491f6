#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gelo::csv {

inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;

/// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split(std::string_view line);
std::string quote(std::string_view field);

/// "# gelo-<schema> v<major>.<minor>"
std::string header_line(std::string_view schema);

struct SchemaVersion {
  int major;
  int minor;
};

/// Returns nullopt when `line` is not a header comment. Throws ValidationError
/// on a header for another schema or an unsupported major version.
std::optional<SchemaVersion> check_header(std::string_view line, std::string_view schema);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

double parse_double(std::string_view field, std::string_view what);
std::int64_t parse_int(std::string_view field, std::string_view what);
bool parse_bool(std::string_view field, std::string_view what);

std::string format_double(double v);

}  // namespace gelo::csv
