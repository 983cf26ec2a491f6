#include "gelo/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "gelo/errors.hpp"

namespace gelo::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::string(trim(field)));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quote in CSV line: " + std::string(line));
  out.push_back(std::string(trim(field)));
  return out;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string header_line(std::string_view schema) {
  return "# gelo-" + std::string(schema) + " v" + std::to_string(kSchemaMajor) + "." +
         std::to_string(kSchemaMinor);
}

std::optional<SchemaVersion> check_header(std::string_view line, std::string_view schema) {
  line = trim(line);
  if (line.empty() || line.front() != '#') return std::nullopt;
  line.remove_prefix(1);
  line = trim(line);
  const std::string prefix = "gelo-" + std::string(schema) + " v";
  if (line.substr(0, prefix.size()) != prefix) {
    throw ValidationError("expected a '" + std::string(schema) + "' CSV header, got '" +
                          std::string(line) + "'");
  }
  line.remove_prefix(prefix.size());
  SchemaVersion v{};
  const auto dot = line.find('.');
  const auto major = line.substr(0, dot);
  if (std::from_chars(major.data(), major.data() + major.size(), v.major).ec != std::errc{}) {
    throw ValidationError("malformed schema version in CSV header");
  }
  if (dot != std::string_view::npos) {
    const auto minor = line.substr(dot + 1);
    if (std::from_chars(minor.data(), minor.data() + minor.size(), v.minor).ec != std::errc{}) {
      throw ValidationError("malformed schema version in CSV header");
    }
  }
  if (v.major != kSchemaMajor) {
    throw ValidationError("unsupported " + std::string(schema) + " schema major version " +
                          std::to_string(v.major));
  }
  return v;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

double parse_double(std::string_view field, std::string_view what) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError("invalid " + std::string(what) + ": '" + std::string(field) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view field, std::string_view what) {
  field = trim(field);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError("invalid " + std::string(what) + ": '" + std::string(field) + "'");
  }
  return v;
}

bool parse_bool(std::string_view field, std::string_view what) {
  field = trim(field);
  if (field == "1" || field == "true" || field == "TRUE" || field == "True") return true;
  if (field == "0" || field == "false" || field == "FALSE" || field == "False") return false;
  throw ValidationError("invalid " + std::string(what) + ": '" + std::string(field) + "'");
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace gelo::csv
