#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace bigeo::csv {

/// One parsed record plus the 1-based line it started on.
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// Reads RFC 4180-style CSV: comma separated, optional double quotes, "" escapes.
/// Blank lines are skipped. Throws ParseError on an unterminated quote.
std::vector<Record> read(std::istream& in);
std::vector<Record> read_file(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(const std::string& field);

/// Shortest round-trip decimal form of a double ("%.17g").
std::string format_double(double value);

}  // namespace bigeo::csv
