#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace groundwork::csv {

using Row = std::vector<std::string>;

// RFC 4180 quoting: fields containing comma, quote, CR or LF are quoted.
std::string escape(std::string_view field);
std::string format_row(const Row& row);
void write_row(std::ostream& os, const Row& row);

// Parses a whole document. Quoted fields may span lines. Throws
// ValidationError on an unterminated quote.
std::vector<Row> parse(std::string_view document);

struct Table {
  Row header;
  std::vector<Row> rows;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
};

Table parse_table(std::string_view document);
Table read_table_file(const std::string& path);

}  // namespace groundwork::csv
