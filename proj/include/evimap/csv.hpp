#ifndef EVIMAP_CSV_HPP
#define EVIMAP_CSV_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace evimap::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// A leading UTF-8 BOM is dropped. Blank lines are skipped.
std::vector<Row> read(std::istream& in);
std::vector<Row> read_file(const std::string& path);

/// Quote a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace evimap::csv

#endif  // EVIMAP_CSV_HPP
