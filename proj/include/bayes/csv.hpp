#ifndef BAYES_CSV_HPP
#define BAYES_CSV_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bayes::csv {

/// Fixed-format rendering so repeated runs produce byte-identical files.
std::string number(double value);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws IoError when absent.
  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
};

/// Reads a numeric CSV with a header line. Throws IoError on a missing file
/// or malformed content.
Table read(const std::string& path);
Table parse(std::istream& in, const std::string& source = "<stream>");

}  // namespace bayes::csv

#endif  // BAYES_CSV_HPP
