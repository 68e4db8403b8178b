#include "bayes/csv.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bayes/error.hpp"

namespace bayes::csv {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cells.push_back(trim(cell));
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

}  // namespace

std::string number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    out << cells[i];
  }
  out << '\n';
}

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw IoError("CSV has no column '" + std::string(name) + "'");
}

std::vector<double> Table::column(std::string_view name) const {
  const std::size_t idx = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    out.push_back(row[idx]);
  }
  return out;
}

Table parse(std::istream& in, const std::string& source) {
  Table table;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      table.header = split(trim(line));
      break;
    }
  }
  if (table.header.empty()) {
    throw IoError(source + ": empty CSV");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw IoError(source + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(table.header.size()) + " cells");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw IoError(source + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  return parse(in, path);
}

}  // namespace bayes::csv
