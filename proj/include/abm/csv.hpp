#pragma once

#include <string>
#include <vector>

namespace abm {

// Column-major numeric CSV contents. Every cell must parse as a finite double;
// parse failures report the file line and column name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::size_t rows = 0;
};

CsvTable read_numeric_csv(const std::string& path);

// One CSV row from already-formatted cells.
std::string csv_line(const std::vector<std::string>& cells);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace abm
