#include "abm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <cmath>

#include "abm/common.hpp"

namespace abm {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) throw InternalError("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  std::string out = s.substr(a, b - a);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
    out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      cells.push_back(strip(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return cells;
}

}  // namespace

CsvTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  CsvTable table;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  ++line_no;
  table.header = split_line(line);
  if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty()))
    throw DataError("missing header row: " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i)
    for (std::size_t j = i + 1; j < table.header.size(); ++j)
      if (table.header[i] == table.header[j])
        throw DataError("duplicate column name '" + table.header[i] + "' in " + path);
  table.columns.resize(table.header.size());

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw DataError("line " + std::to_string(line_no) + ", column '" +
                        table.header[c] + "': cannot parse '" + cell + "'");
      table.columns[c].push_back(v);
    }
    ++table.rows;
  }
  return table;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace abm
