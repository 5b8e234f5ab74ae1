#include "abm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "abm/common.hpp"
#include "abm/csv.hpp"

namespace abm {

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& schema) {
  CsvTable table = read_numeric_csv(path);

  std::size_t target_idx = table.header.size();
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c] == target_column) target_idx = c;
  if (target_idx == table.header.size())
    throw DataError("target column '" + target_column + "' not found in " + path);
  if (table.rows == 0) throw DataError("no data rows in " + path);

  Dataset data;
  data.target = std::move(table.columns[target_idx]);
  for (double v : data.target)
    if (v != 0.0 && v != 1.0)
      throw DataError("target column '" + target_column + "' is not binary (saw " +
                      format_double(v) + ")");

  std::vector<bool> selected(table.header.size(), schema.empty());
  selected[target_idx] = false;
  for (const std::string& name : schema) {
    if (name == target_column)
      throw DataError("schema includes the target column '" + name + "'");
    bool found = false;
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (table.header[c] == name) {
        selected[c] = true;
        found = true;
      }
    if (!found) throw DataError("schema column '" + name + "' not found in " + path);
  }

  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!selected[c]) continue;
    data.names.push_back(table.header[c]);
    data.columns.push_back(std::move(table.columns[c]));
  }
  if (data.columns.empty()) throw DataError("no feature columns in " + path);
  return data;
}

BinGrid fit_grid(const Dataset& data, std::size_t nbins) {
  if (nbins < 2) throw DataError("nbins must be at least 2");
  if (data.n_rows() == 0) throw DataError("empty dataset");

  const std::size_t n = data.n_rows();
  BinGrid grid;
  grid.nbins = nbins;
  grid.vars.resize(data.n_vars());

  for (std::size_t j = 0; j < data.n_vars(); ++j) {
    VariableGrid& vg = grid.vars[j];
    vg.name = data.names[j];

    std::vector<double> sorted = data.columns[j];
    std::sort(sorted.begin(), sorted.end());

    // Nearest-rank quantiles at k/nbins: order statistic ceil(n*k/nbins).
    // A cut at the column minimum would leave the bottom bin empty (bins are
    // left-closed), so it is dropped along with duplicates; a constant column
    // keeps a single bin.
    for (std::size_t k = 1; k < nbins; ++k) {
      std::size_t rank = (n * k + nbins - 1) / nbins;
      double cut = sorted[rank - 1];
      double floor = vg.cuts.empty() ? sorted.front() : vg.cuts.back();
      if (cut > floor) vg.cuts.push_back(cut);
    }

    vg.counts.assign(vg.cuts.size() + 1, 0);
    for (double v : data.columns[j]) {
      std::size_t b = std::upper_bound(vg.cuts.begin(), vg.cuts.end(), v) - vg.cuts.begin();
      ++vg.counts[b];
    }
  }
  return grid;
}

std::size_t assign_bin(const BinGrid& grid, std::size_t j, double v) {
  if (j >= grid.vars.size()) throw InternalError("assign_bin: variable index out of range");
  const std::vector<double>& cuts = grid.vars[j].cuts;
  return std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin();
}

std::string grid_to_json(const BinGrid& grid) {
  nlohmann::json obj = nlohmann::json::object();
  obj["nbins"] = grid.nbins;
  for (const VariableGrid& vg : grid.vars) {
    if (vg.name == "nbins")
      throw DataError("variable name 'nbins' collides with the grid JSON schema");
    obj[vg.name] = vg.cuts;
  }
  return obj.dump(2) + "\n";
}

BinGrid grid_from_json(const std::string& text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("grid JSON parse error: ") + e.what());
  }
  if (!obj.is_object() || !obj.contains("nbins") || !obj["nbins"].is_number_unsigned())
    throw DataError("grid JSON must be an object with an unsigned 'nbins' field");

  BinGrid grid;
  grid.nbins = obj["nbins"].get<std::size_t>();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.key() == "nbins") continue;
    if (!it.value().is_array())
      throw DataError("grid JSON: cut list for '" + it.key() + "' must be an array");
    VariableGrid vg;
    vg.name = it.key();
    for (const auto& c : it.value()) {
      if (!c.is_number()) throw DataError("grid JSON: non-numeric cut for '" + it.key() + "'");
      vg.cuts.push_back(c.get<double>());
    }
    for (std::size_t i = 1; i < vg.cuts.size(); ++i)
      if (!(vg.cuts[i - 1] < vg.cuts[i]))
        throw DataError("grid JSON: cuts for '" + vg.name + "' are not strictly increasing");
    grid.vars.push_back(std::move(vg));
  }
  return grid;
}

namespace {

void compute_ranks(EncodedDesign& d) {
  const std::size_t n = d.rows;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    for (const auto& col : d.bins) {
      if (col[a] != col[b]) return col[a] < col[b];
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  d.pattern_rank.assign(n, 0);
  std::uint32_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && less(order[i - 1], order[i])) ++rank;
    d.pattern_rank[order[i]] = rank;
  }
  d.rank_count = n == 0 ? 0 : rank + 1;
}

}  // namespace

EncodedDesign encode(const Dataset& data, const BinGrid& grid) {
  EncodedDesign d;
  d.rows = data.n_rows();
  d.layout.offsets.push_back(0);

  for (const VariableGrid& vg : grid.vars) {
    std::size_t col = data.columns.size();
    for (std::size_t c = 0; c < data.names.size(); ++c)
      if (data.names[c] == vg.name) col = c;
    if (col == data.columns.size())
      throw DataError("grid variable '" + vg.name + "' not present in the data");

    std::vector<std::int32_t> idx(d.rows);
    const std::vector<double>& values = data.columns[col];
    for (std::size_t i = 0; i < d.rows; ++i)
      idx[i] = static_cast<std::int32_t>(
          std::upper_bound(vg.cuts.begin(), vg.cuts.end(), values[i]) - vg.cuts.begin());
    d.names.push_back(vg.name);
    d.bins.push_back(std::move(idx));
    d.layout.offsets.push_back(d.layout.offsets.back() + vg.bins());
  }
  if (d.bins.empty()) throw DataError("grid has no variables");
  compute_ranks(d);
  return d;
}

EncodedDesign design_subset(const EncodedDesign& design, std::span<const std::uint32_t> rows) {
  EncodedDesign d;
  d.rows = rows.size();
  d.names = design.names;
  d.layout = design.layout;
  d.bins.resize(design.bins.size());
  for (std::size_t j = 0; j < design.bins.size(); ++j) {
    d.bins[j].resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= design.rows) throw InternalError("design_subset: row index out of range");
      d.bins[j][i] = design.bins[j][rows[i]];
    }
  }
  d.pattern_rank.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    d.pattern_rank[i] = design.pattern_rank[rows[i]];
  d.rank_count = design.rank_count;
  return d;
}

}  // namespace abm
