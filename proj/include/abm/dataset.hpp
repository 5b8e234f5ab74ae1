#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace abm {

// Numeric feature matrix plus a binary target, column major.
struct Dataset {
  std::vector<std::string> names;            // feature column names, file order
  std::vector<std::vector<double>> columns;  // one vector per feature, length n
  std::vector<double> target;                // entries are exactly 0.0 or 1.0

  std::size_t n_rows() const { return target.size(); }
  std::size_t n_vars() const { return columns.size(); }
};

// Loads a CSV with a header row. `target_column` must name one column whose
// values are all 0 or 1. `schema`, when nonempty, restricts the feature set to
// the named columns (keeping file order); otherwise every non-target column is
// a feature. All feature cells must parse as finite reals.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& schema = {});

// Per-variable fine grid: strictly increasing interior cut points defining
// left-closed right-open intervals whose end bins are unbounded, so every real
// value has a bin. `counts` holds training rows per bin; grids parsed from
// JSON carry no counts.
struct VariableGrid {
  std::string name;
  std::vector<double> cuts;
  std::vector<std::size_t> counts;

  std::size_t bins() const { return cuts.size() + 1; }
};

struct BinGrid {
  std::size_t nbins = 0;  // requested fine-grid resolution
  std::vector<VariableGrid> vars;
};

// Interior cuts at the nearest-rank k/nbins quantiles of each column,
// deduplicated, so each variable ends up with at most `nbins` bins (a constant
// column yields a single bin). Requires nbins >= 2 and a nonempty dataset.
BinGrid fit_grid(const Dataset& data, std::size_t nbins);

// Index of the bin containing v for variable j: the number of cut points <= v.
// Total over all reals; boundaries fall in the right bin (left-closed).
std::size_t assign_bin(const BinGrid& grid, std::size_t j, double v);

// JSON object {variable name -> cut point array, "nbins": n}. Parsing it back
// restores cut points bit-exactly (but not training counts).
std::string grid_to_json(const BinGrid& grid);
BinGrid grid_from_json(const std::string& text);

// Offsets of each variable's coefficient block in a flat coefficient vector.
struct GroupLayout {
  std::vector<std::size_t> offsets;  // size p+1, offsets[p] == total()

  std::size_t groups() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t size(std::size_t j) const { return offsets[j + 1] - offsets[j]; }
  std::size_t total() const { return offsets.empty() ? 0 : offsets.back(); }
  bool operator==(const GroupLayout&) const = default;
};

// One-hot design stored as bin indices: the active column of row i in group j
// is layout.offsets[j] + bins[j][i]. `pattern_rank[i]` is the dense rank of
// row i's full bin pattern under lexicographic order; rows with equal patterns
// share a rank, so the ranks are invariant to input row order. The solver uses
// them to process rows in a canonical order.
struct EncodedDesign {
  std::size_t rows = 0;
  std::vector<std::string> names;
  GroupLayout layout;
  std::vector<std::vector<std::int32_t>> bins;
  std::vector<std::uint32_t> pattern_rank;
  std::uint32_t rank_count = 0;
};

// Encodes data against a grid, matching grid variables to data columns by
// name. Values outside the training range still encode (end bins are open).
EncodedDesign encode(const Dataset& data, const BinGrid& grid);

// Row subset of a design (fold construction). Ranks are inherited.
EncodedDesign design_subset(const EncodedDesign& design, std::span<const std::uint32_t> rows);

}  // namespace abm
