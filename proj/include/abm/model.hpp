#pragma once

#include <span>
#include <string>
#include <vector>

#include "abm/dataset.hpp"
#include "abm/solver.hpp"

namespace abm {

// One kept variable after merging: cutpoints.size()+1 merged bins.
struct MergedVariable {
  std::string name;
  std::size_t column = 0;  // index into BinningModel::columns
  std::vector<double> cutpoints;
  std::vector<double> coefficients;
};

struct ModelProvenance {
  std::size_t nbins = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double tol = 0.0;
};

// Final merged model. `columns` lists every input variable (kept and dropped)
// in the order score() expects row values; models freshly extracted use the
// training column order, models parsed from JSON list kept variables first.
struct BinningModel {
  double intercept = 0.0;
  std::vector<std::string> columns;
  std::vector<MergedVariable> variables;
  std::vector<std::string> dropped;
  ModelProvenance provenance;
};

// Number of fine bins that survive as distinct merged bins in one group, and
// whether the group survives at all, under the same rules extract() uses:
// a group is dropped when max|beta| <= tol, adjacent bins merge when their
// coefficients differ by at most tol.
bool group_kept(std::span<const double> beta, double tol);
std::size_t merged_bin_count(std::span<const double> beta, double tol);

// Collapses a fitted coefficient vector into a BinningModel. Merged bins take
// the count-weighted mean of their members' coefficients (the exact common
// value when the members are bit-equal, which is what the prox produces).
// Grids without training counts fall back to the plain mean.
BinningModel extract(const FitResult& fit, const BinGrid& grid, double tol);

// Logit for one row laid out per model.columns. Dropped variables' values are
// read and ignored. Errors on non-finite inputs.
double score(const BinningModel& model, std::span<const double> row);

// Maps model variables onto an arbitrary input header once, for bulk scoring.
struct Scorer {
  const BinningModel* model = nullptr;
  std::vector<std::size_t> input_column;  // per model.variables entry

  double operator()(std::span<const double> row) const;
};
Scorer make_scorer(const BinningModel& model, const std::vector<std::string>& input_names);

struct ScorecardRow {
  std::string variable;
  double bin_low = 0.0;   // -inf for the first bin
  double bin_high = 0.0;  // +inf for the last bin
  double coefficient = 0.0;
  std::size_t count = 0;
  double event_rate = 0.0;
  double woe = 0.0;
};

struct ScorecardTable {
  std::vector<ScorecardRow> rows;
};

// Per merged bin: training count, event rate and weight of evidence with 0.5
// smoothing on all four counts. `data` must contain the model's variables.
ScorecardTable scorecard(const BinningModel& model, const Dataset& data);

std::string scorecard_to_csv(const ScorecardTable& table);

// Mann-Whitney AUC with half credit for ties. Errors when the target has a
// single class.
double auc(std::span<const double> scores, std::span<const double> target);

std::string model_to_json(const BinningModel& model);
BinningModel model_from_json(const std::string& text);

}  // namespace abm
