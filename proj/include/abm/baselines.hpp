#pragma once

#include <string>
#include <variant>
#include <vector>

#include "abm/path.hpp"

namespace abm {

enum class BaselineMethod { raw_logistic, equal_width, equal_frequency };

std::string baseline_name(BaselineMethod method);
BaselineMethod baseline_from_name(const std::string& name);

struct BaselineSpec {
  BaselineMethod method = BaselineMethod::equal_frequency;
  std::size_t nbins = 20;  // ignored by raw-logistic
};

// The penalized binning pipeline as a comparison entry.
struct AbmSpec {
  std::size_t nbins = 20;
  PathConfig path;
};

using MethodSpec = std::variant<AbmSpec, BaselineSpec>;

// Interior cuts at min + k*(max-min)/nbins; a constant column yields one bin.
BinGrid equal_width_grid(const Dataset& data, std::size_t nbins);

// Maximum-likelihood logistic fit on an indicator design with a tiny ridge
// (1e-8, intercept excluded) for rank safety. Used by the baselines and by
// the optional refit-on-merged-design step.
Coefficients ridge_logistic_refit(const EncodedDesign& design, std::span<const double> target);

struct ComparisonRow {
  std::string method;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  std::size_t kept_vars = 0;
  std::size_t total_bins = 0;
  std::uint64_t fold_hash = 0;  // hash of the fold vector this method used
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // one per method, input order
};

// Evaluates every method on identical stratified fold splits derived from
// (target, folds, seed). Baselines fit unpenalized (ridge-stabilized)
// logistic regression on their encodings; the penalized pipeline runs its
// own path selection with the same folds and never gets the ridge.
ComparisonTable run_comparison(const Dataset& data, const std::vector<MethodSpec>& methods,
                               std::size_t folds, std::uint64_t seed);

std::string comparison_to_csv(const ComparisonTable& table);

}  // namespace abm
