#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "abm/solver.hpp"

namespace abm {

struct PathConfig {
  std::size_t lambda2_count = 20;   // log-spaced from lambda2_max down
  double lambda2_ratio = 1e-3;      // smallest lambda2 as a fraction of lambda2_max
  std::vector<double> lambda1_multipliers = {0.25, 0.5, 1.0, 2.0};  // lambda1 = m * lambda2
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  double tol = 1e-6;                // drop/merge tolerance for the reported counts
  SolverConfig solver;
  std::vector<double> group_weights;  // empty: sqrt(group size)

  // Diagnostics observer invoked with every FitResult the path produces
  // (full-data and fold fits). Leave empty in normal use.
  std::function<void(const FitResult&)> on_fit;

  void validate() const;
};

struct PathPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  std::size_t kept_vars = 0;
  std::size_t total_bins = 0;
  bool selected = false;
};

struct PathResult {
  std::vector<PathPoint> points;  // multiplier-major, lambda2 descending
  std::size_t selected = 0;       // index into points
  double lambda2_max_value = 0.0;
  FitResult final_fit;            // full-data fit at the selected point
};

// Smallest lambda2 at which the all-zero group solution satisfies the group
// KKT conditions with lambda1 = 0: max_j ||grad_j nll(0, logit(ybar))||_2/w_j.
// Errors when the target is single-class.
double lambda2_max(const EncodedDesign& design, std::span<const double> target,
                   std::span<const double> weights);

// Stratified fold ids in [0, k): each class is shuffled and dealt round-robin,
// so per-fold class counts differ by at most one. Errors when some fold would
// end up without both classes, which is exactly when min(#pos, #neg) < k.
std::vector<std::uint8_t> make_folds(std::span<const double> target, std::size_t k,
                                     std::uint64_t seed);

// Walks the (lambda1, lambda2) grid from the most regularized point down,
// warm-starting each fit (full-data and per-fold chains separately) from its
// neighbor. Selection is the one-standard-error rule: among points whose mean
// CV AUC is within one SE of the best, pick the fewest kept variables, then
// the fewest bins, then the strongest penalty.
PathResult trace(const EncodedDesign& design, std::span<const double> target,
                 const PathConfig& config);

std::string path_to_csv(const PathResult& result);

}  // namespace abm
