#pragma once

#include <optional>
#include <span>
#include <vector>

#include "abm/objective.hpp"

namespace abm {

struct SolverConfig {
  std::size_t max_iters = 10000;
  double rel_tol = 1e-8;           // relative objective change between iterates
  std::optional<double> initial_step;  // default 4n/||X||_F^2 for the one-hot design
  double backtrack = 0.5;          // step shrink factor
  bool restart = true;             // adaptive restart; keeps the trace nonincreasing

  void validate() const;
};

struct FitResult {
  Coefficients beta;
  std::vector<double> trace;   // objective at the start plus after every iteration
  std::size_t iterations = 0;
  bool converged = false;
  double final_step = 0.0;
};

// FISTA with backtracking on the smooth part. Rows are processed in a
// canonical order derived from the bin patterns and the target, so the result
// is bit-identical under any permutation of the input rows. With restart
// enabled the recorded objective trace never increases: whenever the
// accelerated step would raise the objective, the iteration falls back to a
// plain proximal step from the current iterate (and keeps the iterate when
// even that gains nothing numerically).
FitResult fit(const EncodedDesign& design, std::span<const double> target,
              const PenaltyParams& params, const SolverConfig& config,
              const Coefficients* warm_start = nullptr);

// nll + penalty at an arbitrary point (natural row order).
double objective_at(const EncodedDesign& design, std::span<const double> target,
                    const Coefficients& beta, const PenaltyParams& params);

}  // namespace abm
