#pragma once

#include <span>
#include <vector>

#include "abm/dataset.hpp"

namespace abm {

// Penalty: lambda1 * sum_j TV(beta_j) + lambda2 * sum_j w_j * ||beta_j||_2,
// where TV is the sum of absolute adjacent differences within a group. The
// intercept is never penalized. Default weights are sqrt(group size).
struct PenaltyParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<double> group_weights;

  void validate(const GroupLayout& layout) const;
};

std::vector<double> default_group_weights(const GroupLayout& layout);

// Exact minimizer of (1/2)||x - v||^2 + t * TV(x), computed by a direct
// forward scan. Merged segments in the output are assigned a single double,
// so ties are bit-exact. t = 0 returns v unchanged.
void prox_tv1d(std::span<const double> v, double t, std::span<double> out);
std::vector<double> prox_tv1d(std::span<const double> v, double t);

// Block soft threshold: v * max(0, 1 - t/||v||), exactly zero at ||v|| <= t.
void prox_group(std::span<const double> v, double t, std::span<double> out);
std::vector<double> prox_group(std::span<const double> v, double t);

// Proximal operator of step * penalty, applied per group: TV prox with
// step*lambda1 followed by a block soft threshold with step*lambda2*w_j.
// That composition is exact for this penalty pair. Operates in place on a
// flat grouped vector.
void prox_penalty(std::span<double> beta, const GroupLayout& layout, double step,
                  const PenaltyParams& params);

}  // namespace abm
