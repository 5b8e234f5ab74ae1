#pragma once

#include <span>
#include <vector>

#include "abm/dataset.hpp"
#include "abm/prox.hpp"

namespace abm {

// Intercept plus flat grouped coefficient vector (one block per variable).
struct Coefficients {
  double intercept = 0.0;
  std::vector<double> values;
  GroupLayout layout;

  static Coefficients zeros(const GroupLayout& layout);
  std::span<double> group(std::size_t j);
  std::span<const double> group(std::size_t j) const;
};

// Row logits: intercept + sum_j beta_j[bin_j(i)].
std::vector<double> predict_logit(const EncodedDesign& design, const Coefficients& beta);

// Mean logistic negative log-likelihood with the standard orientation
// P(y=1|z) = 1/(1+exp(-z)): (1/n) * sum_i [log(1+exp(z_i)) - y_i z_i],
// evaluated through the stable softplus form.
double nll(const EncodedDesign& design, std::span<const double> target,
           const Coefficients& beta);

// Exact gradient of nll: mean residual for the intercept, scattered residual
// sums for each bin coefficient. Columns whose bin is empty get an exact zero.
Coefficients nll_gradient(const EncodedDesign& design, std::span<const double> target,
                          const Coefficients& beta);

// lambda1 * sum_j TV(beta_j) + lambda2 * sum_j w_j ||beta_j||_2. The intercept
// does not contribute.
double penalty_value(const Coefficients& beta, const PenaltyParams& params);

}  // namespace abm
