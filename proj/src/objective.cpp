#include "abm/objective.hpp"

#include <cmath>

#include "abm/common.hpp"
#include "abm/kernels.hpp"

namespace abm {

Coefficients Coefficients::zeros(const GroupLayout& layout) {
  Coefficients c;
  c.layout = layout;
  c.values.assign(layout.total(), 0.0);
  return c;
}

std::span<double> Coefficients::group(std::size_t j) {
  return std::span<double>(values).subspan(layout.offsets[j], layout.size(j));
}

std::span<const double> Coefficients::group(std::size_t j) const {
  return std::span<const double>(values).subspan(layout.offsets[j], layout.size(j));
}

namespace {

void check_shapes(const EncodedDesign& design, const Coefficients& beta) {
  if (beta.layout != design.layout)
    throw InternalError("coefficient layout does not match the design");
  if (beta.values.size() != design.layout.total())
    throw InternalError("coefficient vector length does not match the layout");
}

}  // namespace

std::vector<double> predict_logit(const EncodedDesign& design, const Coefficients& beta) {
  check_shapes(design, beta);
  const kernels::Ops& ops = kernels::active();
  std::vector<double> z(design.rows, beta.intercept);
  for (std::size_t j = 0; j < design.bins.size(); ++j)
    ops.gather_add(beta.values.data() + design.layout.offsets[j], design.bins[j].data(),
                   z.data(), design.rows);
  return z;
}

double nll(const EncodedDesign& design, std::span<const double> target,
           const Coefficients& beta) {
  if (target.size() != design.rows) throw InternalError("target length does not match design");
  if (design.rows == 0) throw InternalError("nll: empty design");
  std::vector<double> z = predict_logit(design, beta);
  return kernels::active().nll_sum(z.data(), target.data(), design.rows) /
         static_cast<double>(design.rows);
}

Coefficients nll_gradient(const EncodedDesign& design, std::span<const double> target,
                          const Coefficients& beta) {
  if (target.size() != design.rows) throw InternalError("target length does not match design");
  if (design.rows == 0) throw InternalError("nll_gradient: empty design");
  std::vector<double> z = predict_logit(design, beta);
  std::vector<double> r(design.rows);
  kernels::active().sigmoid_residual(z.data(), target.data(), r.data(), design.rows);

  const double inv_n = 1.0 / static_cast<double>(design.rows);
  Coefficients g = Coefficients::zeros(design.layout);
  double r_sum = 0.0;
  for (double v : r) r_sum += v;
  g.intercept = r_sum * inv_n;
  for (std::size_t j = 0; j < design.bins.size(); ++j) {
    double* gj = g.values.data() + design.layout.offsets[j];
    const std::int32_t* idx = design.bins[j].data();
    for (std::size_t i = 0; i < design.rows; ++i) gj[idx[i]] += r[i];
  }
  for (double& v : g.values) v *= inv_n;
  return g;
}

double penalty_value(const Coefficients& beta, const PenaltyParams& params) {
  params.validate(beta.layout);
  double tv = 0.0, group = 0.0;
  for (std::size_t j = 0; j < beta.layout.groups(); ++j) {
    std::span<const double> b = beta.group(j);
    for (std::size_t k = 1; k < b.size(); ++k) tv += std::fabs(b[k] - b[k - 1]);
    double ss = 0.0;
    for (double x : b) ss += x * x;
    group += params.group_weights[j] * std::sqrt(ss);
  }
  return params.lambda1 * tv + params.lambda2 * group;
}

}  // namespace abm
