#include <cmath>

#include "abm/kernels.hpp"

namespace abm::kernels {

namespace {

void gather_add_scalar(const double* coef, const std::int32_t* idx, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] += coef[idx[i]];
}

inline double sigmoid1(double z) {
  double e = std::exp(-std::fabs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

void sigmoid_scalar(const double* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid1(z[i]);
}

void sigmoid_residual_scalar(const double* z, const double* y, double* r, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) r[i] = sigmoid1(z[i]) - y[i];
}

double nll_sum_scalar(const double* z, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double zi = z[i];
    double term = (zi > 0.0 ? zi : 0.0) + std::log1p(std::exp(-std::fabs(zi)));
    acc += term - y[i] * zi;
  }
  return acc;
}

}  // namespace

const Ops& scalar() {
  static const Ops ops{"scalar", gather_add_scalar, sigmoid_scalar,
                       sigmoid_residual_scalar, nll_sum_scalar};
  return ops;
}

}  // namespace abm::kernels
