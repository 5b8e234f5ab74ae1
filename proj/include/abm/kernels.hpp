#pragma once

#include <cstddef>
#include <cstdint>

namespace abm::kernels {

// Row-wise kernels on the likelihood hot path. The scalar versions are the
// reference implementation; vector variants must agree with them elementwise
// to ~1 ulp (enforced by the equivalence tests). Sums may differ in rounding
// because the accumulation order differs, but are deterministic per variant.
struct Ops {
  const char* name;
  // z[i] += coef[idx[i]]
  void (*gather_add)(const double* coef, const std::int32_t* idx, double* z, std::size_t n);
  // out[i] = 1 / (1 + exp(-z[i]))
  void (*sigmoid)(const double* z, double* out, std::size_t n);
  // r[i] = sigmoid(z[i]) - y[i]
  void (*sigmoid_residual)(const double* z, const double* y, double* r, std::size_t n);
  // sum_i [ max(z[i], 0) + log1p(exp(-|z[i]|)) - y[i] * z[i] ]
  double (*nll_sum)(const double* z, const double* y, std::size_t n);
};

const Ops& scalar();

// Null when the binary was built without AVX2 support or the CPU lacks it.
const Ops* avx2();

// Best available variant, resolved once per process. The environment variable
// ABM_KERNELS=scalar|avx2 forces a specific one (avx2 errors if unavailable).
const Ops& active();

}  // namespace abm::kernels
