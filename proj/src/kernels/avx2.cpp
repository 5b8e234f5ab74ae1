// AVX2 + FMA variants of the row-wise kernels. Compiled with -mavx2 -mfma;
// selected at runtime only when the CPU reports both features.

#if defined(ABM_COMPILE_AVX2)

#include <immintrin.h>

#include <cmath>

#include "abm/kernels.hpp"

namespace abm::kernels {

namespace {

// exp(x) for x in [-708, 708]: k = round(x/ln2), exp(x) = 2^k * e^r with the
// Cephes two-part ln2 split and a degree-13 Taylor polynomial in r. Inputs are
// clamped to the normal range, which is harmless for the sigmoid/softplus
// callers (the result saturates the same way).
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(708.0);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  const double inv_fact[] = {
      1.0 / 6227020800.0,  // 1/13!
      1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,     1.0 / 120.0,
      1.0 / 24.0,        1.0 / 6.0,        0.5,             1.0,
      1.0};
  __m256d p = _mm256_set1_pd(inv_fact[0]);
  for (int i = 1; i < 14; ++i)
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[i]));

  __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i k64 = _mm256_cvtepi32_epi64(k32);
  __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// log1p(u) for u in [0, 1] (fdlibm reduction restricted to that range):
// w = 1+u in [1, 2]; if w > sqrt(2) take f = w/2 - 1 and add ln2.
inline __m256d log1p_unit_pd(__m256d u) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d sqrt2 = _mm256_set1_pd(1.41421356237309514547);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

  __m256d w = _mm256_add_pd(one, u);
  __m256d big = _mm256_cmp_pd(w, sqrt2, _CMP_GT_OQ);
  // Both halves of the blend are exact: u is given, and 0.5*u - 0.5 is exact
  // by Sterbenz for u in (sqrt(2)-1, 1].
  __m256d f = _mm256_blendv_pd(u, _mm256_fmsub_pd(half, u, half), big);
  __m256d dk = _mm256_and_pd(big, one);

  __m256d s = _mm256_div_pd(f, _mm256_add_pd(two, f));
  __m256d z = _mm256_mul_pd(s, s);
  const double lp[] = {1.479819860511658591e-01, 1.531383769920937332e-01,
                       1.818357216161805012e-01, 2.222219843214978396e-01,
                       2.857142874366239149e-01, 3.999999999940941908e-01,
                       6.666666666666735130e-01};
  __m256d rp = _mm256_set1_pd(lp[0]);
  for (int i = 1; i < 7; ++i)
    rp = _mm256_fmadd_pd(rp, z, _mm256_set1_pd(lp[i]));
  rp = _mm256_mul_pd(rp, z);

  __m256d hfsq = _mm256_mul_pd(_mm256_mul_pd(half, f), f);
  __m256d res = _mm256_fmadd_pd(s, _mm256_add_pd(hfsq, rp),
                                _mm256_mul_pd(dk, ln2_lo));
  res = _mm256_add_pd(res, _mm256_sub_pd(f, hfsq));
  return _mm256_fmadd_pd(dk, ln2_hi, res);
}

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double sigmoid1(double z) {
  double e = std::exp(-std::fabs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

void gather_add_avx2(const double* coef, const std::int32_t* idx, double* z, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
    __m256d g = _mm256_i32gather_pd(coef, vi, 8);
    _mm256_storeu_pd(z + i, _mm256_add_pd(_mm256_loadu_pd(z + i), g));
  }
  for (; i < n; ++i) z[i] += coef[idx[i]];
}

// sigma(z) = 1/(1+e) for z >= 0, e/(1+e) otherwise, with e = exp(-|z|).
inline __m256d sigmoid_pd(__m256d z) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(z)));
  __m256d denom = _mm256_add_pd(one, e);
  __m256d nonneg = _mm256_cmp_pd(z, _mm256_setzero_pd(), _CMP_GE_OQ);
  __m256d num = _mm256_blendv_pd(e, one, nonneg);
  return _mm256_div_pd(num, denom);
}

void sigmoid_avx2(const double* z, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, sigmoid_pd(_mm256_loadu_pd(z + i)));
  for (; i < n; ++i) out[i] = sigmoid1(z[i]);
}

void sigmoid_residual_avx2(const double* z, const double* y, double* r, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = sigmoid_pd(_mm256_loadu_pd(z + i));
    _mm256_storeu_pd(r + i, _mm256_sub_pd(s, _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) r[i] = sigmoid1(z[i]) - y[i];
}

double nll_sum_avx2(const double* z, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d zi = _mm256_loadu_pd(z + i);
    __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(zi)));
    __m256d term = _mm256_add_pd(_mm256_max_pd(zi, _mm256_setzero_pd()),
                                 log1p_unit_pd(e));
    term = _mm256_fnmadd_pd(_mm256_loadu_pd(y + i), zi, term);
    acc = _mm256_add_pd(acc, term);
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    double zi = z[i];
    double term = (zi > 0.0 ? zi : 0.0) + std::log1p(std::exp(-std::fabs(zi)));
    total += term - y[i] * zi;
  }
  return total;
}

}  // namespace

const Ops* avx2() {
  static const Ops* resolved = []() -> const Ops* {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
      return static_cast<const Ops*>(nullptr);
    static const Ops ops{"avx2", gather_add_avx2, sigmoid_avx2,
                         sigmoid_residual_avx2, nll_sum_avx2};
    return &ops;
  }();
  return resolved;
}

}  // namespace abm::kernels

#else

#include "abm/kernels.hpp"

namespace abm::kernels {
const Ops* avx2() { return nullptr; }
}  // namespace abm::kernels

#endif
