#include "abm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "abm/common.hpp"

namespace abm {

void PenaltyParams::validate(const GroupLayout& layout) const {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1))
    throw DataError("lambda1 must be finite and nonnegative");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2))
    throw DataError("lambda2 must be finite and nonnegative");
  if (group_weights.size() != layout.groups())
    throw DataError("group weight count does not match the number of variables");
  for (double w : group_weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw DataError("group weights must be positive");
}

std::vector<double> default_group_weights(const GroupLayout& layout) {
  std::vector<double> w(layout.groups());
  for (std::size_t j = 0; j < layout.groups(); ++j)
    w[j] = std::sqrt(static_cast<double>(layout.size(j)));
  return w;
}

// Direct taut-string scan (Condat's formulation): maintain tentative segment
// levels vmin/vmax and running slack umin/umax, emitting a finished segment
// whenever the string must jump. Each emitted segment is written as one double
// value, which is what makes merged coefficients bit-identical.
void prox_tv1d(std::span<const double> v, double t, std::span<double> out) {
  if (v.empty()) throw InternalError("prox_tv1d: empty input");
  if (out.size() != v.size()) throw InternalError("prox_tv1d: output size mismatch");
  if (!(t >= 0.0)) throw InternalError("prox_tv1d: negative step");
  const std::size_t width = v.size();
  if (t == 0.0 || width == 1) {
    if (out.data() != v.data()) std::copy(v.begin(), v.end(), out.begin());
    return;
  }

  std::size_t k = 0, k0 = 0, kminus = 0, kplus = 0;
  double umin = t, umax = -t;
  double vmin = v[0] - t, vmax = v[0] + t;
  const double twot = 2.0 * t;

  for (;;) {
    while (k == width - 1) {
      if (umin < 0.0) {
        do out[k0++] = vmin;
        while (k0 <= kminus);
        k = kminus = k0;
        vmin = v[k];
        umin = t;
        umax = vmin + t - vmax;
      } else if (umax > 0.0) {
        do out[k0++] = vmax;
        while (k0 <= kplus);
        k = kplus = k0;
        vmax = v[k];
        umax = -t;
        umin = vmax - t - vmin;
      } else {
        vmin += umin / static_cast<double>(k - k0 + 1);
        do out[k0++] = vmin;
        while (k0 <= k);
        return;
      }
    }
    umin += v[k + 1] - vmin;
    if (umin < -t) {
      do out[k0++] = vmin;
      while (k0 <= kminus);
      k = kminus = kplus = k0;
      vmin = v[k];
      vmax = vmin + twot;
      umin = t;
      umax = -t;
      continue;
    }
    umax += v[k + 1] - vmax;
    if (umax > t) {
      do out[k0++] = vmax;
      while (k0 <= kplus);
      k = kminus = kplus = k0;
      vmax = v[k];
      vmin = vmax - twot;
      umin = t;
      umax = -t;
      continue;
    }
    ++k;
    if (umin >= t) {
      vmin += (umin - t) / static_cast<double>(k - k0 + 1);
      umin = t;
      kminus = k;
    }
    if (umax <= -t) {
      vmax += (umax + t) / static_cast<double>(k - k0 + 1);
      umax = -t;
      kplus = k;
    }
  }
}

std::vector<double> prox_tv1d(std::span<const double> v, double t) {
  std::vector<double> out(v.size());
  prox_tv1d(v, t, out);
  return out;
}

void prox_group(std::span<const double> v, double t, std::span<double> out) {
  if (out.size() != v.size()) throw InternalError("prox_group: output size mismatch");
  if (!(t >= 0.0)) throw InternalError("prox_group: negative step");
  double ss = 0.0;
  for (double x : v) ss += x * x;
  double norm = std::sqrt(ss);
  if (norm <= t) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  double scale = 1.0 - t / norm;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;
}

std::vector<double> prox_group(std::span<const double> v, double t) {
  std::vector<double> out(v.size());
  prox_group(v, t, out);
  return out;
}

void prox_penalty(std::span<double> beta, const GroupLayout& layout, double step,
                  const PenaltyParams& params) {
  if (beta.size() != layout.total()) throw InternalError("prox_penalty: size mismatch");
  if (!(step > 0.0)) throw InternalError("prox_penalty: step must be positive");
  params.validate(layout);
  for (std::size_t j = 0; j < layout.groups(); ++j) {
    std::span<double> g = beta.subspan(layout.offsets[j], layout.size(j));
    prox_tv1d(g, step * params.lambda1, g);
    prox_group(g, step * params.lambda2 * params.group_weights[j], g);
  }
}

}  // namespace abm
