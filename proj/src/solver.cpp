#include "abm/solver.hpp"

#include <algorithm>
#include <cmath>

#include "abm/common.hpp"
#include "abm/kernels.hpp"

namespace abm {

void SolverConfig::validate() const {
  if (max_iters == 0) throw DataError("max_iters must be positive");
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) throw DataError("rel_tol must be positive");
  if (initial_step && (!(*initial_step > 0.0) || !std::isfinite(*initial_step)))
    throw DataError("initial_step must be positive");
  if (!(backtrack > 0.0) || !(backtrack < 1.0))
    throw DataError("backtrack factor must lie in (0, 1)");
}

double objective_at(const EncodedDesign& design, std::span<const double> target,
                    const Coefficients& beta, const PenaltyParams& params) {
  return nll(design, target, beta) + penalty_value(beta, params);
}

namespace {

// Fixed row order derived from (bin pattern, target): rows that compare equal
// contribute bit-identical terms, so every reduction below is invariant to
// the order the rows arrived in.
std::vector<std::uint32_t> canonical_perm(const EncodedDesign& design,
                                          std::span<const double> target) {
  const std::size_t n = design.rows;
  const std::size_t buckets = static_cast<std::size_t>(design.rank_count) * 2;
  std::vector<std::uint32_t> count(buckets + 1, 0);
  auto key = [&](std::size_t i) {
    return static_cast<std::size_t>(design.pattern_rank[i]) * 2 +
           (target[i] == 1.0 ? 1 : 0);
  };
  for (std::size_t i = 0; i < n; ++i) ++count[key(i) + 1];
  for (std::size_t b = 1; b <= buckets; ++b) count[b] += count[b - 1];
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[count[key(i)]++] = static_cast<std::uint32_t>(i);
  return perm;
}

struct Workspace {
  std::size_t n = 0;
  std::vector<std::vector<std::int32_t>> bins;  // canonical order
  std::vector<double> y;                        // canonical order
  std::vector<double> z, r;

  void logits(const GroupLayout& layout, const double* values, double intercept) {
    const kernels::Ops& ops = kernels::active();
    std::fill(z.begin(), z.end(), intercept);
    for (std::size_t j = 0; j < bins.size(); ++j)
      ops.gather_add(values + layout.offsets[j], bins[j].data(), z.data(), n);
  }

  double nll_at(const GroupLayout& layout, const double* values, double intercept) {
    logits(layout, values, intercept);
    return kernels::active().nll_sum(z.data(), y.data(), n) / static_cast<double>(n);
  }

  // Gradient of the mean nll; z must already hold the logits of the point.
  void gradient(const GroupLayout& layout, double* g_values, double& g_intercept) {
    kernels::active().sigmoid_residual(z.data(), y.data(), r.data(), n);
    const double inv_n = 1.0 / static_cast<double>(n);
    double sum = 0.0;
    for (double v : r) sum += v;
    g_intercept = sum * inv_n;
    std::fill(g_values, g_values + layout.total(), 0.0);
    for (std::size_t j = 0; j < bins.size(); ++j) {
      double* gj = g_values + layout.offsets[j];
      const std::int32_t* idx = bins[j].data();
      for (std::size_t i = 0; i < n; ++i) gj[idx[i]] += r[i];
    }
    for (std::size_t c = 0; c < layout.total(); ++c) g_values[c] *= inv_n;
  }
};

double penalty_flat(std::span<const double> values, const GroupLayout& layout,
                    const PenaltyParams& params) {
  double tv = 0.0, group = 0.0;
  for (std::size_t j = 0; j < layout.groups(); ++j) {
    const double* b = values.data() + layout.offsets[j];
    const std::size_t m = layout.size(j);
    for (std::size_t k = 1; k < m; ++k) tv += std::fabs(b[k] - b[k - 1]);
    double ss = 0.0;
    for (std::size_t k = 0; k < m; ++k) ss += b[k] * b[k];
    group += params.group_weights[j] * std::sqrt(ss);
  }
  return params.lambda1 * tv + params.lambda2 * group;
}

struct StepResult {
  double nll_value = 0.0;
  double step = 0.0;
};

// One backtracked proximal step from (pv, pi) with gradient (gv, gi); writes
// the candidate into (cv, ci) and returns its nll and the accepted step.
StepResult prox_step(Workspace& ws, const GroupLayout& layout, const PenaltyParams& params,
                     const SolverConfig& config, double step, double nll_p,
                     const std::vector<double>& pv, double pi,
                     const std::vector<double>& gv, double gi,
                     std::vector<double>& cv, double& ci) {
  const std::size_t total = layout.total();
  for (int attempt = 0; attempt < 200; ++attempt) {
    for (std::size_t c = 0; c < total; ++c) cv[c] = pv[c] - step * gv[c];
    prox_penalty(cv, layout, step, params);
    ci = pi - step * gi;

    double nll_c = ws.nll_at(layout, cv.data(), ci);
    double lin = gi * (ci - pi);
    double quad = (ci - pi) * (ci - pi);
    for (std::size_t c = 0; c < total; ++c) {
      double d = cv[c] - pv[c];
      lin += gv[c] * d;
      quad += d * d;
    }
    double bound = nll_p + lin + quad / (2.0 * step);
    if (nll_c <= bound + 1e-12 * std::max(1.0, std::fabs(bound)))
      return {nll_c, step};
    step *= config.backtrack;
  }
  throw InternalError("backtracking failed to find a usable step");
}

}  // namespace

FitResult fit(const EncodedDesign& design, std::span<const double> target,
              const PenaltyParams& params, const SolverConfig& config,
              const Coefficients* warm_start) {
  config.validate();
  params.validate(design.layout);
  if (target.size() != design.rows) throw InternalError("target length does not match design");
  if (design.rows == 0) throw InternalError("fit: empty design");

  const GroupLayout& layout = design.layout;
  const std::size_t total = layout.total();
  const std::size_t n = design.rows;

  Workspace ws;
  ws.n = n;
  std::vector<std::uint32_t> perm = canonical_perm(design, target);
  ws.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) ws.y[i] = target[perm[i]];
  ws.bins.resize(design.bins.size());
  for (std::size_t j = 0; j < design.bins.size(); ++j) {
    ws.bins[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) ws.bins[j][i] = design.bins[j][perm[i]];
  }
  ws.z.resize(n);
  ws.r.resize(n);

  // x: current iterate, m: momentum point.
  std::vector<double> xv(total, 0.0), mv, gv(total), cv(total), prev_xv;
  double xi = 0.0;
  if (warm_start) {
    if (warm_start->layout != layout) throw InternalError("warm start layout mismatch");
    xv = warm_start->values;
    xi = warm_start->intercept;
  } else {
    double mean = 0.0;
    for (double v : ws.y) mean += v;
    mean /= static_cast<double>(n);
    double logit = std::log(mean / (1.0 - mean));  // +-inf at the degenerate ends
    xi = std::clamp(logit, -10.0, 10.0);
  }
  mv = xv;
  double mi = xi;

  // ||X||_F^2 = n * (groups + 1): every row has one active indicator per
  // variable plus the intercept column.
  double step = config.initial_step
                    ? *config.initial_step
                    : 4.0 / static_cast<double>(layout.groups() + 1);

  double f_x = ws.nll_at(layout, xv.data(), xi) + penalty_flat(xv, layout, params);
  if (!std::isfinite(f_x)) throw InternalError("non-finite objective at the starting point");

  FitResult result;
  result.trace.push_back(f_x);

  double tk = 1.0;
  prev_xv = xv;
  double prev_xi = xi;

  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    // Gradient at the momentum point (logits left in ws.z by nll_at).
    double nll_m = ws.nll_at(layout, mv.data(), mi);
    double gi;
    ws.gradient(layout, gv.data(), gi);

    double ci;
    StepResult sr = prox_step(ws, layout, params, config, step, nll_m, mv, mi, gv, gi, cv, ci);
    step = sr.step;
    double f_c = sr.nll_value + penalty_flat(cv, layout, params);
    if (!std::isfinite(f_c)) throw InternalError("non-finite objective encountered");

    bool accepted_move = true;
    if (config.restart && f_c > f_x) {
      // The accelerated candidate overshoots: restart the momentum and take a
      // plain proximal step from x, which cannot increase the objective.
      double nll_x = ws.nll_at(layout, xv.data(), xi);
      double gxi;
      ws.gradient(layout, gv.data(), gxi);
      sr = prox_step(ws, layout, params, config, step, nll_x, xv, xi, gv, gxi, cv, ci);
      step = sr.step;
      f_c = sr.nll_value + penalty_flat(cv, layout, params);
      if (!std::isfinite(f_c)) throw InternalError("non-finite objective encountered");
      if (f_c > f_x) {
        // Numerically no progress is possible; keep the iterate.
        f_c = f_x;
        accepted_move = false;
      }
      tk = 1.0;
      if (accepted_move) {
        prev_xv = xv;
        prev_xi = xi;
        xv = cv;
        xi = ci;
      }
      mv = xv;
      mi = xi;
    } else {
      prev_xv = xv;
      prev_xi = xi;
      xv = cv;
      xi = ci;
      double tk_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      double mom = (tk - 1.0) / tk_next;
      for (std::size_t c = 0; c < total; ++c) mv[c] = xv[c] + mom * (xv[c] - prev_xv[c]);
      mi = xi + mom * (xi - prev_xi);
      tk = tk_next;
    }

    double f_prev = result.trace.back();
    result.trace.push_back(f_c);
    result.iterations = iter;
    f_x = f_c;

    if (std::fabs(f_prev - f_c) < config.rel_tol * std::max(1.0, std::fabs(f_c))) {
      result.converged = true;
      break;
    }
  }

  result.beta.layout = layout;
  result.beta.values = std::move(xv);
  result.beta.intercept = xi;
  result.final_step = step;
  return result;
}

}  // namespace abm
