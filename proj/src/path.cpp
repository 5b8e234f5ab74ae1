#include "abm/path.hpp"

#include <algorithm>
#include <cmath>

#include "abm/common.hpp"
#include "abm/csv.hpp"
#include "abm/model.hpp"
#include "abm/rng.hpp"

namespace abm {

void PathConfig::validate() const {
  if (lambda2_count == 0) throw DataError("lambda2-count must be positive");
  if (!(lambda2_ratio > 0.0) || !(lambda2_ratio <= 1.0))
    throw DataError("lambda2-ratio must lie in (0, 1]");
  if (lambda1_multipliers.empty()) throw DataError("need at least one lambda1 multiplier");
  for (double m : lambda1_multipliers)
    if (!(m >= 0.0) || !std::isfinite(m))
      throw DataError("lambda1 multipliers must be finite and nonnegative");
  if (folds < 2) throw DataError("folds must be at least 2");
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw DataError("tol must be finite and nonnegative");
  solver.validate();
}

double lambda2_max(const EncodedDesign& design, std::span<const double> target,
                   std::span<const double> weights) {
  if (weights.size() != design.layout.groups())
    throw DataError("group weight count does not match the number of variables");
  if (design.rows == 0) throw DataError("lambda2_max: empty design");
  double mean = 0.0;
  for (double y : target) mean += y;
  mean /= static_cast<double>(design.rows);
  if (mean == 0.0 || mean == 1.0) throw DataError("lambda2_max undefined: single-class target");

  Coefficients beta = Coefficients::zeros(design.layout);
  beta.intercept = std::log(mean / (1.0 - mean));
  Coefficients grad = nll_gradient(design, target, beta);

  double best = 0.0;
  for (std::size_t j = 0; j < design.layout.groups(); ++j) {
    double ss = 0.0;
    for (double g : grad.group(j)) ss += g * g;
    best = std::max(best, std::sqrt(ss) / weights[j]);
  }
  return best;
}

std::vector<std::uint8_t> make_folds(std::span<const double> target, std::size_t k,
                                     std::uint64_t seed) {
  if (k < 2) throw DataError("folds must be at least 2");
  if (k > 255) throw DataError("too many folds");
  std::vector<std::uint32_t> pos, neg;
  for (std::size_t i = 0; i < target.size(); ++i)
    (target[i] == 1.0 ? pos : neg).push_back(static_cast<std::uint32_t>(i));
  if (pos.size() < k || neg.size() < k)
    throw DataError("stratified " + std::to_string(k) +
                    "-fold split impossible: a class has fewer rows than folds");

  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::uint8_t> fold(target.size(), 0);
  for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<std::uint8_t>(i % k);
  for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<std::uint8_t>(i % k);
  return fold;
}

namespace {

struct Fold {
  EncodedDesign train_design, test_design;
  std::vector<double> train_target, test_target;
};

std::size_t count_kept(const Coefficients& beta, double tol) {
  std::size_t kept = 0;
  for (std::size_t j = 0; j < beta.layout.groups(); ++j)
    if (group_kept(beta.group(j), tol)) ++kept;
  return kept;
}

std::size_t count_bins(const Coefficients& beta, double tol) {
  std::size_t bins = 0;
  for (std::size_t j = 0; j < beta.layout.groups(); ++j)
    if (group_kept(beta.group(j), tol)) bins += merged_bin_count(beta.group(j), tol);
  return bins;
}

}  // namespace

PathResult trace(const EncodedDesign& design, std::span<const double> target,
                 const PathConfig& config) {
  config.validate();
  if (target.size() != design.rows) throw InternalError("target length does not match design");

  std::vector<double> weights = config.group_weights.empty()
                                    ? default_group_weights(design.layout)
                                    : config.group_weights;
  if (weights.size() != design.layout.groups())
    throw DataError("group weight count does not match the number of variables");

  const double l2max = lambda2_max(design, target, weights);

  std::vector<double> lambda2_values(config.lambda2_count);
  for (std::size_t i = 0; i < config.lambda2_count; ++i) {
    double frac = config.lambda2_count == 1
                      ? 0.0
                      : static_cast<double>(i) / static_cast<double>(config.lambda2_count - 1);
    lambda2_values[i] = l2max * std::pow(config.lambda2_ratio, frac);
  }

  std::vector<std::uint8_t> fold_id = make_folds(target, config.folds, config.seed);
  std::vector<Fold> folds(config.folds);
  for (std::size_t f = 0; f < config.folds; ++f) {
    std::vector<std::uint32_t> train_rows, test_rows;
    for (std::size_t i = 0; i < target.size(); ++i)
      (fold_id[i] == f ? test_rows : train_rows).push_back(static_cast<std::uint32_t>(i));
    folds[f].train_design = design_subset(design, train_rows);
    folds[f].test_design = design_subset(design, test_rows);
    for (std::uint32_t i : train_rows) folds[f].train_target.push_back(target[i]);
    for (std::uint32_t i : test_rows) folds[f].test_target.push_back(target[i]);
  }

  PathResult result;
  result.lambda2_max_value = l2max;
  std::vector<Coefficients> point_beta;

  for (double mult : config.lambda1_multipliers) {
    Coefficients warm_full;
    std::vector<Coefficients> warm_fold(config.folds);
    bool have_warm = false;

    for (double l2 : lambda2_values) {
      PenaltyParams params;
      params.lambda1 = mult * l2;
      params.lambda2 = l2;
      params.group_weights = weights;

      FitResult full = fit(design, target, params, config.solver,
                           have_warm ? &warm_full : nullptr);
      if (config.on_fit) config.on_fit(full);

      PathPoint point;
      point.lambda1 = params.lambda1;
      point.lambda2 = params.lambda2;
      point.kept_vars = count_kept(full.beta, config.tol);
      point.total_bins = count_bins(full.beta, config.tol);

      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t f = 0; f < config.folds; ++f) {
        FitResult ff = fit(folds[f].train_design, folds[f].train_target, params,
                           config.solver, have_warm ? &warm_fold[f] : nullptr);
        if (config.on_fit) config.on_fit(ff);
        std::vector<double> z = predict_logit(folds[f].test_design, ff.beta);
        double a = auc(z, folds[f].test_target);
        sum += a;
        sum_sq += a * a;
        warm_fold[f] = std::move(ff.beta);
      }
      double k = static_cast<double>(config.folds);
      point.mean_auc = sum / k;
      double var = (sum_sq - sum * sum / k) / (k - 1.0);
      point.sd_auc = std::sqrt(std::max(0.0, var));

      warm_full = full.beta;
      have_warm = true;
      point_beta.push_back(std::move(full.beta));
      result.points.push_back(point);
    }
  }

  // One-standard-error rule. The "best" point is the first grid point
  // attaining the maximum mean AUC.
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.points.size(); ++i)
    if (result.points[i].mean_auc > result.points[best].mean_auc) best = i;
  double threshold = result.points[best].mean_auc -
                     result.points[best].sd_auc / std::sqrt(static_cast<double>(config.folds));

  std::size_t chosen = best;
  auto rank = [&](std::size_t i) {
    const PathPoint& p = result.points[i];
    return std::make_tuple(p.kept_vars, p.total_bins, -p.lambda2, -p.lambda1);
  };
  for (std::size_t i = 0; i < result.points.size(); ++i)
    if (result.points[i].mean_auc >= threshold && rank(i) < rank(chosen)) chosen = i;

  result.selected = chosen;
  result.points[chosen].selected = true;

  PenaltyParams params;
  params.lambda1 = result.points[chosen].lambda1;
  params.lambda2 = result.points[chosen].lambda2;
  params.group_weights = weights;
  result.final_fit = fit(design, target, params, config.solver, &point_beta[chosen]);
  if (config.on_fit) config.on_fit(result.final_fit);
  return result;
}

std::string path_to_csv(const PathResult& result) {
  std::string out = csv_line({"lambda1", "lambda2", "mean_auc", "sd_auc", "kept_vars",
                              "total_bins", "selected"});
  for (const PathPoint& p : result.points)
    out += csv_line({format_double(p.lambda1), format_double(p.lambda2),
                     format_double(p.mean_auc), format_double(p.sd_auc),
                     std::to_string(p.kept_vars), std::to_string(p.total_bins),
                     p.selected ? "1" : "0"});
  return out;
}

}  // namespace abm
