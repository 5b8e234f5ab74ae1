#include "abm/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "abm/common.hpp"
#include "abm/csv.hpp"
#include "abm/kernels.hpp"
#include "abm/model.hpp"

namespace abm {

std::string baseline_name(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::raw_logistic: return "raw-logistic";
    case BaselineMethod::equal_width: return "equal-width";
    case BaselineMethod::equal_frequency: return "equal-frequency";
  }
  throw InternalError("unknown baseline method");
}

BaselineMethod baseline_from_name(const std::string& name) {
  if (name == "raw-logistic") return BaselineMethod::raw_logistic;
  if (name == "equal-width") return BaselineMethod::equal_width;
  if (name == "equal-frequency") return BaselineMethod::equal_frequency;
  throw DataError("unknown baseline '" + name +
                  "' (expected raw-logistic, equal-width or equal-frequency)");
}

BinGrid equal_width_grid(const Dataset& data, std::size_t nbins) {
  if (nbins < 2) throw DataError("nbins must be at least 2");
  if (data.n_rows() == 0) throw DataError("empty dataset");

  BinGrid grid;
  grid.nbins = nbins;
  for (std::size_t j = 0; j < data.n_vars(); ++j) {
    const std::vector<double>& col = data.columns[j];
    VariableGrid vg;
    vg.name = data.names[j];
    double lo = *std::min_element(col.begin(), col.end());
    double hi = *std::max_element(col.begin(), col.end());
    if (lo < hi) {
      for (std::size_t k = 1; k < nbins; ++k) {
        double cut = lo + static_cast<double>(k) * (hi - lo) / static_cast<double>(nbins);
        if (vg.cuts.empty() || cut > vg.cuts.back()) vg.cuts.push_back(cut);
      }
    }
    vg.counts.assign(vg.cuts.size() + 1, 0);
    for (double v : col)
      ++vg.counts[std::upper_bound(vg.cuts.begin(), vg.cuts.end(), v) - vg.cuts.begin()];
    grid.vars.push_back(std::move(vg));
  }
  return grid;
}

namespace {

constexpr double kRidge = 1e-8;

// Damped Newton for nll + (ridge/2)*||beta||^2 (intercept unpenalized) on a
// dense design whose first column is the intercept.
Eigen::VectorXd newton_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const std::size_t n = x.rows(), d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);

  auto objective = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd z = x * b;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double zi = z(i);
      acc += (zi > 0.0 ? zi : 0.0) + std::log1p(std::exp(-std::fabs(zi))) - y(i) * zi;
    }
    double reg = 0.0;
    for (std::size_t c = 1; c < d; ++c) reg += b(c) * b(c);
    return acc * inv_n + 0.5 * kRidge * reg;
  };

  double obj = objective(beta);
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd z = x * beta;
    Eigen::VectorXd mu(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      double e = std::exp(-std::fabs(z(i)));
      double s = z(i) >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      mu(i) = s;
      w(i) = s * (1.0 - s);
    }
    Eigen::VectorXd grad = x.transpose() * (mu - y) * inv_n;
    for (std::size_t c = 1; c < d; ++c) grad(c) += kRidge * beta(c);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-11) break;

    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x * inv_n;
    for (std::size_t c = 1; c < d; ++c) h(c, c) += kRidge;
    h.diagonal().array() += 1e-12;
    Eigen::VectorXd dir = h.ldlt().solve(-grad);

    double t = 1.0;
    double next = objective(beta + t * dir);
    int halvings = 0;
    while (next > obj - 1e-4 * t * (-grad.dot(dir)) && halvings < 60) {
      t *= 0.5;
      next = objective(beta + t * dir);
      ++halvings;
    }
    if (next >= obj && halvings >= 60) break;
    beta += t * dir;
    double prev = obj;
    obj = next;
    if (std::fabs(prev - obj) < 1e-13 * std::max(1.0, std::fabs(obj))) break;
  }
  return beta;
}

Eigen::MatrixXd indicator_matrix(const EncodedDesign& design) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(design.rows, design.layout.total() + 1);
  x.col(0).setOnes();
  for (std::size_t j = 0; j < design.bins.size(); ++j)
    for (std::size_t i = 0; i < design.rows; ++i)
      x(i, 1 + design.layout.offsets[j] + design.bins[j][i]) = 1.0;
  return x;
}

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

struct FoldIndices {
  std::vector<std::uint32_t> train, test;
};

std::vector<FoldIndices> split_rows(const std::vector<std::uint8_t>& fold_id, std::size_t k) {
  std::vector<FoldIndices> folds(k);
  for (std::size_t i = 0; i < fold_id.size(); ++i)
    for (std::size_t f = 0; f < k; ++f)
      (fold_id[i] == f ? folds[f].test : folds[f].train).push_back(static_cast<std::uint32_t>(i));
  return folds;
}

struct CvStats {
  double mean = 0.0, sd = 0.0;
};

CvStats cv_stats(const std::vector<double>& values) {
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  double k = static_cast<double>(values.size());
  CvStats s;
  s.mean = sum / k;
  s.sd = std::sqrt(std::max(0.0, (sum_sq - sum * sum / k) / (k - 1.0)));
  return s;
}

ComparisonRow run_binned_baseline(const Dataset& data, const BaselineSpec& spec,
                                  const std::vector<FoldIndices>& folds,
                                  const std::vector<std::uint8_t>& fold_id) {
  BinGrid grid = spec.method == BaselineMethod::equal_width
                     ? equal_width_grid(data, spec.nbins)
                     : fit_grid(data, spec.nbins);
  EncodedDesign design = encode(data, grid);

  std::vector<double> aucs;
  for (const FoldIndices& f : folds) {
    EncodedDesign train = design_subset(design, f.train);
    Eigen::VectorXd y(f.train.size());
    for (std::size_t i = 0; i < f.train.size(); ++i) y(i) = data.target[f.train[i]];
    Eigen::VectorXd beta = newton_logistic(indicator_matrix(train), y);

    std::vector<double> z(f.test.size()), yt(f.test.size());
    for (std::size_t i = 0; i < f.test.size(); ++i) {
      std::uint32_t row = f.test[i];
      double zi = beta(0);
      for (std::size_t j = 0; j < design.bins.size(); ++j)
        zi += beta(1 + design.layout.offsets[j] + design.bins[j][row]);
      z[i] = zi;
      yt[i] = data.target[row];
    }
    aucs.push_back(auc(z, yt));
  }

  ComparisonRow row;
  row.method = baseline_name(spec.method);
  CvStats s = cv_stats(aucs);
  row.mean_auc = s.mean;
  row.sd_auc = s.sd;
  row.kept_vars = data.n_vars();
  row.total_bins = design.layout.total();
  row.fold_hash = fnv1a(fold_id);
  return row;
}

ComparisonRow run_raw_baseline(const Dataset& data, const std::vector<FoldIndices>& folds,
                               const std::vector<std::uint8_t>& fold_id) {
  std::vector<double> aucs;
  for (const FoldIndices& f : folds) {
    Eigen::MatrixXd x(f.train.size(), data.n_vars() + 1);
    Eigen::VectorXd y(f.train.size());
    for (std::size_t i = 0; i < f.train.size(); ++i) {
      x(i, 0) = 1.0;
      for (std::size_t j = 0; j < data.n_vars(); ++j)
        x(i, 1 + j) = data.columns[j][f.train[i]];
      y(i) = data.target[f.train[i]];
    }
    Eigen::VectorXd beta = newton_logistic(x, y);

    std::vector<double> z(f.test.size()), yt(f.test.size());
    for (std::size_t i = 0; i < f.test.size(); ++i) {
      std::uint32_t row = f.test[i];
      double zi = beta(0);
      for (std::size_t j = 0; j < data.n_vars(); ++j) zi += beta(1 + j) * data.columns[j][row];
      z[i] = zi;
      yt[i] = data.target[row];
    }
    aucs.push_back(auc(z, yt));
  }

  ComparisonRow row;
  row.method = baseline_name(BaselineMethod::raw_logistic);
  CvStats s = cv_stats(aucs);
  row.mean_auc = s.mean;
  row.sd_auc = s.sd;
  row.kept_vars = data.n_vars();
  row.total_bins = data.n_vars();
  row.fold_hash = fnv1a(fold_id);
  return row;
}

ComparisonRow run_abm(const Dataset& data, AbmSpec spec, std::size_t folds, std::uint64_t seed) {
  spec.path.folds = folds;
  spec.path.seed = seed;
  BinGrid grid = fit_grid(data, spec.nbins);
  EncodedDesign design = encode(data, grid);
  PathResult result = trace(design, data.target, spec.path);

  ComparisonRow row;
  row.method = "abm";
  const PathPoint& p = result.points[result.selected];
  row.mean_auc = p.mean_auc;
  row.sd_auc = p.sd_auc;
  row.kept_vars = p.kept_vars;
  row.total_bins = p.total_bins;
  row.fold_hash = fnv1a(make_folds(data.target, folds, seed));
  return row;
}

}  // namespace

Coefficients ridge_logistic_refit(const EncodedDesign& design, std::span<const double> target) {
  Eigen::VectorXd y(design.rows);
  for (std::size_t i = 0; i < design.rows; ++i) y(i) = target[i];
  Eigen::VectorXd beta = newton_logistic(indicator_matrix(design), y);

  Coefficients out = Coefficients::zeros(design.layout);
  out.intercept = beta(0);
  for (std::size_t c = 0; c < design.layout.total(); ++c) out.values[c] = beta(1 + c);
  return out;
}

ComparisonTable run_comparison(const Dataset& data, const std::vector<MethodSpec>& methods,
                               std::size_t folds, std::uint64_t seed) {
  if (methods.empty()) throw DataError("run_comparison: no methods given");
  std::vector<std::uint8_t> fold_id = make_folds(data.target, folds, seed);
  std::vector<FoldIndices> fold_rows = split_rows(fold_id, folds);

  ComparisonTable table;
  for (const MethodSpec& method : methods) {
    if (std::holds_alternative<AbmSpec>(method)) {
      table.rows.push_back(run_abm(data, std::get<AbmSpec>(method), folds, seed));
    } else {
      const BaselineSpec& spec = std::get<BaselineSpec>(method);
      table.rows.push_back(spec.method == BaselineMethod::raw_logistic
                               ? run_raw_baseline(data, fold_rows, fold_id)
                               : run_binned_baseline(data, spec, fold_rows, fold_id));
    }
  }
  return table;
}

std::string comparison_to_csv(const ComparisonTable& table) {
  std::string out = csv_line({"method", "mean_auc", "sd_auc", "kept_vars", "total_bins"});
  for (const ComparisonRow& r : table.rows)
    out += csv_line({r.method, format_double(r.mean_auc), format_double(r.sd_auc),
                     std::to_string(r.kept_vars), std::to_string(r.total_bins)});
  return out;
}

}  // namespace abm
