#include "abm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "abm/common.hpp"
#include "abm/csv.hpp"

namespace abm {

bool group_kept(std::span<const double> beta, double tol) {
  double peak = 0.0;
  for (double b : beta) peak = std::max(peak, std::fabs(b));
  return peak > tol;
}

std::size_t merged_bin_count(std::span<const double> beta, double tol) {
  if (beta.empty()) return 0;
  std::size_t bins = 1;
  for (std::size_t k = 1; k < beta.size(); ++k)
    if (std::fabs(beta[k] - beta[k - 1]) > tol) ++bins;
  return bins;
}

BinningModel extract(const FitResult& fit, const BinGrid& grid, double tol) {
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw DataError("tol must be finite and nonnegative");
  if (grid.vars.size() != fit.beta.layout.groups())
    throw InternalError("extract: grid and fit disagree on the number of variables");

  BinningModel model;
  model.intercept = fit.beta.intercept;
  model.provenance.nbins = grid.nbins;
  model.provenance.tol = tol;

  for (std::size_t j = 0; j < grid.vars.size(); ++j) {
    const VariableGrid& vg = grid.vars[j];
    std::span<const double> beta = fit.beta.group(j);
    if (beta.size() != vg.bins())
      throw InternalError("extract: group size does not match the grid");
    model.columns.push_back(vg.name);

    if (!group_kept(beta, tol)) {
      model.dropped.push_back(vg.name);
      continue;
    }

    MergedVariable mv;
    mv.name = vg.name;
    mv.column = j;
    std::size_t run_start = 0;
    for (std::size_t k = 1; k <= beta.size(); ++k) {
      if (k < beta.size() && std::fabs(beta[k] - beta[k - 1]) <= tol) continue;
      // Close the run [run_start, k).
      bool all_equal = true;
      for (std::size_t i = run_start + 1; i < k; ++i)
        if (beta[i] != beta[run_start]) all_equal = false;
      double value;
      if (all_equal) {
        value = beta[run_start];
      } else if (!vg.counts.empty()) {
        double wsum = 0.0, acc = 0.0;
        for (std::size_t i = run_start; i < k; ++i) {
          double w = static_cast<double>(vg.counts[i]);
          wsum += w;
          acc += w * beta[i];
        }
        // A run of empty bins has no weight; fall back to the plain mean.
        value = wsum > 0.0 ? acc / wsum
                           : std::accumulate(beta.begin() + run_start, beta.begin() + k, 0.0) /
                                 static_cast<double>(k - run_start);
      } else {
        value = std::accumulate(beta.begin() + run_start, beta.begin() + k, 0.0) /
                static_cast<double>(k - run_start);
      }
      mv.coefficients.push_back(value);
      if (k < beta.size()) mv.cutpoints.push_back(vg.cuts[k - 1]);
      run_start = k;
    }
    model.variables.push_back(std::move(mv));
  }
  return model;
}

namespace {

double merged_coefficient(const MergedVariable& mv, double v) {
  std::size_t b = std::upper_bound(mv.cutpoints.begin(), mv.cutpoints.end(), v) -
                  mv.cutpoints.begin();
  return mv.coefficients[b];
}

}  // namespace

double score(const BinningModel& model, std::span<const double> row) {
  if (row.size() != model.columns.size())
    throw DataError("score: expected " + std::to_string(model.columns.size()) +
                    " values, got " + std::to_string(row.size()));
  double z = model.intercept;
  for (const MergedVariable& mv : model.variables) {
    double v = row[mv.column];
    if (!std::isfinite(v)) throw DataError("score: non-finite value for '" + mv.name + "'");
    z += merged_coefficient(mv, v);
  }
  return z;
}

Scorer make_scorer(const BinningModel& model, const std::vector<std::string>& input_names) {
  Scorer s;
  s.model = &model;
  for (const MergedVariable& mv : model.variables) {
    std::size_t col = input_names.size();
    for (std::size_t c = 0; c < input_names.size(); ++c)
      if (input_names[c] == mv.name) col = c;
    if (col == input_names.size())
      throw DataError("input is missing model variable '" + mv.name + "'");
    s.input_column.push_back(col);
  }
  return s;
}

double Scorer::operator()(std::span<const double> row) const {
  double z = model->intercept;
  for (std::size_t v = 0; v < model->variables.size(); ++v) {
    double x = row[input_column[v]];
    if (!std::isfinite(x))
      throw DataError("score: non-finite value for '" + model->variables[v].name + "'");
    z += merged_coefficient(model->variables[v], x);
  }
  return z;
}

ScorecardTable scorecard(const BinningModel& model, const Dataset& data) {
  double total_events = 0.0;
  for (double y : data.target) total_events += y;
  const double total_nonevents = static_cast<double>(data.n_rows()) - total_events;

  ScorecardTable table;
  for (const MergedVariable& mv : model.variables) {
    std::size_t col = data.names.size();
    for (std::size_t c = 0; c < data.names.size(); ++c)
      if (data.names[c] == mv.name) col = c;
    if (col == data.names.size())
      throw DataError("data is missing model variable '" + mv.name + "'");

    const std::size_t bins = mv.coefficients.size();
    std::vector<std::size_t> count(bins, 0);
    std::vector<double> events(bins, 0.0);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
      double v = data.columns[col][i];
      std::size_t b = std::upper_bound(mv.cutpoints.begin(), mv.cutpoints.end(), v) -
                      mv.cutpoints.begin();
      ++count[b];
      events[b] += data.target[i];
    }

    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < bins; ++b) {
      ScorecardRow row;
      row.variable = mv.name;
      row.bin_low = b == 0 ? -inf : mv.cutpoints[b - 1];
      row.bin_high = b + 1 == bins ? inf : mv.cutpoints[b];
      row.coefficient = mv.coefficients[b];
      row.count = count[b];
      row.event_rate = count[b] == 0 ? 0.0 : events[b] / static_cast<double>(count[b]);
      double nonevents = static_cast<double>(count[b]) - events[b];
      row.woe = std::log(((events[b] + 0.5) / (total_events + 0.5)) /
                         ((nonevents + 0.5) / (total_nonevents + 0.5)));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string scorecard_to_csv(const ScorecardTable& table) {
  std::string out = csv_line({"variable", "bin_low", "bin_high", "coefficient", "count",
                              "event_rate", "woe"});
  for (const ScorecardRow& r : table.rows)
    out += csv_line({r.variable, format_double(r.bin_low), format_double(r.bin_high),
                     format_double(r.coefficient), std::to_string(r.count),
                     format_double(r.event_rate), format_double(r.woe)});
  return out;
}

double auc(std::span<const double> scores, std::span<const double> target) {
  if (scores.size() != target.size()) throw InternalError("auc: length mismatch");
  const std::size_t n = scores.size();
  double positives = 0.0;
  for (double y : target) positives += y;
  double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0)
    throw DataError("auc undefined: target has a single class");

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });

  // Rank-sum with average ranks over tied score runs.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (target[order[k]] == 1.0) rank_sum_pos += avg_rank;
    i = j;
  }
  return (rank_sum_pos - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

std::string model_to_json(const BinningModel& model) {
  nlohmann::json obj;
  obj["intercept"] = model.intercept;
  obj["variables"] = nlohmann::json::array();
  for (const MergedVariable& mv : model.variables) {
    nlohmann::json v;
    v["name"] = mv.name;
    v["cutpoints"] = mv.cutpoints;
    v["coefficients"] = mv.coefficients;
    obj["variables"].push_back(v);
  }
  obj["dropped"] = model.dropped;
  nlohmann::json prov;
  prov["nbins"] = model.provenance.nbins;
  prov["lambda1"] = model.provenance.lambda1;
  prov["lambda2"] = model.provenance.lambda2;
  prov["tol"] = model.provenance.tol;
  obj["provenance"] = prov;
  return obj.dump(2) + "\n";
}

BinningModel model_from_json(const std::string& text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model JSON parse error: ") + e.what());
  }
  BinningModel model;
  try {
    model.intercept = obj.at("intercept").get<double>();
    for (const auto& v : obj.at("variables")) {
      MergedVariable mv;
      mv.name = v.at("name").get<std::string>();
      mv.cutpoints = v.at("cutpoints").get<std::vector<double>>();
      mv.coefficients = v.at("coefficients").get<std::vector<double>>();
      if (mv.coefficients.size() != mv.cutpoints.size() + 1)
        throw DataError("model JSON: '" + mv.name + "' needs one more coefficient than cutpoints");
      for (std::size_t i = 1; i < mv.cutpoints.size(); ++i)
        if (!(mv.cutpoints[i - 1] < mv.cutpoints[i]))
          throw DataError("model JSON: cutpoints for '" + mv.name + "' are not increasing");
      mv.column = model.columns.size();
      model.columns.push_back(mv.name);
      model.variables.push_back(std::move(mv));
    }
    model.dropped = obj.at("dropped").get<std::vector<std::string>>();
    for (const std::string& name : model.dropped) model.columns.push_back(name);
    const auto& prov = obj.at("provenance");
    model.provenance.nbins = prov.at("nbins").get<std::size_t>();
    model.provenance.lambda1 = prov.at("lambda1").get<double>();
    model.provenance.lambda2 = prov.at("lambda2").get<double>();
    model.provenance.tol = prov.at("tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model JSON schema error: ") + e.what());
  }
  return model;
}

}  // namespace abm
