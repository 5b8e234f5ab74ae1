#include "abm/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "abm/common.hpp"
#include "abm/csv.hpp"
#include "abm/rng.hpp"

namespace abm {

void SynthSpec::validate() const {
  if (rows == 0) throw DataError("synth: rows must be positive");
  if (vars == 0) throw DataError("synth: vars must be positive");
  if (!std::isfinite(intercept)) throw DataError("synth: intercept must be finite");
  std::vector<bool> seen(vars, false);
  for (const SegmentSpec& seg : informative) {
    if (seg.variable >= vars) throw DataError("synth: informative variable index out of range");
    if (seen[seg.variable]) throw DataError("synth: duplicate informative variable");
    seen[seg.variable] = true;
    if (seg.logits.size() != seg.cuts.size() + 1)
      throw DataError("synth: need one more segment logit than cuts");
    for (std::size_t i = 0; i < seg.cuts.size(); ++i) {
      if (!(seg.cuts[i] > 0.0 && seg.cuts[i] < 1.0))
        throw DataError("synth: cuts must lie inside (0, 1)");
      if (i > 0 && !(seg.cuts[i - 1] < seg.cuts[i]))
        throw DataError("synth: cuts must be strictly increasing");
    }
    for (double l : seg.logits)
      if (!std::isfinite(l)) throw DataError("synth: segment logits must be finite");
  }
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  SynthData out;
  out.truth = spec;
  Dataset& data = out.data;
  data.columns.resize(spec.vars);
  for (std::size_t j = 0; j < spec.vars; ++j) {
    data.names.push_back("x" + std::to_string(j + 1));
    data.columns[j].resize(spec.rows);
    for (std::size_t i = 0; i < spec.rows; ++i) data.columns[j][i] = rng.next_double();
  }

  std::vector<double> logit(spec.rows, spec.intercept);
  for (const SegmentSpec& seg : spec.informative) {
    const std::vector<double>& col = data.columns[seg.variable];
    for (std::size_t i = 0; i < spec.rows; ++i) {
      std::size_t k = std::upper_bound(seg.cuts.begin(), seg.cuts.end(), col[i]) -
                      seg.cuts.begin();
      logit[i] += seg.logits[k];
    }
  }

  data.target.resize(spec.rows);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    double p = 1.0 / (1.0 + std::exp(-logit[i]));
    data.target[i] = rng.next_double() < p ? 1.0 : 0.0;
  }
  return out;
}

SynthSpec default_spec(std::size_t rows, std::size_t vars, std::uint64_t seed) {
  SynthSpec spec;
  spec.rows = rows;
  spec.vars = vars;
  spec.seed = seed;

  // Structure stream separated from the data stream so the same shapes can be
  // regenerated at any sample size.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t informative = std::min<std::size_t>(2, vars);
  for (std::size_t v = 0; v < informative; ++v) {
    SegmentSpec seg;
    seg.variable = v;
    double c1 = rng.uniform(0.25, 0.45);
    double c2 = c1 + rng.uniform(0.15, 0.35);
    seg.cuts = {c1, c2};
    double l1 = rng.uniform(-1.0, -0.6);
    double l2 = l1 + rng.uniform(0.9, std::min(1.6, 1.0 - l1));
    double l3 = l2 - rng.uniform(0.9, std::min(1.6, l2 + 1.0));
    seg.logits = {l1, l2, l3};
    spec.informative.push_back(std::move(seg));
  }
  return spec;
}

std::string spec_to_json(const SynthSpec& spec) {
  nlohmann::json obj;
  obj["rows"] = spec.rows;
  obj["vars"] = spec.vars;
  obj["intercept"] = spec.intercept;
  obj["seed"] = spec.seed;
  obj["informative"] = nlohmann::json::array();
  for (const SegmentSpec& seg : spec.informative) {
    nlohmann::json s;
    s["variable"] = seg.variable;
    s["cuts"] = seg.cuts;
    s["logits"] = seg.logits;
    obj["informative"].push_back(s);
  }
  return obj.dump(2) + "\n";
}

SynthSpec spec_from_json(const std::string& text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synth spec JSON parse error: ") + e.what());
  }
  SynthSpec spec;
  try {
    spec.rows = obj.at("rows").get<std::size_t>();
    spec.vars = obj.at("vars").get<std::size_t>();
    spec.intercept = obj.value("intercept", 0.0);
    spec.seed = obj.at("seed").get<std::uint64_t>();
    if (obj.contains("informative")) {
      for (const auto& s : obj.at("informative")) {
        SegmentSpec seg;
        seg.variable = s.at("variable").get<std::size_t>();
        seg.cuts = s.at("cuts").get<std::vector<double>>();
        seg.logits = s.at("logits").get<std::vector<double>>();
        spec.informative.push_back(std::move(seg));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synth spec JSON schema error: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string synth_to_csv(const Dataset& data) {
  std::vector<std::string> header = data.names;
  header.push_back("y");
  std::string out = csv_line(header);
  std::vector<std::string> cells(header.size());
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < data.n_vars(); ++j) cells[j] = format_double(data.columns[j][i]);
    cells.back() = data.target[i] == 1.0 ? "1" : "0";
    out += csv_line(cells);
  }
  return out;
}

}  // namespace abm
