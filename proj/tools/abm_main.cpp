// Command line front end: fit, predict, compare, synth.
//
// Exit codes: 0 success, 1 usage or data error, 2 broken internal invariant.
// Artifacts are written atomically per run: if a command fails, any file it
// already wrote is removed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abm/baselines.hpp"
#include "abm/common.hpp"
#include "abm/csv.hpp"
#include "abm/dataset.hpp"
#include "abm/model.hpp"
#include "abm/path.hpp"
#include "abm/synth.hpp"

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string input;
  std::string target = "y";
  std::size_t nbins = 20;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t lambda2_count = 20;
  double lambda2_ratio = 1e-3;
  std::vector<double> lambda1_multipliers = {0.25, 0.5, 1.0, 2.0};
  double tol = 1e-6;
  std::string out = ".";
  bool refit_merged = false;
  std::string config_path;
  std::vector<std::string> baselines = {"equal-frequency", "equal-width", "raw-logistic"};
  std::string model_path;
};

struct FitOptions {
  CLI::Option* input = nullptr;
  CLI::Option* target = nullptr;
  CLI::Option* nbins = nullptr;
  CLI::Option* folds = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* lambda2_count = nullptr;
  CLI::Option* lambda2_ratio = nullptr;
  CLI::Option* lambda1_multipliers = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* refit_merged = nullptr;
  CLI::Option* baselines = nullptr;
};

FitOptions add_shared_options(CLI::App* cmd, RunConfig& cfg, bool with_baselines) {
  FitOptions opts;
  opts.input = cmd->add_option("--input", cfg.input, "input CSV path")->required();
  opts.target = cmd->add_option("--target", cfg.target, "target column name");
  opts.nbins = cmd->add_option("--nbins", cfg.nbins, "fine grid resolution");
  opts.folds = cmd->add_option("--folds", cfg.folds, "cross-validation folds");
  opts.seed = cmd->add_option("--seed", cfg.seed, "fold shuffle seed");
  opts.lambda2_count = cmd->add_option("--lambda2-count", cfg.lambda2_count,
                                       "points on the lambda2 grid");
  opts.lambda2_ratio = cmd->add_option("--lambda2-ratio", cfg.lambda2_ratio,
                                       "smallest lambda2 as a fraction of lambda2_max");
  opts.lambda1_multipliers = cmd->add_option("--lambda1-multipliers", cfg.lambda1_multipliers,
                                             "lambda1 = multiplier * lambda2")
                                 ->delimiter(',');
  opts.tol = cmd->add_option("--tol", cfg.tol, "drop/merge tolerance");
  opts.out = cmd->add_option("--out", cfg.out, "output directory");
  opts.refit_merged = cmd->add_flag("--refit-merged", cfg.refit_merged,
                                    "refit coefficients on the merged design");
  cmd->add_option("--config", cfg.config_path, "JSON config file (flags take precedence)");
  if (with_baselines)
    opts.baselines = cmd->add_option("--baselines", cfg.baselines,
                                     "baseline methods to compare against")
                         ->delimiter(',');
  return opts;
}

// Values from --config apply only where the matching flag was not given.
void apply_config_file(RunConfig& cfg, const FitOptions& opts) {
  if (cfg.config_path.empty()) return;
  std::ifstream in(cfg.config_path);
  if (!in) throw abm::DataError("cannot open config file: " + cfg.config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw abm::DataError(std::string("config JSON parse error: ") + e.what());
  }
  if (!obj.is_object()) throw abm::DataError("config file must hold a JSON object");

  auto unset = [](CLI::Option* opt) { return opt != nullptr && opt->count() == 0; };
  try {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string& key = it.key();
      if (key == "input") {
        if (unset(opts.input)) cfg.input = it.value().get<std::string>();
      } else if (key == "target") {
        if (unset(opts.target)) cfg.target = it.value().get<std::string>();
      } else if (key == "nbins") {
        if (unset(opts.nbins)) cfg.nbins = it.value().get<std::size_t>();
      } else if (key == "folds") {
        if (unset(opts.folds)) cfg.folds = it.value().get<std::size_t>();
      } else if (key == "seed") {
        if (unset(opts.seed)) cfg.seed = it.value().get<std::uint64_t>();
      } else if (key == "lambda2-count") {
        if (unset(opts.lambda2_count)) cfg.lambda2_count = it.value().get<std::size_t>();
      } else if (key == "lambda2-ratio") {
        if (unset(opts.lambda2_ratio)) cfg.lambda2_ratio = it.value().get<double>();
      } else if (key == "lambda1-multipliers") {
        if (unset(opts.lambda1_multipliers))
          cfg.lambda1_multipliers = it.value().get<std::vector<double>>();
      } else if (key == "tol") {
        if (unset(opts.tol)) cfg.tol = it.value().get<double>();
      } else if (key == "out") {
        if (unset(opts.out)) cfg.out = it.value().get<std::string>();
      } else if (key == "refit-merged") {
        if (unset(opts.refit_merged)) cfg.refit_merged = it.value().get<bool>();
      } else if (key == "baselines") {
        if (unset(opts.baselines)) cfg.baselines = it.value().get<std::vector<std::string>>();
      } else {
        throw abm::DataError("config file: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw abm::DataError(std::string("config value error: ") + e.what());
  }
}

abm::PathConfig path_config_from(const RunConfig& cfg) {
  abm::PathConfig pc;
  pc.lambda2_count = cfg.lambda2_count;
  pc.lambda2_ratio = cfg.lambda2_ratio;
  pc.lambda1_multipliers = cfg.lambda1_multipliers;
  pc.folds = cfg.folds;
  pc.seed = cfg.seed;
  pc.tol = cfg.tol;
  return pc;
}

// Tracks written artifacts so a failing command leaves nothing behind.
struct ArtifactSet {
  std::vector<fs::path> written;

  void write(const fs::path& path, const std::string& content) {
    abm::write_text_file(path.string(), content);
    written.push_back(path);
  }
  void discard() {
    for (const fs::path& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written.clear();
  }
};

abm::BinGrid merged_grid_from(const abm::BinningModel& model, std::size_t nbins) {
  abm::BinGrid grid;
  grid.nbins = nbins;
  for (const abm::MergedVariable& mv : model.variables) {
    abm::VariableGrid vg;
    vg.name = mv.name;
    vg.cuts = mv.cutpoints;
    grid.vars.push_back(std::move(vg));
  }
  return grid;
}

int cmd_fit(const RunConfig& cfg) {
  abm::Dataset data = abm::load_csv(cfg.input, cfg.target);
  abm::BinGrid grid = abm::fit_grid(data, cfg.nbins);
  abm::EncodedDesign design = abm::encode(data, grid);

  abm::PathConfig pc = path_config_from(cfg);
  abm::PathResult result = abm::trace(design, data.target, pc);
  const abm::PathPoint& sel = result.points[result.selected];

  abm::BinningModel model = abm::extract(result.final_fit, grid, cfg.tol);
  model.provenance.lambda1 = sel.lambda1;
  model.provenance.lambda2 = sel.lambda2;

  if (cfg.refit_merged && !model.variables.empty()) {
    abm::BinGrid merged = merged_grid_from(model, cfg.nbins);
    abm::EncodedDesign merged_design = abm::encode(data, merged);
    abm::Coefficients refit = abm::ridge_logistic_refit(merged_design, data.target);
    model.intercept = refit.intercept;
    for (std::size_t v = 0; v < model.variables.size(); ++v) {
      std::span<const double> g = refit.group(v);
      model.variables[v].coefficients.assign(g.begin(), g.end());
    }
  }

  abm::ScorecardTable card = abm::scorecard(model, data);

  fs::create_directories(cfg.out);
  ArtifactSet artifacts;
  try {
    artifacts.write(fs::path(cfg.out) / "model.json", abm::model_to_json(model));
    artifacts.write(fs::path(cfg.out) / "scorecard.csv", abm::scorecard_to_csv(card));
    artifacts.write(fs::path(cfg.out) / "path.csv", abm::path_to_csv(result));
    artifacts.write(fs::path(cfg.out) / "grid.json", abm::grid_to_json(grid));
  } catch (...) {
    artifacts.discard();
    throw;
  }

  abm::Scorer scorer = abm::make_scorer(model, data.names);
  std::vector<double> scores(data.n_rows());
  std::vector<double> row(data.n_vars());
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < data.n_vars(); ++j) row[j] = data.columns[j][i];
    scores[i] = scorer(row);
  }

  std::cout << "selected: lambda1=" << abm::format_double(sel.lambda1)
            << " lambda2=" << abm::format_double(sel.lambda2) << "\n";
  std::cout << "kept variables: " << model.variables.size() << "/" << data.n_vars() << " (";
  for (std::size_t v = 0; v < model.variables.size(); ++v)
    std::cout << (v ? ", " : "") << model.variables[v].name;
  std::cout << ")\n";
  std::cout << "cv auc: mean=" << abm::format_double(sel.mean_auc)
            << " sd=" << abm::format_double(sel.sd_auc) << "\n";
  std::cout << "train_auc=" << abm::format_double(abm::auc(scores, data.target)) << "\n";
  std::cout << "wrote: model.json scorecard.csv path.csv grid.json in " << cfg.out << "\n";
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  std::ifstream in(cfg.model_path);
  if (!in) throw abm::DataError("cannot open model file: " + cfg.model_path);
  std::stringstream buf;
  buf << in.rdbuf();
  abm::BinningModel model = abm::model_from_json(buf.str());

  abm::CsvTable table = abm::read_numeric_csv(cfg.input);
  abm::Scorer scorer = abm::make_scorer(model, table.header);

  std::string out = abm::csv_line({"score"});
  std::vector<double> row(table.header.size());
  for (std::size_t i = 0; i < table.rows; ++i) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) row[c] = table.columns[c][i];
    out += abm::csv_line({abm::format_double(scorer(row))});
  }
  abm::write_text_file(cfg.out, out);
  std::cout << "wrote " << table.rows << " scores to " << cfg.out << "\n";
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  abm::Dataset data = abm::load_csv(cfg.input, cfg.target);

  std::vector<abm::MethodSpec> methods;
  abm::AbmSpec abm_spec;
  abm_spec.nbins = cfg.nbins;
  abm_spec.path = path_config_from(cfg);
  methods.push_back(abm_spec);
  for (const std::string& name : cfg.baselines) {
    abm::BaselineSpec spec;
    spec.method = abm::baseline_from_name(name);
    spec.nbins = cfg.nbins;
    methods.push_back(spec);
  }

  abm::ComparisonTable table = abm::run_comparison(data, methods, cfg.folds, cfg.seed);

  fs::create_directories(cfg.out);
  ArtifactSet artifacts;
  std::string csv = abm::comparison_to_csv(table);
  try {
    artifacts.write(fs::path(cfg.out) / "comparison.csv", csv);
  } catch (...) {
    artifacts.discard();
    throw;
  }
  std::cout << csv;
  std::cout << "wrote: comparison.csv in " << cfg.out << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg, std::size_t rows, std::size_t vars,
              const std::string& spec_path) {
  abm::SynthSpec spec;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw abm::DataError("cannot open spec file: " + spec_path);
    std::stringstream buf;
    buf << in.rdbuf();
    spec = abm::spec_from_json(buf.str());
  } else {
    spec = abm::default_spec(rows, vars, cfg.seed);
  }
  abm::SynthData synth = abm::generate(spec);
  abm::write_text_file(cfg.out, abm::synth_to_csv(synth.data));

  double rate = 0.0;
  for (double y : synth.data.target) rate += y;
  rate /= static_cast<double>(synth.data.n_rows());
  std::cout << "wrote " << synth.data.n_rows() << " rows, " << synth.data.n_vars()
            << " variables (" << spec.informative.size()
            << " informative), event rate " << abm::format_double(rate) << " to " << cfg.out
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"supervised binning via fused group-penalized logistic regression"};
  app.require_subcommand(1);

  RunConfig fit_cfg, predict_cfg, compare_cfg, synth_cfg;
  std::size_t synth_rows = 5000, synth_vars = 5;
  std::string synth_spec_path;

  CLI::App* fit = app.add_subcommand("fit", "fit a binning model and write artifacts");
  FitOptions fit_opts = add_shared_options(fit, fit_cfg, false);

  CLI::App* predict = app.add_subcommand("predict", "score a CSV with a fitted model");
  predict->add_option("--model", predict_cfg.model_path, "model JSON path")->required();
  predict->add_option("--input", predict_cfg.input, "input CSV path")->required();
  predict->add_option("--out", predict_cfg.out, "output scores CSV path")->required();

  CLI::App* compare = app.add_subcommand("compare", "cross-validated method comparison");
  FitOptions compare_opts = add_shared_options(compare, compare_cfg, true);

  CLI::App* synth = app.add_subcommand("synth", "emit a synthetic binned-signal dataset");
  synth->add_option("--out", synth_cfg.out, "output CSV path")->required();
  synth->add_option("--n", synth_rows, "rows");
  synth->add_option("--p", synth_vars, "variables");
  synth->add_option("--seed", synth_cfg.seed, "generator seed");
  synth->add_option("--spec", synth_spec_path, "synthetic spec JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (fit->parsed()) {
      apply_config_file(fit_cfg, fit_opts);
      return cmd_fit(fit_cfg);
    }
    if (predict->parsed()) return cmd_predict(predict_cfg);
    if (compare->parsed()) {
      apply_config_file(compare_cfg, compare_opts);
      return cmd_compare(compare_cfg);
    }
    if (synth->parsed()) return cmd_synth(synth_cfg, synth_rows, synth_vars, synth_spec_path);
  } catch (const abm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const abm::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
