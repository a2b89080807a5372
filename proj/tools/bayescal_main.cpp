// bayescal: position- and shape-dependent confidence calibration for object
// detection, with maximum-likelihood and stochastic-variational estimation,
// per-detection prediction intervals and D-ECE/PICP/MPIW evaluation.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "bayescal/config.hpp"
#include "bayescal/errors.hpp"
#include "bayescal/evaluate.hpp"
#include "bayescal/experiment.hpp"
#include "bayescal/matching.hpp"
#include "bayescal/report_io.hpp"
#include "bayescal/samples_io.hpp"
#include "bayescal/split.hpp"
#include "bayescal/synthetic.hpp"

namespace {

using namespace bayescal;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void write_text(const std::string& path, const std::string& content) {
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write \"" + path + "\"");
  out << content;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(std::stod(item));
    } catch (...) {
      throw config_error("cannot parse number \"" + item + "\"");
    }
  }
  return values;
}

// --region cx=0:0.5,w=0.1:0.3 — unnamed dimensions keep their defaults.
void apply_regions(const std::string& text, SyntheticSpec& spec) {
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    const auto colon = part.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos) {
      throw config_error("region must look like cx=lo:hi, got \"" + part + "\"");
    }
    const std::string name = part.substr(0, eq);
    double lo, hi;
    try {
      lo = std::stod(part.substr(eq + 1, colon - eq - 1));
      hi = std::stod(part.substr(colon + 1));
    } catch (...) {
      throw config_error("cannot parse region bounds in \"" + part + "\"");
    }
    if (name == "cx") {
      spec.region_cx = {lo, hi};
    } else if (name == "cy") {
      spec.region_cy = {lo, hi};
    } else if (name == "w") {
      spec.region_w = {lo, hi};
    } else if (name == "h") {
      spec.region_h = {lo, hi};
    } else {
      throw config_error("unknown region dimension \"" + name + "\"");
    }
  }
}

struct GlobalFlags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> tau;
  std::optional<int> samples_t;
};

int run(int argc, char** argv) {
  CLI::App app{"Bayesian confidence calibration for object detection"};
  app.require_subcommand(1);
  // Global flags may appear before or after the subcommand.
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--config", global.config_path, "TOML-style config file");
  app.add_option("--seed", global.seed, "base random seed");
  app.add_option("--out-dir", global.out_dir, "output directory");
  app.add_option("--tau", global.tau, "prediction interval miss mass");
  app.add_option("--samples-t", global.samples_t, "predictive draws per detection");

  // ---- match ----
  auto* match_cmd = app.add_subcommand("match", "match detections to ground truth by IoU");
  std::string match_dets, match_gts, match_out;
  double match_iou = 0.5;
  match_cmd->add_option("--dets", match_dets, "detections JSONL")->required();
  match_cmd->add_option("--gts", match_gts, "ground-truth JSONL")->required();
  match_cmd->add_option("--iou", match_iou, "IoU threshold in (0, 1]");
  match_cmd->add_option("--out", match_out, "output samples JSONL")->required();

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic labeled samples");
  SyntheticSpec synth_spec;
  std::string synth_weights, synth_region, synth_subset = "conf_only", synth_out;
  std::uint64_t synth_n = 1000;
  synth_cmd->add_option("--n", synth_n, "number of samples")->required();
  synth_cmd->add_option("--true-weights", synth_weights, "true map weights, CSV");
  synth_cmd->add_option("--true-bias", synth_spec.true_bias, "true map bias");
  synth_cmd->add_option("--true-subset", synth_subset, "feature subset of the true map");
  synth_cmd->add_option("--score-alpha", synth_spec.score_alpha, "Beta alpha of the score law");
  synth_cmd->add_option("--score-beta", synth_spec.score_beta, "Beta beta of the score law");
  synth_cmd->add_option("--region", synth_region, "sampling regions, e.g. cx=0:0.5,w=0.1:0.3");
  synth_cmd->add_option("--out", synth_out, "output samples JSONL")->required();

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "fit calibration models");
  std::string fit_samples, fit_methods = "lc", fit_subsets = "conf_only",
              fit_estimator = "ml";
  fit_cmd->add_option("--samples", fit_samples, "training samples JSONL")->required();
  fit_cmd->add_option("--methods", fit_methods, "comma list of hb,lc,bc");
  fit_cmd->add_option("--subsets", fit_subsets,
                      "comma list of conf_only,conf_pos,conf_shape,full");
  fit_cmd->add_option("--estimator", fit_estimator, "ml, svi or both");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a fitted model on labeled samples");
  std::string eval_samples, eval_model, eval_out, eval_detections;
  eval_cmd->add_option("--samples", eval_samples, "test samples JSONL")->required();
  eval_cmd->add_option("--model", eval_model, "model JSON")->required();
  eval_cmd->add_option("--out", eval_out, "report JSON path")->required();
  eval_cmd->add_option("--per-detection", eval_detections,
                       "optional CSV of per-detection calibrated estimates");

  // ---- experiment ----
  auto* exp_cmd = app.add_subcommand("experiment", "repeated split/fit/eval protocol");
  std::string exp_samples, exp_methods, exp_subsets, exp_estimator;
  int exp_repeats = -1;
  double exp_train_fraction = -1.0;
  exp_cmd->add_option("--samples", exp_samples, "labeled samples JSONL");
  exp_cmd->add_option("--methods", exp_methods, "comma list of hb,lc,bc");
  exp_cmd->add_option("--subsets", exp_subsets, "comma list of subsets");
  exp_cmd->add_option("--estimator", exp_estimator, "ml, svi or both");
  exp_cmd->add_option("--repeats", exp_repeats, "number of random splits");
  exp_cmd->add_option("--train-fraction", exp_train_fraction, "training fraction");

  // ---- shift ----
  auto* shift_cmd = app.add_subcommand("shift", "covariate-shift report for an SVI model");
  std::string shift_model, shift_in, shift_out_set;
  shift_cmd->add_option("--model", shift_model, "SVI model JSON")->required();
  shift_cmd->add_option("--in-samples", shift_in, "in-distribution samples JSONL")->required();
  shift_cmd->add_option("--shifted-samples", shift_out_set, "shifted samples JSONL")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string out_dir = global.out_dir.value_or("out");

  if (*match_cmd) {
    const auto dets = load_detections(match_dets);
    const auto gts = load_ground_truths(match_gts);
    const SampleSet set = match_detections(dets, gts, match_iou);
    save_samples(set, match_out);
    std::cout << "matched " << set.size() << " detections (" << match_iou
              << " IoU) -> " << match_out << "\n";
    return kExitOk;
  }

  if (*synth_cmd) {
    synth_spec.n = synth_n;
    synth_spec.seed = global.seed.value_or(0);
    synth_spec.true_subset = subset_from_string(synth_subset);
    if (!synth_weights.empty()) synth_spec.true_weights = parse_csv_doubles(synth_weights);
    if (synth_spec.true_weights.size() != subset_dim(synth_spec.true_subset)) {
      throw config_error("--true-weights needs " +
                         std::to_string(subset_dim(synth_spec.true_subset)) +
                         " values for subset " + synth_subset);
    }
    if (!synth_region.empty()) apply_regions(synth_region, synth_spec);
    const SampleSet set = generate(synth_spec);
    save_samples(set, synth_out);
    std::cout << "generated " << set.size() << " samples -> " << synth_out << "\n";
    return kExitOk;
  }

  if (*fit_cmd) {
    const SampleSet train = load_samples(fit_samples);
    const std::uint64_t seed = global.seed.value_or(0);
    std::vector<std::string> method_names;
    {
      std::stringstream in(fit_methods);
      std::string item;
      while (std::getline(in, item, ',')) method_names.push_back(item);
    }
    std::vector<std::string> subset_names;
    {
      std::stringstream in(fit_subsets);
      std::string item;
      while (std::getline(in, item, ',')) subset_names.push_back(item);
    }
    const bool want_ml = fit_estimator == "ml" || fit_estimator == "both";
    const bool want_svi = fit_estimator == "svi" || fit_estimator == "both";
    if (!want_ml && !want_svi) throw config_error("--estimator must be ml, svi or both");

    std::filesystem::create_directories(out_dir);
    int written = 0;
    for (const std::string& mname : method_names) {
      const CalibrationMethod method = method_from_string(mname);
      for (const std::string& sname : subset_names) {
        const FeatureSubset subset = subset_from_string(sname);
        CalibratorSpec spec{method, subset, 1e-7};
        const std::string stem = to_string(method) + "_" + to_string(subset);

        if (method == CalibrationMethod::kHistogram) {
          FittedModel model;
          model.spec = spec;
          model.histogram = fit_histogram_binning(train, spec, default_scheme(subset));
          save_model(model, out_dir + "/model_" + stem + ".json");
          ++written;
          continue;
        }
        if (want_ml) {
          MlConfig ml;
          ml.seed = seed;
          FittedModel model;
          model.spec = spec;
          model.estimator = Estimator::kMl;
          model.weights = fit_ml(train, spec, ml);
          save_model(model, out_dir + "/model_" + stem + "_ml.json");
          ++written;
        }
        if (want_svi) {
          SviConfig svi;
          svi.seed = seed;
          const VariationalPosterior q = fit_svi(train, spec, svi);
          FittedModel model;
          model.spec = spec;
          model.estimator = Estimator::kSvi;
          model.weights = q.mean_weights();
          model.posterior = q;
          model.prior = svi.prior;
          model.seed = seed;
          save_model(model, out_dir + "/model_" + stem + "_svi.json");
          ++written;
        }
      }
    }
    std::cout << "wrote " << written << " model file(s) to " << out_dir << "\n";
    return kExitOk;
  }

  if (*eval_cmd) {
    const SampleSet test = load_samples(eval_samples);
    const FittedModel model = load_model(eval_model);
    EvalOptions opts;
    opts.tau = global.tau.value_or(0.05);
    opts.t = global.samples_t.value_or(1000);
    opts.seed = global.seed.value_or(model.seed);
    const ModelEvaluation eval = evaluate_model(test, model, opts);
    const double baseline = baseline_report(test, eval.report.scheme).d_ece;
    write_text(eval_out, report_to_json(eval.report, baseline) + "\n");
    if (!eval_detections.empty()) {
      write_text(eval_detections,
                 detections_to_csv(test, eval.calibrated, eval.intervals, opts.tau));
    }
    std::cout << "d_ece=" << eval.report.d_ece << " baseline=" << baseline;
    if (eval.report.picp) std::cout << " picp=" << *eval.report.picp;
    if (eval.report.mpiw) std::cout << " mpiw=" << *eval.report.mpiw;
    std::cout << " -> " << eval_out << "\n";
    return kExitOk;
  }

  if (*exp_cmd) {
    ExperimentConfig config;
    if (global.config_path) apply_config(load_config(*global.config_path), config);
    if (!exp_samples.empty()) config.samples_path = exp_samples;
    if (!exp_methods.empty()) {
      config.methods.clear();
      std::stringstream in(exp_methods);
      std::string item;
      while (std::getline(in, item, ',')) config.methods.push_back(method_from_string(item));
    }
    if (!exp_subsets.empty()) {
      config.subsets.clear();
      std::stringstream in(exp_subsets);
      std::string item;
      while (std::getline(in, item, ',')) config.subsets.push_back(subset_from_string(item));
    }
    if (!exp_estimator.empty()) {
      config.run_ml = exp_estimator == "ml" || exp_estimator == "both";
      config.run_svi = exp_estimator == "svi" || exp_estimator == "both";
      if (!config.run_ml && !config.run_svi) {
        throw config_error("--estimator must be ml, svi or both");
      }
    }
    if (exp_repeats > 0) config.repeats = exp_repeats;
    if (exp_train_fraction > 0.0) config.train_fraction = exp_train_fraction;
    if (global.seed) config.base_seed = *global.seed;
    if (global.tau) config.tau = *global.tau;
    if (global.samples_t) config.samples_t = *global.samples_t;
    if (config.samples_path.empty()) {
      throw config_error("experiment needs --samples or a config with samples=");
    }

    const SampleSet samples = load_samples(config.samples_path);
    const ExperimentResult result = run_experiment(samples, config);
    write_experiment_outputs(result, out_dir);
    std::cout << "experiment complete: " << result.repeat_rows.size() << " rows -> "
              << out_dir << "\n";
    return kExitOk;
  }

  if (*shift_cmd) {
    const FittedModel model = load_model(shift_model);
    const SampleSet in_set = load_samples(shift_in);
    const SampleSet shifted_set = load_samples(shift_out_set);
    EvalOptions opts;
    opts.tau = global.tau.value_or(0.05);
    opts.t = global.samples_t.value_or(1000);
    opts.seed = global.seed.value_or(model.seed);
    const ShiftRunResult result = run_shift(model, in_set, shifted_set, opts);
    std::filesystem::create_directories(out_dir);
    write_text(out_dir + "/shift_in.csv", shift_rows_to_csv(result.in_distribution));
    write_text(out_dir + "/shift_shifted.csv", shift_rows_to_csv(result.shifted));
    write_text(out_dir + "/shift_summary.json",
               shift_summary_to_json(result.in_distribution.summary,
                                     result.shifted.summary, result.median_width_ratio,
                                     result.pooled_rank_correlation) +
                   "\n");
    std::cout << "median width in=" << result.median_width_in
              << " shifted=" << result.median_width_shifted
              << " ratio=" << result.median_width_ratio << " -> " << out_dir << "\n";
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
