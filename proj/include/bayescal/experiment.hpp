#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bayescal/evaluate.hpp"
#include "bayescal/inference.hpp"
#include "bayescal/types.hpp"

namespace bayescal {

// Full protocol configuration: repeated random 70/30 splits with derived
// seeds, every requested (method, subset, estimator) fitted per repeat.
struct ExperimentConfig {
  std::string samples_path;
  std::vector<CalibrationMethod> methods = {CalibrationMethod::kHistogram,
                                            CalibrationMethod::kLogistic,
                                            CalibrationMethod::kBeta};
  std::vector<FeatureSubset> subsets = {FeatureSubset::kConfOnly, FeatureSubset::kConfPos,
                                        FeatureSubset::kConfShape, FeatureSubset::kFull};
  bool run_ml = true;
  bool run_svi = true;
  int repeats = 20;
  double train_fraction = 0.7;
  std::uint64_t base_seed = 1;
  double tau = 0.05;
  int samples_t = 1000;
  double epsilon = 1e-7;
  MlConfig ml;
  SviConfig svi;
  // Scheme overrides: bins per dimension keyed by subset name, and the
  // neglect threshold. Empty keeps the standard defaults.
  std::map<std::string, int> bins_per_dim_override;
  int min_samples_per_bin = 8;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
  BinningScheme scheme_for(FeatureSubset subset) const;
};

struct RepeatResult {
  int repeat = 0;
  CalibrationMethod method = CalibrationMethod::kLogistic;
  FeatureSubset subset = FeatureSubset::kConfOnly;
  std::optional<Estimator> estimator;  // empty for histogram binning
  double d_ece = 0.0;
  std::optional<double> picp;
  std::optional<double> mpiw;
};

struct BaselineResult {
  int repeat = 0;
  FeatureSubset subset = FeatureSubset::kConfOnly;
  double d_ece = 0.0;
};

struct AggregateRow {
  CalibrationMethod method;
  FeatureSubset subset;
  std::optional<Estimator> estimator;
  double d_ece_mean = 0.0;
  double d_ece_std = 0.0;
  std::optional<double> picp_mean;
  std::optional<double> picp_std;
  std::optional<double> mpiw_mean;
  std::optional<double> mpiw_std;
  int n_repeats = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<BaselineResult> baseline_rows;
  std::vector<RepeatResult> repeat_rows;
  std::vector<AggregateRow> aggregate;
  // mean D-ECE(svi) - mean D-ECE(ml), per (method, subset) with both present
  std::map<std::string, double> svi_minus_ml;
};

// Runs the protocol on an in-memory sample set. Deterministic for a fixed
// config; repeats execute concurrently but results are ordered by
// (repeat, method, subset, estimator).
ExperimentResult run_experiment(const SampleSet& samples, const ExperimentConfig& config);

// Serializes the result to out_dir: aggregate.json, per_repeat.csv,
// dece_table.csv, picp_mpiw_table.csv and resolved_config.toml. Writes are
// atomic (rename over temp files). Byte-identical for identical results.
void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir);

std::string aggregate_to_json(const ExperimentResult& result);
std::string resolved_config_toml(const ExperimentConfig& config);

}  // namespace bayescal
