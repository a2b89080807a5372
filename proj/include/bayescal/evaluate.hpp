#pragma once

#include <cstdint>
#include <optional>

#include "bayescal/metrics.hpp"
#include "bayescal/model_io.hpp"
#include "bayescal/types.hpp"

namespace bayescal {

struct EvalOptions {
  double tau = 0.05;
  int t = 1000;              // predictive draws per detection
  std::uint64_t seed = 0;    // seed for the shared weight draws
  std::optional<BinningScheme> scheme;  // defaults to the subset's standard scheme
};

// Full evaluation of one fitted model on one test set. SVI models produce
// predictive distributions (mean + HDI) and PICP/MPIW; point models only the
// calibrated scores and D-ECE.
struct ModelEvaluation {
  EvaluationReport report;
  std::vector<double> calibrated;               // per-sample calibrated confidence
  std::vector<PredictionInterval> intervals;    // empty for point models
  SampleSet calibrated_set;                     // test set with scores replaced
};

ModelEvaluation evaluate_model(const SampleSet& test, const FittedModel& model,
                               const EvalOptions& opts);

// D-ECE of the raw (uncalibrated) scores under the same binning.
EvaluationReport baseline_report(const SampleSet& test, const BinningScheme& scheme);

// Covariate-shift run: one SVI model applied to its training distribution and
// to a shifted one, with shared weight draws across both sets.
struct ShiftRunResult {
  ShiftReport in_distribution;
  ShiftReport shifted;
  double median_width_in = 0.0;
  double median_width_shifted = 0.0;
  double median_width_ratio = 0.0;  // shifted / in-distribution
  std::optional<double> pooled_rank_correlation;
};

ShiftRunResult run_shift(const FittedModel& model, const SampleSet& in_set,
                         const SampleSet& shifted_set, const EvalOptions& opts);

}  // namespace bayescal
