#include "bayescal/evaluate.hpp"

#include <algorithm>

#include "bayescal/errors.hpp"
#include "bayescal/uncertainty.hpp"

namespace bayescal {

namespace {

SampleSet with_scores(const SampleSet& base, const std::vector<double>& scores) {
  SampleSet out = base;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i].score = scores[i];
  return out;
}

}  // namespace

ModelEvaluation evaluate_model(const SampleSet& test, const FittedModel& model,
                               const EvalOptions& opts) {
  if (test.empty()) throw data_error("evaluate_model: empty test set");
  const BinningScheme scheme =
      opts.scheme ? *opts.scheme : default_scheme(model.spec.subset);

  ModelEvaluation eval;
  eval.calibrated.reserve(test.size());

  const bool bayesian = model.posterior.has_value();
  if (bayesian) {
    // Weight draws are shared across all detections of the run. Distributions
    // are consumed sample by sample so large test sets stay cheap in memory.
    const std::vector<WeightVector> draws =
        sample_weights(*model.posterior, opts.t, opts.seed);
    eval.intervals.reserve(test.size());
    PredictiveDistribution d;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const FeatureVector phi = build_features(test.samples[i], model.spec);
      d.source_index = i;
      d.values.clear();
      d.values.reserve(draws.size());
      for (const WeightVector& theta : draws) d.values.push_back(forward(phi, theta));
      eval.calibrated.push_back(mean_estimate(d));
      eval.intervals.push_back(hdi(d, opts.tau));
    }
  } else {
    for (const MatchedSample& s : test.samples) {
      eval.calibrated.push_back(calibrate_score(model, s));
    }
  }

  eval.calibrated_set = with_scores(test, eval.calibrated);
  const std::vector<BinStats> stats = assign_bins(eval.calibrated_set, scheme);

  EvaluationReport& report = eval.report;
  report.tau = opts.tau;
  report.n_samples = test.size();
  report.scheme = scheme;
  report.reliability = reliability_table(stats);
  report.n_valid_bins = static_cast<std::size_t>(
      std::count_if(stats.begin(), stats.end(), [](const BinStats& b) { return b.valid; }));
  report.d_ece = d_ece(stats);

  if (bayesian) {
    const auto precisions = estimate_precision_per_sample(eval.calibrated_set, scheme);
    report.picp = picp(eval.intervals, precisions);
    report.mpiw = mpiw(eval.intervals);
  }
  return eval;
}

EvaluationReport baseline_report(const SampleSet& test, const BinningScheme& scheme) {
  if (test.empty()) throw data_error("baseline_report: empty test set");
  const std::vector<BinStats> stats = assign_bins(test, scheme);
  EvaluationReport report;
  report.n_samples = test.size();
  report.scheme = scheme;
  report.reliability = reliability_table(stats);
  report.n_valid_bins = static_cast<std::size_t>(
      std::count_if(stats.begin(), stats.end(), [](const BinStats& b) { return b.valid; }));
  report.d_ece = d_ece(stats);
  return report;
}

ShiftRunResult run_shift(const FittedModel& model, const SampleSet& in_set,
                         const SampleSet& shifted_set, const EvalOptions& opts) {
  if (!model.posterior) {
    throw config_error("run_shift: model has no posterior (fit with the svi estimator)");
  }
  const BinningScheme scheme =
      opts.scheme ? *opts.scheme : default_scheme(model.spec.subset);

  // One set of weight draws serves both sets, so widths are comparable.
  const std::vector<WeightVector> draws =
      sample_weights(*model.posterior, opts.t, opts.seed);

  auto evaluate_set = [&](const SampleSet& set) {
    std::vector<double> q_means;
    std::vector<PredictionInterval> intervals;
    q_means.reserve(set.size());
    intervals.reserve(set.size());
    PredictiveDistribution d;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const FeatureVector phi = build_features(set.samples[i], model.spec);
      d.source_index = i;
      d.values.clear();
      d.values.reserve(draws.size());
      for (const WeightVector& theta : draws) d.values.push_back(forward(phi, theta));
      q_means.push_back(mean_estimate(d));
      intervals.push_back(hdi(d, opts.tau));
    }
    const SampleSet calibrated = with_scores(set, q_means);
    return shift_report(q_means, intervals, calibrated, scheme);
  };

  ShiftRunResult result;
  result.in_distribution = evaluate_set(in_set);
  result.shifted = evaluate_set(shifted_set);
  result.median_width_in = result.in_distribution.summary.width_p50;
  result.median_width_shifted = result.shifted.summary.width_p50;
  result.median_width_ratio = result.median_width_shifted / result.median_width_in;

  std::vector<double> widths, gaps;
  for (const ShiftReport* rep : {&result.in_distribution, &result.shifted}) {
    for (const ShiftRow& row : rep->rows) {
      if (row.abs_gap) {
        widths.push_back(row.ci_width);
        gaps.push_back(*row.abs_gap);
      }
    }
  }
  result.pooled_rank_correlation = spearman(widths, gaps);
  return result;
}

}  // namespace bayescal
