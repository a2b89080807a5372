#pragma once

#include <optional>
#include <string>

#include "bayescal/metrics.hpp"

namespace bayescal {

// Report JSON: {"d_ece", "picp", "mpiw", "tau", "n_samples", "n_valid_bins",
// "scheme", "reliability": [...]}; optional metrics serialize as null and
// baseline_d_ece is attached when supplied.
std::string report_to_json(const EvaluationReport& report,
                           std::optional<double> baseline_d_ece = std::nullopt);

// Plot-ready rows: index,q_mean,ci_low,ci_high,ci_width,est_precision,abs_gap.
std::string shift_rows_to_csv(const ShiftReport& report);

// Per-detection calibration output: the input fields followed by the
// calibrated estimate and, when the model carries a posterior, its interval.
std::string detections_to_csv(const SampleSet& inputs,
                              const std::vector<double>& calibrated,
                              const std::vector<PredictionInterval>& intervals,
                              double tau);

std::string shift_summary_to_json(const ShiftSummary& in_summary,
                                  const ShiftSummary& shifted_summary,
                                  double median_width_ratio,
                                  std::optional<double> pooled_rank_correlation);

}  // namespace bayescal
