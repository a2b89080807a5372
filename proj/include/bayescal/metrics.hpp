#pragma once

#include <optional>
#include <vector>

#include "bayescal/binning.hpp"
#include "bayescal/types.hpp"
#include "bayescal/uncertainty.hpp"

namespace bayescal {

struct BinStats {
  std::size_t flat_index = 0;
  std::vector<int> multi_index;
  int count = 0;
  double mean_confidence = 0.0;  // meaningful when count > 0
  double precision = 0.0;        // fraction matched, when count > 0
  bool valid = false;            // count >= scheme.min_samples_per_bin
};

struct EvaluationReport {
  double d_ece = 0.0;
  std::optional<double> picp;  // set only when prediction intervals exist
  std::optional<double> mpiw;
  double tau = 0.05;
  std::size_t n_samples = 0;
  std::size_t n_valid_bins = 0;
  BinningScheme scheme;
  std::vector<BinStats> reliability;
};

// One row of the covariate-shift report.
struct ShiftRow {
  std::size_t index = 0;
  double q_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ci_width = 0.0;
  std::optional<double> est_precision;  // empty when the sample's bin is invalid
  std::optional<double> abs_gap;
  bool in_p25 = false;  // width <= the 25th/50th/75th width percentile
  bool in_p50 = false;
  bool in_p75 = false;
};

struct ShiftSummary {
  double width_p25 = 0.0;
  double width_p50 = 0.0;
  double width_p75 = 0.0;
  std::optional<double> rank_correlation;  // width vs gap, included samples only
  std::size_t n_rows = 0;
  std::size_t n_included = 0;
};

struct ShiftReport {
  std::vector<ShiftRow> rows;
  ShiftSummary summary;
};

// Bins every sample by its subset-selected raw values. The set's score field
// is read as the (calibrated) confidence, so callers pass post-calibration
// scores when evaluating a calibrator.
std::vector<BinStats> assign_bins(const SampleSet& set, const BinningScheme& scheme);

// Count-weighted mean absolute gap between bin confidence and bin precision,
// over valid bins only; weights renormalize to the valid-bin population.
double d_ece(const std::vector<BinStats>& stats);

// Per-sample precision proxy: each sample inherits the precision of its own
// bin; samples in neglected bins come back empty.
std::vector<std::optional<double>> estimate_precision_per_sample(
    const SampleSet& set, const BinningScheme& scheme);

// Fraction of included samples whose estimated precision lies inside their
// prediction interval. Excluded samples leave both numerator and denominator.
double picp(const std::vector<PredictionInterval>& intervals,
            const std::vector<std::optional<double>>& precisions);

double mpiw(const std::vector<PredictionInterval>& intervals);

// All bins, populated or not, for reliability-style output.
std::vector<BinStats> reliability_table(const std::vector<BinStats>& stats);

// Per-detection interval width against the gap |q_mean - binned precision|,
// with nearest-rank width percentiles and the Spearman correlation.
ShiftReport shift_report(const std::vector<double>& q_means,
                         const std::vector<PredictionInterval>& intervals,
                         const SampleSet& set, const BinningScheme& scheme);

// Nearest-rank percentile (p in (0, 100]) of a non-empty vector.
double percentile_nearest_rank(std::vector<double> values, double p);

// Spearman rank correlation with average ranks for ties; empty when either
// side is constant.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace bayescal
