#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bayescal/binning.hpp"
#include "bayescal/calibrator.hpp"
#include "bayescal/types.hpp"

namespace bayescal {

// Generator for detector-like samples with a known recalibration map.
// Scores come from a Beta distribution (real detector score histograms pile
// up near the top, Beta(5,2) mimics that), box features are uniform over
// configurable sub-intervals, and the correctness label is Bernoulli with
// probability pi_true(sample).
struct SyntheticSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  double score_alpha = 5.0;
  double score_beta = 2.0;

  // True map on the logistic feature space of `true_subset`:
  //   pi_true = sigmoid(w . logit_features + bias).
  FeatureSubset true_subset = FeatureSubset::kConfOnly;
  std::vector<double> true_weights = {1.0};
  double true_bias = 0.0;

  // Optional misspecified mode: when non-empty, pi_true is the piecewise
  // linear interpolation of these (score, precision) knots instead of the
  // logistic map. Knots must be sorted by score.
  std::vector<std::pair<double, double>> piecewise_map;

  // Per-dimension sampling regions inside [0, 1].
  std::pair<double, double> region_cx = {0.0, 1.0};
  std::pair<double, double> region_cy = {0.0, 1.0};
  std::pair<double, double> region_w = {0.01, 0.99};
  std::pair<double, double> region_h = {0.01, 0.99};

  double epsilon = 1e-7;  // clipping used by the true logistic map

  void validate() const;
};

// True precision of a sample under the generator's map.
double true_precision(const SyntheticSpec& spec, const MatchedSample& sample);

// Seed-deterministic sample set drawn from the spec.
SampleSet generate(const SyntheticSpec& spec);

// Exact D-ECE of raw scores against pi_true, integrated numerically over the
// score distribution per bin. Only defined for confidence-only true maps and
// 1-D confidence binning; the oracle for d_ece on generated data.
double true_gap(const SyntheticSpec& spec, const BinningScheme& scheme);

}  // namespace bayescal
