#pragma once

#include <cstdint>
#include <vector>

#include "bayescal/calibrator.hpp"
#include "bayescal/inference.hpp"
#include "bayescal/types.hpp"

namespace bayescal {

// T calibrated confidence samples for one detection, obtained by pushing the
// detection through T weight sets drawn from the posterior.
struct PredictiveDistribution {
  std::vector<double> values;
  std::size_t source_index = 0;
};

// Closed interval over order statistics; tau is the miss mass, so the
// interval is meant to hold a 1 - tau fraction of the samples.
struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double tau = 0.05;
};

// Predictive samples for one detection. Drawing with the same posterior and
// seed reproduces the same weight sets, so every detection of an evaluation
// run sees identical draws.
PredictiveDistribution predict_distribution(const MatchedSample& sample,
                                            const CalibratorSpec& spec,
                                            const VariationalPosterior& q, int t,
                                            std::uint64_t seed);

// Batch variant: the weight sets are drawn once and applied to all samples.
std::vector<PredictiveDistribution> predict_distributions(
    const SampleSet& set, const CalibratorSpec& spec,
    const std::vector<WeightVector>& draws);

// Arithmetic mean of the samples; the calibrated point estimate.
double mean_estimate(const PredictiveDistribution& d);

// Highest density interval: the narrowest window of ceil((1-tau)*T) sorted
// sample values. Ties resolve to the lowest window.
PredictionInterval hdi(const PredictiveDistribution& d, double tau);

inline double interval_width(const PredictionInterval& c) { return c.upper - c.lower; }

}  // namespace bayescal
