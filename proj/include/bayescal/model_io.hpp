#pragma once

#include <optional>
#include <string>

#include "bayescal/calibrator.hpp"
#include "bayescal/inference.hpp"

namespace bayescal {

enum class Estimator { kMl, kSvi };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

// One fitted calibration map ready for evaluation. Parametric models carry a
// point weight vector (the ML solution, or the posterior mean for SVI) and,
// for SVI, the full variational posterior. Histogram models carry the bin
// table instead.
struct FittedModel {
  CalibratorSpec spec;
  std::optional<Estimator> estimator;  // empty for histogram binning
  std::optional<WeightVector> weights;
  std::optional<VariationalPosterior> posterior;
  std::optional<PriorSpec> prior;
  std::uint64_t seed = 0;
  std::optional<HistogramBinningModel> histogram;
};

void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);

// Point-estimate calibrated score for one sample (histogram lookup, or
// forward() through the point weights).
double calibrate_score(const FittedModel& model, const MatchedSample& sample);

}  // namespace bayescal
