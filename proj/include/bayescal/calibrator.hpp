#pragma once

#include <string>
#include <vector>

#include "bayescal/binning.hpp"
#include "bayescal/types.hpp"

namespace bayescal {

enum class CalibrationMethod {
  kLogistic,   // Platt-style scaling on logit features
  kBeta,       // beta calibration, unconstrained coefficients
  kHistogram,  // multidimensional histogram binning
};

std::string to_string(CalibrationMethod method);
CalibrationMethod method_from_string(const std::string& name);

struct CalibratorSpec {
  CalibrationMethod method = CalibrationMethod::kLogistic;
  FeatureSubset subset = FeatureSubset::kConfOnly;
  double epsilon = 1e-7;  // clipping floor for logit/log transforms

  void validate() const;
};

// Feature length for a parametric spec: the subset dimension for logistic,
// twice that for beta (two log transforms per raw input).
std::size_t feature_dim(const CalibratorSpec& spec);

struct FeatureVector {
  std::vector<double> values;
  CalibrationMethod method = CalibrationMethod::kLogistic;
  FeatureSubset subset = FeatureSubset::kConfOnly;
};

// Point parameters of a parametric calibration map: one weight per feature
// plus a single shared bias.
struct WeightVector {
  std::vector<double> weights;
  double bias = 0.0;
};

// Transforms a sample's selected raw quantities into regression features.
// Logistic: logit(clip(x)) per selected value. Beta: the pair
// (ln clip(x), -ln clip(1-x)) per selected value, confidence first.
FeatureVector build_features(const MatchedSample& sample, const CalibratorSpec& spec);

// sigmoid(theta . phi + bias), clamped into the open interval (0, 1).
double forward(const FeatureVector& phi, const WeightVector& theta);

// Summed negative log likelihood of Bernoulli labels under the map.
double nll(const std::vector<FeatureVector>& features, const std::vector<int>& matched,
           const WeightVector& theta);

struct NllGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Analytic gradient of nll: sum_i (q_i - m_i) * phi_i, and sum_i (q_i - m_i)
// for the bias.
NllGradient nll_gradient(const std::vector<FeatureVector>& features,
                         const std::vector<int>& matched, const WeightVector& theta);

// Fused single-pass value + gradient; the fitting loops' hot path.
double nll_with_gradient(const std::vector<FeatureVector>& features,
                         const std::vector<int>& matched, const WeightVector& theta,
                         NllGradient& grad);

// Convenience: features for a whole sample set.
std::vector<FeatureVector> build_feature_matrix(const SampleSet& set,
                                                const CalibratorSpec& spec);
std::vector<int> labels_of(const SampleSet& set);

// ---- histogram binning ----

struct HistogramBinningModel {
  BinningScheme scheme;
  std::vector<double> values;  // per-bin calibrated value, fallback baked into empty bins
  std::vector<int> counts;     // training membership per bin
  double fallback = 0.0;       // global training precision
};

// Per-bin calibrated value = empirical precision of the bin's training
// members; empty bins fall back to the global training precision.
HistogramBinningModel fit_histogram_binning(const SampleSet& train,
                                            const CalibratorSpec& spec,
                                            const BinningScheme& scheme);

double predict_histogram_binning(const HistogramBinningModel& model,
                                 const MatchedSample& sample);

// Numerically stable helpers shared across the library.
double stable_sigmoid(double z);
double logit(double p);
double clip_unit(double x, double epsilon);

}  // namespace bayescal
