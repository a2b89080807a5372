#include "bayescal/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bayescal/errors.hpp"

namespace bayescal {

namespace {

// Keeps forward() strictly inside (0, 1) even when the sigmoid saturates to
// 1.0 in double precision.
constexpr double kProbFloor = 1e-12;

double softplus(double x) {
  // log(1 + e^x) without overflow.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double linear_term(const FeatureVector& phi, const WeightVector& theta) {
  if (phi.values.size() != theta.weights.size()) {
    throw std::invalid_argument("forward: feature/weight length mismatch (" +
                                std::to_string(phi.values.size()) + " vs " +
                                std::to_string(theta.weights.size()) + ")");
  }
  double z = theta.bias;
  for (std::size_t i = 0; i < phi.values.size(); ++i) z += theta.weights[i] * phi.values[i];
  return z;
}

}  // namespace

std::string to_string(CalibrationMethod method) {
  switch (method) {
    case CalibrationMethod::kLogistic:
      return "logistic";
    case CalibrationMethod::kBeta:
      return "beta";
    case CalibrationMethod::kHistogram:
      return "histogram";
  }
  throw std::invalid_argument("unknown CalibrationMethod");
}

CalibrationMethod method_from_string(const std::string& name) {
  if (name == "logistic" || name == "lc") return CalibrationMethod::kLogistic;
  if (name == "beta" || name == "bc") return CalibrationMethod::kBeta;
  if (name == "histogram" || name == "hb") return CalibrationMethod::kHistogram;
  throw config_error("unknown calibration method \"" + name +
                     "\" (expected logistic/lc, beta/bc or histogram/hb)");
}

void CalibratorSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) {
    throw config_error("calibrator epsilon must be in (0, 1e-3]");
  }
}

std::size_t feature_dim(const CalibratorSpec& spec) {
  const std::size_t raw = subset_dim(spec.subset);
  switch (spec.method) {
    case CalibrationMethod::kLogistic:
      return raw;
    case CalibrationMethod::kBeta:
      return 2 * raw;
    case CalibrationMethod::kHistogram:
      throw std::invalid_argument("feature_dim: histogram binning has no feature vector");
  }
  throw std::invalid_argument("unknown CalibrationMethod");
}

double clip_unit(double x, double epsilon) {
  return std::clamp(x, epsilon, 1.0 - epsilon);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double stable_sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

FeatureVector build_features(const MatchedSample& sample, const CalibratorSpec& spec) {
  spec.validate();
  const std::vector<double> raw = subset_values(sample, spec.subset);
  FeatureVector phi;
  phi.method = spec.method;
  phi.subset = spec.subset;
  switch (spec.method) {
    case CalibrationMethod::kLogistic:
      phi.values.reserve(raw.size());
      for (double x : raw) phi.values.push_back(logit(clip_unit(x, spec.epsilon)));
      break;
    case CalibrationMethod::kBeta:
      phi.values.reserve(2 * raw.size());
      for (double x : raw) {
        const double c = clip_unit(x, spec.epsilon);
        phi.values.push_back(std::log(c));
        phi.values.push_back(-std::log1p(-c));
      }
      break;
    case CalibrationMethod::kHistogram:
      throw std::invalid_argument("build_features: histogram binning has no feature vector");
  }
  return phi;
}

double forward(const FeatureVector& phi, const WeightVector& theta) {
  const double q = stable_sigmoid(linear_term(phi, theta));
  return std::clamp(q, kProbFloor, 1.0 - kProbFloor);
}

double nll(const std::vector<FeatureVector>& features, const std::vector<int>& matched,
           const WeightVector& theta) {
  if (features.empty()) throw data_error("nll: empty sample list");
  if (features.size() != matched.size()) {
    throw std::invalid_argument("nll: features/labels length mismatch");
  }
  // Cross entropy in softplus form: m*softplus(-z) + (1-m)*(z + softplus(-z)).
  // Identical to -[m ln q + (1-m) ln(1-q)] with q = sigmoid(z), but finite
  // and accurate in the saturated tails.
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = linear_term(features[i], theta);
    total += softplus(-z) + (matched[i] ? 0.0 : z);
  }
  return total;
}

NllGradient nll_gradient(const std::vector<FeatureVector>& features,
                         const std::vector<int>& matched, const WeightVector& theta) {
  if (features.empty()) throw data_error("nll_gradient: empty sample list");
  if (features.size() != matched.size()) {
    throw std::invalid_argument("nll_gradient: features/labels length mismatch");
  }
  NllGradient grad;
  grad.weights.assign(theta.weights.size(), 0.0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double q = stable_sigmoid(linear_term(features[i], theta));
    const double r = q - static_cast<double>(matched[i]);
    const std::vector<double>& phi = features[i].values;
    for (std::size_t d = 0; d < phi.size(); ++d) grad.weights[d] += r * phi[d];
    grad.bias += r;
  }
  return grad;
}

double nll_with_gradient(const std::vector<FeatureVector>& features,
                         const std::vector<int>& matched, const WeightVector& theta,
                         NllGradient& grad) {
  if (features.empty()) throw data_error("nll_with_gradient: empty sample list");
  if (features.size() != matched.size()) {
    throw std::invalid_argument("nll_with_gradient: features/labels length mismatch");
  }
  grad.weights.assign(theta.weights.size(), 0.0);
  grad.bias = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = linear_term(features[i], theta);
    // One exp serves the sigmoid, the softplus and the gradient residual.
    const double e = std::exp(-std::abs(z));
    const double q = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    total += std::max(-z, 0.0) + std::log1p(e) + (matched[i] ? 0.0 : z);
    const double r = q - static_cast<double>(matched[i]);
    const std::vector<double>& phi = features[i].values;
    for (std::size_t d = 0; d < phi.size(); ++d) grad.weights[d] += r * phi[d];
    grad.bias += r;
  }
  return total;
}

std::vector<FeatureVector> build_feature_matrix(const SampleSet& set,
                                                const CalibratorSpec& spec) {
  std::vector<FeatureVector> features;
  features.reserve(set.size());
  for (const MatchedSample& s : set.samples) features.push_back(build_features(s, spec));
  return features;
}

std::vector<int> labels_of(const SampleSet& set) {
  std::vector<int> labels;
  labels.reserve(set.size());
  for (const MatchedSample& s : set.samples) labels.push_back(s.matched);
  return labels;
}

HistogramBinningModel fit_histogram_binning(const SampleSet& train,
                                            const CalibratorSpec& spec,
                                            const BinningScheme& scheme) {
  if (train.empty()) throw data_error("fit_histogram_binning: empty training set");
  scheme.validate();
  if (scheme.dims != subset_feature_names(spec.subset)) {
    throw config_error("fit_histogram_binning: scheme dimensions do not match subset " +
                       to_string(spec.subset));
  }

  const std::size_t total = scheme.total_bins();
  std::vector<int> counts(total, 0);
  std::vector<int> hits(total, 0);
  int global_hits = 0;
  for (const MatchedSample& s : train.samples) {
    const std::size_t b = scheme.flat_index(subset_values(s, spec.subset));
    counts[b] += 1;
    hits[b] += s.matched;
    global_hits += s.matched;
  }

  HistogramBinningModel model;
  model.scheme = scheme;
  model.counts = std::move(counts);
  model.fallback = static_cast<double>(global_hits) / static_cast<double>(train.size());
  model.values.resize(total);
  for (std::size_t b = 0; b < total; ++b) {
    model.values[b] = model.counts[b] > 0
                          ? static_cast<double>(hits[b]) / model.counts[b]
                          : model.fallback;
  }
  return model;
}

double predict_histogram_binning(const HistogramBinningModel& model,
                                 const MatchedSample& sample) {
  // The scheme's dimension labels identify the subset.
  for (FeatureSubset s : {FeatureSubset::kConfOnly, FeatureSubset::kConfPos,
                          FeatureSubset::kConfShape, FeatureSubset::kFull}) {
    if (model.scheme.dims == subset_feature_names(s)) {
      return model.values[model.scheme.flat_index(subset_values(sample, s))];
    }
  }
  throw config_error("predict_histogram_binning: scheme dimensions match no feature subset");
}

}  // namespace bayescal
