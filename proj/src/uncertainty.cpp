#include "bayescal/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "bayescal/errors.hpp"

namespace bayescal {

PredictiveDistribution predict_distribution(const MatchedSample& sample,
                                            const CalibratorSpec& spec,
                                            const VariationalPosterior& q, int t,
                                            std::uint64_t seed) {
  if (t < 2) throw config_error("predict_distribution: t must be >= 2");
  const std::vector<WeightVector> draws = sample_weights(q, t, seed);
  const FeatureVector phi = build_features(sample, spec);
  PredictiveDistribution d;
  d.values.reserve(t);
  for (const WeightVector& theta : draws) d.values.push_back(forward(phi, theta));
  return d;
}

std::vector<PredictiveDistribution> predict_distributions(
    const SampleSet& set, const CalibratorSpec& spec,
    const std::vector<WeightVector>& draws) {
  if (draws.size() < 2) throw config_error("predict_distributions: need at least 2 draws");
  std::vector<PredictiveDistribution> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const FeatureVector phi = build_features(set.samples[i], spec);
    PredictiveDistribution d;
    d.source_index = i;
    d.values.reserve(draws.size());
    for (const WeightVector& theta : draws) d.values.push_back(forward(phi, theta));
    out.push_back(std::move(d));
  }
  return out;
}

double mean_estimate(const PredictiveDistribution& d) {
  if (d.values.empty()) throw data_error("mean_estimate: empty distribution");
  double sum = 0.0;
  for (double v : d.values) sum += v;
  return sum / static_cast<double>(d.values.size());
}

PredictionInterval hdi(const PredictiveDistribution& d, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw config_error("hdi: tau must be in (0, 1)");
  const std::size_t n = d.values.size();
  // The 1e-9 nudge compensates (1-tau)*n representation error so k stays the
  // mathematical ceiling.
  const std::size_t k =
      static_cast<std::size_t>(std::ceil((1.0 - tau) * static_cast<double>(n) - 1e-9));
  if (n < 2 || k < 2) {
    throw config_error("hdi: need (1-tau)*T >= 2 samples for an interval");
  }

  std::vector<double> sorted(d.values);
  std::sort(sorted.begin(), sorted.end());

  std::size_t best_i = 0;
  double best_width = sorted[k - 1] - sorted[0];
  for (std::size_t i = 1; i + k <= n; ++i) {
    const double width = sorted[i + k - 1] - sorted[i];
    if (width < best_width) {
      best_width = width;
      best_i = i;
    }
  }
  return {sorted[best_i], sorted[best_i + k - 1], tau};
}

}  // namespace bayescal
