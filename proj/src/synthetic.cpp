#include "bayescal/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "bayescal/errors.hpp"
#include "bayescal/rng.hpp"

namespace bayescal {

void SyntheticSpec::validate() const {
  if (n < 1) throw config_error("synthetic: n must be >= 1");
  if (!(score_alpha > 0.0 && score_beta > 0.0)) {
    throw config_error("synthetic: Beta shape parameters must be positive");
  }
  auto check_region = [](std::pair<double, double> r, const char* name) {
    if (!(r.first >= 0.0 && r.second <= 1.0 && r.first < r.second)) {
      throw config_error(std::string("synthetic: region for ") + name +
                         " must be a non-empty sub-interval of [0, 1]");
    }
  };
  check_region(region_cx, "cx");
  check_region(region_cy, "cy");
  check_region(region_w, "w");
  check_region(region_h, "h");
  if (!(region_w.first > 0.0) || !(region_h.first > 0.0)) {
    throw config_error("synthetic: w/h regions must exclude zero");
  }
  if (piecewise_map.empty()) {
    if (true_weights.size() != subset_dim(true_subset)) {
      throw config_error("synthetic: true_weights length must match the true subset dimension");
    }
  } else {
    for (std::size_t i = 0; i + 1 < piecewise_map.size(); ++i) {
      if (!(piecewise_map[i].first < piecewise_map[i + 1].first)) {
        throw config_error("synthetic: piecewise map knots must be strictly increasing in score");
      }
    }
  }
}

namespace {

double piecewise_value(const std::vector<std::pair<double, double>>& knots, double x) {
  if (x <= knots.front().first) return knots.front().second;
  if (x >= knots.back().first) return knots.back().second;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (x <= knots[i + 1].first) {
      const double t = (x - knots[i].first) / (knots[i + 1].first - knots[i].first);
      return knots[i].second + t * (knots[i + 1].second - knots[i].second);
    }
  }
  return knots.back().second;
}

}  // namespace

double true_precision(const SyntheticSpec& spec, const MatchedSample& sample) {
  if (!spec.piecewise_map.empty()) {
    return std::clamp(piecewise_value(spec.piecewise_map, sample.score), 0.0, 1.0);
  }
  CalibratorSpec map_spec;
  map_spec.method = CalibrationMethod::kLogistic;
  map_spec.subset = spec.true_subset;
  map_spec.epsilon = spec.epsilon;
  WeightVector theta;
  theta.weights = spec.true_weights;
  theta.bias = spec.true_bias;
  return forward(build_features(sample, map_spec), theta);
}

SampleSet generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SampleSet set;
  set.provenance = "synthetic";
  set.samples.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    MatchedSample s;
    s.image_id = "synthetic";
    s.score = rng.beta(spec.score_alpha, spec.score_beta);
    s.cx = rng.uniform(spec.region_cx.first, spec.region_cx.second);
    s.cy = rng.uniform(spec.region_cy.first, spec.region_cy.second);
    s.w = rng.uniform(spec.region_w.first, spec.region_w.second);
    s.h = rng.uniform(spec.region_h.first, spec.region_h.second);
    const double pi = true_precision(spec, s);
    s.matched = rng.uniform() < pi ? 1 : 0;
    set.samples.push_back(std::move(s));
  }
  return set;
}

double true_gap(const SyntheticSpec& spec, const BinningScheme& scheme) {
  spec.validate();
  scheme.validate();
  if (scheme.dims != subset_feature_names(FeatureSubset::kConfOnly)) {
    throw config_error("true_gap: requires 1-D confidence binning");
  }
  if (spec.piecewise_map.empty() && spec.true_subset != FeatureSubset::kConfOnly) {
    throw config_error("true_gap: requires a confidence-only true map");
  }

  // Beta(alpha, beta) density, defined without the lgamma normalizer; each
  // per-bin mean is a ratio of integrals so the normalizer cancels.
  const double a = spec.score_alpha;
  const double b = spec.score_beta;
  auto density = [&](double p) { return std::pow(p, a - 1.0) * std::pow(1.0 - p, b - 1.0); };

  MatchedSample probe;
  probe.cx = probe.cy = 0.5;
  probe.w = probe.h = 0.5;
  auto pi_of = [&](double p) {
    probe.score = p;
    return true_precision(spec, probe);
  };

  const int bins = scheme.bins_per_dim[0];
  const int kSubSteps = 2000;  // per-bin Simpson resolution
  double gap = 0.0;
  double total_mass = 0.0;
  std::vector<double> bin_mass(bins), bin_conf(bins), bin_prec(bins);
  for (int bi = 0; bi < bins; ++bi) {
    const double lo = static_cast<double>(bi) / bins;
    const double hi = static_cast<double>(bi + 1) / bins;
    const double h = (hi - lo) / kSubSteps;
    double mass = 0.0, conf = 0.0, prec = 0.0;
    for (int s = 0; s <= kSubSteps; ++s) {
      const double p = lo + h * s;
      const double weight = (s == 0 || s == kSubSteps) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
      const double f = density(std::clamp(p, 1e-12, 1.0 - 1e-12)) * weight;
      mass += f;
      conf += f * p;
      prec += f * pi_of(p);
    }
    bin_mass[bi] = mass * h / 3.0;
    bin_conf[bi] = mass > 0.0 ? conf / mass : 0.0;
    bin_prec[bi] = mass > 0.0 ? prec / mass : 0.0;
    total_mass += bin_mass[bi];
  }
  for (int bi = 0; bi < bins; ++bi) {
    gap += (bin_mass[bi] / total_mass) * std::abs(bin_conf[bi] - bin_prec[bi]);
  }
  return gap;
}

}  // namespace bayescal
