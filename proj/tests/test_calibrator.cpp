#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bayescal/calibrator.hpp"
#include "bayescal/errors.hpp"
#include "bayescal/model_io.hpp"
#include "bayescal/rng.hpp"

using namespace bayescal;

namespace {

MatchedSample sample(double score, double cx = 0.5, double cy = 0.5, double w = 0.5,
                     double h = 0.5, int matched = 0) {
  MatchedSample s;
  s.score = score;
  s.cx = cx;
  s.cy = cy;
  s.w = w;
  s.h = h;
  s.matched = matched;
  return s;
}

CalibratorSpec spec_of(CalibrationMethod m, FeatureSubset s) {
  CalibratorSpec spec;
  spec.method = m;
  spec.subset = s;
  return spec;
}

// Central finite differences of nll over every parameter.
NllGradient fd_gradient(const std::vector<FeatureVector>& features,
                        const std::vector<int>& labels, const WeightVector& theta,
                        double step = 1e-6) {
  NllGradient grad;
  grad.weights.resize(theta.weights.size());
  for (std::size_t d = 0; d < theta.weights.size(); ++d) {
    WeightVector lo = theta, hi = theta;
    lo.weights[d] -= step;
    hi.weights[d] += step;
    grad.weights[d] = (nll(features, labels, hi) - nll(features, labels, lo)) / (2 * step);
  }
  WeightVector lo = theta, hi = theta;
  lo.bias -= step;
  hi.bias += step;
  grad.bias = (nll(features, labels, hi) - nll(features, labels, lo)) / (2 * step);
  return grad;
}

}  // namespace

TEST_CASE("logistic features: logit of 0.5 is zero") {
  const auto phi = build_features(sample(0.5), spec_of(CalibrationMethod::kLogistic,
                                                       FeatureSubset::kConfOnly));
  REQUIRE(phi.values.size() == 1);
  CHECK(phi.values[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("beta features at 0.5 are +-ln 2") {
  const auto phi = build_features(sample(0.5), spec_of(CalibrationMethod::kBeta,
                                                       FeatureSubset::kConfOnly));
  REQUIRE(phi.values.size() == 2);
  CHECK(phi.values[0] == doctest::Approx(-0.6931471805599453).epsilon(1e-10));
  CHECK(phi.values[1] == doctest::Approx(0.6931471805599453).epsilon(1e-10));
}

TEST_CASE("full logistic features vanish at the symmetric point") {
  const auto phi = build_features(
      sample(0.5, 0.5, 0.5, 0.5, 0.5),
      spec_of(CalibrationMethod::kLogistic, FeatureSubset::kFull));
  REQUIRE(phi.values.size() == 5);
  for (double v : phi.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("feature lengths follow the subset and method") {
  for (auto subset : {FeatureSubset::kConfOnly, FeatureSubset::kConfPos,
                      FeatureSubset::kConfShape, FeatureSubset::kFull}) {
    const auto lc = build_features(sample(0.7, 0.2, 0.3, 0.4, 0.5),
                                   spec_of(CalibrationMethod::kLogistic, subset));
    const auto bc = build_features(sample(0.7, 0.2, 0.3, 0.4, 0.5),
                                   spec_of(CalibrationMethod::kBeta, subset));
    CHECK(lc.values.size() == subset_dim(subset));
    CHECK(bc.values.size() == 2 * subset_dim(subset));
    for (double v : lc.values) CHECK(std::isfinite(v));
    for (double v : bc.values) CHECK(std::isfinite(v));
  }
}

TEST_CASE("forward with identity weights reproduces the confidence") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  WeightVector identity{{1.0}, 0.0};
  CHECK(forward(build_features(sample(0.8), spec), identity) ==
        doctest::Approx(0.8).epsilon(1e-9));
  // Boundary values stay within clip distance.
  CHECK(forward(build_features(sample(1.0), spec), identity) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(forward(build_features(sample(0.0), spec), identity) ==
        doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("zero weights give 0.5 for any input") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kFull);
  WeightVector zero{{0, 0, 0, 0, 0}, 0.0};
  for (double p : {0.01, 0.3, 0.77, 0.99}) {
    CHECK(forward(build_features(sample(p, 0.1, 0.9, 0.2, 0.7), spec), zero) ==
          doctest::Approx(0.5));
  }
}

TEST_CASE("bias ln 3 maps 0.5 to 0.75") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  WeightVector theta{{1.0}, std::log(3.0)};
  CHECK(forward(build_features(sample(0.5), spec), theta) ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("forward output is strictly inside (0,1) even for huge weights") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  const auto phi = build_features(sample(0.999), spec);
  CHECK(forward(phi, WeightVector{{100.0}, 50.0}) < 1.0);
  CHECK(forward(phi, WeightVector{{-100.0}, -50.0}) > 0.0);
}

TEST_CASE("forward rejects a length mismatch") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  CHECK_THROWS_AS(forward(build_features(sample(0.5), spec), WeightVector{{1.0, 2.0}, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("forward is increasing in confidence under a positive weight") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  WeightVector theta{{1.7}, -0.4};
  double prev = 0.0;
  for (double p = 0.05; p < 1.0; p += 0.05) {
    const double q = forward(build_features(sample(p), spec), theta);
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("nll of a single sample at q=0.5 with m=1 is ln 2") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  const std::vector<FeatureVector> phi = {build_features(sample(0.37), spec)};
  const WeightVector zero{{0.0}, 0.0};
  CHECK(nll(phi, {1}, zero) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("nll decreases monotonically as q approaches the label") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  const std::vector<FeatureVector> phi = {build_features(sample(0.9), spec)};
  double prev = nll(phi, {1}, WeightVector{{1.0}, 0.0});
  for (double bias : {0.5, 1.0, 2.0, 4.0}) {
    const double current = nll(phi, {1}, WeightVector{{1.0}, bias});
    CHECK(current < prev);
    prev = current;
  }
}

TEST_CASE("duplicating the sample list doubles the nll") {
  const auto spec = spec_of(CalibrationMethod::kBeta, FeatureSubset::kConfShape);
  std::vector<FeatureVector> phi;
  std::vector<int> labels;
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    phi.push_back(build_features(
        sample(rng.uniform(), 0.5, 0.5, rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)),
        spec));
    labels.push_back(static_cast<int>(rng.below(2)));
  }
  WeightVector theta{std::vector<double>(6, 0.3), -0.2};
  const double single = nll(phi, labels, theta);
  std::vector<FeatureVector> doubled = phi;
  doubled.insert(doubled.end(), phi.begin(), phi.end());
  std::vector<int> doubled_labels = labels;
  doubled_labels.insert(doubled_labels.end(), labels.begin(), labels.end());
  CHECK(nll(doubled, doubled_labels, theta) == doctest::Approx(2.0 * single).epsilon(1e-12));
}

TEST_CASE("gradient at the stationary point of symmetric labels is zero") {
  const auto spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  const FeatureVector phi = build_features(sample(0.7), spec);
  const WeightVector zero{{0.0}, 0.0};  // q = 0.5 for both copies
  const auto g = nll_gradient({phi, phi}, {0, 1}, zero);
  CHECK(g.weights[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g.bias == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("hand-evaluated gradient at q=0.75, m=1, phi=[1]") {
  // theta.phi = ln 3 so q = 0.75; gradient is (q - 1) * phi = -0.25.
  FeatureVector phi;
  phi.values = {1.0};
  const WeightVector theta{{std::log(3.0)}, 0.0};
  const auto g = nll_gradient({phi}, {1}, theta);
  CHECK(g.weights[0] == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(g.bias == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const auto method =
        trial % 2 == 0 ? CalibrationMethod::kLogistic : CalibrationMethod::kBeta;
    const auto subset = trial % 3 == 0 ? FeatureSubset::kFull : FeatureSubset::kConfPos;
    const auto spec = spec_of(method, subset);

    std::vector<FeatureVector> phi;
    std::vector<int> labels;
    const int n = 10 + static_cast<int>(rng.below(40));
    for (int i = 0; i < n; ++i) {
      phi.push_back(build_features(sample(rng.uniform(0.02, 0.98), rng.uniform(0.05, 0.95),
                                          rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
                                          rng.uniform(0.05, 0.95)),
                                   spec));
      labels.push_back(static_cast<int>(rng.below(2)));
    }
    WeightVector theta;
    theta.weights.resize(feature_dim(spec));
    for (double& w : theta.weights) w = rng.normal() * 0.5;
    theta.bias = rng.normal() * 0.5;

    const auto analytic = nll_gradient(phi, labels, theta);
    const auto fd = fd_gradient(phi, labels, theta);
    for (std::size_t d = 0; d < theta.weights.size(); ++d) {
      const double denom = std::max({1.0, std::abs(analytic.weights[d])});
      CHECK(std::abs(analytic.weights[d] - fd.weights[d]) / denom < 1e-5);
    }
    const double denom = std::max(1.0, std::abs(analytic.bias));
    CHECK(std::abs(analytic.bias - fd.bias) / denom < 1e-5);
  }
}

TEST_CASE("nll and nll_gradient reject empty input") {
  const WeightVector theta{{1.0}, 0.0};
  CHECK_THROWS_AS(nll({}, {}, theta), data_error);
  CHECK_THROWS_AS(nll_gradient({}, {}, theta), data_error);
}

TEST_CASE("fused value+gradient agrees with the separate routines") {
  Rng rng(55);
  const auto spec = spec_of(CalibrationMethod::kBeta, FeatureSubset::kConfPos);
  std::vector<FeatureVector> phi;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    phi.push_back(build_features(sample(rng.uniform(0.01, 0.99), rng.uniform(),
                                        rng.uniform(), 0.5, 0.5),
                                 spec));
    labels.push_back(static_cast<int>(rng.below(2)));
  }
  for (int trial = 0; trial < 20; ++trial) {
    WeightVector theta;
    theta.weights.resize(feature_dim(spec));
    for (double& w : theta.weights) w = rng.normal();
    theta.bias = rng.normal();
    NllGradient fused;
    const double value = nll_with_gradient(phi, labels, theta, fused);
    const auto separate = nll_gradient(phi, labels, theta);
    CHECK(value == doctest::Approx(nll(phi, labels, theta)).epsilon(1e-13));
    for (std::size_t d = 0; d < fused.weights.size(); ++d) {
      CHECK(fused.weights[d] == doctest::Approx(separate.weights[d]).epsilon(1e-13));
    }
    CHECK(fused.bias == doctest::Approx(separate.bias).epsilon(1e-13));
  }
}

// ---- histogram binning ----

namespace {

SampleSet hb_training_set() {
  SampleSet set;
  set.samples = {sample(0.1, 0.5, 0.5, 0.5, 0.5, 1), sample(0.4, 0.5, 0.5, 0.5, 0.5, 1),
                 sample(0.6, 0.5, 0.5, 0.5, 0.5, 1), sample(0.9, 0.5, 0.5, 0.5, 0.5, 0)};
  return set;
}

BinningScheme one_bin_scheme() {
  BinningScheme scheme;
  scheme.dims = {"conf"};
  scheme.bins_per_dim = {1};
  scheme.min_samples_per_bin = 1;
  return scheme;
}

}  // namespace

TEST_CASE("single all-covering bin stores 3/4 precision") {
  const auto spec = spec_of(CalibrationMethod::kHistogram, FeatureSubset::kConfOnly);
  const auto model = fit_histogram_binning(hb_training_set(), spec, one_bin_scheme());
  CHECK(model.values.size() == 1);
  CHECK(model.values[0] == doctest::Approx(0.75));
  CHECK(predict_histogram_binning(model, sample(0.33)) == doctest::Approx(0.75));
}

TEST_CASE("all-matched training maps every populated bin to 1") {
  SampleSet set = hb_training_set();
  for (auto& s : set.samples) s.matched = 1;
  const auto spec = spec_of(CalibrationMethod::kHistogram, FeatureSubset::kConfOnly);
  BinningScheme scheme = one_bin_scheme();
  scheme.bins_per_dim = {4};
  const auto model = fit_histogram_binning(set, spec, scheme);
  for (std::size_t b = 0; b < model.values.size(); ++b) {
    if (model.counts[b] > 0) CHECK(model.values[b] == doctest::Approx(1.0));
  }
}

TEST_CASE("queries in an empty bin hit the global-precision fallback") {
  SampleSet set;
  set.samples = {sample(0.9, 0.5, 0.5, 0.5, 0.5, 1), sample(0.95, 0.5, 0.5, 0.5, 0.5, 0)};
  const auto spec = spec_of(CalibrationMethod::kHistogram, FeatureSubset::kConfOnly);
  BinningScheme scheme = one_bin_scheme();
  scheme.bins_per_dim = {2};
  const auto model = fit_histogram_binning(set, spec, scheme);
  CHECK(model.fallback == doctest::Approx(0.5));
  CHECK(predict_histogram_binning(model, sample(0.1)) == doctest::Approx(0.5));
  CHECK(predict_histogram_binning(model, sample(0.9)) == doctest::Approx(0.5));
}

TEST_CASE("histogram binning rejects a scheme/subset mismatch") {
  const auto spec = spec_of(CalibrationMethod::kHistogram, FeatureSubset::kConfPos);
  CHECK_THROWS_AS(fit_histogram_binning(hb_training_set(), spec, one_bin_scheme()),
                  config_error);
}

TEST_CASE("histogram binning reproduces per-bin training precision exactly") {
  Rng rng(77);
  SampleSet set;
  for (int i = 0; i < 500; ++i) {
    auto s = sample(rng.uniform(), 0.5, 0.5, 0.5, 0.5, static_cast<int>(rng.below(2)));
    set.samples.push_back(s);
  }
  const auto spec = spec_of(CalibrationMethod::kHistogram, FeatureSubset::kConfOnly);
  BinningScheme scheme = one_bin_scheme();
  scheme.bins_per_dim = {10};
  const auto model = fit_histogram_binning(set, spec, scheme);

  // Per bin, the average calibrated value of members equals the precision.
  std::vector<double> hits(10, 0), counts(10, 0);
  for (const auto& s : set.samples) {
    const int b = bin_of(s.score, 10);
    hits[b] += s.matched;
    counts[b] += 1;
  }
  for (int b = 0; b < 10; ++b) {
    if (counts[b] == 0) continue;
    CHECK(model.values[b] == doctest::Approx(hits[b] / counts[b]).epsilon(1e-15));
  }
}

// ---- model serialization ----

TEST_CASE("parametric model JSON round-trips to bit-identical predictions") {
  const auto spec = spec_of(CalibrationMethod::kBeta, FeatureSubset::kFull);
  FittedModel model;
  model.spec = spec;
  model.estimator = Estimator::kMl;
  Rng rng(13);
  WeightVector theta;
  theta.weights.resize(feature_dim(spec));
  for (double& w : theta.weights) w = rng.normal();
  theta.bias = rng.normal();
  model.weights = theta;

  const FittedModel loaded = model_from_json(model_to_json(model));
  for (int i = 0; i < 50; ++i) {
    const auto s = sample(rng.uniform(), rng.uniform(), rng.uniform(),
                          rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99));
    CHECK(calibrate_score(loaded, s) == calibrate_score(model, s));
  }
}

TEST_CASE("histogram model JSON round-trips to bit-identical predictions") {
  const auto spec = spec_of(CalibrationMethod::kHistogram, FeatureSubset::kConfShape);
  Rng rng(14);
  SampleSet set;
  for (int i = 0; i < 300; ++i) {
    set.samples.push_back(sample(rng.uniform(), 0.5, 0.5, rng.uniform(0.05, 0.95),
                                 rng.uniform(0.05, 0.95), static_cast<int>(rng.below(2))));
  }
  FittedModel model;
  model.spec = spec;
  model.histogram = fit_histogram_binning(set, spec, default_scheme(spec.subset));

  const FittedModel loaded = model_from_json(model_to_json(model));
  for (int i = 0; i < 50; ++i) {
    const auto s = sample(rng.uniform(), 0.5, 0.5, rng.uniform(0.01, 0.99),
                          rng.uniform(0.01, 0.99));
    CHECK(calibrate_score(loaded, s) == calibrate_score(model, s));
  }
}

TEST_CASE("posterior survives the model JSON round trip") {
  FittedModel model;
  model.spec = spec_of(CalibrationMethod::kLogistic, FeatureSubset::kConfOnly);
  model.estimator = Estimator::kSvi;
  VariationalPosterior q;
  q.mu = {1.25, -0.5};
  q.log_sigma = {-3.0, -2.5};
  model.posterior = q;
  model.weights = q.mean_weights();
  model.prior = PriorSpec{0.0, 10.0};
  model.seed = 99;

  const FittedModel loaded = model_from_json(model_to_json(model));
  REQUIRE(loaded.posterior.has_value());
  CHECK(loaded.posterior->mu == q.mu);
  CHECK(loaded.posterior->log_sigma == q.log_sigma);
  CHECK(loaded.prior->std == 10.0);
  CHECK(loaded.seed == 99);
}
