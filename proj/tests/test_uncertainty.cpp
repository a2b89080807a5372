#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bayescal/calibrator.hpp"
#include "bayescal/errors.hpp"
#include "bayescal/rng.hpp"
#include "bayescal/uncertainty.hpp"

using namespace bayescal;

namespace {

MatchedSample sample(double score) {
  MatchedSample s;
  s.score = score;
  s.cx = s.cy = s.w = s.h = 0.5;
  return s;
}

CalibratorSpec lc_conf() {
  CalibratorSpec spec;
  spec.method = CalibrationMethod::kLogistic;
  spec.subset = FeatureSubset::kConfOnly;
  return spec;
}

PredictiveDistribution dist(std::vector<double> values) {
  PredictiveDistribution d;
  d.values = std::move(values);
  return d;
}

// Exhaustive minimum-width window over the sorted values; independent of the
// library implementation.
PredictionInterval oracle_hdi(std::vector<double> values, double tau) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t k =
      static_cast<std::size_t>(std::ceil((1.0 - tau) * static_cast<double>(n) - 1e-9));
  std::size_t best = 0;
  for (std::size_t i = 0; i + k <= n; ++i) {
    if (values[i + k - 1] - values[i] < values[best + k - 1] - values[best]) best = i;
  }
  return {values[best], values[best + k - 1], tau};
}

}  // namespace

TEST_CASE("point-mass posterior with identity weights replays the confidence") {
  VariationalPosterior q;
  q.mu = {1.0, 0.0};
  q.log_sigma = {-40.0, -40.0};
  const auto d = predict_distribution(sample(0.8), lc_conf(), q, 100, 1);
  REQUIRE(d.values.size() == 100);
  for (double v : d.values) CHECK(v == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("identical detections receive identical distributions") {
  VariationalPosterior q;
  q.mu = {1.0, 0.0};
  q.log_sigma = {-1.0, -1.5};
  const auto a = predict_distribution(sample(0.63), lc_conf(), q, 500, 7);
  const auto b = predict_distribution(sample(0.63), lc_conf(), q, 500, 7);
  CHECK(a.values == b.values);
}

TEST_CASE("batch prediction shares one set of draws across detections") {
  VariationalPosterior q;
  q.mu = {1.0, 0.0};
  q.log_sigma = {-1.0, -1.0};
  SampleSet set;
  set.samples = {sample(0.4), sample(0.4), sample(0.9)};
  const auto draws = sample_weights(q, 200, 3);
  const auto dists = predict_distributions(set, lc_conf(), draws);
  REQUIRE(dists.size() == 3);
  CHECK(dists[0].values == dists[1].values);  // same inputs, same draws
  CHECK(dists[0].values != dists[2].values);
}

TEST_CASE("predictive sample mean matches a brute-force expectation") {
  // Weight pinned at 1, bias ~ N(0,1), score 0.5: the values are
  // sigmoid(normal), whose mean is 0.5 by symmetry.
  VariationalPosterior q;
  q.mu = {1.0, 0.0};
  q.log_sigma = {-40.0, 0.0};
  const auto d = predict_distribution(sample(0.5), lc_conf(), q, 100000, 21);
  const double mean = mean_estimate(d);

  Rng rng(777);
  double oracle = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) oracle += stable_sigmoid(rng.normal());
  oracle /= n;

  CHECK(std::abs(mean - oracle) < 0.005);
}

TEST_CASE("mean of constant values is that constant") {
  CHECK(mean_estimate(dist({0.7, 0.7, 0.7})) == doctest::Approx(0.7));
}

TEST_CASE("mean of a symmetric set is the midpoint") {
  CHECK(mean_estimate(dist({0.2, 0.4, 0.6, 0.8})) == doctest::Approx(0.5));
}

TEST_CASE("mean equals a reversed-order summation within 1e-12") {
  Rng rng(5);
  std::vector<double> values;
  for (int i = 0; i < 5000; ++i) values.push_back(rng.uniform());
  const double mean = mean_estimate(dist(values));
  double reversed = 0.0;
  for (auto it = values.rbegin(); it != values.rend(); ++it) reversed += *it;
  reversed /= values.size();
  CHECK(std::abs(mean - reversed) < 1e-12);
}

TEST_CASE("mean of an empty distribution is rejected") {
  CHECK_THROWS_AS(mean_estimate(dist({})), data_error);
}

TEST_CASE("hdi of a point mass is degenerate") {
  const auto c = hdi(dist({0.42, 0.42, 0.42, 0.42}), 0.2);
  CHECK(c.lower == 0.42);
  CHECK(c.upper == 0.42);
  CHECK(interval_width(c) == 0.0);
}

TEST_CASE("hdi ties resolve to the lowest window") {
  // T=10, tau=0.2 -> k=8. Sixteenths are exactly representable, so the three
  // windows are tied at width 7/16 bit-for-bit and the lowest must win.
  std::vector<double> values;
  for (int i = 1; i <= 10; ++i) values.push_back(i / 16.0);
  const auto c = hdi(dist(values), 0.2);
  CHECK(c.lower == 1.0 / 16.0);
  CHECK(c.upper == 8.0 / 16.0);
}

TEST_CASE("hdi of a skewed set drops the outlier") {
  const auto c = hdi(dist({0.01, 0.02, 0.03, 0.04, 0.9}), 0.2);
  CHECK(c.lower == doctest::Approx(0.01));
  CHECK(c.upper == doctest::Approx(0.04));
}

TEST_CASE("hdi rejects bad tau and too-small windows") {
  CHECK_THROWS_AS(hdi(dist({0.1, 0.2, 0.3}), 0.0), config_error);
  CHECK_THROWS_AS(hdi(dist({0.1, 0.2, 0.3}), 1.0), config_error);
  CHECK_THROWS_AS(hdi(dist({0.1, 0.2}), 0.9), config_error);  // k would be 1
}

TEST_CASE("hdi equals the exhaustive window search on random sets") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(200));
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
      // Mix of shapes: uniform, squared (skewed) and bimodal.
      const double u = rng.uniform();
      if (trial % 3 == 0) {
        values.push_back(u);
      } else if (trial % 3 == 1) {
        values.push_back(u * u);
      } else {
        values.push_back(u < 0.5 ? 0.2 * rng.uniform() : 0.8 + 0.2 * rng.uniform());
      }
    }
    const double tau = std::vector<double>{0.05, 0.2, 0.5}[trial % 3];
    if ((1.0 - tau) * n < 2) continue;
    const auto actual = hdi(dist(values), tau);
    const auto expected = oracle_hdi(values, tau);
    CHECK(actual.lower == expected.lower);
    CHECK(actual.upper == expected.upper);
  }
}

TEST_CASE("hdi is invariant under permutation of the values") {
  Rng rng(100);
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(rng.uniform());
  const auto before = hdi(dist(values), 0.1);
  for (std::size_t i = values.size() - 1; i > 0; --i) {
    std::swap(values[i], values[rng.below(i + 1)]);
  }
  const auto after = hdi(dist(values), 0.1);
  CHECK(before.lower == after.lower);
  CHECK(before.upper == after.upper);
}

TEST_CASE("hdi endpoints and the mean shift together under translation") {
  Rng rng(101);
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) values.push_back(rng.uniform(0.2, 0.6));
  const double delta = 0.3;
  std::vector<double> shifted = values;
  for (double& v : shifted) v += delta;
  const auto base = hdi(dist(values), 0.1);
  const auto moved = hdi(dist(shifted), 0.1);
  CHECK(moved.lower == doctest::Approx(base.lower + delta).epsilon(1e-12));
  CHECK(moved.upper == doctest::Approx(base.upper + delta).epsilon(1e-12));
  CHECK(mean_estimate(dist(shifted)) ==
        doctest::Approx(mean_estimate(dist(values)) + delta).epsilon(1e-12));
}

TEST_CASE("width is antitone in tau") {
  Rng rng(102);
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) values.push_back(rng.uniform());
  double prev = 2.0;
  for (double tau : {0.05, 0.1, 0.2, 0.4, 0.6}) {
    const double width = interval_width(hdi(dist(values), tau));
    CHECK(width <= prev);
    prev = width;
  }
}

TEST_CASE("hdi covers at least ceil((1-tau)T) samples") {
  Rng rng(103);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values;
    const int n = 10 + static_cast<int>(rng.below(100));
    for (int i = 0; i < n; ++i) values.push_back(rng.uniform());
    const double tau = 0.25;
    const auto c = hdi(dist(values), tau);
    const long inside = std::count_if(values.begin(), values.end(), [&](double v) {
      return v >= c.lower && v <= c.upper;
    });
    CHECK(inside >= static_cast<long>(std::ceil((1.0 - tau) * n - 1e-9)));
  }
}

TEST_CASE("interval width basics") {
  CHECK(interval_width({0.3, 0.3, 0.05}) == 0.0);
  CHECK(interval_width({0.2, 0.9, 0.05}) == doctest::Approx(0.7));
  CHECK(interval_width({0.0, 1.0, 0.05}) == doctest::Approx(1.0));
}
