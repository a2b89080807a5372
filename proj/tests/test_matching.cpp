#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bayescal/errors.hpp"
#include "bayescal/matching.hpp"
#include "bayescal/rng.hpp"

using namespace bayescal;

namespace {

// Independent oracle: rasterized overlap count on a fine grid over [0,1]^2.
double raster_iou(double acx, double acy, double aw, double ah, double bcx, double bcy,
                  double bw, double bh, int grid = 2000) {
  auto inside = [](double x, double y, double cx, double cy, double w, double h) {
    return x >= cx - w / 2 && x <= cx + w / 2 && y >= cy - h / 2 && y <= cy + h / 2;
  };
  long long inter = 0, uni = 0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double x = (i + 0.5) / grid;
      const double y = (j + 0.5) / grid;
      const bool in_a = inside(x, y, acx, acy, aw, ah);
      const bool in_b = inside(x, y, bcx, bcy, bw, bh);
      if (in_a && in_b) ++inter;
      if (in_a || in_b) ++uni;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

DetectionRecord det(const std::string& img, double score, double cx, double cy, double w,
                    double h) {
  DetectionRecord d;
  d.image_id = img;
  d.score = score;
  d.cx = cx;
  d.cy = cy;
  d.w = w;
  d.h = h;
  return d;
}

GroundTruthBox gt(const std::string& img, double cx, double cy, double w, double h) {
  GroundTruthBox g;
  g.image_id = img;
  g.cx = cx;
  g.cy = cy;
  g.w = w;
  g.h = h;
  return g;
}

}  // namespace

TEST_CASE("iou of identical boxes is 1") {
  CHECK(iou(0.5, 0.5, 0.4, 0.4, 0.5, 0.5, 0.4, 0.4) == doctest::Approx(1.0));
}

TEST_CASE("iou of disjoint boxes is 0") {
  CHECK(iou(0.1, 0.5, 0.1, 0.1, 0.9, 0.5, 0.1, 0.1) == doctest::Approx(0.0));
}

TEST_CASE("iou of partially overlapping boxes matches the rasterized oracle") {
  const double analytic = iou(0.5, 0.5, 0.4, 0.4, 0.7, 0.5, 0.4, 0.4);
  // Exact value: intersection 0.2*0.4 = 0.08, union 0.32-0.08 = 0.24.
  CHECK(analytic == doctest::Approx(0.08 / 0.24).epsilon(1e-12));
  CHECK(analytic == doctest::Approx(raster_iou(0.5, 0.5, 0.4, 0.4, 0.7, 0.5, 0.4, 0.4))
                        .epsilon(3e-3));
}

TEST_CASE("iou rejects non-positive extents") {
  CHECK_THROWS_AS(iou(0.5, 0.5, 0.0, 0.4, 0.5, 0.5, 0.4, 0.4), data_error);
  CHECK_THROWS_AS(iou(0.5, 0.5, 0.4, 0.4, 0.5, 0.5, 0.4, -0.1), data_error);
}

TEST_CASE("iou is symmetric and bounded on random boxes") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double acx = rng.uniform(0.2, 0.8), acy = rng.uniform(0.2, 0.8);
    const double aw = rng.uniform(0.05, 0.4), ah = rng.uniform(0.05, 0.4);
    const double bcx = rng.uniform(0.2, 0.8), bcy = rng.uniform(0.2, 0.8);
    const double bw = rng.uniform(0.05, 0.4), bh = rng.uniform(0.05, 0.4);
    const double ab = iou(acx, acy, aw, ah, bcx, bcy, bw, bh);
    const double ba = iou(bcx, bcy, bw, bh, acx, acy, aw, ah);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(iou(acx, acy, aw, ah, acx, acy, aw, ah) == doctest::Approx(1.0));
  }
}

TEST_CASE("single exact overlap is matched") {
  const auto set = match_detections({det("a", 0.9, 0.5, 0.5, 0.4, 0.4)},
                                    {gt("a", 0.5, 0.5, 0.4, 0.4)}, 0.5);
  REQUIRE(set.size() == 1);
  CHECK(set.samples[0].matched == 1);
}

TEST_CASE("detection without ground truth stays unmatched") {
  const auto set = match_detections({det("a", 0.9, 0.5, 0.5, 0.4, 0.4)}, {}, 0.5);
  REQUIRE(set.size() == 1);
  CHECK(set.samples[0].matched == 0);
}

TEST_CASE("higher score wins a contested ground truth") {
  // Both detections overlap the single ground truth well above threshold;
  // enumeration of the two possible one-to-one assignments says the greedy
  // score-descending pick is the 0.9 detection.
  const std::vector<DetectionRecord> dets = {det("a", 0.8, 0.45, 0.5, 0.4, 0.4),
                                             det("a", 0.9, 0.55, 0.5, 0.4, 0.4)};
  const std::vector<GroundTruthBox> gts = {gt("a", 0.5, 0.5, 0.4, 0.4)};
  CHECK(iou(dets[0], gts[0]) > 0.5);
  CHECK(iou(dets[1], gts[0]) > 0.5);

  const auto set = match_detections(dets, gts, 0.5);
  REQUIRE(set.size() == 2);
  CHECK(set.samples[0].matched == 0);  // score 0.8, input order preserved
  CHECK(set.samples[1].matched == 1);  // score 0.9
}

TEST_CASE("matching is one-to-one on random instances") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DetectionRecord> dets;
    std::vector<GroundTruthBox> gts;
    const int n_dets = 1 + static_cast<int>(rng.below(6));
    const int n_gts = static_cast<int>(rng.below(4));
    for (int i = 0; i < n_dets; ++i) {
      dets.push_back(det("img", rng.uniform(), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7),
                         rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4)));
    }
    for (int j = 0; j < n_gts; ++j) {
      gts.push_back(gt("img", rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7),
                       rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4)));
    }
    const auto set = match_detections(dets, gts, 0.3);
    REQUIRE(set.size() == dets.size());
    const long matched = std::count_if(set.samples.begin(), set.samples.end(),
                                       [](const MatchedSample& s) { return s.matched == 1; });
    CHECK(matched <= static_cast<long>(gts.size()));
  }
}

TEST_CASE("category ids constrain the match when both sides carry them") {
  auto d = det("a", 0.9, 0.5, 0.5, 0.4, 0.4);
  d.category_id = 1;
  auto g = gt("a", 0.5, 0.5, 0.4, 0.4);
  g.category_id = 2;
  CHECK(match_detections({d}, {g}, 0.5).samples[0].matched == 0);
  g.category_id = 1;
  CHECK(match_detections({d}, {g}, 0.5).samples[0].matched == 1);
}

TEST_CASE("match_detections validates its inputs") {
  CHECK_THROWS_AS(match_detections({}, {}, 0.5), data_error);
  CHECK_THROWS_AS(match_detections({det("a", 0.9, 0.5, 0.5, 0.4, 0.4)}, {}, 0.0),
                  data_error);
  CHECK_THROWS_AS(match_detections({det("a", 0.9, 0.5, 0.5, 0.4, 0.4)}, {}, 1.5),
                  data_error);
}
