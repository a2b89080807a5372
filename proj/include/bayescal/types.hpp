#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bayescal {

// One raw detector output. Box coordinates are center/size, relative to the
// image dimensions, so every geometric field lives in [0, 1].
struct DetectionRecord {
  std::string image_id;
  double score = 0.0;  // raw confidence
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<int> category_id;
};

struct GroundTruthBox {
  std::string image_id;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<int> category_id;
};

// A detection joined with its correctness label: matched == 1 iff the
// detection was assigned to a ground-truth box at the match IoU.
// Immutable by convention once built.
struct MatchedSample {
  std::string image_id;
  double score = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  int matched = 0;
};

struct SampleSet {
  std::vector<MatchedSample> samples;
  double iou_threshold = 0.5;
  std::string provenance;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Which detector outputs participate in calibration.
enum class FeatureSubset {
  kConfOnly,   // (p)
  kConfPos,    // (p, cx, cy)
  kConfShape,  // (p, w, h)
  kFull,       // (p, cx, cy, w, h)
};

// Names of the selected quantities, confidence first. These double as the
// dimension labels of a binning scheme.
std::vector<std::string> subset_feature_names(FeatureSubset subset);

// 1, 3, 3 or 5.
std::size_t subset_dim(FeatureSubset subset);

// Raw values of the selected quantities, in subset_feature_names order.
std::vector<double> subset_values(const MatchedSample& s, FeatureSubset subset);

std::string to_string(FeatureSubset subset);
FeatureSubset subset_from_string(const std::string& name);

// Throws data_error naming the offending field when a record violates the
// coordinate invariants. `context` prefixes the message (e.g. "line 7").
void validate_fields(const std::string& context, double score, double cx, double cy,
                     double w, double h);

}  // namespace bayescal
