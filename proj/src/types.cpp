#include "bayescal/types.hpp"

#include "bayescal/errors.hpp"

namespace bayescal {

std::vector<std::string> subset_feature_names(FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::kConfOnly:
      return {"conf"};
    case FeatureSubset::kConfPos:
      return {"conf", "cx", "cy"};
    case FeatureSubset::kConfShape:
      return {"conf", "w", "h"};
    case FeatureSubset::kFull:
      return {"conf", "cx", "cy", "w", "h"};
  }
  throw std::invalid_argument("unknown FeatureSubset");
}

std::size_t subset_dim(FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::kConfOnly:
      return 1;
    case FeatureSubset::kConfPos:
    case FeatureSubset::kConfShape:
      return 3;
    case FeatureSubset::kFull:
      return 5;
  }
  throw std::invalid_argument("unknown FeatureSubset");
}

std::vector<double> subset_values(const MatchedSample& s, FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::kConfOnly:
      return {s.score};
    case FeatureSubset::kConfPos:
      return {s.score, s.cx, s.cy};
    case FeatureSubset::kConfShape:
      return {s.score, s.w, s.h};
    case FeatureSubset::kFull:
      return {s.score, s.cx, s.cy, s.w, s.h};
  }
  throw std::invalid_argument("unknown FeatureSubset");
}

std::string to_string(FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::kConfOnly:
      return "conf_only";
    case FeatureSubset::kConfPos:
      return "conf_pos";
    case FeatureSubset::kConfShape:
      return "conf_shape";
    case FeatureSubset::kFull:
      return "full";
  }
  throw std::invalid_argument("unknown FeatureSubset");
}

FeatureSubset subset_from_string(const std::string& name) {
  if (name == "conf_only") return FeatureSubset::kConfOnly;
  if (name == "conf_pos") return FeatureSubset::kConfPos;
  if (name == "conf_shape") return FeatureSubset::kConfShape;
  if (name == "full") return FeatureSubset::kFull;
  throw config_error("unknown feature subset \"" + name +
                     "\" (expected conf_only, conf_pos, conf_shape or full)");
}

void validate_fields(const std::string& context, double score, double cx, double cy,
                     double w, double h) {
  auto fail = [&](const std::string& field, double value) {
    throw data_error(context + ": field \"" + field + "\" out of range (" +
                     std::to_string(value) + ")");
  };
  if (!(score >= 0.0 && score <= 1.0)) fail("score", score);
  if (!(cx >= 0.0 && cx <= 1.0)) fail("cx", cx);
  if (!(cy >= 0.0 && cy <= 1.0)) fail("cy", cy);
  if (!(w > 0.0 && w <= 1.0)) fail("w", w);
  if (!(h > 0.0 && h <= 1.0)) fail("h", h);
}

}  // namespace bayescal
