#pragma once

#include "bayescal/types.hpp"

namespace bayescal {

// Intersection over union of two boxes in center/size coordinates.
// Both boxes must have positive width and height.
double iou(double acx, double acy, double aw, double ah, double bcx, double bcy,
           double bw, double bh);

inline double iou(const DetectionRecord& a, const GroundTruthBox& b) {
  return iou(a.cx, a.cy, a.w, a.h, b.cx, b.cy, b.w, b.h);
}

// Greedy one-to-one matching, COCO style: per image, detections are visited
// in descending score order (ties by input order) and each takes the still
// unmatched ground-truth box with the highest IoU >= iou_threshold. When both
// sides carry category ids the match is category-constrained. Output keeps
// the detections' input order, one MatchedSample per input detection.
SampleSet match_detections(const std::vector<DetectionRecord>& dets,
                           const std::vector<GroundTruthBox>& gts,
                           double iou_threshold);

}  // namespace bayescal
