#include "bayescal/matching.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "bayescal/errors.hpp"

namespace bayescal {

double iou(double acx, double acy, double aw, double ah, double bcx, double bcy,
           double bw, double bh) {
  if (!(aw > 0.0 && ah > 0.0 && bw > 0.0 && bh > 0.0)) {
    throw data_error("iou: boxes must have positive width and height");
  }
  const double ax1 = acx - aw / 2.0, ax2 = acx + aw / 2.0;
  const double ay1 = acy - ah / 2.0, ay2 = acy + ah / 2.0;
  const double bx1 = bcx - bw / 2.0, bx2 = bcx + bw / 2.0;
  const double by1 = bcy - bh / 2.0, by2 = bcy + bh / 2.0;

  const double iw = std::max(0.0, std::min(ax2, bx2) - std::max(ax1, bx1));
  const double ih = std::max(0.0, std::min(ay2, by2) - std::max(ay1, by1));
  const double inter = iw * ih;
  const double uni = aw * ah + bw * bh - inter;
  return inter / uni;
}

SampleSet match_detections(const std::vector<DetectionRecord>& dets,
                           const std::vector<GroundTruthBox>& gts,
                           double iou_threshold) {
  if (dets.empty()) throw data_error("match_detections: empty detection list");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw data_error("match_detections: iou_threshold must be in (0, 1]");
  }

  // Group indices by image. std::map keeps image iteration deterministic,
  // though results only depend on per-image groups.
  std::map<std::string, std::vector<std::size_t>> dets_by_image;
  std::map<std::string, std::vector<std::size_t>> gts_by_image;
  for (std::size_t i = 0; i < dets.size(); ++i) dets_by_image[dets[i].image_id].push_back(i);
  for (std::size_t j = 0; j < gts.size(); ++j) gts_by_image[gts[j].image_id].push_back(j);

  std::vector<int> matched(dets.size(), 0);
  for (auto& [image_id, det_idx] : dets_by_image) {
    // Descending score, stable so equal scores keep input order.
    std::stable_sort(det_idx.begin(), det_idx.end(), [&](std::size_t a, std::size_t b) {
      return dets[a].score > dets[b].score;
    });

    auto gt_it = gts_by_image.find(image_id);
    if (gt_it == gts_by_image.end()) continue;
    const std::vector<std::size_t>& gt_idx = gt_it->second;
    std::vector<bool> taken(gt_idx.size(), false);

    for (std::size_t di : det_idx) {
      const DetectionRecord& det = dets[di];
      double best_iou = 0.0;
      std::size_t best_g = gt_idx.size();
      for (std::size_t g = 0; g < gt_idx.size(); ++g) {
        if (taken[g]) continue;
        const GroundTruthBox& gt = gts[gt_idx[g]];
        if (det.category_id && gt.category_id && *det.category_id != *gt.category_id) {
          continue;
        }
        const double overlap = iou(det, gt);
        // Strictly-greater keeps ties on the earliest ground truth in input order.
        if (overlap >= iou_threshold && overlap > best_iou) {
          best_iou = overlap;
          best_g = g;
        }
      }
      if (best_g < gt_idx.size()) {
        taken[best_g] = true;
        matched[di] = 1;
      }
    }
  }

  SampleSet out;
  out.iou_threshold = iou_threshold;
  out.samples.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const DetectionRecord& d = dets[i];
    validate_fields("detection " + std::to_string(i), d.score, d.cx, d.cy, d.w, d.h);
    out.samples.push_back({d.image_id, d.score, d.cx, d.cy, d.w, d.h, matched[i]});
  }
  return out;
}

}  // namespace bayescal
