#pragma once

#include <string>
#include <vector>

#include "bayescal/types.hpp"

namespace bayescal {

// Samples are stored as JSON lines, one object per line:
//   {"image_id": str, "score": f, "cx": f, "cy": f, "w": f, "h": f, "matched": 0|1}
// Detection-only and ground-truth files use the same schema minus "matched"
// (and minus "score" for ground truths). Values outside their declared range
// are rejected with the line number and field name, never clamped.

SampleSet load_samples(const std::string& path);
void save_samples(const SampleSet& set, const std::string& path);

std::vector<DetectionRecord> load_detections(const std::string& path);
std::vector<GroundTruthBox> load_ground_truths(const std::string& path);

}  // namespace bayescal
