#include "bayescal/samples_io.hpp"

#include <fstream>
#include <json.hpp>

#include "bayescal/errors.hpp"

namespace bayescal {

namespace {

using nlohmann::ordered_json;

ordered_json parse_line(const std::string& path, std::size_t line_no,
                        const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error(path + ": line " + std::to_string(line_no) +
                     ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) {
    throw data_error(path + ": line " + std::to_string(line_no) + ": expected an object");
  }
  return j;
}

double require_number(const ordered_json& j, const std::string& path, std::size_t line_no,
                      const char* field) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw data_error(path + ": line " + std::to_string(line_no) + ": field \"" + field +
                     "\" missing or not a number");
  }
  return j[field].get<double>();
}

std::string require_string(const ordered_json& j, const std::string& path,
                           std::size_t line_no, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw data_error(path + ": line " + std::to_string(line_no) + ": field \"" + field +
                     "\" missing or not a string");
  }
  return j[field].get<std::string>();
}

// Runs `fn` on every non-empty line. Throws if the file cannot be opened or
// ends up contributing no records at all.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open \"" + path + "\"");
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line_no, line);
    ++records;
  }
  if (records == 0) throw data_error(path + ": no samples");
}

}  // namespace

SampleSet load_samples(const std::string& path) {
  SampleSet set;
  set.provenance = path;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    const ordered_json j = parse_line(path, line_no, line);
    MatchedSample s;
    s.image_id = require_string(j, path, line_no, "image_id");
    s.score = require_number(j, path, line_no, "score");
    s.cx = require_number(j, path, line_no, "cx");
    s.cy = require_number(j, path, line_no, "cy");
    s.w = require_number(j, path, line_no, "w");
    s.h = require_number(j, path, line_no, "h");
    if (!j.contains("matched") || !j["matched"].is_number_integer()) {
      throw data_error(path + ": line " + std::to_string(line_no) +
                       ": field \"matched\" missing or not an integer");
    }
    s.matched = j["matched"].get<int>();
    if (s.matched != 0 && s.matched != 1) {
      throw data_error(path + ": line " + std::to_string(line_no) +
                       ": field \"matched\" must be 0 or 1");
    }
    validate_fields(path + ": line " + std::to_string(line_no), s.score, s.cx, s.cy, s.w,
                    s.h);
    set.samples.push_back(std::move(s));
  });
  return set;
}

void save_samples(const SampleSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write \"" + path + "\"");
  for (const MatchedSample& s : set.samples) {
    ordered_json j;
    j["image_id"] = s.image_id;
    j["score"] = s.score;
    j["cx"] = s.cx;
    j["cy"] = s.cy;
    j["w"] = s.w;
    j["h"] = s.h;
    j["matched"] = s.matched;
    out << j.dump() << '\n';
  }
}

std::vector<DetectionRecord> load_detections(const std::string& path) {
  std::vector<DetectionRecord> dets;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    const ordered_json j = parse_line(path, line_no, line);
    DetectionRecord d;
    d.image_id = require_string(j, path, line_no, "image_id");
    d.score = require_number(j, path, line_no, "score");
    d.cx = require_number(j, path, line_no, "cx");
    d.cy = require_number(j, path, line_no, "cy");
    d.w = require_number(j, path, line_no, "w");
    d.h = require_number(j, path, line_no, "h");
    if (j.contains("category_id")) d.category_id = j["category_id"].get<int>();
    validate_fields(path + ": line " + std::to_string(line_no), d.score, d.cx, d.cy, d.w,
                    d.h);
    dets.push_back(std::move(d));
  });
  return dets;
}

std::vector<GroundTruthBox> load_ground_truths(const std::string& path) {
  std::vector<GroundTruthBox> gts;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    const ordered_json j = parse_line(path, line_no, line);
    GroundTruthBox g;
    g.image_id = require_string(j, path, line_no, "image_id");
    g.cx = require_number(j, path, line_no, "cx");
    g.cy = require_number(j, path, line_no, "cy");
    g.w = require_number(j, path, line_no, "w");
    g.h = require_number(j, path, line_no, "h");
    if (j.contains("category_id")) g.category_id = j["category_id"].get<int>();
    // Ground truths carry no score; validate the box fields only.
    validate_fields(path + ": line " + std::to_string(line_no), 0.0, g.cx, g.cy, g.w, g.h);
    gts.push_back(std::move(g));
  });
  return gts;
}

}  // namespace bayescal
