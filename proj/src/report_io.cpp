#include "bayescal/report_io.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>

namespace bayescal {

namespace {
using nlohmann::ordered_json;

ordered_json opt(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}
}  // namespace

std::string report_to_json(const EvaluationReport& report,
                           std::optional<double> baseline_d_ece) {
  ordered_json j;
  j["d_ece"] = report.d_ece;
  j["picp"] = opt(report.picp);
  j["mpiw"] = opt(report.mpiw);
  j["tau"] = report.tau;
  j["n_samples"] = report.n_samples;
  j["n_valid_bins"] = report.n_valid_bins;
  j["scheme"] = {{"dims", report.scheme.dims},
                 {"bins_per_dim", report.scheme.bins_per_dim},
                 {"min_samples_per_bin", report.scheme.min_samples_per_bin}};
  if (baseline_d_ece) j["baseline_d_ece"] = *baseline_d_ece;

  ordered_json rows = ordered_json::array();
  for (const BinStats& b : report.reliability) {
    ordered_json row;
    row["bin"] = b.multi_index;
    row["count"] = b.count;
    row["mean_confidence"] =
        b.count > 0 ? ordered_json(b.mean_confidence) : ordered_json(nullptr);
    row["precision"] = b.count > 0 ? ordered_json(b.precision) : ordered_json(nullptr);
    row["valid"] = b.valid;
    rows.push_back(std::move(row));
  }
  j["reliability"] = std::move(rows);
  return j.dump(2);
}

std::string shift_rows_to_csv(const ShiftReport& report) {
  std::ostringstream out;
  out << "index,q_mean,ci_low,ci_high,ci_width,est_precision,abs_gap\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  for (const ShiftRow& row : report.rows) {
    out << row.index << "," << num(row.q_mean) << "," << num(row.ci_low) << ","
        << num(row.ci_high) << "," << num(row.ci_width) << ","
        << (row.est_precision ? num(*row.est_precision) : "") << ","
        << (row.abs_gap ? num(*row.abs_gap) : "") << "\n";
  }
  return out.str();
}

std::string detections_to_csv(const SampleSet& inputs,
                              const std::vector<double>& calibrated,
                              const std::vector<PredictionInterval>& intervals,
                              double tau) {
  const bool with_intervals = !intervals.empty();
  std::ostringstream out;
  out << "image_id,score,cx,cy,w,h,matched,q_mean";
  if (with_intervals) out << ",ci_low,ci_high,ci_width,tau";
  out << "\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const MatchedSample& s = inputs.samples[i];
    out << s.image_id << "," << num(s.score) << "," << num(s.cx) << "," << num(s.cy)
        << "," << num(s.w) << "," << num(s.h) << "," << s.matched << ","
        << num(calibrated[i]);
    if (with_intervals) {
      out << "," << num(intervals[i].lower) << "," << num(intervals[i].upper) << ","
          << num(intervals[i].upper - intervals[i].lower) << "," << num(tau);
    }
    out << "\n";
  }
  return out.str();
}

std::string shift_summary_to_json(const ShiftSummary& in_summary,
                                  const ShiftSummary& shifted_summary,
                                  double median_width_ratio,
                                  std::optional<double> pooled_rank_correlation) {
  auto summary = [](const ShiftSummary& s) {
    ordered_json j;
    j["width_p25"] = s.width_p25;
    j["width_p50"] = s.width_p50;
    j["width_p75"] = s.width_p75;
    j["rank_correlation"] = opt(s.rank_correlation);
    j["n_rows"] = s.n_rows;
    j["n_included"] = s.n_included;
    return j;
  };
  ordered_json j;
  j["in_distribution"] = summary(in_summary);
  j["shifted"] = summary(shifted_summary);
  j["median_width_ratio"] = median_width_ratio;
  j["pooled_rank_correlation"] = opt(pooled_rank_correlation);
  return j.dump(2);
}

}  // namespace bayescal
