#include "bayescal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bayescal/errors.hpp"

namespace bayescal {

namespace {

FeatureSubset subset_of_scheme(const BinningScheme& scheme) {
  for (FeatureSubset s : {FeatureSubset::kConfOnly, FeatureSubset::kConfPos,
                          FeatureSubset::kConfShape, FeatureSubset::kFull}) {
    if (scheme.dims == subset_feature_names(s)) return s;
  }
  throw config_error("binning scheme dimensions match no feature subset");
}

}  // namespace

std::vector<BinStats> assign_bins(const SampleSet& set, const BinningScheme& scheme) {
  if (set.empty()) throw data_error("assign_bins: empty sample set");
  scheme.validate();
  const FeatureSubset subset = subset_of_scheme(scheme);

  const std::size_t total = scheme.total_bins();
  std::vector<BinStats> stats(total);
  std::vector<double> conf_sum(total, 0.0);
  std::vector<int> hits(total, 0);
  for (std::size_t b = 0; b < total; ++b) {
    stats[b].flat_index = b;
    stats[b].multi_index = scheme.multi_index(b);
  }

  for (const MatchedSample& s : set.samples) {
    const std::size_t b = scheme.flat_index(subset_values(s, subset));
    stats[b].count += 1;
    conf_sum[b] += s.score;
    hits[b] += s.matched;
  }

  for (std::size_t b = 0; b < total; ++b) {
    if (stats[b].count > 0) {
      stats[b].mean_confidence = conf_sum[b] / stats[b].count;
      stats[b].precision = static_cast<double>(hits[b]) / stats[b].count;
    }
    stats[b].valid = stats[b].count >= scheme.min_samples_per_bin;
  }
  return stats;
}

double d_ece(const std::vector<BinStats>& stats) {
  long long n_valid = 0;
  for (const BinStats& b : stats) {
    if (b.valid) n_valid += b.count;
  }
  if (n_valid == 0) throw data_error("d_ece: insufficient samples (no valid bins)");

  double total = 0.0;
  for (const BinStats& b : stats) {
    if (!b.valid) continue;
    total += (static_cast<double>(b.count) / static_cast<double>(n_valid)) *
             std::abs(b.mean_confidence - b.precision);
  }
  return total;
}

std::vector<std::optional<double>> estimate_precision_per_sample(
    const SampleSet& set, const BinningScheme& scheme) {
  const std::vector<BinStats> stats = assign_bins(set, scheme);
  const FeatureSubset subset = subset_of_scheme(scheme);

  bool any_included = false;
  std::vector<std::optional<double>> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::size_t b = scheme.flat_index(subset_values(set.samples[i], subset));
    if (stats[b].valid) {
      out[i] = stats[b].precision;
      any_included = true;
    }
  }
  if (!any_included) {
    throw data_error("estimate_precision_per_sample: all samples fall in neglected bins");
  }
  return out;
}

double picp(const std::vector<PredictionInterval>& intervals,
            const std::vector<std::optional<double>>& precisions) {
  if (intervals.size() != precisions.size()) {
    throw std::invalid_argument("picp: intervals/precisions length mismatch");
  }
  long long covered = 0;
  long long included = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (!precisions[i]) continue;
    ++included;
    if (*precisions[i] >= intervals[i].lower && *precisions[i] <= intervals[i].upper) {
      ++covered;
    }
  }
  if (included == 0) throw data_error("picp: no included samples");
  return static_cast<double>(covered) / static_cast<double>(included);
}

double mpiw(const std::vector<PredictionInterval>& intervals) {
  if (intervals.empty()) throw data_error("mpiw: empty interval list");
  double sum = 0.0;
  for (const PredictionInterval& c : intervals) sum += interval_width(c);
  return sum / static_cast<double>(intervals.size());
}

std::vector<BinStats> reliability_table(const std::vector<BinStats>& stats) {
  return stats;  // every bin is already present; kept as the report surface
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw data_error("percentile: empty values");
  if (!(p > 0.0 && p <= 100.0)) throw config_error("percentile: p must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size()) - 1e-9));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
  if (a.size() < 2) return std::nullopt;
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return std::nullopt;
  return cov / std::sqrt(var_a * var_b);
}

ShiftReport shift_report(const std::vector<double>& q_means,
                         const std::vector<PredictionInterval>& intervals,
                         const SampleSet& set, const BinningScheme& scheme) {
  if (q_means.size() != intervals.size() || q_means.size() != set.size()) {
    throw std::invalid_argument("shift_report: input lengths disagree");
  }
  const auto precisions = estimate_precision_per_sample(set, scheme);

  ShiftReport report;
  report.rows.reserve(q_means.size());
  std::vector<double> widths;
  widths.reserve(q_means.size());
  std::vector<double> widths_included;
  std::vector<double> gaps_included;

  for (std::size_t i = 0; i < q_means.size(); ++i) {
    ShiftRow row;
    row.index = i;
    row.q_mean = q_means[i];
    row.ci_low = intervals[i].lower;
    row.ci_high = intervals[i].upper;
    row.ci_width = interval_width(intervals[i]);
    widths.push_back(row.ci_width);
    if (precisions[i]) {
      row.est_precision = *precisions[i];
      row.abs_gap = std::abs(q_means[i] - *precisions[i]);
      widths_included.push_back(row.ci_width);
      gaps_included.push_back(*row.abs_gap);
    }
    report.rows.push_back(std::move(row));
  }

  report.summary.n_rows = report.rows.size();
  report.summary.n_included = widths_included.size();
  report.summary.width_p25 = percentile_nearest_rank(widths, 25.0);
  report.summary.width_p50 = percentile_nearest_rank(widths, 50.0);
  report.summary.width_p75 = percentile_nearest_rank(widths, 75.0);
  report.summary.rank_correlation = spearman(widths_included, gaps_included);

  for (ShiftRow& row : report.rows) {
    row.in_p25 = row.ci_width <= report.summary.width_p25;
    row.in_p50 = row.ci_width <= report.summary.width_p50;
    row.in_p75 = row.ci_width <= report.summary.width_p75;
  }
  return report;
}

}  // namespace bayescal
