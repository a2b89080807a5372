#include "bayescal/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bayescal/errors.hpp"

namespace bayescal {

int bin_of(double value, int bins) {
  const int idx = static_cast<int>(std::floor(value * bins));
  return std::clamp(idx, 0, bins - 1);
}

std::size_t BinningScheme::total_bins() const {
  std::size_t total = 1;
  for (int b : bins_per_dim) total *= static_cast<std::size_t>(b);
  return total;
}

std::size_t BinningScheme::flat_index(const std::vector<double>& values) const {
  if (values.size() != dims.size()) {
    throw std::invalid_argument("BinningScheme::flat_index: dimension mismatch");
  }
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    flat = flat * static_cast<std::size_t>(bins_per_dim[d]) +
           static_cast<std::size_t>(bin_of(values[d], bins_per_dim[d]));
  }
  return flat;
}

std::vector<int> BinningScheme::multi_index(std::size_t flat) const {
  std::vector<int> idx(dims.size());
  for (std::size_t d = dims.size(); d-- > 0;) {
    idx[d] = static_cast<int>(flat % static_cast<std::size_t>(bins_per_dim[d]));
    flat /= static_cast<std::size_t>(bins_per_dim[d]);
  }
  return idx;
}

void BinningScheme::validate() const {
  if (dims.empty() || dims.size() != bins_per_dim.size()) {
    throw config_error("binning scheme: dims and bins_per_dim must be non-empty and equal length");
  }
  for (int b : bins_per_dim) {
    if (b <= 0) throw config_error("binning scheme: bins_per_dim entries must be positive");
  }
  if (min_samples_per_bin < 0) {
    throw config_error("binning scheme: min_samples_per_bin must be non-negative");
  }
}

BinningScheme default_scheme(FeatureSubset subset) {
  BinningScheme scheme;
  scheme.dims = subset_feature_names(subset);
  switch (subset) {
    case FeatureSubset::kConfOnly:
      scheme.bins_per_dim = {20};
      break;
    case FeatureSubset::kConfPos:
    case FeatureSubset::kConfShape:
      scheme.bins_per_dim = {8, 8, 8};
      break;
    case FeatureSubset::kFull:
      scheme.bins_per_dim = {5, 5, 5, 5, 5};
      break;
  }
  scheme.min_samples_per_bin = 8;
  return scheme;
}

}  // namespace bayescal
