#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bayescal/types.hpp"

namespace bayescal {

// Equal-width multidimensional binning over [0, 1] per dimension. Bins are
// half-open [a, b) with the top bin closed, so 1.0 lands in the last bin.
struct BinningScheme {
  std::vector<std::string> dims;      // feature names, confidence first
  std::vector<int> bins_per_dim;      // one positive count per dim
  int min_samples_per_bin = 8;        // bins below this are neglected

  std::size_t dim() const { return dims.size(); }
  std::size_t total_bins() const;

  // Flat index of the bin containing `values` (same order as dims).
  std::size_t flat_index(const std::vector<double>& values) const;

  // Inverse of flat_index.
  std::vector<int> multi_index(std::size_t flat) const;

  void validate() const;
};

// Default configurations: 20 bins for confidence-only, 8 per dimension when
// position or shape is added, 5 per dimension for the full feature set, all
// with the 8-sample neglect rule.
BinningScheme default_scheme(FeatureSubset subset);

// Single bin index along one dimension for a value in [0, 1].
int bin_of(double value, int bins);

}  // namespace bayescal
