#include "bayescal/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bayescal/errors.hpp"
#include "bayescal/rng.hpp"

namespace bayescal {

std::pair<SampleSet, SampleSet> split_train_test(const SampleSet& set,
                                                 double train_fraction,
                                                 std::uint64_t seed) {
  if (set.empty()) throw data_error("split_train_test: empty sample set");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw data_error("split_train_test: train_fraction must be in (0, 1)");
  }
  const std::size_t n = set.size();
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw data_error("split_train_test: split would leave an empty partition (n=" +
                     std::to_string(n) + ", fraction=" + std::to_string(train_fraction) +
                     ")");
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {  // Fisher-Yates
    const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(idx[i], idx[j]);
  }

  std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + n_train);
  std::vector<std::size_t> test_idx(idx.begin() + n_train, idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<std::size_t>& which, const char* tag) {
    SampleSet part;
    part.iou_threshold = set.iou_threshold;
    part.provenance = set.provenance.empty() ? tag : set.provenance + ":" + tag;
    part.samples.reserve(which.size());
    for (std::size_t i : which) part.samples.push_back(set.samples[i]);
    return part;
  };
  return {take(train_idx, "train"), take(test_idx, "test")};
}

}  // namespace bayescal
