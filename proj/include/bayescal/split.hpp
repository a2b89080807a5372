#pragma once

#include <cstdint>
#include <utility>

#include "bayescal/types.hpp"

namespace bayescal {

// Seed-deterministic random partition. Train gets round(train_fraction * N)
// samples; both halves keep the input order of their members. Rejects splits
// that would leave either side empty.
std::pair<SampleSet, SampleSet> split_train_test(const SampleSet& set,
                                                 double train_fraction,
                                                 std::uint64_t seed);

}  // namespace bayescal
