#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ensq/prob.hpp"

namespace ensq {

// A pair of sample indices into some sample pool, optionally labeled with
// the binary preference target.
struct PairedExample {
  int x = 0;
  int y = 0;
  std::optional<Probability> label;
};

// One pair per anchor: every sample appears as the first element exactly
// once (in seeded-shuffled order), partner drawn uniformly among the other
// samples. Labels come from binary_preference on the MOS values.
std::vector<PairedExample> make_labeled_pairs(std::span<const double> mos, std::uint64_t seed);

// `count` uniformly random distinct-member pairs from a pool of
// `pool_size` samples.
std::vector<PairedExample> make_unlabeled_pairs(std::size_t pool_size, std::size_t count,
                                                std::uint64_t seed);

}  // namespace ensq
