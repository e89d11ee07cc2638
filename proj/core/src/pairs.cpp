#include "ensq/pairs.hpp"

#include <numeric>
#include <stdexcept>

#include "ensq/rng.hpp"

namespace ensq {

std::vector<PairedExample> make_labeled_pairs(std::span<const double> mos, std::uint64_t seed) {
  const std::size_t n = mos.size();
  if (n < 2) throw std::invalid_argument("make_labeled_pairs: need at least 2 labeled samples");
  Rng rng(seed);

  std::vector<int> anchors(n);
  std::iota(anchors.begin(), anchors.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(anchors[i], anchors[rng.uniform_index(i + 1)]);
  }

  std::vector<PairedExample> pairs;
  pairs.reserve(n);
  for (int a : anchors) {
    // uniform over the n-1 other samples
    std::size_t partner = rng.uniform_index(n - 1);
    if (partner >= static_cast<std::size_t>(a)) ++partner;
    PairedExample pair;
    pair.x = a;
    pair.y = static_cast<int>(partner);
    pair.label = binary_preference(mos[static_cast<std::size_t>(a)], mos[partner]);
    pairs.push_back(pair);
  }
  return pairs;
}

std::vector<PairedExample> make_unlabeled_pairs(std::size_t pool_size, std::size_t count,
                                                std::uint64_t seed) {
  if (pool_size < 2) {
    throw std::invalid_argument("make_unlabeled_pairs: need at least 2 unlabeled samples");
  }
  Rng rng(seed);
  std::vector<PairedExample> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t x = rng.uniform_index(pool_size);
    std::size_t y = rng.uniform_index(pool_size - 1);
    if (y >= x) ++y;
    pairs.push_back({static_cast<int>(x), static_cast<int>(y), std::nullopt});
  }
  return pairs;
}

}  // namespace ensq
