#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ensq/matrix.hpp"

namespace ensq {

struct Sample {
  std::string id;
  std::vector<double> features;
  std::optional<double> mos;  // absent for unlabeled samples

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  int feature_dim = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool all_labeled() const;

  bool operator==(const Dataset&) const = default;
};

// Dataset file format: header line "#dim=<D>", then one sample per line,
//   id<TAB>mos-or-dash<TAB>f1,f2,...,fD
// with "-" marking an unlabeled sample. Feature reals are serialized with
// shortest round-trip precision, so save/load is an identity.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Same file, MOS column ignored: for using a rated set as an unlabeled pool.
Dataset load_dataset_label_blind(const std::filesystem::path& path);

Dataset strip_labels(const Dataset& dataset);

Mat feature_matrix(const Dataset& dataset);
std::vector<double> mos_values(const Dataset& dataset);  // throws if any sample is unlabeled

// 60/20/20 split protocol, repeated over a fixed seed triple.
struct SplitSpec {
  std::array<double, 3> fractions{0.6, 0.2, 0.2};
  std::vector<std::uint64_t> repeat_seeds{11, 23, 47};
};

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Seeded shuffle then cut. Parts are disjoint and exhaustive.
SplitResult split(const Dataset& dataset, const SplitSpec& spec, int repeat_index);

}  // namespace ensq
