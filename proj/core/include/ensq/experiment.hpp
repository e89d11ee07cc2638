#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "ensq/config.hpp"
#include "ensq/dataset.hpp"
#include "ensq/synthetic.hpp"
#include "ensq/train.hpp"

namespace ensq {

// A full experiment: resolve the datasets (files or in-run synthesis), run
// the split-train-evaluate protocol over the repeat seeds, optionally rank a
// failure-spotting pool and play gMAD against a defender score file, then
// summarize. Sweep grids re-run the protocol per grid point.
struct ExperimentConfig {
  std::optional<SyntheticSpec> synthetic;  // used when set, else the paths below
  std::filesystem::path labeled_path;
  std::filesystem::path unlabeled_path;      // optional
  bool unlabeled_label_blind = true;         // ignore the MOS column of the unlabeled pool

  TrainConfig train;
  SplitSpec split;
  int repeats = 3;

  int spot_k = 0;                            // 0 disables failure spotting
  std::filesystem::path spot_pool_path;      // rated pool; MOS held out for reporting

  int gmad_levels = 0;                       // 0 disables gMAD
  std::filesystem::path gmad_defender_path;  // defender score file
  std::filesystem::path gmad_pool_path;      // features the trained model attacks

  std::vector<double> gamma_grid;
  std::vector<int> m_grid;

  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig from_config(const ConfigFile& config);
};

// Parses just the [arch]/[objective]/[train] sections; shared by the train
// subcommand and the experiment runner.
TrainConfig train_config_from(const ConfigFile& config);

struct RepeatOutcome {
  bool ok = false;
  std::string error;  // single line, when !ok
  double test_srcc = 0.0;
  double test_plcc = 0.0;
};

struct ExperimentSummary {
  std::vector<RepeatOutcome> repeats;
  double mean_srcc = 0.0;  // over completed repeats
  double mean_plcc = 0.0;
  int completed = 0;
};

ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir);

}  // namespace ensq
