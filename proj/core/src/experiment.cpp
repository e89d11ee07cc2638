#include "ensq/experiment.hpp"

#include <iostream>
#include <map>
#include <stdexcept>

#include "ensq/checkpoint.hpp"
#include "ensq/diagnose.hpp"
#include "ensq/io_util.hpp"
#include "ensq/metrics.hpp"

namespace ensq {

namespace {

DiversityVariant variant_from_string(const std::string& name) {
  if (name == "pairwise") return DiversityVariant::kPairwiseFidelity;
  if (name == "variance") return DiversityVariant::kVariance;
  if (name == "to_ensemble") return DiversityVariant::kToEnsemble;
  throw std::runtime_error("unknown diversity variant '" + name +
                           "' (expected pairwise|variance|to_ensemble)");
}

SyntheticSpec synthetic_from(const ConfigFile& config, const std::string& section) {
  SyntheticSpec spec;
  spec.n_samples = config.get_int(section, "n_samples");
  spec.n_unlabeled = config.get_int_or(section, "n_unlabeled", spec.n_samples);
  spec.feature_dim = config.get_int(section, "feature_dim");
  spec.weights = config.get_double_list_or(section, "weights", {});
  spec.nonlinearity =
      monotone_map_from_string(config.get_string_or(section, "nonlinearity", "identity"));
  spec.noise_std = config.get_double_or(section, "noise_std", 0.0);
  spec.ood_fraction = config.get_double_or(section, "ood_fraction", 0.0);
  spec.seed = config.get_u64_or(section, "seed", 0);
  return spec;
}

}  // namespace

TrainConfig train_config_from(const ConfigFile& config) {
  TrainConfig tc;
  tc.arch.input_dim = config.get_int("arch", "input_dim");
  tc.arch.shared_widths = config.get_int_list_or("arch", "shared_widths", {128, 64});
  tc.arch.head_widths = config.get_int_list_or("arch", "head_widths", {32, 1});
  tc.arch.num_heads = config.get_int_or("arch", "num_heads", 8);

  tc.objective.lambda = config.get_double_or("objective", "lambda", 1.0);
  tc.objective.gamma = config.get_double_or("objective", "gamma", 0.06);
  tc.objective.diversity =
      variant_from_string(config.get_string_or("objective", "diversity", "pairwise"));
  tc.objective.include_labeled_in_diversity =
      config.get_bool_or("objective", "include_labeled_in_diversity", true);

  tc.batch_size = config.get_int_or("train", "batch_size", 16);
  tc.epochs = config.get_int_or("train", "epochs", 12);
  tc.initial_lr = config.get_double_or("train", "initial_lr", 1e-4);
  tc.lr_halving = config.get_bool_or("train", "lr_halving", true);
  tc.adam_beta1 = config.get_double_or("train", "adam_beta1", 0.9);
  tc.adam_beta2 = config.get_double_or("train", "adam_beta2", 0.999);
  tc.adam_eps = config.get_double_or("train", "adam_eps", 1e-8);
  tc.grad_clip_norm = config.get_double_or("train", "grad_clip_norm", 0.0);
  const std::string selection = config.get_string_or("train", "selection_metric", "srcc");
  if (selection == "srcc") {
    tc.selection = TrainConfig::SelectionMetric::kSrcc;
  } else if (selection == "plcc") {
    tc.selection = TrainConfig::SelectionMetric::kPlcc;
  } else {
    throw std::runtime_error("unknown selection_metric '" + selection + "'");
  }
  tc.seed = config.get_u64_or("train", "seed", 1);
  return tc;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  return from_config(ConfigFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& config) {
  ExperimentConfig ec;
  if (config.has("synthetic", "n_samples")) {
    ec.synthetic = synthetic_from(config, "synthetic");
  } else {
    ec.labeled_path = config.get_string("data", "labeled");
    ec.unlabeled_path = config.get_string_or("data", "unlabeled", "");
    ec.unlabeled_label_blind = config.get_bool_or("data", "unlabeled_label_blind", true);
  }

  ec.train = train_config_from(config);
  ec.split.repeat_seeds = config.get_u64_list_or("experiment", "split_seeds", {11, 23, 47});
  ec.repeats = config.get_int_or("experiment", "repeats",
                                 static_cast<int>(ec.split.repeat_seeds.size()));
  if (ec.repeats < 1 || ec.repeats > static_cast<int>(ec.split.repeat_seeds.size())) {
    throw std::runtime_error("experiment: repeats must be in [1, number of split seeds]");
  }

  ec.spot_k = config.get_int_or("experiment", "spot_k", 0);
  ec.spot_pool_path = config.get_string_or("experiment", "spot_pool", "");
  if (ec.spot_k > 0 && ec.spot_pool_path.empty()) {
    throw std::runtime_error("experiment: spot_k set but no spot_pool given");
  }

  ec.gmad_levels = config.get_int_or("experiment", "gmad_levels", 0);
  ec.gmad_defender_path = config.get_string_or("experiment", "gmad_defender", "");
  ec.gmad_pool_path = config.get_string_or("experiment", "gmad_pool", "");
  if (ec.gmad_levels > 0 && (ec.gmad_defender_path.empty() || ec.gmad_pool_path.empty())) {
    throw std::runtime_error("experiment: gmad_levels set but defender/pool missing");
  }

  ec.gamma_grid = config.get_double_list_or("sweep", "gamma_grid", {});
  ec.m_grid = config.get_int_list_or("sweep", "m_grid", {});
  return ec;
}

namespace {

struct ResolvedData {
  Dataset labeled;
  Dataset unlabeled;
};

ResolvedData resolve_data(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir) {
  ResolvedData data;
  if (config.synthetic.has_value()) {
    const SyntheticData synth = generate_synthetic(*config.synthetic);
    data.labeled = synth.labeled;
    data.unlabeled = synth.unlabeled;
    save_dataset(synth.labeled, out_dir / "data" / "labeled.tsv");
    save_dataset(synth.unlabeled, out_dir / "data" / "unlabeled.tsv");
    std::vector<ScoreRecord> truth(synth.true_quality.begin(), synth.true_quality.end());
    save_score_file(truth, out_dir / "data" / "truth.tsv");
    write_file_atomic(out_dir / "data" / "meta.tsv", synth.meta_text(*config.synthetic));
  } else {
    data.labeled = load_dataset(config.labeled_path);
    if (!config.unlabeled_path.empty()) {
      data.unlabeled = config.unlabeled_label_blind
                           ? load_dataset_label_blind(config.unlabeled_path)
                           : load_dataset(config.unlabeled_path);
    }
  }
  if (!data.labeled.all_labeled()) {
    throw std::runtime_error("experiment: labeled dataset has samples without MOS");
  }
  return data;
}

void write_eval_report(const EvalReport& report, const std::filesystem::path& path) {
  save_report_file(
      {
          {"srcc", format_double(report.srcc)},
          {"plcc", format_double(report.plcc)},
          {"eta1", format_double(report.fit.eta1)},
          {"eta2", format_double(report.fit.eta2)},
          {"eta3", format_double(report.fit.eta3)},
          {"eta4", format_double(report.fit.eta4)},
          {"fit_converged", report.fit.converged ? "1" : "0"},
          {"fit_residual", format_double(report.fit.residual)},
          {"n", std::to_string(report.n)},
      },
      path);
}

RepeatOutcome run_repeat(const ExperimentConfig& config, const TrainConfig& tc,
                         const ResolvedData& data, int repeat,
                         const std::filesystem::path& rdir) {
  RepeatOutcome outcome;
  const SplitResult parts = split(data.labeled, config.split, repeat);
  const TrainResult trained = train(tc, parts.train, data.unlabeled, parts.val);
  save_checkpoint(trained.params, rdir / "checkpoint.bin");
  save_history(trained.history, rdir / "history.tsv");

  const std::vector<double> preds = predict(trained.params, feature_matrix(parts.test));
  const std::vector<double> test_mos = mos_values(parts.test);
  const EvalReport report = evaluate(preds, test_mos);
  write_eval_report(report, rdir / "eval_test.tsv");

  std::vector<ScoreRecord> scores;
  for (std::size_t i = 0; i < parts.test.size(); ++i) {
    scores.emplace_back(parts.test.samples[i].id, preds[i]);
  }
  save_score_file(scores, rdir / "scores_test.tsv");

  if (config.spot_k > 0) {
    const Dataset pool = load_dataset(config.spot_pool_path);
    const DisagreementRanking ranking = spot_failures(trained.params, pool, config.spot_k);
    std::vector<ScoreRecord> spot;
    for (std::size_t i = 0; i < ranking.ids.size(); ++i) {
      spot.emplace_back(ranking.ids[i], ranking.variances[i]);
    }
    save_score_file(spot, rdir / "spot.tsv");

    if (pool.all_labeled() && config.spot_k >= 3) {
      std::map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < pool.size(); ++i) index[pool.samples[i].id] = i;
      const std::vector<double> pool_preds = predict(trained.params, feature_matrix(pool));
      std::vector<double> sel_preds;
      std::vector<double> sel_mos;
      for (const std::string& id : ranking.ids) {
        const std::size_t i = index.at(id);
        sel_preds.push_back(pool_preds[i]);
        sel_mos.push_back(*pool.samples[i].mos);
      }
      save_report_file({{"srcc_selected", format_double(srcc(sel_preds, sel_mos))},
                        {"k", std::to_string(config.spot_k)}},
                       rdir / "spot_report.tsv");
    }
  }

  if (config.gmad_levels > 0) {
    const Dataset pool = load_dataset_label_blind(config.gmad_pool_path);
    std::map<std::string, double> attacker;
    const std::vector<double> pool_preds = predict(trained.params, feature_matrix(pool));
    for (std::size_t i = 0; i < pool.size(); ++i) {
      attacker[pool.samples[i].id] = pool_preds[i];
    }
    std::map<std::string, double> defender;
    for (const auto& [id, score] : load_score_file(config.gmad_defender_path)) {
      defender[id] = score;
    }
    const GmadResult gmad = gmad_pairs(defender, attacker, config.gmad_levels);
    std::string out;
    for (const GmadLevel& level : gmad.levels) {
      out += std::to_string(level.level) + "\t" + level.top_id + "\t" + level.bottom_id + "\t" +
             format_double(level.gap) + "\n";
    }
    write_file_atomic(rdir / "gmad.tsv", out);
    for (int skipped : gmad.skipped_levels) {
      std::cerr << "warning: gmad level " << skipped << " has fewer than 2 members, omitted\n";
    }
  }

  outcome.ok = true;
  outcome.test_srcc = report.srcc;
  outcome.test_plcc = report.plcc;
  return outcome;
}

ExperimentSummary run_protocol(const ExperimentConfig& config, const TrainConfig& tc,
                               const ResolvedData& data, const std::filesystem::path& dir) {
  ExperimentSummary summary;
  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    const std::filesystem::path rdir = dir / ("repeat_" + std::to_string(repeat));
    RepeatOutcome outcome;
    try {
      outcome = run_repeat(config, tc, data, repeat, rdir);
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
      std::cerr << "warning: repeat " << repeat << " failed: " << e.what() << "\n";
    }
    summary.repeats.push_back(outcome);
  }

  std::vector<std::pair<std::string, std::string>> lines;
  double srcc_sum = 0.0;
  double plcc_sum = 0.0;
  for (std::size_t i = 0; i < summary.repeats.size(); ++i) {
    const RepeatOutcome& r = summary.repeats[i];
    const std::string prefix = "repeat_" + std::to_string(i);
    lines.emplace_back(prefix + "_status", r.ok ? "ok" : ("error: " + r.error));
    if (r.ok) {
      lines.emplace_back(prefix + "_srcc", format_double(r.test_srcc));
      lines.emplace_back(prefix + "_plcc", format_double(r.test_plcc));
      srcc_sum += r.test_srcc;
      plcc_sum += r.test_plcc;
      ++summary.completed;
    }
  }
  if (summary.completed > 0) {
    summary.mean_srcc = srcc_sum / summary.completed;
    summary.mean_plcc = plcc_sum / summary.completed;
    lines.emplace_back("mean_srcc", format_double(summary.mean_srcc));
    lines.emplace_back("mean_plcc", format_double(summary.mean_plcc));
  }
  lines.emplace_back("completed", std::to_string(summary.completed));
  save_report_file(lines, dir / "summary.tsv");
  return summary;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const ResolvedData data = resolve_data(config, out_dir);

  const bool has_sweep = !config.gamma_grid.empty() || !config.m_grid.empty();
  if (!has_sweep) {
    return run_protocol(config, config.train, data, out_dir);
  }

  ExperimentSummary last;
  for (double gamma : config.gamma_grid) {
    TrainConfig tc = config.train;
    tc.objective.gamma = gamma;
    last = run_protocol(config, tc, data, out_dir / ("gamma_" + format_double(gamma)));
  }
  for (int m : config.m_grid) {
    TrainConfig tc = config.train;
    tc.arch.num_heads = m;
    last = run_protocol(config, tc, data, out_dir / ("heads_" + std::to_string(m)));
  }
  return last;
}

}  // namespace ensq
