#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shallowrl/agent.hpp"
#include "shallowrl/env.hpp"
#include "shallowrl/extractor.hpp"
#include "shallowrl/stats.hpp"

namespace shallowrl {

/// Everything that determines an experiment's results. Defaults follow the
/// standard training and evaluation protocol.
struct ExperimentConfig {
  std::string features = "blob-prost";
  std::string env = "minicatch";
  int trials = 24;
  /// Training stops at the first episode boundary past either budget; a zero
  /// budget is unused, and both zero means no training.
  std::uint64_t train_episodes = 5000;
  std::uint64_t train_frames = 0;
  int eval_episodes = 499;
  Hyperparameters hp;
  double eval_epsilon = 0.01;
  bool clip_reward = false;
  DecisionConfig decision;
  int blob_tolerance = kDefaultBlobTolerance;
  std::uint64_t seed = 0;
  /// Background for the Basic-derived feature sets: loaded from this path when
  /// set, otherwise sampled from random play.
  std::string background_path;
  int background_samples = 18000;
  /// Output directory; empty keeps everything in memory.
  std::string out_dir;
  /// Parallel trial workers; 0 picks min(trials, hardware threads).
  int workers = 0;

  void validate() const;
  /// JSON fingerprint of every field plus the library version.
  std::string fingerprint_json() const;
};

struct EpisodeRecord {
  double score = 0.0;
  std::uint64_t frames = 0;
  std::uint64_t decisions = 0;
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> train;
  std::vector<EpisodeRecord> eval;
  std::string weights_path;
  double decisions_per_second = 0.0;
  std::size_t slot_count = 0;

  double eval_mean() const;
};

/// Per-decision hook used by tests and the benchmark; receives the features the
/// agent acted on.
using DecisionObserver = std::function<void(const ActiveFeatureSet&)>;

/// Plays one episode. With learn set, every transition is a Sarsa(lambda)
/// update; otherwise the weights are left untouched.
EpisodeRecord play_episode(DecisionProcess& env, FeatureExtractor& extractor, LinearQ& q, Rng& rng,
                           std::uint64_t episode_seed, bool learn, bool clip_reward = false,
                           const DecisionObserver& observer = {});

/// Background sampled from uniformly random play under the configured wrappers.
BackgroundModel sample_background(const ExperimentConfig& config);

/// Background for the config: loaded, sampled, or none for blob features.
std::optional<BackgroundModel> resolve_background(const ExperimentConfig& config);

/// Trains with seed config.seed + trial_index, freezes the weights, then
/// evaluates. Writes a weight snapshot when config.out_dir is set.
TrialResult run_trial(const ExperimentConfig& config, int trial_index,
                      const std::optional<BackgroundModel>& background);
TrialResult run_trial(const ExperimentConfig& config, int trial_index);

struct ExperimentResult {
  std::vector<TrialResult> trials;
  TrialSummary summary;
};

/// Runs every trial (in parallel workers) and, with out_dir set, writes
/// results.csv, config.json, summary.json and one snapshot per trial.
ExperimentResult run_experiment(const ExperimentConfig& config);

TrialSummary aggregate(const std::vector<TrialResult>& results);

/// Frozen-policy evaluation of a loaded agent.
std::vector<EpisodeRecord> evaluate_policy(const ExperimentConfig& config, LinearQ& q,
                                           const std::optional<BackgroundModel>& background);

/// CSV rows: trial,phase,episode,score,frames.
void write_results_csv(const std::filesystem::path& path, const std::vector<TrialResult>& results);
std::string results_csv(const std::vector<TrialResult>& results);
/// Mean evaluation score per trial, in trial order.
std::vector<double> read_trial_eval_means(const std::filesystem::path& csv_path);
std::string summary_json(const TrialSummary& summary, const std::vector<TrialResult>& results);

struct BenchReport {
  double seconds = 0.0;
  std::uint64_t decisions = 0;
  std::uint64_t raw_frames = 0;
  double decisions_per_second = 0.0;
  /// frame_skip * decisions_per_second.
  double frames_per_second = 0.0;
  double mean_active_features = 0.0;
  std::size_t max_active_features = 0;
  std::size_t slot_count = 0;
  std::vector<std::uint64_t> decisions_per_episode;
};

/// Runs the learning loop for a wall-clock budget (or a decision budget when
/// max_decisions is nonzero, whichever comes first).
BenchReport benchmark_throughput(const ExperimentConfig& config, double seconds, std::uint64_t max_decisions = 0);

}  // namespace shallowrl
