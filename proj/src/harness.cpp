#include "shallowrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace shallowrl {

namespace {

using Clock = std::chrono::steady_clock;

// Stream tags keep the episode seeds of different phases disjoint.
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;
constexpr std::uint64_t kAgentStream = 3;
constexpr std::uint64_t kEvalAgentStream = 4;
constexpr std::uint64_t kBackgroundStream = 5;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(base ^ (stream << 56)) + index);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double clipped(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

struct EpisodeLoop {
  DecisionProcess& env;
  FeatureExtractor& extractor;
  LinearQ& q;
  Rng& rng;
  bool learn = false;
  bool clip_reward = false;
  const DecisionObserver* observer = nullptr;

  // Returns false when stop() cut the episode short.
  template <typename Stop>
  bool run(std::uint64_t seed, EpisodeRecord& rec, Stop&& stop) {
    extractor.begin_episode();
    q.reset_traces();
    DecisionPoint point = env.reset(seed);
    if (point.terminal) return true;
    ActiveFeatureSet phi = extractor.extract(*point.frame);
    int action = q.select_action(phi, rng);
    while (true) {
      if (observer && *observer) (*observer)(phi);
      point = env.step(action);
      ++rec.decisions;
      rec.score += point.reward;
      rec.frames = point.frame_counter;
      const double r = clip_reward ? clipped(point.reward) : point.reward;
      if (point.terminal) {
        if (learn) q.sarsa_update({phi, action, r, phi, action, true});
        return true;
      }
      ActiveFeatureSet next = extractor.extract(*point.frame);
      const int next_action = q.select_action(next, rng);
      if (learn) q.sarsa_update({phi, action, r, next, next_action, false});
      phi = std::move(next);
      action = next_action;
      if (stop()) return false;
    }
  }
};

std::unique_ptr<DecisionProcess> open_process(const ExperimentConfig& config) {
  return make_decision_process(make_environment(config.env), config.decision);
}

std::string trial_weights_name(int trial) {
  std::string digits = std::to_string(trial);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "weights_trial" + digits + ".bin";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  parse_feature_set(features);
  if (env.empty()) fail("environment name is empty");
  if (trials < 1) fail("trials must be at least 1");
  if (eval_episodes < 1) fail("eval episodes must be at least 1");
  hp.validate();
  if (!(eval_epsilon >= 0.0 && eval_epsilon <= 1.0)) fail("eval epsilon must lie in [0, 1]");
  if (decision.frame_skip < 1) fail("frame skip must be at least 1");
  if (decision.max_noops < 0) fail("max no-ops must be non-negative");
  if (decision.max_frames_per_episode < 1) fail("episode cap must be at least one frame");
  if (blob_tolerance < 1) fail("blob tolerance must be at least 1");
  if (background_samples < 1) fail("background samples must be at least 1");
  if (workers < 0) fail("workers must be non-negative");
}

std::string ExperimentConfig::fingerprint_json() const {
  nlohmann::ordered_json j;
  j["version"] = SHALLOWRL_VERSION;
  j["features"] = features;
  j["env"] = env;
  j["trials"] = trials;
  j["train_episodes"] = train_episodes;
  j["train_frames"] = train_frames;
  j["eval_episodes"] = eval_episodes;
  j["alpha"] = hp.alpha;
  j["gamma"] = hp.gamma;
  j["lambda"] = hp.lambda;
  j["epsilon"] = hp.epsilon;
  j["trace_threshold"] = hp.trace_threshold;
  j["bias"] = hp.bias;
  j["eval_epsilon"] = eval_epsilon;
  j["clip_reward"] = clip_reward;
  j["frame_skip"] = decision.frame_skip;
  j["max_noops"] = decision.max_noops;
  j["max_frames_per_episode"] = decision.max_frames_per_episode;
  j["action_set"] = std::string(action_set_name(decision.action_set));
  j["blob_tolerance"] = blob_tolerance;
  j["seed"] = seed;
  j["background_path"] = background_path;
  j["background_samples"] = background_samples;
  // Worker count and output location do not influence results.
  return j.dump(2) + "\n";
}

double TrialResult::eval_mean() const {
  if (eval.empty()) throw std::logic_error("trial has no evaluation episodes");
  double sum = 0.0;
  for (const auto& e : eval) sum += e.score;
  return sum / static_cast<double>(eval.size());
}

EpisodeRecord play_episode(DecisionProcess& env, FeatureExtractor& extractor, LinearQ& q, Rng& rng,
                           std::uint64_t episode_seed, bool learn, bool clip_reward,
                           const DecisionObserver& observer) {
  EpisodeRecord rec;
  EpisodeLoop loop{env, extractor, q, rng, learn, clip_reward, &observer};
  loop.run(episode_seed, rec, [] { return false; });
  return rec;
}

BackgroundModel sample_background(const ExperimentConfig& config) {
  auto process = open_process(config);
  Rng rng(derive_seed(config.seed, kBackgroundStream));
  const auto n_actions = static_cast<std::uint64_t>(process->action_count());
  std::optional<BackgroundAccumulator> acc;
  std::uint64_t episode = 0;
  int taken = 0;
  while (taken < config.background_samples) {
    DecisionPoint point = process->reset(derive_seed(config.seed, kBackgroundStream, ++episode));
    while (taken < config.background_samples) {
      if (!acc) acc.emplace(point.frame->width(), point.frame->height());
      acc->add(*point.frame);
      ++taken;
      if (point.terminal) break;
      point = process->step(static_cast<int>(uniform_index(rng, n_actions)));
    }
  }
  return acc->finish();
}

std::optional<BackgroundModel> resolve_background(const ExperimentConfig& config) {
  if (!uses_background(parse_feature_set(config.features))) return std::nullopt;
  if (!config.background_path.empty()) return BackgroundModel::load(config.background_path);
  return sample_background(config);
}

TrialResult run_trial(const ExperimentConfig& config, int trial_index,
                      const std::optional<BackgroundModel>& background) {
  config.validate();
  if (trial_index < 0) throw std::invalid_argument("trial index must be non-negative");
  const FeatureSetKind kind = parse_feature_set(config.features);

  TrialResult result;
  result.trial = trial_index;
  result.seed = config.seed + static_cast<std::uint64_t>(trial_index);

  auto process = open_process(config);
  FeatureExtractor extractor(kind, background, config.blob_tolerance);
  LinearQ q(process->action_count(), config.hp);

  Rng rng(derive_seed(result.seed, kAgentStream));
  EpisodeLoop train{*process, extractor, q, rng, true, config.clip_reward, nullptr};
  std::uint64_t frames = 0;
  std::uint64_t decisions = 0;
  const auto start = Clock::now();
  const bool budgeted = config.train_episodes > 0 || config.train_frames > 0;
  auto exhausted = [&] {
    if (!budgeted) return true;
    if (config.train_episodes > 0 && result.train.size() >= config.train_episodes) return true;
    return config.train_frames > 0 && frames >= config.train_frames;
  };
  while (!exhausted()) {
    EpisodeRecord rec;
    train.run(derive_seed(result.seed, kTrainStream, result.train.size()), rec, [] { return false; });
    frames += rec.frames;
    decisions += rec.decisions;
    result.train.push_back(rec);
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.decisions_per_second = seconds > 0.0 ? static_cast<double>(decisions) / seconds : 0.0;
  result.slot_count = q.slot_count();

  if (!config.out_dir.empty()) {
    const auto path = std::filesystem::path(config.out_dir) / trial_weights_name(trial_index);
    q.save_file(path);
    result.weights_path = path.string();
  }

  q.set_epsilon(config.eval_epsilon);
  Rng eval_rng(derive_seed(result.seed, kEvalAgentStream));
  EpisodeLoop eval{*process, extractor, q, eval_rng, false, config.clip_reward, nullptr};
  result.eval.reserve(static_cast<std::size_t>(config.eval_episodes));
  for (int e = 0; e < config.eval_episodes; ++e) {
    EpisodeRecord rec;
    eval.run(derive_seed(result.seed, kEvalStream, static_cast<std::uint64_t>(e)), rec, [] { return false; });
    result.eval.push_back(rec);
  }
  return result;
}

TrialResult run_trial(const ExperimentConfig& config, int trial_index) {
  return run_trial(config, trial_index, resolve_background(config));
}

std::vector<EpisodeRecord> evaluate_policy(const ExperimentConfig& config, LinearQ& q,
                                           const std::optional<BackgroundModel>& background) {
  config.validate();
  auto process = open_process(config);
  if (process->action_count() != q.action_count())
    throw std::invalid_argument("weights were trained for " + std::to_string(q.action_count()) +
                                " actions but the environment offers " + std::to_string(process->action_count()));
  FeatureExtractor extractor(parse_feature_set(config.features), background, config.blob_tolerance);
  const double saved_epsilon = q.hyperparameters().epsilon;
  q.set_epsilon(config.eval_epsilon);
  Rng rng(derive_seed(config.seed, kEvalAgentStream));
  EpisodeLoop loop{*process, extractor, q, rng, false, config.clip_reward, nullptr};
  std::vector<EpisodeRecord> out;
  for (int e = 0; e < config.eval_episodes; ++e) {
    EpisodeRecord rec;
    loop.run(derive_seed(config.seed, kEvalStream, static_cast<std::uint64_t>(e)), rec, [] { return false; });
    out.push_back(rec);
  }
  q.set_epsilon(saved_epsilon);
  return out;
}

TrialSummary aggregate(const std::vector<TrialResult>& results) {
  if (results.empty()) throw std::invalid_argument("no trial results to aggregate");
  std::vector<double> means;
  means.reserve(results.size());
  for (const auto& r : results) means.push_back(r.eval_mean());
  return summarize_trials(means);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);
  const auto background = resolve_background(config);

  const int hardware = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int workers = std::min(config.trials, config.workers > 0 ? config.workers : hardware);

  ExperimentResult result;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int t = next++; t < config.trials; t = next++) {
      try {
        result.trials[static_cast<std::size_t>(t)] = run_trial(config, t, background);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.trials;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.summary = aggregate(result.trials);
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    write_results_csv(dir / "results.csv", result.trials);
    write_text(dir / "config.json", config.fingerprint_json());
    write_text(dir / "summary.json", summary_json(result.summary, result.trials));
  }
  return result;
}

std::string results_csv(const std::vector<TrialResult>& results) {
  std::ostringstream out;
  out << "trial,phase,episode,score,frames\n";
  for (const auto& r : results) {
    for (std::size_t e = 0; e < r.train.size(); ++e)
      out << r.trial << ",train," << e << ',' << format_double(r.train[e].score) << ',' << r.train[e].frames << '\n';
    for (std::size_t e = 0; e < r.eval.size(); ++e)
      out << r.trial << ",eval," << e << ',' << format_double(r.eval[e].score) << ',' << r.eval[e].frames << '\n';
  }
  return out.str();
}

void write_results_csv(const std::filesystem::path& path, const std::vector<TrialResult>& results) {
  write_text(path, results_csv(results));
}

std::vector<double> read_trial_eval_means(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "trial,phase,episode,score,frames")
    throw std::runtime_error(csv_path.string() + ": missing results header");
  std::map<long, std::pair<double, std::size_t>> sums;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    auto bad = [&] { return std::runtime_error(csv_path.string() + ":" + std::to_string(line_no) + ": malformed row"); };
    if (fields.size() != 5) throw bad();
    long trial = 0;
    double score = 0.0;
    {
      auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), trial);
      if (ec != std::errc() || p != fields[0].data() + fields[0].size()) throw bad();
    }
    {
      auto [p, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), score);
      if (ec != std::errc() || p != fields[3].data() + fields[3].size()) throw bad();
    }
    if (fields[1] == "eval") {
      auto& acc = sums[trial];
      acc.first += score;
      ++acc.second;
    } else if (fields[1] != "train") {
      throw bad();
    }
  }
  if (sums.empty()) throw std::runtime_error(csv_path.string() + ": no evaluation rows");
  std::vector<double> means;
  for (const auto& [trial, acc] : sums) means.push_back(acc.first / static_cast<double>(acc.second));
  return means;
}

std::string summary_json(const TrialSummary& summary, const std::vector<TrialResult>& results) {
  nlohmann::ordered_json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  j["trials"] = summary.trials;
  j["mean"] = num(summary.mean);
  j["stddev"] = num(summary.stddev);
  j["best_trial"] = results.at(summary.best_trial).trial;
  j["best"] = num(summary.best);
  j["middle_trial"] = results.at(summary.middle_trial).trial;
  j["middle"] = num(summary.middle);
  j["worst"] = num(summary.worst);
  auto& per = j["per_trial"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json t;
    t["trial"] = r.trial;
    t["seed"] = r.seed;
    t["eval_mean"] = num(r.eval_mean());
    t["train_episodes"] = r.train.size();
    t["slots"] = r.slot_count;
    t["weights"] = r.weights_path;
    per.push_back(std::move(t));
  }
  return j.dump(2) + "\n";
}

BenchReport benchmark_throughput(const ExperimentConfig& config, double seconds, std::uint64_t max_decisions) {
  config.validate();
  if (!(seconds > 0.0)) throw std::invalid_argument("benchmark duration must be positive");
  auto process = open_process(config);
  FeatureExtractor extractor(parse_feature_set(config.features), resolve_background(config),
                             config.blob_tolerance);
  LinearQ q(process->action_count(), config.hp);
  Rng rng(derive_seed(config.seed, kAgentStream));

  BenchReport report;
  double feature_sum = 0.0;
  DecisionObserver observer = [&](const ActiveFeatureSet& phi) {
    const std::size_t n = q.active_count(phi);
    feature_sum += static_cast<double>(n);
    report.max_active_features = std::max(report.max_active_features, n);
  };
  EpisodeLoop loop{*process, extractor, q, rng, true, config.clip_reward, &observer};

  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
  bool out_of_time = false;
  auto stop = [&] {
    ++report.decisions;
    if (max_decisions > 0 && report.decisions >= max_decisions) out_of_time = true;
    // Reading the clock every decision costs far less than a decision.
    if (Clock::now() >= deadline) out_of_time = true;
    return out_of_time;
  };
  for (std::uint64_t episode = 0; !out_of_time; ++episode) {
    EpisodeRecord rec;
    const bool complete = loop.run(derive_seed(config.seed, kTrainStream, episode), rec, [&] {
      return stop();
    });
    report.raw_frames += rec.frames;
    if (complete) {
      // The terminal step does not pass through stop().
      ++report.decisions;
      report.decisions_per_episode.push_back(rec.decisions);
      if ((max_decisions > 0 && report.decisions >= max_decisions) || Clock::now() >= deadline) break;
    }
  }
  report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  report.decisions_per_second = static_cast<double>(report.decisions) / report.seconds;
  report.frames_per_second = static_cast<double>(process->frame_skip()) * report.decisions_per_second;
  report.mean_active_features = report.decisions > 0 ? feature_sum / static_cast<double>(report.decisions) : 0.0;
  report.slot_count = q.slot_count();
  return report;
}

}  // namespace shallowrl
