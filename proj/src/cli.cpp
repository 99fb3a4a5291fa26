#include "shallowrl/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>

#include "shallowrl/harness.hpp"
#include "shallowrl/wire.hpp"

namespace shallowrl::cli {

namespace {

// Marks flags whose default is the standard training protocol value.
constexpr const char* kDefaultNote = " [protocol default]";

struct Options {
  ExperimentConfig config;
  std::string action_set = "minimal";
  std::string out;
  std::string weights;
  std::string csv_a;
  std::string csv_b;
  double alpha_level = 0.05;
  double seconds = 10.0;
  std::uint64_t max_decisions = 0;
  std::uint64_t frames = 10;
  bool dump_blobs = false;
  int port = 0;
  bool stdio = false;
};

void add_env(CLI::App& cmd, Options& o) {
  cmd.add_option("--env", o.config.env, "minipong, minicatch, blank, tcp:HOST:PORT or exec:COMMAND")
      ->capture_default_str();
}

void add_decision(CLI::App& cmd, Options& o) {
  auto& d = o.config.decision;
  cmd.add_option("--frame-skip", d.frame_skip, std::string("Frames per decision") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--max-frames-per-episode", d.max_frames_per_episode,
                 std::string("Episode cap in raw frames") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--max-noops", d.max_noops, std::string("No-op start range 1..N, 0 disables") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--action-set", o.action_set, std::string("minimal or full") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::IsMember({"minimal", "full"}));
  cmd.add_option("--seed", o.config.seed, "Base seed")->capture_default_str();
}

void add_features(CLI::App& cmd, Options& o) {
  cmd.add_option("--features", o.config.features, "basic, bpros, bprost or blob-prost")
      ->capture_default_str()
      ->check(CLI::IsMember({"basic", "bpros", "bprost", "blob-prost"}));
  cmd.add_option("--blob-s", o.config.blob_tolerance, "Blob linking square size s")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--background", o.config.background_path,
                 "Background model file; sampled from random play when omitted");
  cmd.add_option("--background-samples", o.config.background_samples,
                 std::string("Frames sampled for the background") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_learning(CLI::App& cmd, Options& o) {
  auto& hp = o.config.hp;
  cmd.add_option("--alpha", hp.alpha, std::string("Step size") + kDefaultNote)->capture_default_str();
  cmd.add_option("--gamma", hp.gamma, std::string("Discount") + kDefaultNote)->capture_default_str();
  cmd.add_option("--lambda", hp.lambda, std::string("Trace decay") + kDefaultNote)->capture_default_str();
  cmd.add_option("--epsilon", hp.epsilon, std::string("Exploration rate") + kDefaultNote)->capture_default_str();
  cmd.add_option("--trace-threshold", hp.trace_threshold, "Traces below this are dropped")->capture_default_str();
  cmd.add_flag("--no-bias", [&hp](std::int64_t) { hp.bias = false; }, "Disable the always-on bias feature");
  cmd.add_flag("--clip-reward", o.config.clip_reward, "Clip rewards to their sign while learning");
}

void add_eval(CLI::App& cmd, Options& o, const char* episodes_flag) {
  cmd.add_option(episodes_flag, o.config.eval_episodes, std::string("Evaluation episodes") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--eval-epsilon", o.config.eval_epsilon, "Exploration rate while evaluating")
      ->capture_default_str();
}

void finish_config(Options& o) {
  o.config.decision.action_set = parse_action_set(o.action_set);
  o.config.validate();
}

std::optional<BackgroundModel> background_for(const ExperimentConfig& config) { return resolve_background(config); }

int run_background(Options& o, std::ostream& out) {
  finish_config(o);
  auto model = sample_background(o.config);
  model.save(o.out);
  out << "wrote " << model.width() << "x" << model.height() << " background from " << o.config.background_samples
      << " frames to " << o.out << "\n";
  return kOk;
}

int run_extract(Options& o, std::ostream& out) {
  finish_config(o);
  const FeatureSetKind kind = parse_feature_set(o.config.features);
  auto process = make_decision_process(make_environment(o.config.env), o.config.decision);
  FeatureExtractor extractor(kind, background_for(o.config), o.config.blob_tolerance);
  Rng rng(splitmix64(o.config.seed));
  const auto n_actions = static_cast<std::uint64_t>(process->action_count());
  extractor.begin_episode();
  DecisionPoint point = process->reset(o.config.seed);
  for (std::uint64_t t = 0; t < o.frames; ++t) {
    const ActiveFeatureSet phi = extractor.extract(*point.frame);
    if (o.dump_blobs) {
      for (const auto& b : extractor.last_blobs())
        out << "# blob color=" << int(b.color) << " x=" << b.x_min << ".." << b.x_max << " y=" << b.y_min << ".."
            << b.y_max << " pixels=" << b.pixel_count << "\n";
    }
    out << t << ' ' << phi.size();
    for (FeatureId id : phi) out << ' ' << id;
    out << '\n';
    if (point.terminal) {
      extractor.begin_episode();
      point = process->reset(o.config.seed + t + 1);
    } else {
      point = process->step(static_cast<int>(uniform_index(rng, n_actions)));
    }
  }
  return kOk;
}

void print_summary(std::ostream& out, const ExperimentResult& r) {
  const auto& s = r.summary;
  out << std::setprecision(6);
  out << "trials " << s.trials << "\n";
  out << "mean " << s.mean << "\n";
  out << "stddev " << s.stddev << "\n";
  out << "best " << s.best << " (trial " << r.trials[s.best_trial].trial << ")\n";
  out << "middle " << s.middle << " (trial " << r.trials[s.middle_trial].trial << ")\n";
  out << "worst " << s.worst << "\n";
}

int run_train(Options& o, std::ostream& out) {
  o.config.out_dir = o.out;
  finish_config(o);
  const auto result = run_experiment(o.config);
  print_summary(out, result);
  if (!o.out.empty()) out << "results in " << o.out << "\n";
  return kOk;
}

int run_eval(Options& o, std::ostream& out) {
  finish_config(o);
  LinearQ q = LinearQ::load_file(o.weights);
  const auto episodes = evaluate_policy(o.config, q, background_for(o.config));
  TrialResult tr;
  tr.eval = episodes;
  tr.seed = o.config.seed;
  const std::string csv = results_csv({tr});
  if (o.out.empty()) {
    out << csv;
  } else {
    std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << csv;
    out << "mean " << std::setprecision(6) << tr.eval_mean() << " over " << episodes.size() << " episodes\n";
  }
  return kOk;
}

int run_bench(Options& o, std::ostream& out) {
  finish_config(o);
  const auto r = benchmark_throughput(o.config, o.seconds, o.max_decisions);
  out << std::fixed << std::setprecision(2);
  out << "seconds " << r.seconds << "\n";
  out << "decisions " << r.decisions << "\n";
  out << "decisions_per_second " << r.decisions_per_second << "\n";
  out << "frames_per_second " << r.frames_per_second << "\n";
  out << "mean_active_features " << r.mean_active_features << "\n";
  out << "max_active_features " << r.max_active_features << "\n";
  out << "slots " << r.slot_count << "\n";
  out << "episodes " << r.decisions_per_episode.size() << "\n";
  return kOk;
}

int run_compare(Options& o, std::ostream& out) {
  if (!(o.alpha_level > 0.0 && o.alpha_level < 1.0)) throw std::invalid_argument("--alpha-level must lie in (0, 1)");
  const auto a = read_trial_eval_means(o.csv_a);
  const auto b = read_trial_eval_means(o.csv_b);
  const auto w = welch_t_test(a, b);
  out << std::setprecision(6);
  out << "a: " << a.size() << " trials, mean " << mean(a) << "\n";
  out << "b: " << b.size() << " trials, mean " << mean(b) << "\n";
  out << "t " << w.t << "\n";
  out << "df " << w.df << "\n";
  out << "p " << w.p << "\n";
  out << (w.p < o.alpha_level ? "significant" : "not significant") << " at " << o.alpha_level << "\n";
  return kOk;
}

int run_serve(Options& o, std::ostream& out) {
  auto env = make_environment(o.config.env);
  if (o.stdio) {
    auto stream = ByteStream::stdio();
    serve_environment(*env, stream);
  } else {
    out << "serving " << env->name() << " on 127.0.0.1:" << o.port << std::endl;
    serve_environment_tcp(*env, static_cast<std::uint16_t>(o.port));
  }
  return kOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Shallow reinforcement learning with sparse screen features", "shallowrl");
  app.require_subcommand(1);
  app.set_version_flag("--version", SHALLOWRL_VERSION);
  Options o;

  auto* background = app.add_subcommand("background", "Estimate the background image from random play");
  add_env(*background, o);
  add_decision(*background, o);
  background->add_option("--samples", o.config.background_samples, std::string("Frames to sample") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  background->add_option("--out", o.out, "Output file")->required();

  auto* extract = app.add_subcommand("extract", "Print active feature ids for frames of random play");
  add_env(*extract, o);
  add_decision(*extract, o);
  add_features(*extract, o);
  extract->add_option("--frames", o.frames, "Decisions to print")->capture_default_str();
  extract->add_flag("--dump-blobs", o.dump_blobs, "Also print detected blobs (blob-prost)");

  auto* train = app.add_subcommand("train", "Train and evaluate independent trials");
  add_env(*train, o);
  add_decision(*train, o);
  add_features(*train, o);
  add_learning(*train, o);
  add_eval(*train, o, "--eval-episodes");
  train->add_option("--trials", o.config.trials, std::string("Independent trials") + kDefaultNote)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* episodes = train->add_option("--episodes", o.config.train_episodes, "Training episodes per trial")
                       ->capture_default_str();
  auto* frames = train->add_option("--frames", o.config.train_frames, "Training frames per trial");
  episodes->excludes(frames);
  train->add_option("--workers", o.config.workers, "Parallel trials, 0 for one per core")->capture_default_str();
  train->add_option("--out", o.out, "Output directory for CSV, config and weight snapshots");

  auto* eval = app.add_subcommand("eval", "Evaluate saved weights with learning disabled");
  add_env(*eval, o);
  add_decision(*eval, o);
  add_features(*eval, o);
  add_eval(*eval, o, "--episodes");
  eval->add_option("--weights", o.weights, "Weight snapshot")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", o.out, "CSV output file (stdout when omitted)");

  auto* bench = app.add_subcommand("bench", "Measure learning-loop throughput");
  add_env(*bench, o);
  add_decision(*bench, o);
  add_features(*bench, o);
  add_learning(*bench, o);
  bench->add_option("--seconds", o.seconds, "Wall-clock budget")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--max-decisions", o.max_decisions, "Stop after this many decisions, 0 for no limit");

  auto* compare = app.add_subcommand("compare", "Welch's t-test on per-trial evaluation means");
  compare->add_option("--a", o.csv_a, "First results CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("--b", o.csv_b, "Second results CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("--alpha-level", o.alpha_level, "Significance level (0.025 when running two tests)")
      ->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Expose a built-in game over the emulator wire protocol");
  add_env(*serve, o);
  auto* port = serve->add_option("--port", o.port, "TCP port on 127.0.0.1")->check(CLI::Range(1, 65535));
  auto* stdio = serve->add_flag("--stdio", o.stdio, "Serve on stdin/stdout");
  port->excludes(stdio);

  // The benchmark protocol plays with all 18 actions.
  bench->preparse_callback([&o](std::size_t) { o.action_set = "full"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*background) return run_background(o, out);
    if (*extract) return run_extract(o, out);
    if (*train) return run_train(o, out);
    if (*eval) return run_eval(o, out);
    if (*bench) return run_bench(o, out);
    if (*compare) return run_compare(o, out);
    if (*serve) {
      if (o.port == 0 && !o.stdio) throw std::invalid_argument("serve needs --port or --stdio");
      return run_serve(o, out);
    }
  } catch (const ProtocolError& e) {
    err << "error: " << e.what() << "\n";
    return kProtocol;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace shallowrl::cli
