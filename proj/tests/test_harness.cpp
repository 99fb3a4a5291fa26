#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "shallowrl/harness.hpp"

using namespace shallowrl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(std::string features = "blob-prost", std::string env = "minicatch") {
  ExperimentConfig c;
  c.features = std::move(features);
  c.env = std::move(env);
  c.trials = 1;
  c.train_episodes = 3;
  c.eval_episodes = 3;
  c.background_samples = 200;
  c.workers = 1;
  return c;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("shallowrl_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("config validation") {
  auto c = small();
  CHECK_NOTHROW(c.validate());
  c.features = "pixels";
  CHECK_THROWS(c.validate());
  c = small();
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small();
  c.eval_epsilon = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small();
  c.decision.frame_skip = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small();
  c.hp.gamma = 1.5;
  CHECK_THROWS(c.validate());
}

TEST_CASE("fingerprints ignore workers and output location") {
  auto a = small(), b = small();
  b.workers = 4;
  b.out_dir = "/tmp/x";
  CHECK(a.fingerprint_json() == b.fingerprint_json());
  b.seed = 1;
  CHECK(a.fingerprint_json() != b.fingerprint_json());
  CHECK(a.fingerprint_json().find("\"version\"") != std::string::npos);
}

TEST_CASE("a trial without training keeps zero weights and plays randomly") {
  auto c = small();
  c.train_episodes = 0;
  c.eval_episodes = 300;
  const auto r = run_trial(c, 0);
  CHECK(r.train.empty());
  CHECK(r.slot_count == LinearQ(3).slot_count());
  const double ref = oracle::random_policy_mean<oracle::Catch>({kNoop, kRight, kLeft}, 3000, 17);
  CHECK(std::abs(r.eval_mean() - ref) < 1.0);
  for (const auto& e : r.eval) CHECK(e.decisions > 0);
}

TEST_CASE("trials are reproducible and seeded per trial") {
  auto c = small("bpros");
  const auto bg = resolve_background(c);
  REQUIRE(bg.has_value());
  const auto a = run_trial(c, 1, bg);
  const auto b = run_trial(c, 1, bg);
  CHECK(a.seed == c.seed + 1);
  REQUIRE(a.train.size() == 3);
  REQUIRE(a.eval.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.train[i].score == b.train[i].score);
    CHECK(a.train[i].frames == b.train[i].frames);
    CHECK(a.eval[i].score == b.eval[i].score);
  }
  CHECK(a.slot_count == b.slot_count);
  CHECK(a.slot_count > 0);
  c.seed = 1;
  const auto shifted = run_trial(c, 0, bg);
  CHECK(shifted.train[0].frames == a.train[0].frames);
  CHECK(shifted.eval[2].score == a.eval[2].score);
}

TEST_CASE("training budgets") {
  auto c = small("basic");
  c.train_episodes = 0;
  c.train_frames = 1;
  const auto one = run_trial(c, 0);
  CHECK(one.train.size() == 1);
  c.train_frames = 5000;
  const auto r = run_trial(c, 0);
  std::uint64_t frames = 0;
  for (std::size_t i = 0; i + 1 < r.train.size(); ++i) frames += r.train[i].frames;
  CHECK(frames < 5000);
  CHECK(frames + r.train.back().frames >= 5000);
}

TEST_CASE("episode records") {
  auto c = small("blob-prost", "minipong");
  c.train_episodes = 2;
  c.eval_episodes = 1;
  const auto r = run_trial(c, 0);
  for (const auto& e : r.train) {
    CHECK(e.frames <= 18000);
    CHECK(e.decisions * 5 >= e.frames);
    CHECK(e.score >= -5);
    CHECK(e.score <= 5);
  }
}

TEST_CASE("experiments write their outputs") {
  const auto dir = scratch("outputs");
  auto c = small();
  c.trials = 2;
  c.workers = 2;
  c.out_dir = dir.string();
  const auto r = run_experiment(c);
  REQUIRE(r.trials.size() == 2);
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "weights_trial000.bin"));
  CHECK(fs::exists(dir / "weights_trial001.bin"));

  const auto csv = slurp(dir / "results.csv");
  CHECK(csv.rfind("trial,phase,episode,score,frames\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * (3 + 3));
  CHECK(csv == results_csv(r.trials));

  const auto means = read_trial_eval_means(dir / "results.csv");
  REQUIRE(means.size() == 2);
  CHECK(means[0] == doctest::Approx(r.trials[0].eval_mean()));
  CHECK(means[1] == doctest::Approx(r.trials[1].eval_mean()));
  CHECK(r.summary.trials == 2);
  CHECK(r.summary.mean == doctest::Approx((means[0] + means[1]) / 2));

  CHECK(slurp(dir / "config.json") == c.fingerprint_json());

  // Worker count does not change the numbers.
  const auto dir2 = scratch("outputs_serial");
  c.workers = 1;
  c.out_dir = dir2.string();
  run_experiment(c);
  CHECK(slurp(dir / "results.csv") == slurp(dir2 / "results.csv"));
  CHECK(slurp(dir / "weights_trial001.bin") == slurp(dir2 / "weights_trial001.bin"));

  // A saved snapshot evaluates like the trial that produced it.
  auto q = LinearQ::load_file(dir / "weights_trial000.bin");
  auto eval_cfg = c;
  eval_cfg.eval_episodes = 3;
  const auto episodes = evaluate_policy(eval_cfg, q, std::nullopt);
  REQUIRE(episodes.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(episodes[i].score == r.trials[0].eval[i].score);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("results CSV reader rejects malformed files") {
  const auto dir = scratch("csv");
  auto write = [&](const std::string& body) {
    std::ofstream(dir / "r.csv") << body;
    return dir / "r.csv";
  };
  CHECK_THROWS(read_trial_eval_means(dir / "missing.csv"));
  CHECK_THROWS(read_trial_eval_means(write("a,b\n")));
  CHECK_THROWS(read_trial_eval_means(write("trial,phase,episode,score,frames\n0,eval,0,x,5\n")));
  CHECK_THROWS(read_trial_eval_means(write("trial,phase,episode,score,frames\n0,train,0,1,5\n")));
  const auto ok = read_trial_eval_means(write("trial,phase,episode,score,frames\n0,eval,0,1,5\n0,eval,1,2,5\n1,eval,0,-3.5,5\n"));
  REQUIRE(ok.size() == 2);
  CHECK(ok[0] == 1.5);
  CHECK(ok[1] == -3.5);
  fs::remove_all(dir);
}

TEST_CASE("throughput benchmark") {
  auto c = small("blob-prost", "minipong");
  const auto a = benchmark_throughput(c, 30.0, 2000);
  const auto b = benchmark_throughput(c, 30.0, 2000);
  CHECK(a.decisions == 2000);
  CHECK(a.decisions_per_second > 0);
  CHECK(a.frames_per_second == doctest::Approx(5 * a.decisions_per_second));
  CHECK(a.decisions_per_episode == b.decisions_per_episode);
  CHECK(a.slot_count == b.slot_count);
  CHECK(a.max_active_features >= a.mean_active_features);
  CHECK_THROWS(benchmark_throughput(c, 0.0));
}
