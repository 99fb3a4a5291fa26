#include "shallowrl/env.hpp"

#include <algorithm>
#include <stdexcept>

#include "shallowrl/games.hpp"
#include "shallowrl/wire.hpp"

namespace shallowrl {

bool joystick_up(int a) noexcept {
  return a == kUp || a == kUpRight || a == kUpLeft || a == kUpFire || a == kUpRightFire || a == kUpLeftFire;
}
bool joystick_down(int a) noexcept {
  return a == kDown || a == kDownRight || a == kDownLeft || a == kDownFire || a == kDownRightFire ||
         a == kDownLeftFire;
}
bool joystick_right(int a) noexcept {
  return a == kRight || a == kUpRight || a == kDownRight || a == kRightFire || a == kUpRightFire ||
         a == kDownRightFire;
}
bool joystick_left(int a) noexcept {
  return a == kLeft || a == kUpLeft || a == kDownLeft || a == kLeftFire || a == kUpLeftFire || a == kDownLeftFire;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void Environment::reset(std::uint64_t seed) { do_reset(seed); }

StepOutcome Environment::step(int action) {
  if (terminal()) throw std::logic_error("step called on a terminal episode; reset first");
  if (action < 0 || action >= full_action_count())
    throw std::out_of_range("raw action " + std::to_string(action) + " outside the joystick range");
  return do_step(action);
}

NoopStart::NoopStart(std::unique_ptr<Environment> inner, int max_noops)
    : inner_(std::move(inner)), max_noops_(max_noops) {
  if (max_noops < 1) throw std::invalid_argument("max_noops must be at least 1");
}

int NoopStart::draw_noops(std::uint64_t seed, int max_noops) {
  Rng rng(splitmix64(seed ^ 0x6e6f6f70ULL));
  return 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_noops)));
}

void NoopStart::do_reset(std::uint64_t seed) {
  inner_->reset(seed);
  last_noops_ = draw_noops(seed, max_noops_);
  for (int i = 0; i < last_noops_ && !inner_->terminal(); ++i) inner_->step(kNoop);
}

ActionSetKind parse_action_set(std::string_view name) {
  if (name == "minimal") return ActionSetKind::kMinimal;
  if (name == "full") return ActionSetKind::kFull;
  throw std::invalid_argument("unknown action set '" + std::string(name) + "' (expected minimal or full)");
}

std::string_view action_set_name(ActionSetKind kind) { return kind == ActionSetKind::kMinimal ? "minimal" : "full"; }

std::vector<int> action_table(const Environment& env, ActionSetKind kind) {
  if (kind == ActionSetKind::kMinimal) return env.minimal_actions();
  std::vector<int> all(static_cast<std::size_t>(env.full_action_count()));
  for (int a = 0; a < env.full_action_count(); ++a) all[a] = a;
  return all;
}

FrameSkip::FrameSkip(std::unique_ptr<Environment> inner, int frame_skip, std::vector<int> actions)
    : inner_(std::move(inner)), skip_(frame_skip), actions_(std::move(actions)) {
  if (frame_skip < 1) throw std::invalid_argument("frame skip must be at least 1");
  if (actions_.empty()) throw std::invalid_argument("action table is empty");
  for (int a : actions_)
    if (a < 0 || a >= inner_->full_action_count()) throw std::invalid_argument("action table entry out of range");
}

DecisionPoint FrameSkip::reset(std::uint64_t seed) {
  inner_->reset(seed);
  frames_ = 0;
  return {&inner_->screen(), 0.0, inner_->terminal(), frames_};
}

DecisionPoint FrameSkip::step(int action, std::uint64_t frame_budget) {
  if (action < 0 || action >= action_count())
    throw std::out_of_range("agent action " + std::to_string(action) + " outside the action set");
  const int raw = actions_[action];
  DecisionPoint out;
  for (int i = 0; i < skip_; ++i) {
    if (frame_budget == 0) {
      out.terminal = true;
      break;
    }
    auto outcome = inner_->step(raw);
    ++frames_;
    --frame_budget;
    out.reward += outcome.reward;
    if (outcome.terminal) {
      out.terminal = true;
      break;
    }
  }
  out.frame = &inner_->screen();
  out.frame_counter = frames_;
  return out;
}

EpisodeCap::EpisodeCap(std::unique_ptr<DecisionProcess> inner, std::uint64_t max_frames)
    : inner_(std::move(inner)), max_frames_(max_frames) {
  if (max_frames < 1) throw std::invalid_argument("episode cap must be at least one frame");
}

DecisionPoint EpisodeCap::reset(std::uint64_t seed) {
  frames_ = 0;
  return inner_->reset(seed);
}

DecisionPoint EpisodeCap::step(int action, std::uint64_t frame_budget) {
  const std::uint64_t left = max_frames_ - frames_;
  auto out = inner_->step(action, std::min(left, frame_budget));
  frames_ = out.frame_counter;
  if (frames_ >= max_frames_) out.terminal = true;
  return out;
}

std::unique_ptr<DecisionProcess> make_decision_process(std::unique_ptr<Environment> raw,
                                                       const DecisionConfig& config) {
  auto actions = action_table(*raw, config.action_set);
  std::unique_ptr<Environment> started =
      config.max_noops > 0 ? std::make_unique<NoopStart>(std::move(raw), config.max_noops) : std::move(raw);
  auto skipped = std::make_unique<FrameSkip>(std::move(started), config.frame_skip, std::move(actions));
  return std::make_unique<EpisodeCap>(std::move(skipped), config.max_frames_per_episode);
}

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "minipong") return std::make_unique<MiniPong>();
  if (name == "minicatch") return std::make_unique<MiniCatch>();
  if (name == "blank") return std::make_unique<BlankScreen>();
  if (name.starts_with("tcp:")) return connect_wire_environment(name);
  if (name.starts_with("exec:")) return connect_wire_environment(name);
  throw std::invalid_argument("unknown environment '" + std::string(name) +
                              "' (expected minipong, minicatch, blank, tcp:HOST:PORT or exec:COMMAND)");
}

}  // namespace shallowrl
