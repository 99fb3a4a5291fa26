#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "shallowrl/agent.hpp"
#include "shallowrl/screen.hpp"

namespace shallowrl {

inline constexpr int kFullActionCount = 18;

/// Atari joystick actions in emulator order.
enum JoystickAction : int {
  kNoop = 0,
  kFire,
  kUp,
  kRight,
  kLeft,
  kDown,
  kUpRight,
  kUpLeft,
  kDownRight,
  kDownLeft,
  kUpFire,
  kRightFire,
  kLeftFire,
  kDownFire,
  kUpRightFire,
  kUpLeftFire,
  kDownRightFire,
  kDownLeftFire,
};

bool joystick_up(int action) noexcept;
bool joystick_down(int action) noexcept;
bool joystick_left(int action) noexcept;
bool joystick_right(int action) noexcept;

struct StepOutcome {
  double reward = 0.0;
  bool terminal = false;
};

/// A frame-level game. Deterministic given the reset seed and the action
/// sequence; stepping a terminal episode is an error until the next reset.
class Environment {
 public:
  virtual ~Environment() = default;

  void reset(std::uint64_t seed);
  StepOutcome step(int action);

  virtual const Frame& screen() = 0;
  virtual bool terminal() const = 0;
  virtual int full_action_count() const { return kFullActionCount; }
  virtual std::vector<int> minimal_actions() const = 0;
  virtual std::string name() const = 0;

 protected:
  virtual void do_reset(std::uint64_t seed) = 0;
  virtual StepOutcome do_step(int action) = 0;
};

/// Prepends 1..max_noops no-op frames to every episode. The count is drawn
/// from the reset seed, so equal seeds give equal starts.
class NoopStart final : public Environment {
 public:
  NoopStart(std::unique_ptr<Environment> inner, int max_noops);

  int last_noop_count() const noexcept { return last_noops_; }
  static int draw_noops(std::uint64_t seed, int max_noops);

  const Frame& screen() override { return inner_->screen(); }
  bool terminal() const override { return inner_->terminal(); }
  int full_action_count() const override { return inner_->full_action_count(); }
  std::vector<int> minimal_actions() const override { return inner_->minimal_actions(); }
  std::string name() const override { return inner_->name(); }

 private:
  void do_reset(std::uint64_t seed) override;
  StepOutcome do_step(int action) override { return inner_->step(action); }

  std::unique_ptr<Environment> inner_;
  int max_noops_;
  int last_noops_ = 0;
};

enum class ActionSetKind { kMinimal, kFull };

ActionSetKind parse_action_set(std::string_view name);
std::string_view action_set_name(ActionSetKind kind);

/// Agent action index -> raw joystick action.
std::vector<int> action_table(const Environment& env, ActionSetKind kind);

struct DecisionPoint {
  const Frame* frame = nullptr;
  /// Sum of the frame rewards since the previous decision.
  double reward = 0.0;
  bool terminal = false;
  /// Raw frames played since the episode began (no-op starts excluded).
  std::uint64_t frame_counter = 0;
};

/// Decision-level view of an environment, indexed by agent action.
class DecisionProcess {
 public:
  static constexpr std::uint64_t kUnlimited = std::numeric_limits<std::uint64_t>::max();

  virtual ~DecisionProcess() = default;
  virtual DecisionPoint reset(std::uint64_t seed) = 0;
  /// Plays at most frame_budget raw frames; running out of budget is a terminal.
  virtual DecisionPoint step(int action, std::uint64_t frame_budget = kUnlimited) = 0;
  virtual int action_count() const = 0;
  virtual int frame_skip() const = 0;
};

/// Holds each decision for x frames, stopping early on terminal.
class FrameSkip final : public DecisionProcess {
 public:
  FrameSkip(std::unique_ptr<Environment> inner, int frame_skip, std::vector<int> actions);

  DecisionPoint reset(std::uint64_t seed) override;
  DecisionPoint step(int action, std::uint64_t frame_budget = kUnlimited) override;
  int action_count() const override { return static_cast<int>(actions_.size()); }
  int frame_skip() const override { return skip_; }
  const std::vector<int>& actions() const noexcept { return actions_; }
  Environment& environment() noexcept { return *inner_; }

 private:
  std::unique_ptr<Environment> inner_;
  int skip_;
  std::vector<int> actions_;
  std::uint64_t frames_ = 0;
};

/// Ends an episode once max_frames raw frames have been played.
class EpisodeCap final : public DecisionProcess {
 public:
  EpisodeCap(std::unique_ptr<DecisionProcess> inner, std::uint64_t max_frames);

  DecisionPoint reset(std::uint64_t seed) override;
  DecisionPoint step(int action, std::uint64_t frame_budget = kUnlimited) override;
  int action_count() const override { return inner_->action_count(); }
  int frame_skip() const override { return inner_->frame_skip(); }

 private:
  std::unique_ptr<DecisionProcess> inner_;
  std::uint64_t max_frames_;
  std::uint64_t frames_ = 0;
};

struct DecisionConfig {
  int frame_skip = 5;
  int max_noops = 30;
  std::uint64_t max_frames_per_episode = 18000;
  ActionSetKind action_set = ActionSetKind::kMinimal;
};

/// Composes raw env -> no-op start -> frame skip -> episode cap. A max_noops of
/// 0 disables no-op starts.
std::unique_ptr<DecisionProcess> make_decision_process(std::unique_ptr<Environment> raw, const DecisionConfig& config);

/// Built-in game by name (minipong, minicatch, blank) or an emulator behind the
/// wire protocol (tcp:HOST:PORT or exec:COMMAND).
std::unique_ptr<Environment> make_environment(std::string_view name);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace shallowrl
