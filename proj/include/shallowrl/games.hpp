#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shallowrl/env.hpp"

namespace shallowrl {

/// Two-paddle tennis on a 160x210 screen with a color 0 background.
///
/// The player paddle (color 10, 4x24) sits at x = 150, starts at the top and
/// moves 4 px per frame on any up/down joystick action. The opponent paddle
/// (color 20) sits at x = 6 and only chases the ball, at 2 px per frame, while
/// the ball is in its half and heading its way. The ball (color 30, 2x2) moves
/// with integer velocity, reflects off the top and bottom edges, and picks up
/// vertical spin from where it strikes the player paddle.
///
/// Every rally is served from x = 40 toward the player, heading down at 1 or 2
/// px per frame from a seeded height in the lower two thirds, so it always
/// arrives below the paddle's starting position. A miss scores +1 or -1 and the
/// episode ends when either side reaches 5 points.
class MiniPong final : public Environment {
 public:
  static constexpr Color kPlayerColor = 10;
  static constexpr Color kOpponentColor = 20;
  static constexpr Color kBallColor = 30;
  static constexpr int kPaddleWidth = 4;
  static constexpr int kPaddleHeight = 24;
  static constexpr int kPlayerX = 150;
  static constexpr int kOpponentX = 6;
  static constexpr int kBallSize = 2;
  static constexpr int kPlayerSpeed = 4;
  static constexpr int kOpponentSpeed = 2;
  static constexpr int kWinningScore = 5;
  static constexpr int kServeX = 40;
  static constexpr int kServeMinY = 60;

  struct State {
    int player_y;
    int opponent_y;
    int ball_x;
    int ball_y;
    int ball_vx;
    int ball_vy;
    int player_score;
    int opponent_score;
  };

  const Frame& screen() override;
  bool terminal() const override { return done_; }
  std::vector<int> minimal_actions() const override { return {kNoop, kUp, kDown}; }
  std::string name() const override { return "minipong"; }

  const State& state() const noexcept { return s_; }

 private:
  void do_reset(std::uint64_t seed) override;
  StepOutcome do_step(int action) override;
  void serve();

  Rng rng_;
  State s_{};
  bool done_ = true;
  bool dirty_ = true;
  Frame frame_;
};

/// A 2x2 block (color 40) falls 4 px per frame from a seeded column; the
/// player's 16x4 bucket (color 50) at y = 200 moves 4 px per frame on any
/// left/right joystick action. Each drop scores +1 if caught and -1 if missed;
/// the episode ends after 20 drops.
class MiniCatch final : public Environment {
 public:
  static constexpr Color kBlockColor = 40;
  static constexpr Color kBucketColor = 50;
  static constexpr int kBlockSize = 2;
  static constexpr int kFallSpeed = 4;
  static constexpr int kBucketWidth = 16;
  static constexpr int kBucketHeight = 4;
  static constexpr int kBucketY = 200;
  static constexpr int kBucketSpeed = 4;
  static constexpr int kDrops = 20;

  struct State {
    int bucket_x;
    int block_x;
    int block_y;
    int drops;
  };

  const Frame& screen() override;
  bool terminal() const override { return done_; }
  std::vector<int> minimal_actions() const override { return {kNoop, kRight, kLeft}; }
  std::string name() const override { return "minicatch"; }

  const State& state() const noexcept { return s_; }
  /// Column of the next block for a given game rng; exposed for oracles.
  static int draw_column(Rng& rng);

 private:
  void do_reset(std::uint64_t seed) override;
  StepOutcome do_step(int action) override;

  Rng rng_;
  State s_{};
  bool done_ = true;
  bool dirty_ = true;
  Frame frame_;
};

/// A screen that never changes and never ends; useful for plumbing checks.
class BlankScreen final : public Environment {
 public:
  explicit BlankScreen(Color fill = 0) : frame_(kScreenWidth, kScreenHeight, fill) {}

  const Frame& screen() override { return frame_; }
  bool terminal() const override { return false; }
  std::vector<int> minimal_actions() const override { return {kNoop}; }
  std::string name() const override { return "blank"; }

 private:
  void do_reset(std::uint64_t) override {}
  StepOutcome do_step(int) override { return {}; }

  Frame frame_;
};

}  // namespace shallowrl
