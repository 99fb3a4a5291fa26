#include "shallowrl/games.hpp"

#include <algorithm>

namespace shallowrl {

namespace {

constexpr int kTopLimit = 0;
constexpr int kBottomLimit = kScreenHeight - MiniPong::kBallSize;
constexpr int kPaddleMaxY = kScreenHeight - MiniPong::kPaddleHeight;

bool overlaps(int a0, int a_len, int b0, int b_len) { return a0 < b0 + b_len && b0 < a0 + a_len; }

}  // namespace

void MiniPong::do_reset(std::uint64_t seed) {
  rng_.seed(seed);
  s_ = {};
  s_.player_y = 0;
  s_.opponent_y = kPaddleMaxY / 2;
  done_ = false;
  serve();
}

void MiniPong::serve() {
  s_.ball_x = kServeX;
  s_.ball_y = kServeMinY + static_cast<int>(uniform_index(rng_, kBottomLimit - kServeMinY + 1));
  s_.ball_vx = 2;
  s_.ball_vy = 1 + static_cast<int>(uniform_index(rng_, 2));
  dirty_ = true;
}

StepOutcome MiniPong::do_step(int action) {
  dirty_ = true;
  if (joystick_up(action)) s_.player_y -= kPlayerSpeed;
  if (joystick_down(action)) s_.player_y += kPlayerSpeed;
  s_.player_y = std::clamp(s_.player_y, 0, kPaddleMaxY);

  if (s_.ball_vx < 0 && s_.ball_x < kScreenWidth / 2) {
    const int target = s_.ball_y + kBallSize / 2 - kPaddleHeight / 2;
    s_.opponent_y += std::clamp(target - s_.opponent_y, -kOpponentSpeed, kOpponentSpeed);
    s_.opponent_y = std::clamp(s_.opponent_y, 0, kPaddleMaxY);
  }

  const int prev_x = s_.ball_x;
  s_.ball_x += s_.ball_vx;
  s_.ball_y += s_.ball_vy;
  if (s_.ball_y < kTopLimit) {
    s_.ball_y = 2 * kTopLimit - s_.ball_y;
    s_.ball_vy = -s_.ball_vy;
  } else if (s_.ball_y > kBottomLimit) {
    s_.ball_y = 2 * kBottomLimit - s_.ball_y;
    s_.ball_vy = -s_.ball_vy;
  }

  // Paddle faces: the player's left edge and the opponent's right edge.
  const int player_face = kPlayerX;
  const int opponent_face = kOpponentX + kPaddleWidth;
  if (s_.ball_vx > 0 && prev_x + kBallSize <= player_face && s_.ball_x + kBallSize > player_face &&
      overlaps(s_.ball_y, kBallSize, s_.player_y, kPaddleHeight)) {
    s_.ball_x = player_face - kBallSize;
    s_.ball_vx = -s_.ball_vx;
    const int offset = (s_.ball_y + kBallSize / 2) - (s_.player_y + kPaddleHeight / 2);
    s_.ball_vy = std::clamp(s_.ball_vy + offset / 4, -3, 3);
  } else if (s_.ball_vx < 0 && prev_x >= opponent_face && s_.ball_x < opponent_face &&
             overlaps(s_.ball_y, kBallSize, s_.opponent_y, kPaddleHeight)) {
    s_.ball_x = opponent_face;
    s_.ball_vx = -s_.ball_vx;
  }

  StepOutcome out;
  if (s_.ball_x >= kScreenWidth) {
    ++s_.opponent_score;
    out.reward = -1.0;
    serve();
  } else if (s_.ball_x + kBallSize <= 0) {
    ++s_.player_score;
    out.reward = 1.0;
    serve();
  }
  done_ = s_.player_score >= kWinningScore || s_.opponent_score >= kWinningScore;
  out.terminal = done_;
  return out;
}

const Frame& MiniPong::screen() {
  if (dirty_) {
    frame_.fill(0);
    frame_.fill_rect(kOpponentX, s_.opponent_y, kPaddleWidth, kPaddleHeight, kOpponentColor);
    frame_.fill_rect(kPlayerX, s_.player_y, kPaddleWidth, kPaddleHeight, kPlayerColor);
    frame_.fill_rect(s_.ball_x, s_.ball_y, kBallSize, kBallSize, kBallColor);
    dirty_ = false;
  }
  return frame_;
}

int MiniCatch::draw_column(Rng& rng) {
  return static_cast<int>(uniform_index(rng, kScreenWidth - kBlockSize + 1));
}

void MiniCatch::do_reset(std::uint64_t seed) {
  rng_.seed(seed);
  s_ = {};
  s_.bucket_x = (kScreenWidth - kBucketWidth) / 2;
  s_.block_x = draw_column(rng_);
  s_.block_y = 0;
  done_ = false;
  dirty_ = true;
}

StepOutcome MiniCatch::do_step(int action) {
  dirty_ = true;
  if (joystick_left(action)) s_.bucket_x -= kBucketSpeed;
  if (joystick_right(action)) s_.bucket_x += kBucketSpeed;
  s_.bucket_x = std::clamp(s_.bucket_x, 0, kScreenWidth - kBucketWidth);

  StepOutcome out;
  s_.block_y += kFallSpeed;
  if (s_.block_y + kBlockSize >= kBucketY) {
    const bool caught = overlaps(s_.block_x, kBlockSize, s_.bucket_x, kBucketWidth);
    out.reward = caught ? 1.0 : -1.0;
    ++s_.drops;
    if (s_.drops >= kDrops) {
      done_ = true;
    } else {
      s_.block_x = draw_column(rng_);
      s_.block_y = 0;
    }
  }
  out.terminal = done_;
  return out;
}

const Frame& MiniCatch::screen() {
  if (dirty_) {
    frame_.fill(0);
    frame_.fill_rect(s_.bucket_x, kBucketY, kBucketWidth, kBucketHeight, kBucketColor);
    if (!done_) frame_.fill_rect(s_.block_x, s_.block_y, kBlockSize, kBlockSize, kBlockColor);
    dirty_ = false;
  }
  return frame_;
}

}  // namespace shallowrl
