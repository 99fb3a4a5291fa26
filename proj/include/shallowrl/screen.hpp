#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace shallowrl {

using Color = std::uint8_t;

inline constexpr int kScreenWidth = 160;
inline constexpr int kScreenHeight = 210;
inline constexpr int kNumColors = 128;

/// Raised when image-like data does not satisfy its shape or value contract.
class ScreenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Emulator bytes carry the NTSC palette index in the upper seven bits.
constexpr Color map_raw_palette(std::uint8_t raw) noexcept { return static_cast<Color>(raw >> 1); }

/// A screen of palette indices in [0, 128), row-major.
class Frame {
 public:
  Frame() : Frame(kScreenWidth, kScreenHeight) {}
  Frame(int width, int height, Color fill = 0);
  Frame(int width, int height, std::vector<Color> pixels);

  /// Builds a frame from emulator bytes, halving each one.
  static Frame from_raw(int width, int height, std::span<const std::uint8_t> raw);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  Color at(int x, int y) const noexcept { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, Color c);
  void fill(Color c);
  /// Paints the intersection of the rectangle with the screen; out-of-range parts are clipped.
  void fill_rect(int x, int y, int w, int h, Color c);

  std::span<const Color> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_;
  int height_;
  std::vector<Color> pixels_;
};

/// Per-pixel modal color over a set of sample frames.
class BackgroundModel {
 public:
  explicit BackgroundModel(Frame image) : image_(std::move(image)) {}

  int width() const noexcept { return image_.width(); }
  int height() const noexcept { return image_.height(); }
  std::span<const Color> pixels() const noexcept { return image_.pixels(); }
  const Frame& image() const noexcept { return image_; }

  void save(const std::filesystem::path& path) const;
  static BackgroundModel load(const std::filesystem::path& path);

  friend bool operator==(const BackgroundModel&, const BackgroundModel&) = default;

 private:
  Frame image_;
};

/// Frame after background subtraction: each pixel is a color or absent.
class MaskedFrame {
 public:
  static constexpr Color kAbsent = 0xFF;

  MaskedFrame(int width, int height);
  /// Cells are colors in [0, 128) or kAbsent.
  MaskedFrame(int width, int height, std::vector<Color> cells);
  /// Wraps a frame with nothing masked.
  explicit MaskedFrame(const Frame& frame);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::optional<Color> at(int x, int y) const noexcept {
    Color c = cells_[static_cast<std::size_t>(y) * width_ + x];
    if (c == kAbsent) return std::nullopt;
    return c;
  }
  void set(int x, int y, std::optional<Color> c);

  /// Raw cells; kAbsent marks a subtracted pixel.
  std::span<const Color> cells() const noexcept { return cells_; }
  std::size_t present_count() const noexcept;

 private:
  int width_;
  int height_;
  std::vector<Color> cells_;
};

/// Streaming per-pixel color histogram; finish() yields the mode with ties to the smaller index.
class BackgroundAccumulator {
 public:
  BackgroundAccumulator(int width = kScreenWidth, int height = kScreenHeight);

  void add(const Frame& frame);
  std::size_t sample_count() const noexcept { return samples_; }
  BackgroundModel finish() const;

 private:
  int width_;
  int height_;
  std::size_t samples_ = 0;
  std::vector<std::uint32_t> counts_;
};

BackgroundModel compute_background(std::span<const Frame> samples);

MaskedFrame subtract_background(const Frame& frame, const BackgroundModel& background);

}  // namespace shallowrl
