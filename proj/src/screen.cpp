#include "shallowrl/screen.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <string>

#include "binary_io.hpp"

namespace shallowrl {

namespace detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace detail

namespace {

constexpr std::string_view kBackgroundMagic = "SABGv001";

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) throw ScreenError("screen dimensions must be positive");
}

void check_color(Color c) {
  if (c >= kNumColors) throw ScreenError("color index " + std::to_string(c) + " outside [0, 128)");
}

}  // namespace

Frame::Frame(int width, int height, Color fill) : width_(width), height_(height) {
  check_dims(width, height);
  check_color(fill);
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

Frame::Frame(int width, int height, std::vector<Color> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * height)
    throw ScreenError("pixel count " + std::to_string(pixels_.size()) + " does not match " + std::to_string(width) +
                      "x" + std::to_string(height));
  for (Color c : pixels_) check_color(c);
}

Frame Frame::from_raw(int width, int height, std::span<const std::uint8_t> raw) {
  std::vector<Color> px(raw.size());
  std::transform(raw.begin(), raw.end(), px.begin(), map_raw_palette);
  return Frame(width, height, std::move(px));
}

void Frame::set(int x, int y, Color c) {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) throw ScreenError("pixel outside screen");
  check_color(c);
  pixels_[static_cast<std::size_t>(y) * width_ + x] = c;
}

void Frame::fill(Color c) {
  check_color(c);
  std::fill(pixels_.begin(), pixels_.end(), c);
}

void Frame::fill_rect(int x, int y, int w, int h, Color c) {
  check_color(c);
  int x0 = std::max(x, 0), x1 = std::min(x + w, width_);
  int y0 = std::max(y, 0), y1 = std::min(y + h, height_);
  if (x0 >= x1) return;
  for (int row = y0; row < y1; ++row) {
    auto begin = pixels_.begin() + static_cast<std::ptrdiff_t>(row) * width_;
    std::fill(begin + x0, begin + x1, c);
  }
}

void BackgroundModel::save(const std::filesystem::path& path) const {
  detail::ByteWriter w;
  w.tag(kBackgroundMagic);
  w.u32(static_cast<std::uint32_t>(width()));
  w.u32(static_cast<std::uint32_t>(height()));
  w.bytes(pixels());
  detail::write_file(path, w.buffer());
}

BackgroundModel BackgroundModel::load(const std::filesystem::path& path) {
  auto data = detail::read_file(path);
  detail::ByteReader r(data);
  r.expect_tag(kBackgroundMagic, "background magic");
  auto width = r.u32("background width");
  auto height = r.u32("background height");
  if (width == 0 || height == 0 || width > 4096 || height > 4096)
    throw detail::DecodeError("implausible background dimensions", r.position());
  auto px = r.bytes(static_cast<std::size_t>(width) * height, "background pixels");
  r.expect_end();
  return BackgroundModel(Frame(static_cast<int>(width), static_cast<int>(height), {px.begin(), px.end()}));
}

MaskedFrame::MaskedFrame(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  cells_.assign(static_cast<std::size_t>(width) * height, kAbsent);
}

MaskedFrame::MaskedFrame(int width, int height, std::vector<Color> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  check_dims(width, height);
  if (cells_.size() != static_cast<std::size_t>(width) * height) throw ScreenError("masked cell count mismatch");
  for (Color c : cells_)
    if (c != kAbsent) check_color(c);
}

MaskedFrame::MaskedFrame(const Frame& frame)
    : width_(frame.width()), height_(frame.height()), cells_(frame.pixels().begin(), frame.pixels().end()) {}

void MaskedFrame::set(int x, int y, std::optional<Color> c) {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) throw ScreenError("pixel outside screen");
  if (c) check_color(*c);
  cells_[static_cast<std::size_t>(y) * width_ + x] = c.value_or(kAbsent);
}

std::size_t MaskedFrame::present_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](Color c) { return c != kAbsent; }));
}

BackgroundAccumulator::BackgroundAccumulator(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  counts_.assign(static_cast<std::size_t>(width) * height * kNumColors, 0);
}

void BackgroundAccumulator::add(const Frame& frame) {
  if (frame.width() != width_ || frame.height() != height_)
    throw ScreenError("background sample has mismatched dimensions");
  auto px = frame.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) ++counts_[i * kNumColors + px[i]];
  ++samples_;
}

BackgroundModel BackgroundAccumulator::finish() const {
  if (samples_ == 0) throw ScreenError("background needs at least one sample frame");
  std::vector<Color> mode(static_cast<std::size_t>(width_) * height_);
  for (std::size_t i = 0; i < mode.size(); ++i) {
    const std::uint32_t* hist = &counts_[i * kNumColors];
    // max_element keeps the first maximum, i.e. the smallest color on ties.
    mode[i] = static_cast<Color>(std::max_element(hist, hist + kNumColors) - hist);
  }
  return BackgroundModel(Frame(width_, height_, std::move(mode)));
}

BackgroundModel compute_background(std::span<const Frame> samples) {
  if (samples.empty()) throw ScreenError("background needs at least one sample frame");
  BackgroundAccumulator acc(samples.front().width(), samples.front().height());
  for (const auto& f : samples) acc.add(f);
  return acc.finish();
}

MaskedFrame subtract_background(const Frame& frame, const BackgroundModel& background) {
  if (frame.width() != background.width() || frame.height() != background.height())
    throw ScreenError("frame and background dimensions differ");
  auto px = frame.pixels();
  auto bg = background.pixels();
  std::vector<Color> cells(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) cells[i] = px[i] == bg[i] ? MaskedFrame::kAbsent : px[i];
  return MaskedFrame(frame.width(), frame.height(), std::move(cells));
}

}  // namespace shallowrl
