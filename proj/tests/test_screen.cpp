#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "shallowrl/screen.hpp"

using namespace shallowrl;

namespace {

Frame random_frame(std::mt19937_64& rng, int colors = 128) {
  std::vector<Color> px(kScreenWidth * kScreenHeight);
  for (auto& p : px) p = static_cast<Color>(rng() % colors);
  return Frame(kScreenWidth, kScreenHeight, std::move(px));
}

std::filesystem::path temp_path(const char* name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("raw palette bytes are halved") {
  CHECK(map_raw_palette(0) == 0);
  CHECK(map_raw_palette(255) == 127);
  CHECK(map_raw_palette(34) == 17);
  for (int b = 0; b < 256; ++b) CHECK(map_raw_palette(static_cast<std::uint8_t>(b)) < kNumColors);
}

TEST_CASE("frames validate their contents") {
  CHECK_THROWS_AS(Frame(0, 5), ScreenError);
  CHECK_THROWS_AS(Frame(2, 2, std::vector<Color>{1, 2, 3}), ScreenError);
  CHECK_THROWS_AS(Frame(1, 1, std::vector<Color>{128}), ScreenError);
  Frame f(4, 3);
  CHECK_THROWS_AS(f.set(4, 0, 1), ScreenError);
  f.fill_rect(-2, -2, 4, 4, 9);
  CHECK(f.at(0, 0) == 9);
  CHECK(f.at(1, 1) == 9);
  CHECK(f.at(2, 2) == 0);
  const std::uint8_t raw[] = {2, 4, 255, 0};
  const Frame g = Frame::from_raw(2, 2, raw);
  CHECK(g.at(0, 0) == 1);
  CHECK(g.at(0, 1) == 127);
}

TEST_CASE("background is the per-pixel mode") {
  SUBCASE("unanimous") {
    std::vector<Frame> fs(3, Frame(kScreenWidth, kScreenHeight, 5));
    const auto bg = compute_background(fs);
    CHECK(std::all_of(bg.pixels().begin(), bg.pixels().end(), [](Color c) { return c == 5; }));
  }
  SUBCASE("majority") {
    std::vector<Frame> fs{Frame(1, 1, 2), Frame(1, 1, 2), Frame(1, 1, 7)};
    CHECK(compute_background(fs).pixels()[0] == 2);
  }
  SUBCASE("ties go to the smaller color") {
    std::vector<Frame> fs{Frame(1, 1, 7), Frame(1, 1, 2)};
    CHECK(compute_background(fs).pixels()[0] == 2);
  }
  SUBCASE("no samples") { CHECK_THROWS_AS(compute_background({}), ScreenError); }
  SUBCASE("mismatched sizes") {
    std::vector<Frame> fs{Frame(1, 1, 7), Frame(2, 1, 2)};
    CHECK_THROWS_AS(compute_background(fs), ScreenError);
  }
}

TEST_CASE("background matches a counting oracle and ignores sample order") {
  std::mt19937_64 rng(11);
  std::vector<Frame> fs;
  for (int i = 0; i < 9; ++i) fs.push_back(random_frame(rng, 4));
  const auto bg = compute_background(fs);
  for (std::size_t p = 0; p < bg.pixels().size(); p += 97) {
    std::array<int, 4> counts{};
    for (const auto& f : fs) ++counts[f.pixels()[p]];
    const auto best = std::max_element(counts.begin(), counts.end()) - counts.begin();
    CHECK(bg.pixels()[p] == best);
  }
  std::shuffle(fs.begin(), fs.end(), rng);
  CHECK(compute_background(fs) == bg);
}

TEST_CASE("subtraction masks pixels equal to the background") {
  std::mt19937_64 rng(3);
  const Frame f = random_frame(rng);
  SUBCASE("a frame is its own background") {
    std::vector<Frame> one{f};
    CHECK(subtract_background(f, compute_background(one)).present_count() == 0);
  }
  SUBCASE("single differing pixel") {
    Frame g(kScreenWidth, kScreenHeight, 0);
    g.set(17, 40, 9);
    const auto m = subtract_background(g, BackgroundModel(Frame(kScreenWidth, kScreenHeight, 0)));
    CHECK(m.present_count() == 1);
    CHECK(m.at(17, 40) == std::optional<Color>(9));
  }
  SUBCASE("count equals the number of differing pixels") {
    const Frame bg = random_frame(rng, 3);
    std::size_t differing = 0;
    for (std::size_t i = 0; i < f.size(); ++i) differing += f.pixels()[i] != bg.pixels()[i];
    const auto m = subtract_background(f, BackgroundModel(bg));
    CHECK(m.present_count() == differing);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const bool kept = m.cells()[i] != MaskedFrame::kAbsent;
      CHECK(kept == (f.pixels()[i] != bg.pixels()[i]));
      if (kept) CHECK(m.cells()[i] == f.pixels()[i]);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(subtract_background(f, BackgroundModel(Frame(10, 10))), ScreenError);
  }
}

TEST_CASE("background files round-trip and reject corruption") {
  std::mt19937_64 rng(5);
  const BackgroundModel bg(random_frame(rng));
  const auto path = temp_path("shallowrl_bg_test.bin");
  bg.save(path);
  CHECK(BackgroundModel::load(path) == bg);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << b;
  };
  write("XXXX" + bytes.substr(4));
  CHECK_THROWS(BackgroundModel::load(path));
  write(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS(BackgroundModel::load(path));
  write(bytes + "z");
  CHECK_THROWS(BackgroundModel::load(path));
  std::filesystem::remove(path);
  CHECK_THROWS(BackgroundModel::load(path));
}

TEST_CASE("accumulator streams like the batch version") {
  std::mt19937_64 rng(8);
  std::vector<Frame> fs;
  BackgroundAccumulator acc;
  for (int i = 0; i < 5; ++i) {
    fs.push_back(random_frame(rng, 6));
    acc.add(fs.back());
  }
  CHECK(acc.sample_count() == 5);
  CHECK(acc.finish() == compute_background(fs));
  CHECK_THROWS_AS(acc.add(Frame(3, 3)), ScreenError);
}
