#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "shallowrl/offsets.hpp"
#include "shallowrl/screen.hpp"

using namespace shallowrl;
using L = FeatureFamilyLayout;

namespace {

MaskedFrame sparse_masked(std::mt19937_64& rng, int pixels, int colors = 128) {
  MaskedFrame m(kScreenWidth, kScreenHeight);
  for (int i = 0; i < pixels; ++i)
    m.set(static_cast<int>(rng() % kScreenWidth), static_cast<int>(rng() % kScreenHeight),
          static_cast<Color>(rng() % colors));
  return m;
}

std::set<oracle::Cell> decode_basic(const ActiveFeatureSet& s) {
  std::set<oracle::Cell> out;
  for (auto id : s) out.insert(oracle::decode_basic(id, L::kBasicBase, 16));
  return out;
}

std::set<oracle::Pair> decode_pairs(const ActiveFeatureSet& s, FeatureId base, int cols, int rows) {
  std::set<oracle::Pair> out;
  for (auto id : s) out.insert(oracle::decode_pair(id, base, cols, rows));
  return out;
}

PresenceGrid grid_of(const std::set<oracle::Cell>& cells, GridGeometry g = basic_geometry()) {
  std::vector<GridCell> v;
  for (const auto& [k, c, r] : cells)
    v.push_back({static_cast<std::uint8_t>(k), static_cast<std::uint16_t>(c), static_cast<std::uint16_t>(r)});
  return PresenceGrid(g, std::move(v));
}

}  // namespace

TEST_CASE("active feature sets are sorted and unique") {
  ActiveFeatureSet s{9, 3, 3, 7};
  CHECK(std::vector<FeatureId>(s.begin(), s.end()) == std::vector<FeatureId>{3, 7, 9});
  CHECK(s.contains(7));
  CHECK_FALSE(s.contains(8));
  CHECK_THROWS_AS(ActiveFeatureSet::from_sorted({1, 1}), FeatureError);
  CHECK_THROWS_AS(ActiveFeatureSet::from_sorted({2, 1}), FeatureError);
  ActiveFeatureSet t{10, 11};
  s.append(t);
  CHECK(s.size() == 5);
  CHECK_THROWS_AS(s.append(ActiveFeatureSet{11}), FeatureError);
}

TEST_CASE("presence grid over the basic geometry") {
  SUBCASE("all masked") {
    CHECK(build_presence_grid(MaskedFrame(kScreenWidth, kScreenHeight), basic_geometry()).empty());
  }
  SUBCASE("single pixel") {
    MaskedFrame m(kScreenWidth, kScreenHeight);
    m.set(12, 31, 3);
    const auto g = build_presence_grid(m, basic_geometry());
    REQUIRE(g.size() == 1);
    CHECK(g.contains(3, 1, 2));
    CHECK(g.occupied(3).size() == 1);
    CHECK(g.occupied(4).empty());
  }
  SUBCASE("uniform frame without subtraction") {
    const auto g = build_presence_grid(MaskedFrame(Frame(kScreenWidth, kScreenHeight, 0)), basic_geometry());
    CHECK(g.occupied(0).size() == 224);
  }
  SUBCASE("geometry must tile the screen") {
    CHECK_THROWS_AS(build_presence_grid(MaskedFrame(100, 100), basic_geometry()), FeatureError);
  }
}

TEST_CASE("basic feature ids") {
  const auto g = basic_geometry();
  CHECK(basic_feature_id(0, 0, 0, g) == 0);
  CHECK(basic_feature_id(15, 13, 127, g) == 28671);
  CHECK(basic_feature_id(1, 2, 3, g) == 4227);
  CHECK_THROWS_AS(basic_feature_id(16, 0, 0, g), FeatureError);
  CHECK_THROWS_AS(basic_feature_id(0, 0, 128, g), FeatureError);
  // Bijective onto [0, 28672).
  std::vector<bool> hit(28672, false);
  for (int r = 0; r < 14; ++r)
    for (int c = 0; c < 16; ++c)
      for (int k = 0; k < 128; ++k) {
        const auto id = basic_feature_id(c, r, k, g);
        REQUIRE(id < hit.size());
        CHECK_FALSE(hit[id]);
        hit[id] = true;
      }
}

TEST_CASE("basic features match a tile-by-tile oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = sparse_masked(rng, static_cast<int>(rng() % 300), trial % 2 ? 128 : 4);
    const auto s = basic_features(build_presence_grid(m, basic_geometry()));
    CHECK(decode_basic(s) == oracle::presence(m, 10, 15));
    CHECK(s.size() <= 28672);
  }
  MaskedFrame single(kScreenWidth, kScreenHeight);
  single.set(12, 31, 3);
  CHECK(basic_features(build_presence_grid(single, basic_geometry())) == ActiveFeatureSet{4227});
  CHECK(basic_features(PresenceGrid(basic_geometry())).empty());
}

TEST_CASE("basic features ignore pixel order within a tile") {
  MaskedFrame a(kScreenWidth, kScreenHeight);
  MaskedFrame b(kScreenWidth, kScreenHeight);
  a.set(20, 30, 5);
  a.set(29, 44, 6);
  b.set(29, 44, 5);
  b.set(20, 30, 6);
  CHECK(basic_features(build_presence_grid(a, basic_geometry())) ==
        basic_features(build_presence_grid(b, basic_geometry())));
}

TEST_CASE("pair canonicalization") {
  CHECK(canonicalize_pros(2, 1, -4, 0) == OffsetFeature{1, 2, 4, 0});
  CHECK(canonicalize_pros(5, 5, -3, 0) == OffsetFeature{5, 5, 3, 0});
  CHECK(canonicalize_pros(5, 5, 0, 0) == OffsetFeature{5, 5, 0, 0});
  CHECK(canonicalize_pros(5, 5, 2, -1) == OffsetFeature{5, 5, -2, 1});
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const int k1 = static_cast<int>(rng() % 4), k2 = static_cast<int>(rng() % 4);
    const int dc = static_cast<int>(rng() % 31) - 15, dr = static_cast<int>(rng() % 27) - 13;
    const auto f = canonicalize_pros(k1, k2, dc, dr);
    CHECK(is_canonical_pros(f));
    CHECK(canonicalize_pros(f.k1, f.k2, f.dc, f.dr) == f);
    CHECK(canonicalize_pros(k2, k1, -dc, -dr) == f);
    const auto o = oracle::canonical(k1, k2, dc, dr);
    CHECK(oracle::Pair{f.k1, f.k2, f.dc, f.dr} == o);
  }
}

TEST_CASE("pair ids round-trip and stay in range") {
  const OffsetRange range{15, 13};
  CHECK(range.count() == 837);
  const OffsetFeature lo{0, 0, -15, -13};
  const OffsetFeature hi{127, 127, 15, 13};
  CHECK(pair_feature_id(lo, range, 100) == 100);
  CHECK(pair_feature_id(hi, range, 100) == 100 + 128ull * 128 * 837 - 1);
  CHECK_THROWS_AS(pair_feature_id({0, 0, 16, 0}, range, 0), FeatureError);
  CHECK_THROWS_AS(pair_feature_id({128, 0, 0, 0}, range, 0), FeatureError);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    const OffsetFeature f{static_cast<int>(rng() % 128), static_cast<int>(rng() % 128),
                          static_cast<int>(rng() % 31) - 15, static_cast<int>(rng() % 27) - 13};
    const auto id = pair_feature_id(f, range, L::kBProsBase);
    CHECK(decode_pair_feature(id, range, L::kBProsBase, PairFamily::kSpatial) == f);
    const auto o = oracle::decode_pair(id, L::kBProsBase, 16, 14);
    CHECK(oracle::Pair{f.k1, f.k2, f.dc, f.dr} == o);
  }
}

TEST_CASE("family id ranges are disjoint and ordered") {
  CHECK(L::kBProsBase == 28672);
  CHECK(L::kBProtBase == L::kBProsBase + 128ull * 128 * 837);
  CHECK(L::kBlobBase == L::kBProtBase + 128ull * 128 * 837);
  CHECK(L::kBlobProsBase == L::kBlobBase + 40 * 30 * 128);
  CHECK(L::kBlobProtBase == L::kBlobProsBase + 128ull * 128 * 79 * 59);
  CHECK(L::kBiasId == L::kBlobProtBase + 128ull * 128 * 79 * 59);
}

TEST_CASE("spatial pairs") {
  const auto range = OffsetRange::for_geometry(basic_geometry());
  CHECK(pros_features(PresenceGrid(basic_geometry()), range, L::kBProsBase).empty());
  const auto single = pros_features(grid_of({{3, 1, 2}}), range, L::kBProsBase);
  CHECK(decode_pairs(single, L::kBProsBase, 16, 14) == std::set<oracle::Pair>{{3, 3, 0, 0}});

  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::set<oracle::Cell> cells;
    const int n = static_cast<int>(rng() % 21);
    for (int i = 0; i < n; ++i)
      cells.insert({static_cast<int>(rng() % (trial % 3 ? 3 : 128)), static_cast<int>(rng() % 16),
                    static_cast<int>(rng() % 14)});
    const auto s = pros_features(grid_of(cells), range, L::kBProsBase);
    const auto decoded = decode_pairs(s, L::kBProsBase, 16, 14);
    CHECK(decoded == oracle::pros(cells));
    for (const auto& p : decoded) CHECK(is_canonical_pros({p.k1, p.k2, p.dc, p.dr}));
    // Every occupied cell's self pair is present.
    for (const auto& [k, c, r] : cells) CHECK(decoded.count({k, k, 0, 0}) == 1);
    CHECK(s.size() <= 6856768u);
  }
}

TEST_CASE("canonical spatial pairs of two colors on a 3x3 grid") {
  // Every canonical tuple is produced by some placement, so enumerate all.
  std::set<oracle::Pair> all;
  for (int k1 = 0; k1 < 2; ++k1)
    for (int k2 = 0; k2 < 2; ++k2)
      for (int dc = -2; dc <= 2; ++dc)
        for (int dr = -2; dr <= 2; ++dr) all.insert(oracle::canonical(k1, k2, dc, dr));
  CHECK(all.size() == 51);
  std::set<std::tuple<int, int, int, int>> mine;
  for (int k1 = 0; k1 < 2; ++k1)
    for (int k2 = 0; k2 < 2; ++k2)
      for (int dc = -2; dc <= 2; ++dc)
        for (int dr = -2; dr <= 2; ++dr) {
          const auto f = canonicalize_pros(k1, k2, dc, dr);
          mine.insert({f.k1, f.k2, f.dc, f.dr});
        }
  CHECK(mine.size() == 51);

  // The same count from the extractor itself: union over every two-cell grid.
  const GridGeometry g{3, 3, 1, 1, 0};
  const auto range = OffsetRange::for_geometry(g);
  std::set<FeatureId> ids;
  for (int a = 0; a < 18; ++a)
    for (int b = 0; b < 18; ++b) {
      std::vector<GridCell> cells{{static_cast<std::uint8_t>(a / 9), static_cast<std::uint16_t>(a % 3),
                                   static_cast<std::uint16_t>(a % 9 / 3)},
                                  {static_cast<std::uint8_t>(b / 9), static_cast<std::uint16_t>(b % 3),
                                   static_cast<std::uint16_t>(b % 9 / 3)}};
      for (auto id : pros_features(PresenceGrid(g, cells), range, 0)) ids.insert(id);
    }
  CHECK(ids.size() == 51);
}

TEST_CASE("temporal pairs") {
  const auto range = OffsetRange::for_geometry(basic_geometry());
  CHECK(prot_features(PresenceGrid(basic_geometry()), grid_of({{1, 1, 1}}), range, L::kBProtBase).empty());
  const auto one = prot_features(grid_of({{7, 4, 4}}), grid_of({{7, 5, 4}}), range, L::kBProtBase);
  CHECK(decode_pairs(one, L::kBProtBase, 16, 14) == std::set<oracle::Pair>{{7, 7, -1, 0}});

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::set<oracle::Cell> past, now;
    for (int i = 0, n = static_cast<int>(rng() % 15); i < n; ++i)
      past.insert({static_cast<int>(rng() % 5), static_cast<int>(rng() % 16), static_cast<int>(rng() % 14)});
    for (int i = 0, n = static_cast<int>(rng() % 15); i < n; ++i)
      now.insert({static_cast<int>(rng() % 5), static_cast<int>(rng() % 16), static_cast<int>(rng() % 14)});
    const auto s = prot_features(grid_of(past), grid_of(now), range, L::kBProtBase);
    CHECK(decode_pairs(s, L::kBProtBase, 16, 14) == oracle::prot(past, now));
    // A grid paired with itself contains every zero-offset self pair.
    const auto self = decode_pairs(prot_features(grid_of(now), grid_of(now), range, L::kBProtBase),
                                   L::kBProtBase, 16, 14);
    for (const auto& [k, c, r] : now) CHECK(self.count({k, k, 0, 0}) == 1);
  }
  CHECK_THROWS_AS(prot_features(PresenceGrid(basic_geometry()), PresenceGrid(blob_geometry()), range, 0),
                  FeatureError);
}

TEST_CASE("feature set names and sizes") {
  CHECK(count_distinct_features("basic") == 28672u);
  CHECK(count_distinct_features("bpros") == 6885440u);
  CHECK(count_distinct_features("bprost") == 20598848u);
  CHECK(count_distinct_features("blob-prost") == 114702400u);
  // Independent arithmetic for the canonical spatial pair count.
  CHECK((837ull * 128 * 128 - 128) / 2 + 128 == 6856768u);
  CHECK(parse_feature_set("bprost") == FeatureSetKind::kBProst);
  CHECK(feature_set_name(FeatureSetKind::kBlobProst) == "blob-prost");
  CHECK_THROWS_AS(parse_feature_set("prost"), FeatureError);
  CHECK_FALSE(uses_background(FeatureSetKind::kBlobProst));
  CHECK(uses_background(FeatureSetKind::kBPros));
}
