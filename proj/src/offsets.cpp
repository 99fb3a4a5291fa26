#include "shallowrl/offsets.hpp"

#include <algorithm>
#include <string>

#include "shallowrl/screen.hpp"

namespace shallowrl {

OffsetFeature canonicalize_pros(int k1, int k2, int dc, int dr) {
  if (k1 > k2 || (k1 == k2 && (dr < 0 || (dr == 0 && dc < 0)))) return {std::min(k1, k2), std::max(k1, k2), -dc, -dr};
  return {k1, k2, dc, dr};
}

bool is_canonical_pros(const OffsetFeature& f) {
  return f.k1 < f.k2 || (f.k1 == f.k2 && (f.dr > 0 || (f.dr == 0 && f.dc >= 0)));
}

FeatureId pair_feature_id(const OffsetFeature& f, const OffsetRange& range, FeatureId base) {
  if (f.k1 < 0 || f.k1 >= kNumColors || f.k2 < 0 || f.k2 >= kNumColors || f.dc < -range.dc_max ||
      f.dc > range.dc_max || f.dr < -range.dr_max || f.dr > range.dr_max)
    throw FeatureError("pairwise feature outside its offset range");
  return base + (static_cast<FeatureId>(f.k1) * kNumColors + f.k2) * static_cast<FeatureId>(range.count()) +
         static_cast<FeatureId>(range.index(f.dc, f.dr));
}

OffsetFeature decode_pair_feature(FeatureId id, const OffsetRange& range, FeatureId base, PairFamily family) {
  if (id < base || id >= base + range.family_span()) throw FeatureError("id outside the pairwise family");
  FeatureId local = id - base;
  const auto offsets = static_cast<FeatureId>(range.count());
  const auto pair = local / offsets;
  const auto offset = static_cast<int>(local % offsets);
  return {static_cast<int>(pair / kNumColors), static_cast<int>(pair % kNumColors),
          offset % range.width() - range.dc_max, offset / range.width() - range.dr_max, family};
}

namespace {

void check_range(const PresenceGrid& grid, const OffsetRange& range) {
  const auto& g = grid.geometry();
  if (range.dc_max < g.cols - 1 || range.dr_max < g.rows - 1)
    throw FeatureError("offset range cannot hold every block pair of the grid");
}

ActiveFeatureSet finish(std::vector<FeatureId> ids) { return ActiveFeatureSet(std::move(ids)); }

}  // namespace

ActiveFeatureSet pros_features(const PresenceGrid& grid, const OffsetRange& range, FeatureId base) {
  check_range(grid, range);
  auto cells = grid.cells();
  std::vector<FeatureId> ids;
  ids.reserve(cells.size() * (cells.size() + 1) / 2);
  const auto offsets = static_cast<FeatureId>(range.count());
  // Cells are sorted by color, so for i <= j we have k1 <= k2; only equal
  // colors may need the offset flipped.
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& a = cells[i];
    for (std::size_t j = i; j < cells.size(); ++j) {
      const auto& b = cells[j];
      int dc = b.c - a.c;
      int dr = b.r - a.r;
      if (a.color == b.color && (dr < 0 || (dr == 0 && dc < 0))) {
        dc = -dc;
        dr = -dr;
      }
      ids.push_back(base + (static_cast<FeatureId>(a.color) * kNumColors + b.color) * offsets +
                    static_cast<FeatureId>(range.index(dc, dr)));
    }
  }
  return finish(std::move(ids));
}

ActiveFeatureSet prot_features(const PresenceGrid& past, const PresenceGrid& current, const OffsetRange& range,
                               FeatureId base) {
  if (!(past.geometry() == current.geometry())) throw FeatureError("past and current grids differ in geometry");
  check_range(current, range);
  std::vector<FeatureId> ids;
  ids.reserve(past.size() * current.size());
  const auto offsets = static_cast<FeatureId>(range.count());
  for (const auto& p : past.cells()) {
    for (const auto& c : current.cells()) {
      ids.push_back(base + (static_cast<FeatureId>(p.color) * kNumColors + c.color) * offsets +
                    static_cast<FeatureId>(range.index(p.c - c.c, p.r - c.r)));
    }
  }
  return finish(std::move(ids));
}

FeatureSetKind parse_feature_set(std::string_view name) {
  if (name == "basic") return FeatureSetKind::kBasic;
  if (name == "bpros") return FeatureSetKind::kBPros;
  if (name == "bprost") return FeatureSetKind::kBProst;
  if (name == "blob-prost") return FeatureSetKind::kBlobProst;
  throw FeatureError("unknown feature set '" + std::string(name) + "' (expected basic, bpros, bprost or blob-prost)");
}

std::string_view feature_set_name(FeatureSetKind kind) {
  switch (kind) {
    case FeatureSetKind::kBasic: return "basic";
    case FeatureSetKind::kBPros: return "bpros";
    case FeatureSetKind::kBProst: return "bprost";
    case FeatureSetKind::kBlobProst: return "blob-prost";
  }
  return "?";
}

bool uses_background(FeatureSetKind kind) { return kind != FeatureSetKind::kBlobProst; }

namespace {

// Canonical spatial pairs: one per unordered (color, block) pair orientation,
// plus the zero offset for each color.
constexpr std::uint64_t canonical_pros_count(const OffsetRange& range) {
  const std::uint64_t colors = kNumColors;
  return (colors * colors * static_cast<std::uint64_t>(range.count()) - colors) / 2 + colors;
}

}  // namespace

std::uint64_t count_distinct_features(FeatureSetKind kind) {
  constexpr OffsetRange basic_range{15, 13};
  constexpr OffsetRange blob_range{39, 29};
  const std::uint64_t basic = FeatureFamilyLayout::kBasicSpan;
  const std::uint64_t bpros = basic + canonical_pros_count(basic_range);
  switch (kind) {
    case FeatureSetKind::kBasic: return basic;
    case FeatureSetKind::kBPros: return bpros;
    case FeatureSetKind::kBProst: return bpros + basic_range.family_span();
    case FeatureSetKind::kBlobProst:
      return FeatureFamilyLayout::kBlobSpan + canonical_pros_count(blob_range) + blob_range.family_span();
  }
  return 0;
}

std::uint64_t count_distinct_features(std::string_view name) {
  return count_distinct_features(parse_feature_set(name));
}

}  // namespace shallowrl
