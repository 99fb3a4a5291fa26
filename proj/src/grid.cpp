#include <algorithm>
#include <string>

#include "shallowrl/features.hpp"
#include "shallowrl/offsets.hpp"
#include "shallowrl/screen.hpp"

namespace shallowrl {

ActiveFeatureSet::ActiveFeatureSet(std::vector<FeatureId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

ActiveFeatureSet ActiveFeatureSet::from_sorted(std::vector<FeatureId> ids) {
  if (std::adjacent_find(ids.begin(), ids.end(), std::greater_equal<>()) != ids.end())
    throw FeatureError("feature ids are not strictly increasing");
  ActiveFeatureSet out;
  out.ids_ = std::move(ids);
  return out;
}

bool ActiveFeatureSet::contains(FeatureId id) const noexcept {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

void ActiveFeatureSet::append(const ActiveFeatureSet& later) {
  if (later.empty()) return;
  if (!ids_.empty() && later.ids_.front() <= ids_.back())
    throw FeatureError("appended feature ids must follow the existing ones");
  ids_.insert(ids_.end(), later.ids_.begin(), later.ids_.end());
}

FeatureId GridGeometry::span() const noexcept { return static_cast<FeatureId>(cols) * rows * kNumColors; }

GridGeometry basic_geometry() { return {16, 14, 10, 15, FeatureFamilyLayout::kBasicBase}; }

GridGeometry blob_geometry() { return {40, 30, 4, 7, FeatureFamilyLayout::kBlobBase}; }

namespace {

bool cell_less(const GridCell& a, const GridCell& b) {
  if (a.color != b.color) return a.color < b.color;
  if (a.r != b.r) return a.r < b.r;
  return a.c < b.c;
}

}  // namespace

PresenceGrid::PresenceGrid(GridGeometry geometry, std::vector<GridCell> cells)
    : geometry_(geometry), cells_(std::move(cells)) {
  for (const auto& cell : cells_) {
    if (cell.color >= kNumColors || cell.c >= geometry_.cols || cell.r >= geometry_.rows)
      throw FeatureError("grid cell outside geometry");
  }
  std::sort(cells_.begin(), cells_.end(), cell_less);
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

std::span<const GridCell> PresenceGrid::occupied(int color) const {
  auto lo = std::lower_bound(cells_.begin(), cells_.end(), color,
                             [](const GridCell& cell, int k) { return cell.color < k; });
  auto hi = std::upper_bound(lo, cells_.end(), color, [](int k, const GridCell& cell) { return k < cell.color; });
  return {lo, hi};
}

bool PresenceGrid::contains(int color, int c, int r) const {
  auto row = occupied(color);
  return std::any_of(row.begin(), row.end(), [&](const GridCell& cell) { return cell.c == c && cell.r == r; });
}

PresenceGrid build_presence_grid(const MaskedFrame& frame, const GridGeometry& geometry) {
  if (geometry.cols * geometry.tile_w != frame.width() || geometry.rows * geometry.tile_h != frame.height())
    throw FeatureError("grid geometry does not tile a " + std::to_string(frame.width()) + "x" +
                       std::to_string(frame.height()) + " screen");
  const int blocks = geometry.blocks();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(blocks) * kNumColors, 0);
  std::vector<GridCell> cells;
  auto px = frame.cells();
  for (int y = 0; y < frame.height(); ++y) {
    const int r = y / geometry.tile_h;
    const Color* row = px.data() + static_cast<std::size_t>(y) * frame.width();
    for (int x = 0; x < frame.width(); ++x) {
      const Color k = row[x];
      if (k == MaskedFrame::kAbsent) continue;
      const int c = x / geometry.tile_w;
      auto& mark = seen[static_cast<std::size_t>(k) * blocks + r * geometry.cols + c];
      if (mark) continue;
      mark = 1;
      cells.push_back({k, static_cast<std::uint16_t>(c), static_cast<std::uint16_t>(r)});
    }
  }
  return PresenceGrid(geometry, std::move(cells));
}

FeatureId basic_feature_id(int c, int r, int k, const GridGeometry& geometry) {
  if (c < 0 || c >= geometry.cols || r < 0 || r >= geometry.rows || k < 0 || k >= kNumColors)
    throw FeatureError("primitive feature coordinates out of range");
  return geometry.id_base + (static_cast<FeatureId>(r) * geometry.cols + c) * kNumColors + k;
}

ActiveFeatureSet basic_features(const PresenceGrid& grid) {
  const auto& g = grid.geometry();
  std::vector<FeatureId> ids;
  ids.reserve(grid.size());
  for (const auto& cell : grid.cells())
    ids.push_back(g.id_base + (static_cast<FeatureId>(cell.r) * g.cols + cell.c) * kNumColors + cell.color);
  return ActiveFeatureSet(std::move(ids));
}

}  // namespace shallowrl
