#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace shallowrl {

using FeatureId = std::uint64_t;

class FeatureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sparse binary state representation: strictly increasing feature ids.
class ActiveFeatureSet {
 public:
  ActiveFeatureSet() = default;
  ActiveFeatureSet(std::initializer_list<FeatureId> ids) : ActiveFeatureSet(std::vector<FeatureId>(ids)) {}
  /// Sorts and deduplicates.
  explicit ActiveFeatureSet(std::vector<FeatureId> ids);

  /// Takes ownership of ids already known to be strictly increasing; throws otherwise.
  static ActiveFeatureSet from_sorted(std::vector<FeatureId> ids);

  std::span<const FeatureId> ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool contains(FeatureId id) const noexcept;
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }

  /// Appends a set whose ids all exceed this set's largest id.
  void append(const ActiveFeatureSet& later);

  friend bool operator==(const ActiveFeatureSet&, const ActiveFeatureSet&) = default;

 private:
  std::vector<FeatureId> ids_;
};

struct GridGeometry {
  int cols;
  int rows;
  int tile_w;
  int tile_h;
  FeatureId id_base;

  int blocks() const noexcept { return cols * rows; }
  /// Size of the primitive id space, cols * rows * 128.
  FeatureId span() const noexcept;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

GridGeometry basic_geometry();
GridGeometry blob_geometry();

/// One occupied (color, block) pair.
struct GridCell {
  std::uint8_t color;
  std::uint16_t c;
  std::uint16_t r;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// For each color, the set of blocks where it is present. Cells are kept
/// sorted by (color, r, c) and unique.
class PresenceGrid {
 public:
  explicit PresenceGrid(GridGeometry geometry) : geometry_(geometry) {}
  /// Validates, sorts and deduplicates the cells.
  PresenceGrid(GridGeometry geometry, std::vector<GridCell> cells);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  std::span<const GridCell> cells() const noexcept { return cells_; }
  bool empty() const noexcept { return cells_.empty(); }
  std::size_t size() const noexcept { return cells_.size(); }

  /// Occupied cells of one color, in (r, c) order.
  std::span<const GridCell> occupied(int color) const;
  bool contains(int color, int c, int r) const;

  friend bool operator==(const PresenceGrid&, const PresenceGrid&) = default;

 private:
  GridGeometry geometry_;
  std::vector<GridCell> cells_;
};

class MaskedFrame;

PresenceGrid build_presence_grid(const MaskedFrame& frame, const GridGeometry& geometry);

/// id_base + (r * cols + c) * 128 + k.
FeatureId basic_feature_id(int c, int r, int k, const GridGeometry& geometry);

/// Primitive (tile, color) presence features of a grid; Basic for the Basic
/// geometry, Blob for the blob geometry.
ActiveFeatureSet basic_features(const PresenceGrid& grid);

}  // namespace shallowrl
