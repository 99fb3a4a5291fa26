#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shallowrl/features.hpp"
#include "shallowrl/screen.hpp"

namespace shallowrl {

inline constexpr int kDefaultBlobTolerance = 6;

/// Same-colored pixels connected under the tolerance rule, with their tight
/// bounding box (inclusive).
struct Blob {
  Color color;
  int x_min;
  int x_max;
  int y_min;
  int y_max;
  std::uint32_t pixel_count;

  friend bool operator==(const Blob&, const Blob&) = default;
};

/// Blobs in raster order of their first pixel, plus each pixel's blob index.
struct BlobPartition {
  std::vector<Blob> blobs;
  std::vector<std::uint32_t> labels;
};

/// Two same-colored pixels are linked when both fit in one s x s square
/// (|dx| <= s-1 and |dy| <= s-1); blobs are the connected components.
///
/// Pixels are grouped into horizontal runs of one color first, and runs are
/// merged with a union-find over the s-1 rows above. Scratch buffers are
/// reused between calls, so keep one detector per worker.
class BlobDetector {
 public:
  explicit BlobDetector(int tolerance = kDefaultBlobTolerance);

  int tolerance() const noexcept { return tolerance_; }

  const std::vector<Blob>& detect(const Frame& frame);
  BlobPartition partition(const Frame& frame);

 private:
  struct Run {
    int x0;
    int x1;
    int y;
    Color color;
  };

  void build_runs(const Frame& frame);
  void link_runs();
  std::uint32_t find(std::uint32_t i);
  void unite(std::uint32_t a, std::uint32_t b);
  void collect();

  int tolerance_;
  std::vector<Run> runs_;
  std::vector<std::uint32_t> row_start_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> run_blob_;
  std::vector<Blob> blobs_;
};

std::vector<Blob> detect_blobs(const Frame& frame, int tolerance = kDefaultBlobTolerance);

/// Block holding the floor-midpoint of the bounding box.
std::pair<int, int> blob_center_block(const Blob& blob, const GridGeometry& geometry);

/// Presence of blob centers per color over the blob geometry.
PresenceGrid blob_presence_grid(const std::vector<Blob>& blobs, const GridGeometry& geometry = blob_geometry());

}  // namespace shallowrl
