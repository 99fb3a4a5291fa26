#include "shallowrl/blobs.hpp"

#include <algorithm>
#include <limits>

namespace shallowrl {

namespace {
constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();
}

BlobDetector::BlobDetector(int tolerance) : tolerance_(tolerance) {
  if (tolerance < 1) throw ScreenError("blob tolerance must be at least 1");
}

void BlobDetector::build_runs(const Frame& frame) {
  runs_.clear();
  row_start_.clear();
  const int w = frame.width();
  auto px = frame.pixels();
  for (int y = 0; y < frame.height(); ++y) {
    row_start_.push_back(static_cast<std::uint32_t>(runs_.size()));
    const Color* row = px.data() + static_cast<std::size_t>(y) * w;
    if (tolerance_ == 1) {
      // Adjacent pixels are one apart, which already exceeds s - 1 = 0.
      for (int x = 0; x < w; ++x) runs_.push_back({x, x, y, row[x]});
      continue;
    }
    int x = 0;
    while (x < w) {
      const Color c = row[x];
      int end = x + 1;
      while (end < w && row[end] == c) ++end;
      runs_.push_back({x, end - 1, y, c});
      x = end;
    }
  }
  row_start_.push_back(static_cast<std::uint32_t>(runs_.size()));
}

std::uint32_t BlobDetector::find(std::uint32_t i) {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void BlobDetector::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  // Keep the earliest run as root so blob order follows raster order.
  if (a < b)
    parent_[b] = a;
  else
    parent_[a] = b;
}

void BlobDetector::link_runs() {
  const int reach = tolerance_ - 1;
  parent_.resize(runs_.size());
  for (std::uint32_t i = 0; i < parent_.size(); ++i) parent_[i] = i;
  if (reach == 0) return;

  const int rows = static_cast<int>(row_start_.size()) - 1;
  for (int y = 0; y < rows; ++y) {
    for (std::uint32_t i = row_start_[y]; i < row_start_[y + 1]; ++i) {
      const Run& run = runs_[i];
      const int lo = run.x0 - reach;
      const int hi = run.x1 + reach;
      // Earlier runs in the same row: their x1 values increase left to right.
      for (std::uint32_t j = i; j-- > row_start_[y];) {
        if (runs_[j].x1 < lo) break;
        if (runs_[j].color == run.color) unite(i, j);
      }
      for (int py = std::max(0, y - reach); py < y; ++py) {
        auto first = runs_.begin() + row_start_[py];
        auto last = runs_.begin() + row_start_[py + 1];
        auto it = std::lower_bound(first, last, lo, [](const Run& r, int v) { return r.x1 < v; });
        for (; it != last && it->x0 <= hi; ++it) {
          if (it->color == run.color) unite(i, static_cast<std::uint32_t>(it - runs_.begin()));
        }
      }
    }
  }
}

void BlobDetector::collect() {
  blobs_.clear();
  run_blob_.assign(runs_.size(), kUnassigned);
  for (std::uint32_t i = 0; i < runs_.size(); ++i) {
    const std::uint32_t root = find(i);
    std::uint32_t& id = run_blob_[root];
    const Run& run = runs_[i];
    const auto len = static_cast<std::uint32_t>(run.x1 - run.x0 + 1);
    if (id == kUnassigned) {
      id = static_cast<std::uint32_t>(blobs_.size());
      blobs_.push_back({run.color, run.x0, run.x1, run.y, run.y, len});
    } else {
      Blob& b = blobs_[id];
      b.x_min = std::min(b.x_min, run.x0);
      b.x_max = std::max(b.x_max, run.x1);
      b.y_max = std::max(b.y_max, run.y);
      b.pixel_count += len;
    }
    run_blob_[i] = id;
  }
}

const std::vector<Blob>& BlobDetector::detect(const Frame& frame) {
  build_runs(frame);
  link_runs();
  collect();
  return blobs_;
}

BlobPartition BlobDetector::partition(const Frame& frame) {
  detect(frame);
  BlobPartition out;
  out.blobs = blobs_;
  out.labels.resize(frame.size());
  for (std::uint32_t i = 0; i < runs_.size(); ++i) {
    const Run& run = runs_[i];
    auto base = out.labels.begin() + static_cast<std::ptrdiff_t>(run.y) * frame.width();
    std::fill(base + run.x0, base + run.x1 + 1, run_blob_[i]);
  }
  return out;
}

std::vector<Blob> detect_blobs(const Frame& frame, int tolerance) {
  BlobDetector detector(tolerance);
  return detector.detect(frame);
}

std::pair<int, int> blob_center_block(const Blob& blob, const GridGeometry& geometry) {
  const int cx = (blob.x_min + blob.x_max) / 2;
  const int cy = (blob.y_min + blob.y_max) / 2;
  return {cx / geometry.tile_w, cy / geometry.tile_h};
}

PresenceGrid blob_presence_grid(const std::vector<Blob>& blobs, const GridGeometry& geometry) {
  std::vector<GridCell> cells;
  cells.reserve(blobs.size());
  for (const auto& b : blobs) {
    auto [c, r] = blob_center_block(b, geometry);
    cells.push_back({b.color, static_cast<std::uint16_t>(c), static_cast<std::uint16_t>(r)});
  }
  return PresenceGrid(geometry, std::move(cells));
}

}  // namespace shallowrl
